#include "deepboost/deepmodel.hpp"

#include <chrono>
#include <exception>
#include <iostream>
#include <random>
#include <string>

#include "deepboost/error.hpp"
#include "deepboost/kernels.hpp"

namespace deepboost {

int DeepBoostConfig::rounds_for_layer(int layer) const {
    if (rounds.empty()) throw ConfigError("no boosting rounds configured");
    const std::size_t i = static_cast<std::size_t>(layer - 1);
    return i < rounds.size() ? rounds[i] : rounds.back();
}

void DeepBoostConfig::validate() const {
    if (layers < 1) throw ConfigError("layers must be >= 1");
    if (rounds.empty()) throw ConfigError("rounds must list at least one value");
    for (int r : rounds)
        if (r < 1) throw ConfigError("rounds per layer must be >= 1");
    if (compression_threshold < 0.0) throw ConfigError("compression threshold must be >= 0");
    if (target_size < gabor.size) throw ConfigError("target_size must be at least the filter size");
    if (gabor.orientations < 1) throw ConfigError("orientations must be >= 1");
    joint.validate();
}

bool DeepBoostConfig::operator==(const DeepBoostConfig& o) const {
    return layers == o.layers && rounds == o.rounds && joint.lambda == o.joint.lambda && joint.eta == o.joint.eta &&
           joint.grad_steps == o.joint.grad_steps && joint.outer_iters == o.joint.outer_iters &&
           joint.tol == o.joint.tol && joint.bins == o.joint.bins &&
           joint.backtrack_halvings == o.joint.backtrack_halvings && gabor.orientations == o.gabor.orientations &&
           gabor.scales == o.gabor.scales && gabor.size == o.gabor.size && gabor.wavelength == o.gabor.wavelength &&
           gabor.sigma == o.gabor.sigma && compression_threshold == o.compression_threshold &&
           compress == o.compress && compose_mode == o.compose_mode && seed == o.seed &&
           target_size == o.target_size;
}

double ClassModel::score(const Image& image, int max_layers) const {
    const std::size_t n = max_layers < 0 ? layers.size() : std::min(layers.size(), static_cast<std::size_t>(max_layers));
    double s = 0.0;
    for (std::size_t l = 0; l < n; ++l) s += layers[l].score(image);
    return s;
}

std::vector<double> ClassModel::layer_scores(const Image& image) const {
    std::vector<double> out;
    for (const auto& l : layers) out.push_back(l.score(image));
    return out;
}

ClassModel train_class_model(const LabeledDataset& dataset, int class_id, const DeepBoostConfig& config,
                             TrainingLog* log) {
    config.validate();
    dataset.validate();
    if (class_id < 0 || class_id >= dataset.num_classes())
        throw DataError("class " + std::to_string(class_id) + " is not in the dataset");
    ImageRefs positives, negatives;
    for (std::size_t i = 0; i < dataset.size(); ++i)
        (dataset.labels[i] == class_id ? positives : negatives).push_back(&dataset.images[i]);
    if (positives.empty()) throw DataError("class '" + dataset.class_names[class_id] + "' has no images");
    if (negatives.empty()) throw DataError("class '" + dataset.class_names[class_id] + "' has no negatives");

    std::mt19937_64 rng(config.seed + static_cast<std::uint64_t>(class_id));
    ClassModel model;
    model.class_id = class_id;
    AnalysisDictionary dict = make_gabor_bank(config.gabor);
    dict.class_id = class_id;
    std::size_t composed_count = 0;

    for (int layer = 1; layer <= config.layers; ++layer) {
        JointConfig jc = config.joint;
        jc.normalize_responses = layer == 1;
        jc.rounds = config.rounds_for_layer(layer);
        const auto t0 = std::chrono::steady_clock::now();
        LayerModel lm = joint_train_layer(positives, negatives, dict, jc);
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (log) log->layers.push_back(LayerTiming{class_id, layer, dict.size(), composed_count, secs});
        model.layers.push_back(std::move(lm));
        if (layer == config.layers) break;

        const LayerModel& trained = model.layers.back();
        if (trained.selected_ids.size() < 2) {
            if (log)
                log->warnings.push_back("class '" + dataset.class_names[class_id] + "': only " +
                                        std::to_string(trained.selected_ids.size()) +
                                        " selected filter(s) at layer " + std::to_string(layer) +
                                        ", model truncated");
            break;
        }
        std::vector<Filter> selected;
        for (int id : trained.selected_ids) selected.push_back(trained.dictionary.filters[trained.dictionary.index_of(id)]);
        std::vector<Filter> next = compose_all(selected, config.compose_mode);
        composed_count = next.size();
        if (config.compress) next = compress(std::move(next), config.compression_threshold, rng);
        dict = AnalysisDictionary{std::move(next), layer + 1, class_id};
    }
    return model;
}

DeepBoostModel train_multiclass(const LabeledDataset& dataset, const DeepBoostConfig& config, TrainingLog* log) {
    dataset.validate_for_multiclass();
    config.validate();
    const int k = dataset.num_classes();
    DeepBoostModel model;
    model.config = config;
    model.class_names = dataset.class_names;
    model.class_models.resize(k);
    std::vector<TrainingLog> logs(k);
    std::vector<std::string> errors(k);

    // Whole classes run in parallel only when there are enough of them to
    // occupy every thread; otherwise the per-class kernels parallelize.
    const bool outer = kernels::max_threads() > 1 && k >= kernels::max_threads();
#pragma omp parallel for schedule(dynamic, 1) if (outer)
    for (int c = 0; c < k; ++c) {
        try {
            model.class_models[c] = train_class_model(dataset, c, config, &logs[c]);
        } catch (const std::exception& e) {
            errors[c] = e.what();
        }
    }
    for (int c = 0; c < k; ++c)
        if (!errors[c].empty())
            throw TrainingError("training class '" + dataset.class_names[c] + "' failed: " + errors[c]);
    if (log)
        for (auto& l : logs) {
            log->layers.insert(log->layers.end(), l.layers.begin(), l.layers.end());
            log->warnings.insert(log->warnings.end(), l.warnings.begin(), l.warnings.end());
        }
    return model;
}

Prediction predict(const DeepBoostModel& model, const Image& image) {
    if (model.class_models.empty()) throw DataError("model has no classes");
    if (image.width() != model.config.target_size || image.height() != model.config.target_size)
        throw DimensionError("image is " + std::to_string(image.width()) + "x" + std::to_string(image.height()) +
                             " but the model expects " + std::to_string(model.config.target_size) + "x" +
                             std::to_string(model.config.target_size));
    Prediction p;
    p.scores.reserve(model.class_models.size());
    for (const auto& cm : model.class_models) p.scores.push_back(cm.score(image));
    for (std::size_t c = 1; c < p.scores.size(); ++c)
        if (p.scores[c] > p.scores[p.label]) p.label = static_cast<int>(c);
    return p;
}

}  // namespace deepboost
