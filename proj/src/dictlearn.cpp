#include "deepboost/dictlearn.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "deepboost/error.hpp"
#include "deepboost/kernels.hpp"

namespace deepboost {

namespace {

std::vector<const Matrix*> pixel_planes(const ImageRefs& images) {
    std::vector<const Matrix*> out;
    out.reserve(images.size());
    for (const Image* img : images) out.push_back(&img->pixels());
    return out;
}

std::vector<FeatureMapStack> compute_stacks(const ImageRefs& images, const AnalysisDictionary& dict, bool normalize) {
    std::vector<FeatureMapStack> stacks(images.size());
    const int n = static_cast<int>(images.size());
#pragma omp parallel for schedule(dynamic, 4)
    for (int i = 0; i < n; ++i) {
        stacks[i] = compute_stack(*images[i], dict, normalize);
        stacks[i].source_image = i;
        stacks[i].drop_maps();
    }
    return stacks;
}

std::vector<FeatureVector> histograms(const std::vector<FeatureMapStack>& stacks, const FeatureLayout& layout) {
    std::vector<FeatureVector> rows(stacks.size());
    const int n = static_cast<int>(stacks.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) rows[i] = pyramid_histogram(stacks[i], layout);
    return rows;
}

std::vector<TemplatePlacement> find_placements(const Image& reference, const AnalysisDictionary& dict,
                                               const std::vector<int>& selected_ids, bool normalize) {
    const FeatureMapStack stack = compute_stack(reference, dict, normalize);
    std::vector<TemplatePlacement> out;
    for (int id : selected_ids) {
        const int m = dict.index_of(id);
        const ResponseIndexEntry* best = nullptr;
        for (const auto& e : stack.index)
            if (e.filter == m && (!best || e.magnitude > best->magnitude)) best = &e;
        if (best) {
            out.push_back(TemplatePlacement{id, best->w, best->h});
            continue;
        }
        // The filter never won on this image: fall back to its raw argmax.
        const ResponseMap raw = convolve_valid(reference, dict.filters[m].kernel);
        int by = 0, bx = 0;
        for (int y = 0; y < raw.rows(); ++y)
            for (int x = 0; x < raw.cols(); ++x)
                if (std::abs(raw(y, x)) > std::abs(raw(by, bx))) {
                    by = y;
                    bx = x;
                }
        out.push_back(TemplatePlacement{id, bx, by});
    }
    return out;
}

}  // namespace

void JointConfig::validate() const {
    if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
    if (!(eta > 0.0)) throw ConfigError("eta must be > 0");
    if (grad_steps < 0) throw ConfigError("grad_steps must be >= 0");
    if (outer_iters < 1) throw ConfigError("outer_iters must be >= 1");
    if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("tol must lie in (0, 1)");
    if (rounds < 0) throw ConfigError("rounds must be >= 0");
    if (bins < 1) throw ConfigError("bins must be >= 1");
    if (backtrack_halvings < 0) throw ConfigError("backtrack_halvings must be >= 0");
}

FeatureVector LayerModel::features(const Image& image) const {
    const FeatureMapStack stack = compute_stack(image, dictionary, normalize_responses);
    return pyramid_histogram(stack, layout);
}

double reg_loss(const AnalysisDictionary& dict, const ImageRefs& negatives) {
    double total = 0.0;
    for (const Image* img : negatives)
        for (const auto& f : dict.filters) total += convolve_valid(*img, f.kernel).squared_norm();
    return total;
}

std::vector<Matrix> reg_gradient(const AnalysisDictionary& dict, const std::set<int>& selected,
                                 const ImageRefs& negatives) {
    std::vector<Matrix> grads;
    grads.reserve(dict.size());
    for (const auto& f : dict.filters) {
        Matrix g(f.kernel.rows(), f.kernel.cols());
        if (selected.count(f.id)) {
            for (const Image* img : negatives) {
                const ResponseMap r = convolve_valid(*img, f.kernel);
                g += kernels::correlate_adjoint(img->pixels(), r);
            }
            g *= 2.0;
        }
        grads.push_back(std::move(g));
    }
    return grads;
}

NegativeGram::NegativeGram(const ImageRefs& negatives, int k) : k_(k) {
    const auto planes = pixel_planes(negatives);
    gram_ = kernels::patch_gram(planes, k);
}

double NegativeGram::filter_loss(const Matrix& kernel) const {
    const auto g = kernel.values();
    const int n = k_ * k_;
    double s = 0.0;
    for (int a = 0; a < n; ++a) {
        double row = 0.0;
        for (int b = 0; b < n; ++b) row += gram_(a, b) * g[b];
        s += g[a] * row;
    }
    return s;
}

Matrix NegativeGram::filter_gradient(const Matrix& kernel) const {
    const auto g = kernel.values();
    const int n = k_ * k_;
    Matrix out(k_, k_);
    auto o = out.values();
    for (int a = 0; a < n; ++a) {
        double row = 0.0;
        for (int b = 0; b < n; ++b) row += gram_(a, b) * g[b];
        o[a] = 2.0 * row;
    }
    return out;
}

double NegativeGram::loss(const AnalysisDictionary& dict) const {
    double s = 0.0;
    for (const auto& f : dict.filters) s += filter_loss(f.kernel);
    return s;
}

FilterUpdate update_filters(const AnalysisDictionary& dict, const std::set<int>& selected, const ImageRefs& negatives,
                            const JointConfig& config) {
    if (dict.filters.empty()) throw DataError("cannot update an empty dictionary");
    return update_filters(dict, selected, NegativeGram(negatives, dict.filters.front().kernel.rows()), config);
}

FilterUpdate update_filters(const AnalysisDictionary& dict, const std::set<int>& selected, const NegativeGram& gram,
                            const JointConfig& config) {
    if (!(config.eta > 0.0)) throw ConfigError("eta must be > 0");
    FilterUpdate out;
    out.dictionary = dict;
    out.eta = config.eta;
    out.loss_before = out.loss_after = gram.loss(dict);

    std::vector<std::size_t> touched;
    for (std::size_t i = 0; i < dict.filters.size(); ++i)
        if (selected.count(dict.filters[i].id)) touched.push_back(i);
    if (config.lambda == 0.0 || touched.empty()) return out;

    // Filters outside `touched` never change, so only their share of the loss moves.
    auto partial_loss = [&](const std::vector<Matrix>& ks) {
        double s = 0.0;
        for (const auto& k : ks) s += gram.filter_loss(k);
        return s;
    };
    std::vector<Matrix> current;
    for (std::size_t i : touched) current.push_back(dict.filters[i].kernel);
    double current_loss = partial_loss(current);
    const double fixed_loss = out.loss_before - current_loss;

    double eta = config.eta;
    for (int step = 0; step < config.grad_steps; ++step) {
        std::vector<Matrix> grads;
        double grad_norm = 0.0;
        for (const auto& k : current) {
            grads.push_back(gram.filter_gradient(k));
            grad_norm += grads.back().squared_norm();
        }
        if (grad_norm == 0.0) break;
        bool accepted = false;
        for (int halving = 0; halving <= config.backtrack_halvings; ++halving) {
            std::vector<Matrix> trial = current;
            for (std::size_t t = 0; t < trial.size(); ++t) trial[t] -= grads[t] * (eta * config.lambda);
            const double trial_loss = partial_loss(trial);
            if (trial_loss < current_loss) {
                current = std::move(trial);
                current_loss = trial_loss;
                accepted = true;
                break;
            }
            eta *= 0.5;
        }
        if (!accepted) {
            FilterUpdate stalled;
            stalled.dictionary = dict;
            stalled.stalled = true;
            stalled.loss_before = stalled.loss_after = out.loss_before;
            stalled.eta = eta;
            stalled.steps = step;
            return stalled;
        }
        ++out.steps;
    }
    for (std::size_t t = 0; t < touched.size(); ++t) out.dictionary.filters[touched[t]].kernel = current[t];
    out.loss_after = fixed_loss + current_loss;
    out.eta = eta;
    return out;
}

ObjectiveRecord objective_terms(std::span<const double> scores, std::span<const double> y, double reg, double lambda) {
    ObjectiveRecord r;
    r.empirical = 0.5 * exponential_loss(scores, y);
    r.regularizer = reg;
    r.total = r.empirical + lambda * reg;
    return r;
}

double objective(const AnalysisDictionary& dict, const StrongClassifier& classifier, const FeatureLayout& layout,
                 const ImageRefs& positives, const ImageRefs& negatives, double lambda, bool normalize) {
    std::vector<double> scores;
    std::vector<double> y;
    for (const Image* img : positives) {
        scores.push_back(classifier.score(pyramid_histogram(compute_stack(*img, dict, normalize), layout)));
        y.push_back(1.0);
    }
    for (const Image* img : negatives) {
        scores.push_back(classifier.score(pyramid_histogram(compute_stack(*img, dict, normalize), layout)));
        y.push_back(-1.0);
    }
    const double reg = lambda == 0.0 ? 0.0 : reg_loss(dict, negatives);
    return objective_terms(scores, y, reg, lambda).total;
}

LayerModel joint_train_layer(const ImageRefs& positives, const ImageRefs& negatives,
                             const AnalysisDictionary& dictionary, const JointConfig& config) {
    config.validate();
    if (positives.empty() || negatives.empty()) throw DataError("joint training needs positive and negative images");
    dictionary.validate();

    ImageRefs all = positives;
    all.insert(all.end(), negatives.begin(), negatives.end());
    std::vector<double> y(positives.size(), 1.0);
    y.resize(all.size(), -1.0);

    const NegativeGram gram(negatives, dictionary.filters.front().kernel.rows());
    AnalysisDictionary dict = dictionary;
    LayerModel model;
    model.normalize_responses = config.normalize_responses;
    double previous_total = std::numeric_limits<double>::quiet_NaN();

    for (int iter = 1; iter <= config.outer_iters; ++iter) {
        const auto stacks = compute_stacks(all, dict, config.normalize_responses);
        FeatureLayout layout{static_cast<int>(dict.size()), config.bins, fit_bins(stacks, config.bins)};
        const auto rows = histograms(stacks, layout);

        BoostOptions bopts;
        bopts.rounds = config.rounds;
        BoostResult boost = train_strong(rows, y, bopts);

        ObjectiveRecord rec = objective_terms(boost.train_scores, y, gram.loss(dict), config.lambda);
        rec.iteration = iter;
        rec.boosting_rounds = static_cast<int>(boost.rounds.size());
        rec.train_error = boost.rounds.empty() ? 1.0 : boost.rounds.back().train_error;
        model.trace.push_back(rec);

        const auto selected_pos = selected_filters(boost.classifier, layout);
        model.dictionary = dict;
        model.classifier = std::move(boost.classifier);
        model.layout = std::move(layout);
        model.rounds = std::move(boost.rounds);
        model.selected_ids.clear();
        for (int m : selected_pos) model.selected_ids.push_back(dict.filters[m].id);

        const bool converged = iter > 1 && (previous_total - rec.total) < config.tol * std::abs(previous_total);
        previous_total = rec.total;
        if (converged || iter == config.outer_iters) break;

        const std::set<int> selected(model.selected_ids.begin(), model.selected_ids.end());
        FilterUpdate upd = update_filters(dict, selected, gram, config);
        if (upd.stalled) {
            model.stalled = true;
            break;
        }
        dict = std::move(upd.dictionary);
    }
    model.placements = find_placements(*positives.front(), model.dictionary, model.selected_ids,
                                       model.normalize_responses);
    return model;
}

void write_trace_csv(const std::filesystem::path& file, std::span<const ObjectiveRecord> trace) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out.precision(17);
    out << "iteration,empirical,regularizer,total,boosting_rounds,train_error\n";
    for (const auto& r : trace)
        out << r.iteration << ',' << r.empirical << ',' << r.regularizer << ',' << r.total << ','
            << r.boosting_rounds << ',' << r.train_error << '\n';
}

}  // namespace deepboost
