#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "deepboost/dictlearn.hpp"
#include "deepboost/filters.hpp"
#include "deepboost/imagekit.hpp"

namespace deepboost {

struct DeepBoostConfig {
    int layers = 2;
    std::vector<int> rounds = {50};  ///< boosting rounds per layer; the last entry repeats
    JointConfig joint;
    GaborParams gabor;
    double compression_threshold = kDefaultCompressionThreshold;
    bool compress = true;
    ComposeMode compose_mode = ComposeMode::normalized;
    std::uint64_t seed = 7;
    int target_size = 32;

    int rounds_for_layer(int layer) const;
    void validate() const;
    bool operator==(const DeepBoostConfig&) const;
};

struct ClassModel {
    int class_id = 0;
    std::vector<LayerModel> layers;

    /// Sum of the first `max_layers` layer scores (all layers when negative).
    double score(const Image& image, int max_layers = -1) const;
    std::vector<double> layer_scores(const Image& image) const;
};

struct DeepBoostModel {
    static constexpr std::uint32_t kFormatVersion = 1;

    DeepBoostConfig config;
    std::vector<std::string> class_names;
    std::vector<ClassModel> class_models;
    std::uint32_t format_version = kFormatVersion;

    int num_classes() const { return static_cast<int>(class_models.size()); }
};

/// Per-layer wall time and dictionary sizes, for reports and benchmarks.
struct LayerTiming {
    int class_id = 0;
    int layer = 0;
    std::size_t dictionary_size = 0;
    std::size_t composed_before_compression = 0;
    double seconds = 0.0;
};

struct TrainingLog {
    std::vector<LayerTiming> layers;
    std::vector<std::string> warnings;
};

/// One class against the rest: Gabor bank at layer 1, joint training per
/// layer, then composition of the selected filters (and compression) to build
/// the next layer's dictionary. Stops early when fewer than two filters are
/// selected.
ClassModel train_class_model(const LabeledDataset& dataset, int class_id, const DeepBoostConfig& config,
                             TrainingLog* log = nullptr);

/// K independent class models; class k uses seed + k for compression.
DeepBoostModel train_multiclass(const LabeledDataset& dataset, const DeepBoostConfig& config,
                                TrainingLog* log = nullptr);

struct Prediction {
    int label = 0;
    std::vector<double> scores;
};

/// Argmax over class scores, ties to the lowest class index.
Prediction predict(const DeepBoostModel& model, const Image& image);

}  // namespace deepboost
