#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "deepboost/imagekit.hpp"

namespace deepboost {

struct SynthOptions {
    int n_per_class = 100;
    std::uint64_t seed = 7;
    int size = 32;
    double noise_sigma = 0.05;
    /// Fraction of images (in every class) overlaid with a diagonal stripe
    /// texture that carries no label information.
    double distractor_fraction = 0.0;
};

/// Two classes: "horizontal" (bars along x) and "vertical" (bars along y),
/// 2 to 4 bars of random position, thickness and contrast, plus Gaussian noise.
LabeledDataset synth_bars(const SynthOptions& opts);

/// Dispatches on generator name ("synth-bars", "synth-bars-distract");
/// throws ConfigError for unknown names.
LabeledDataset make_synthetic(const std::string& name, const SynthOptions& opts);

/// Writes `<root>/<class>/<index>.png` for every image.
void write_dataset_dir(const LabeledDataset& ds, const std::filesystem::path& root);

}  // namespace deepboost
