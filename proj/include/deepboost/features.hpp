#pragma once

#include <cstdint>
#include <filesystem>
#include <set>
#include <span>
#include <vector>

#include "deepboost/filters.hpp"
#include "deepboost/imagekit.hpp"

namespace deepboost {

struct StrongClassifier;

inline constexpr int kPyramidBlocks = 21;  // 1 + 2x2 + 4x4
inline constexpr int kDefaultBins = 50;

/// One winner of the per-pixel competition: (w, h) on the valid lattice and
/// the index of the filter that won there.
struct ResponseIndexEntry {
    bool activated = true;
    int w = 0;
    int h = 0;
    int filter = 0;  ///< position in the dictionary
    double magnitude = 0.0;
};

/// Post-activation maps: at each pixel at most one map is nonzero. The index
/// lists every winner, so `maps` may be released once activation is done;
/// histogramming and bin fitting then work from the index alone.
struct FeatureMapStack {
    std::vector<ResponseMap> maps;
    std::vector<ResponseIndexEntry> index;
    int rows = 0;  ///< valid-lattice height
    int cols = 0;  ///< valid-lattice width
    int filters = 0;
    int source_image = -1;

    void drop_maps() { maps.clear(); maps.shrink_to_fit(); }
};

/// Per pixel, the map with the largest |response| keeps that magnitude and
/// all others are zeroed. Ties go to the lowest filter index; pixels where
/// every response is zero activate nothing.
FeatureMapStack max_activate(std::span<const ResponseMap> responses);

/// Responses of `dict` on `image` (normalized when `normalize`), then max_activate.
FeatureMapStack compute_stack(const Image& image, const AnalysisDictionary& dict, bool normalize);

struct FeatureCoord {
    int filter = 0;
    int block = 0;
    int bin = 0;
    bool operator==(const FeatureCoord&) const = default;
};

/// Filter-major, then pyramid block, then bin.
struct FeatureLayout {
    int filters = 0;
    int bins = kDefaultBins;
    std::vector<double> bin_edges;  ///< bins + 1 equal-width edges starting at 0

    std::size_t dim() const { return static_cast<std::size_t>(kPyramidBlocks) * bins * filters; }
    std::size_t encode(int filter, int block, int bin) const;
    FeatureCoord decode(std::size_t d) const;
    int bin_of(double magnitude, bool* clamped = nullptr) const;
};

/// Sparse nonnegative feature vector of dimension `dim`; indices ascending.
struct FeatureVector {
    std::size_t dim = 0;
    std::vector<std::uint32_t> indices;
    std::vector<float> values;

    double at(std::size_t d) const;
    std::vector<double> dense() const;
    bool operator==(const FeatureVector&) const = default;
};

/// Three-level spatial pyramid (1x1, 2x2, 4x4 blocks, remainders going to the
/// last row/column block) of per-filter histograms of activated magnitudes.
/// Magnitudes above the last edge land in the last bin and are tallied in
/// `clamp_count` when provided.
FeatureVector pyramid_histogram(const FeatureMapStack& stack, const FeatureLayout& layout,
                                std::size_t* clamp_count = nullptr);

/// Equal-width edges over [0, q] with q the 99th percentile (linear
/// interpolation) of every activated magnitude in the stacks.
std::vector<double> fit_bins(std::span<const FeatureMapStack> stacks, int bins = kDefaultBins);

/// Pyramid block index for a lattice position at a given level (0, 1, 2).
int pyramid_block(int level, int y, int x, int rows, int cols);

/// Dictionary positions of every filter whose features a stump uses. Constant
/// stumps (a = 0) use no feature and are skipped.
std::set<int> selected_filters(const StrongClassifier& classifier, const FeatureLayout& layout);

/// Dense rows, one per image, with the label in the first column.
void write_feature_table(const std::filesystem::path& file, std::span<const FeatureVector> rows,
                         std::span<const int> labels);

}  // namespace deepboost
