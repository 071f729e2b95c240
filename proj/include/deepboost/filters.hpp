#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include "deepboost/imagekit.hpp"
#include "deepboost/matrix.hpp"

namespace deepboost {

/// Every filter in every layer has this support; composition is elementwise.
inline constexpr int kFilterSize = 5;
inline constexpr double kDefaultCompressionThreshold = 0.7;

struct Filter {
    Matrix kernel;
    int id = 0;
    int layer = 1;
    std::optional<std::pair<int, int>> lineage;  ///< parent ids in the previous layer
};

/// Ordered bank of filters for one class at one layer.
struct AnalysisDictionary {
    std::vector<Filter> filters;
    int layer = 1;
    int class_id = 0;

    std::size_t size() const { return filters.size(); }
    std::vector<Matrix> kernels() const;
    /// Index of the filter with this id, or -1.
    int index_of(int id) const;
    /// Throws DataError when filters disagree on size or layer, ids repeat, or the bank is empty.
    void validate() const;
};

struct GaborParams {
    int orientations = 16;
    int scales = 1;
    int size = kFilterSize;
    double wavelength = 4.0;  ///< carrier period in pixels
    double sigma = 2.0;       ///< Gaussian envelope, pixels
};

/// Orientation a has angle a*pi/A measured as the direction of the carrier
/// stripes, so a = 0 responds to horizontal structure. Kernels are zero-mean
/// with unit L2 norm.
AnalysisDictionary make_gabor_bank(const GaborParams& params = {});

struct NormalizedResponses {
    std::vector<ResponseMap> maps;  ///< sqrt(|<I,g>|^2 / energy), one per filter
    double energy = 0.0;            ///< mean squared raw response over filters and valid positions
    bool degenerate = false;        ///< energy vanished; every map is zero
};

/// Raw responses of each filter, then each magnitude divided by the RMS
/// response of the whole bank over the valid lattice.
NormalizedResponses normalized_responses(const Image& image, const AnalysisDictionary& bank);

double sigmoid(double x);

enum class ComposeMode {
    normalized,  ///< sigmoid(g_i + g_j), then zero-mean and unit L2 norm
    raw,         ///< sigmoid(g_i + g_j) only
};

/// Next-layer filter from two same-layer filters. The result has id `new_id`,
/// layer + 1 and lineage (min id, max id).
Filter compose(const Filter& a, const Filter& b, int new_id = 0, ComposeMode mode = ComposeMode::normalized);

/// All unordered pairs (i < j in input order), ids numbered from 0.
std::vector<Filter> compose_all(std::span<const Filter> optimized, ComposeMode mode = ComposeMode::normalized);

/// Drops one filter (chosen by `rng`) from every pair whose kernel distance is
/// below `threshold`, scanning pairs in ascending id order. Survivors keep
/// their id order.
std::vector<Filter> compress(std::vector<Filter> filters, double threshold, std::mt19937_64& rng);

/// Symmetric matrix of pairwise kernel L2 distances.
Matrix distance_matrix(std::span<const Filter> filters);

}  // namespace deepboost
