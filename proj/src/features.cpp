#include "deepboost/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <string>

#include "deepboost/boosting.hpp"
#include "deepboost/error.hpp"
#include "deepboost/kernels.hpp"

namespace deepboost {

FeatureMapStack max_activate(std::span<const ResponseMap> responses) {
    if (responses.empty()) throw DataError("max_activate needs at least one response map");
    const int rows = responses.front().rows();
    const int cols = responses.front().cols();
    for (const auto& r : responses)
        if (r.rows() != rows || r.cols() != cols) throw DimensionError("response maps differ in size");

    FeatureMapStack stack;
    stack.rows = rows;
    stack.cols = cols;
    stack.filters = static_cast<int>(responses.size());
    stack.maps.assign(responses.size(), Matrix(rows, cols));
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) {
            int best = 0;
            double best_mag = std::abs(responses[0](y, x));
            for (std::size_t m = 1; m < responses.size(); ++m) {
                const double mag = std::abs(responses[m](y, x));
                if (mag > best_mag) {
                    best_mag = mag;
                    best = static_cast<int>(m);
                }
            }
            if (best_mag > 0.0) {
                stack.maps[best](y, x) = best_mag;
                stack.index.push_back(ResponseIndexEntry{true, x, y, best, best_mag});
            }
        }
    return stack;
}

FeatureMapStack compute_stack(const Image& image, const AnalysisDictionary& dict, bool normalize) {
    if (normalize) {
        auto nr = normalized_responses(image, dict);
        return max_activate(nr.maps);
    }
    const auto ks = dict.kernels();
    const auto maps = kernels::correlate_bank(image.pixels(), ks);
    return max_activate(maps);
}

std::size_t FeatureLayout::encode(int filter, int block, int bin) const {
    if (filter < 0 || filter >= filters || block < 0 || block >= kPyramidBlocks || bin < 0 || bin >= bins)
        throw DimensionError("feature coordinate out of range");
    return (static_cast<std::size_t>(filter) * kPyramidBlocks + block) * bins + bin;
}

FeatureCoord FeatureLayout::decode(std::size_t d) const {
    if (d >= dim()) throw DimensionError("feature index " + std::to_string(d) + " >= " + std::to_string(dim()));
    const std::size_t per_filter = static_cast<std::size_t>(kPyramidBlocks) * bins;
    const std::size_t rem = d % per_filter;
    return FeatureCoord{static_cast<int>(d / per_filter), static_cast<int>(rem / bins), static_cast<int>(rem % bins)};
}

int FeatureLayout::bin_of(double magnitude, bool* clamped) const {
    if (bin_edges.size() != static_cast<std::size_t>(bins) + 1) throw DataError("feature layout has no bin edges");
    const double top = bin_edges.back();
    if (clamped) *clamped = magnitude > top;
    if (magnitude >= top) return bins - 1;
    const int b = static_cast<int>(std::floor(magnitude / top * bins));
    return std::clamp(b, 0, bins - 1);
}

double FeatureVector::at(std::size_t d) const {
    if (d >= dim) throw DimensionError("feature index " + std::to_string(d) + " >= " + std::to_string(dim));
    auto it = std::lower_bound(indices.begin(), indices.end(), static_cast<std::uint32_t>(d));
    if (it == indices.end() || *it != d) return 0.0;
    return values[static_cast<std::size_t>(it - indices.begin())];
}

std::vector<double> FeatureVector::dense() const {
    std::vector<double> out(dim, 0.0);
    for (std::size_t i = 0; i < indices.size(); ++i) out[indices[i]] = values[i];
    return out;
}

int pyramid_block(int level, int y, int x, int rows, int cols) {
    static constexpr int kOffset[3] = {0, 1, 5};
    const int n = 1 << level;
    const int bh = std::max(1, rows / n);
    const int bw = std::max(1, cols / n);
    const int by = std::min(y / bh, n - 1);
    const int bx = std::min(x / bw, n - 1);
    return kOffset[level] + by * n + bx;
}

FeatureVector pyramid_histogram(const FeatureMapStack& stack, const FeatureLayout& layout, std::size_t* clamp_count) {
    const int n_maps = stack.maps.empty() ? stack.filters : static_cast<int>(stack.maps.size());
    if (n_maps != layout.filters)
        throw DimensionError("stack has " + std::to_string(n_maps) + " maps, layout expects " +
                             std::to_string(layout.filters));
    const int rows = stack.maps.empty() ? stack.rows : stack.maps.front().rows();
    const int cols = stack.maps.empty() ? stack.cols : stack.maps.front().cols();
    std::map<std::uint32_t, float> counts;
    std::size_t clamps = 0;
    auto add = [&](int m, int y, int x, double v) {
        bool clamped = false;
        const int bin = layout.bin_of(v, &clamped);
        if (clamped) ++clamps;
        for (int level = 0; level < 3; ++level)
            counts[static_cast<std::uint32_t>(layout.encode(m, pyramid_block(level, y, x, rows, cols), bin))] += 1.0f;
    };
    if (stack.maps.empty()) {
        for (const auto& e : stack.index)
            if (e.activated && e.magnitude > 0.0) add(e.filter, e.h, e.w, e.magnitude);
    } else {
        for (int m = 0; m < layout.filters; ++m) {
            const auto& map = stack.maps[m];
            if (map.rows() != rows || map.cols() != cols) throw DimensionError("stack maps differ in size");
            for (int y = 0; y < rows; ++y)
                for (int x = 0; x < cols; ++x)
                    if (map(y, x) != 0.0) add(m, y, x, map(y, x));
        }
    }
    if (clamp_count) *clamp_count += clamps;
    FeatureVector fv;
    fv.dim = layout.dim();
    fv.indices.reserve(counts.size());
    fv.values.reserve(counts.size());
    for (const auto& [d, c] : counts) {
        fv.indices.push_back(d);
        fv.values.push_back(c);
    }
    return fv;
}

std::vector<double> fit_bins(std::span<const FeatureMapStack> stacks, int bins) {
    if (bins < 1) throw ConfigError("histogram needs at least one bin");
    std::vector<double> mags;
    for (const auto& s : stacks)
        for (const auto& e : s.index)
            if (e.magnitude > 0.0) mags.push_back(e.magnitude);
    if (mags.empty()) throw DataError("no activated responses to fit histogram bins");
    std::sort(mags.begin(), mags.end());
    const double pos = 0.99 * static_cast<double>(mags.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, mags.size() - 1);
    const double q = mags[lo] + (pos - static_cast<double>(lo)) * (mags[hi] - mags[lo]);
    std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
    for (int i = 0; i <= bins; ++i) edges[i] = q * i / bins;
    return edges;
}

std::set<int> selected_filters(const StrongClassifier& classifier, const FeatureLayout& layout) {
    std::set<int> out;
    for (const auto& s : classifier.stumps)
        if (s.a != 0.0) out.insert(layout.decode(s.dim).filter);
    return out;
}

void write_feature_table(const std::filesystem::path& file, std::span<const FeatureVector> rows,
                         std::span<const int> labels) {
    if (rows.size() != labels.size()) throw DimensionError("feature table rows and labels differ in length");
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    const std::size_t dim = rows.empty() ? 0 : rows.front().dim;
    out << "label";
    for (std::size_t d = 0; d < dim; ++d) out << "\tf" << d;
    out << "\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out << labels[i];
        const auto dense = rows[i].dense();
        for (double v : dense) out << "\t" << v;
        out << "\n";
    }
}

}  // namespace deepboost
