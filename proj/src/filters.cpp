#include "deepboost/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

#include "deepboost/error.hpp"
#include "deepboost/kernels.hpp"

namespace deepboost {

namespace {

void center_and_normalize(Matrix& k) {
    const double mean = k.mean();
    for (double& v : k.values()) v -= mean;
    const double norm = std::sqrt(k.squared_norm());
    if (norm > 0.0) k *= 1.0 / norm;
}

}  // namespace

std::vector<Matrix> AnalysisDictionary::kernels() const {
    std::vector<Matrix> out;
    out.reserve(filters.size());
    for (const auto& f : filters) out.push_back(f.kernel);
    return out;
}

int AnalysisDictionary::index_of(int id) const {
    for (std::size_t i = 0; i < filters.size(); ++i)
        if (filters[i].id == id) return static_cast<int>(i);
    return -1;
}

void AnalysisDictionary::validate() const {
    if (filters.empty()) throw DataError("analysis dictionary is empty");
    std::set<int> ids;
    const int k = filters.front().kernel.rows();
    for (const auto& f : filters) {
        if (f.kernel.rows() != k || f.kernel.cols() != k)
            throw DataError("dictionary filters have different support sizes");
        if (f.layer != layer) throw DataError("filter " + std::to_string(f.id) + " is not in layer " + std::to_string(layer));
        if (!ids.insert(f.id).second) throw DataError("duplicate filter id " + std::to_string(f.id));
    }
}

AnalysisDictionary make_gabor_bank(const GaborParams& params) {
    if (params.orientations < 1) throw ConfigError("Gabor bank needs at least one orientation");
    if (params.scales != 1) throw ConfigError("only single-scale Gabor banks are supported");
    if (params.size < 1) throw ConfigError("Gabor kernel size must be positive");
    AnalysisDictionary bank;
    bank.layer = 1;
    const double c = (params.size - 1) / 2.0;
    for (int a = 0; a < params.orientations; ++a) {
        const double alpha = a * std::numbers::pi / params.orientations;
        Matrix k(params.size, params.size);
        for (int r = 0; r < params.size; ++r)
            for (int col = 0; col < params.size; ++col) {
                const double x = col - c;
                const double y = r - c;
                const double across = -x * std::sin(alpha) + y * std::cos(alpha);
                const double envelope = std::exp(-(x * x + y * y) / (2.0 * params.sigma * params.sigma));
                k(r, col) = envelope * std::cos(2.0 * std::numbers::pi * across / params.wavelength);
            }
        center_and_normalize(k);
        bank.filters.push_back(Filter{std::move(k), a, 1, std::nullopt});
    }
    return bank;
}

NormalizedResponses normalized_responses(const Image& image, const AnalysisDictionary& bank) {
    if (bank.filters.empty()) throw DataError("empty filter bank");
    const auto kernels = bank.kernels();
    for (const auto& k : kernels)
        if (k.rows() != k.cols()) throw DimensionError("kernel must be square");
    NormalizedResponses out;
    out.maps = kernels::correlate_bank(image.pixels(), kernels);
    double total = 0.0;
    std::size_t count = 0;
    for (const auto& m : out.maps) {
        total += m.squared_norm();
        count += m.size();
    }
    out.energy = total / static_cast<double>(count);
    // Zero-mean kernels on a constant image leave only rounding noise.
    if (!(out.energy > 1e-20)) {
        out.degenerate = true;
        for (auto& m : out.maps) m = Matrix(m.rows(), m.cols());
        return out;
    }
    const double inv = 1.0 / std::sqrt(out.energy);
    for (auto& m : out.maps)
        for (double& v : m.values()) v = std::abs(v) * inv;
    return out;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Filter compose(const Filter& a, const Filter& b, int new_id, ComposeMode mode) {
    if (a.layer != b.layer)
        throw DimensionError("cannot compose filters from layers " + std::to_string(a.layer) + " and " +
                             std::to_string(b.layer));
    if (a.id == b.id) throw DataError("cannot compose filter " + std::to_string(a.id) + " with itself");
    Matrix k = a.kernel + b.kernel;
    for (double& v : k.values()) v = sigmoid(v);
    if (mode == ComposeMode::normalized) center_and_normalize(k);
    return Filter{std::move(k), new_id, a.layer + 1, std::make_pair(std::min(a.id, b.id), std::max(a.id, b.id))};
}

std::vector<Filter> compose_all(std::span<const Filter> optimized, ComposeMode mode) {
    if (optimized.size() < 2) throw DataError("composition needs at least two filters");
    std::vector<Filter> out;
    out.reserve(optimized.size() * (optimized.size() - 1) / 2);
    int next_id = 0;
    for (std::size_t i = 0; i < optimized.size(); ++i)
        for (std::size_t j = i + 1; j < optimized.size(); ++j)
            out.push_back(compose(optimized[i], optimized[j], next_id++, mode));
    return out;
}

std::vector<Filter> compress(std::vector<Filter> filters, double threshold, std::mt19937_64& rng) {
    if (threshold < 0.0) throw ConfigError("compression threshold must be nonnegative");
    std::sort(filters.begin(), filters.end(), [](const Filter& x, const Filter& y) { return x.id < y.id; });
    std::vector<char> alive(filters.size(), 1);
    for (std::size_t i = 0; i < filters.size(); ++i) {
        for (std::size_t j = i + 1; j < filters.size() && alive[i]; ++j) {
            if (!alive[j]) continue;
            if (l2_distance(filters[i].kernel, filters[j].kernel) < threshold) {
                if (rng() & 1u)
                    alive[i] = 0;
                else
                    alive[j] = 0;
            }
        }
    }
    std::vector<Filter> out;
    for (std::size_t i = 0; i < filters.size(); ++i)
        if (alive[i]) out.push_back(std::move(filters[i]));
    return out;
}

Matrix distance_matrix(std::span<const Filter> filters) {
    const int n = static_cast<int>(filters.size());
    Matrix d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) d(i, j) = d(j, i) = l2_distance(filters[i].kernel, filters[j].kernel);
    return d;
}

}  // namespace deepboost
