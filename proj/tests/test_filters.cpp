#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "deepboost/error.hpp"
#include "deepboost/filters.hpp"
#include "deepboost/synth.hpp"
#include "test_util.hpp"

using namespace deepboost;
using deepboost::testing::random_image;
using deepboost::testing::random_matrix;

namespace {

double mean_squared(const NormalizedResponses& nr) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& m : nr.maps) {
        s += m.squared_norm();
        n += m.size();
    }
    return s / static_cast<double>(n);
}

Filter make_filter(Matrix k, int id, int layer = 1) { return Filter{std::move(k), id, layer, std::nullopt}; }

}  // namespace

TEST_CASE("default Gabor bank: 16 zero-mean unit-norm 5x5 kernels") {
    const auto bank = make_gabor_bank();
    REQUIRE(bank.size() == 16);
    CHECK_NOTHROW(bank.validate());
    for (const auto& f : bank.filters) {
        CHECK(f.kernel.rows() == 5);
        CHECK(f.kernel.cols() == 5);
        CHECK(std::abs(f.kernel.mean()) <= 1e-8);
        CHECK(std::abs(std::sqrt(f.kernel.squared_norm()) - 1.0) <= 1e-8);
        CHECK(f.layer == 1);
        CHECK_FALSE(f.lineage.has_value());
    }
}

TEST_CASE("orientation a + A/2 is the 90-degree rotation of orientation a") {
    // alpha_{a+A/2} = alpha_a + pi/2, and the kernel grid is symmetric under a
    // quarter turn, so k_{a+8}(r, c) = k_a(4 - c, r) exactly.
    const auto bank = make_gabor_bank();
    for (int a = 0; a < 8; ++a) {
        const Matrix& k = bank.filters[a].kernel;
        const Matrix& rot = bank.filters[a + 8].kernel;
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c) CHECK(rot(r, c) == doctest::Approx(k(4 - c, r)).epsilon(1e-12));
    }
    CHECK(l2_distance(bank.filters[0].kernel, bank.filters[8].kernel) > 0.5);
}

TEST_CASE("horizontal bars excite orientation 0, vertical bars orientation A/2") {
    SynthOptions so;
    so.n_per_class = 20;
    const auto ds = synth_bars(so);
    const auto bank = make_gabor_bank();
    std::vector<std::vector<double>> mean(2, std::vector<double>(16, 0.0));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto nr = normalized_responses(ds.images[i], bank);
        for (int a = 0; a < 16; ++a) mean[ds.labels[i]][a] += nr.maps[a].sum();
    }
    auto argmax = [](const std::vector<double>& v) {
        return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
    };
    const int h = argmax(mean[0]);
    const int v = argmax(mean[1]);
    CHECK((h <= 1 || h >= 15));
    CHECK(std::abs(v - 8) <= 1);
}

TEST_CASE("normalized responses have unit mean square") {
    std::mt19937_64 rng(20);
    const auto bank = make_gabor_bank();
    for (int trial = 0; trial < 10; ++trial) {
        const auto nr = normalized_responses(random_image(16, rng), bank);
        CHECK_FALSE(nr.degenerate);
        CHECK(std::abs(mean_squared(nr) - 1.0) <= 1e-8);
        for (const auto& m : nr.maps) CHECK(m.min() >= 0.0);
    }
}

TEST_CASE("constant image is degenerate with zero responses") {
    const auto nr = normalized_responses(deepboost::testing::constant_image(12, 0.6), make_gabor_bank());
    CHECK(nr.degenerate);
    for (const auto& m : nr.maps) CHECK(m.max() == 0.0);
}

TEST_CASE("contrast and affine intensity changes leave normalized responses unchanged") {
    std::mt19937_64 rng(21);
    const auto bank = make_gabor_bank();
    for (int trial = 0; trial < 10; ++trial) {
        // Keep values near the middle so the transformed image stays in [0,1].
        Matrix px = random_matrix(14, 14, rng, 0.3, 0.7);
        const double mean = px.mean();
        Matrix doubled = px;
        for (double& v : doubled.values()) v = mean + 2.0 * (v - mean);
        Matrix affine = px;
        for (double& v : affine.values()) v = 1.0 - 0.8 * v + 0.05;  // a = -0.8, b = 1.05

        const auto base = normalized_responses(Image(px), bank);
        const auto dbl = normalized_responses(Image(doubled), bank);
        const auto aff = normalized_responses(Image(affine), bank);
        for (std::size_t m = 0; m < base.maps.size(); ++m)
            for (std::size_t i = 0; i < base.maps[m].size(); ++i) {
                const double b = base.maps[m].values()[i];
                CHECK(std::abs(dbl.maps[m].values()[i] - b) <= 1e-8);
                CHECK(std::abs(aff.maps[m].values()[i] - b) <= 1e-6 * std::max(1.0, b));
            }
    }
}

TEST_CASE("compose: sigmoid of the elementwise sum") {
    SUBCASE("two zero kernels give 0.5 before normalization") {
        const Filter f = compose(make_filter(Matrix(5, 5), 0), make_filter(Matrix(5, 5), 1), 0, ComposeMode::raw);
        for (double v : f.kernel.values()) CHECK(v == 0.5);
        CHECK(f.layer == 2);
        REQUIRE(f.lineage.has_value());
        CHECK(f.lineage->first == 0);
        CHECK(f.lineage->second == 1);
    }
    SUBCASE("entries 2 and 0") {
        Matrix a(5, 5);
        a(0, 0) = 2.0;
        const Filter f = compose(make_filter(a, 3), make_filter(Matrix(5, 5), 4), 0, ComposeMode::raw);
        CHECK(f.kernel(0, 0) == doctest::Approx(0.8807970779778823).epsilon(1e-14));
        CHECK(f.kernel(1, 1) == 0.5);
    }
    SUBCASE("commutative") {
        std::mt19937_64 rng(22);
        const Filter a = make_filter(random_matrix(5, 5, rng), 0);
        const Filter b = make_filter(random_matrix(5, 5, rng), 1);
        CHECK(compose(a, b).kernel == compose(b, a).kernel);
        CHECK(compose(a, b, 0, ComposeMode::raw).kernel == compose(b, a, 0, ComposeMode::raw).kernel);
    }
    SUBCASE("normalized mode is zero-mean and unit-norm") {
        std::mt19937_64 rng(23);
        const Filter f = compose(make_filter(random_matrix(5, 5, rng), 0), make_filter(random_matrix(5, 5, rng), 1));
        CHECK(std::abs(f.kernel.mean()) <= 1e-12);
        CHECK(std::sqrt(f.kernel.squared_norm()) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(compose(make_filter(Matrix(5, 5), 0, 1), make_filter(Matrix(5, 5), 1, 2)), DimensionError);
        CHECK_THROWS_AS(compose(make_filter(Matrix(5, 5), 0), make_filter(Matrix(5, 5), 0)), DataError);
    }
}

TEST_CASE("compose_all produces M(M-1)/2 filters") {
    const auto bank = make_gabor_bank();
    CHECK(compose_all(bank.filters).size() == 120);
    CHECK(compose_all(std::span(bank.filters).first(2)).size() == 1);
    CHECK(compose_all(std::span(bank.filters).first(5)).size() == 10);
    CHECK_THROWS_AS(compose_all(std::span(bank.filters).first(1)), DataError);
    const auto composed = compose_all(bank.filters);
    for (const auto& f : composed) {
        REQUIRE(f.lineage.has_value());
        CHECK(f.lineage->first != f.lineage->second);
        CHECK(f.layer == 2);
    }
}

TEST_CASE("compress") {
    std::mt19937_64 rng(30);
    SUBCASE("identical pair keeps exactly one") {
        const Matrix k = random_matrix(5, 5, rng);
        const auto out = compress({make_filter(k, 0), make_filter(k, 1)}, 0.7, rng);
        CHECK(out.size() == 1);
    }
    SUBCASE("orthonormal kernels are sqrt(2) apart and both survive") {
        Matrix a(5, 5), b(5, 5);
        a(0, 0) = 1.0;
        b(2, 3) = 1.0;
        CHECK(l2_distance(a, b) == doctest::Approx(std::sqrt(2.0)));
        CHECK(compress({make_filter(a, 0), make_filter(b, 1)}, 0.7, rng).size() == 2);
    }
    SUBCASE("threshold 0 keeps everything") {
        const Matrix k = random_matrix(5, 5, rng);
        CHECK(compress({make_filter(k, 0), make_filter(k, 1), make_filter(k, 2)}, 0.0, rng).size() == 3);
    }
    SUBCASE("empty in, empty out") { CHECK(compress({}, 0.7, rng).empty()); }
    SUBCASE("default threshold") { CHECK(kDefaultCompressionThreshold == 0.7); }
}

TEST_CASE("compress after compose_all: survivors are pairwise >= threshold, deterministic per seed") {
    std::mt19937_64 gen(31);
    for (int trial = 0; trial < 8; ++trial) {
        std::vector<Filter> base;
        for (int i = 0; i < 10; ++i) {
            Matrix k = random_matrix(5, 5, gen, -0.4, 0.4);
            base.push_back(make_filter(std::move(k), i));
        }
        const auto composed = compose_all(base);
        for (double thr : {0.3, 0.7, 1.0}) {
            std::mt19937_64 r1(trial), r2(trial);
            const auto a = compress(composed, thr, r1);
            const auto b = compress(composed, thr, r2);
            CHECK(a.size() <= composed.size());
            REQUIRE(a.size() == b.size());
            for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
            for (std::size_t i = 0; i < a.size(); ++i)
                for (std::size_t j = i + 1; j < a.size(); ++j) CHECK(l2_distance(a[i].kernel, a[j].kernel) >= thr);
        }
    }
}
