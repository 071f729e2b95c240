#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "deepboost/boosting.hpp"
#include "deepboost/error.hpp"
#include "deepboost/features.hpp"
#include "test_util.hpp"

using namespace deepboost;
using deepboost::testing::random_image;
using deepboost::testing::random_matrix;

namespace {

FeatureLayout layout_for(int filters, int bins, double top) {
    FeatureLayout l;
    l.filters = filters;
    l.bins = bins;
    for (int i = 0; i <= bins; ++i) l.bin_edges.push_back(top * i / bins);
    return l;
}

FeatureMapStack single_activation(int rows, int cols, int filters, int y, int x, int filter, double mag) {
    std::vector<ResponseMap> maps(filters, Matrix(rows, cols));
    maps[filter](y, x) = mag;
    return max_activate(maps);
}

// Sums histogram counts belonging to one pyramid level.
double level_total(const FeatureVector& fv, const FeatureLayout& l, int level) {
    static constexpr int lo[3] = {0, 1, 5};
    static constexpr int hi[3] = {1, 5, 21};
    double s = 0.0;
    for (std::size_t i = 0; i < fv.indices.size(); ++i) {
        const auto c = l.decode(fv.indices[i]);
        if (c.block >= lo[level] && c.block < hi[level]) s += fv.values[i];
    }
    return s;
}

}  // namespace

TEST_CASE("max_activate keeps the largest magnitude per pixel") {
    std::vector<ResponseMap> r(3, Matrix(1, 1));
    r[0](0, 0) = 0.2;
    r[1](0, 0) = -0.5;
    r[2](0, 0) = 0.3;
    const auto s = max_activate(r);
    CHECK(s.maps[0](0, 0) == 0.0);
    CHECK(s.maps[1](0, 0) == 0.5);
    CHECK(s.maps[2](0, 0) == 0.0);
    REQUIRE(s.index.size() == 1);
    CHECK(s.index[0].filter == 1);
    CHECK(s.index[0].magnitude == 0.5);

    SUBCASE("ties go to the lowest index") {
        r[0](0, 0) = -0.5;
        const auto t = max_activate(r);
        CHECK(t.maps[0](0, 0) == 0.5);
        CHECK(t.maps[1](0, 0) == 0.0);
    }
    SUBCASE("single map is its absolute value") {
        std::vector<ResponseMap> one{Matrix(2, 2, std::vector<double>{-1.0, 2.0, 0.0, -0.25})};
        const auto t = max_activate(one);
        CHECK(t.maps[0] == Matrix(2, 2, std::vector<double>{1.0, 2.0, 0.0, 0.25}));
        CHECK(t.index.size() == 3);
    }
    SUBCASE("errors") {
        CHECK_THROWS_AS(max_activate(std::span<const ResponseMap>{}), DataError);
        std::vector<ResponseMap> bad{Matrix(2, 2), Matrix(2, 3)};
        CHECK_THROWS_AS(max_activate(bad), DimensionError);
    }
}

TEST_CASE("max_activate: at most one nonzero per pixel, index mirrors the maps") {
    std::mt19937_64 rng(40);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<ResponseMap> r;
        for (int m = 0; m < 6; ++m) r.push_back(random_matrix(9, 7, rng));
        const auto s = max_activate(r);
        for (int y = 0; y < 9; ++y)
            for (int x = 0; x < 7; ++x) {
                int nonzero = 0;
                double largest = 0.0;
                for (int m = 0; m < 6; ++m) {
                    if (s.maps[m](y, x) != 0.0) ++nonzero;
                    largest = std::max(largest, std::abs(r[m](y, x)));
                }
                CHECK(nonzero <= 1);
                double kept = 0.0;
                for (int m = 0; m < 6; ++m) kept += s.maps[m](y, x);
                CHECK(kept == largest);
            }
        for (const auto& e : s.index) CHECK(s.maps[e.filter](e.h, e.w) == e.magnitude);
    }
}

TEST_CASE("feature layout") {
    const auto l = layout_for(16, 50, 1.0);
    CHECK(l.dim() == 16800);
    std::set<std::size_t> seen;
    for (int m = 0; m < 3; ++m)
        for (int b = 0; b < kPyramidBlocks; ++b)
            for (int c = 0; c < 50; ++c) {
                const auto d = l.encode(m, b, c);
                CHECK(d < l.dim());
                seen.insert(d);
                CHECK(l.decode(d) == FeatureCoord{m, b, c});
            }
    CHECK(seen.size() == 3u * kPyramidBlocks * 50);
    CHECK(l.encode(1, 0, 0) == 1050);
    CHECK_THROWS_AS(l.encode(16, 0, 0), DimensionError);
    CHECK_THROWS_AS(l.decode(16800), DimensionError);
}

TEST_CASE("pyramid blocks") {
    CHECK(pyramid_block(0, 7, 3, 8, 8) == 0);
    CHECK(pyramid_block(1, 0, 0, 8, 8) == 1);
    CHECK(pyramid_block(1, 0, 4, 8, 8) == 2);
    CHECK(pyramid_block(1, 4, 0, 8, 8) == 3);
    CHECK(pyramid_block(1, 7, 7, 8, 8) == 4);
    CHECK(pyramid_block(2, 0, 0, 8, 8) == 5);
    CHECK(pyramid_block(2, 7, 7, 8, 8) == 20);
    // Remainders join the last block.
    CHECK(pyramid_block(2, 9, 9, 10, 10) == 20);
    // Lattices smaller than the grid still map every position.
    CHECK(pyramid_block(2, 2, 2, 3, 3) == 5 + 2 * 4 + 2);
}

TEST_CASE("pyramid histogram") {
    const auto l = layout_for(4, 10, 1.0);

    SUBCASE("all-zero stack gives the zero vector") {
        std::vector<ResponseMap> zero(4, Matrix(8, 8));
        const auto fv = pyramid_histogram(max_activate(zero), l);
        CHECK(fv.dim == l.dim());
        CHECK(fv.indices.empty());
    }
    SUBCASE("one activation lands in one bin at each of the three levels") {
        const auto s = single_activation(8, 8, 4, 5, 2, 3, 0.55);
        const auto fv = pyramid_histogram(s, l);
        REQUIRE(fv.indices.size() == 3);
        for (float v : fv.values) CHECK(v == 1.0f);
        CHECK(fv.at(l.encode(3, 0, 5)) == 1.0);
        CHECK(fv.at(l.encode(3, 1 + 1 * 2 + 0, 5)) == 1.0);
        CHECK(fv.at(l.encode(3, 5 + 2 * 4 + 1, 5)) == 1.0);
    }
    SUBCASE("each level holds every activation") {
        std::mt19937_64 rng(41);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<ResponseMap> r;
            for (int m = 0; m < 4; ++m) r.push_back(random_matrix(11, 13, rng, -0.9, 0.9));
            const auto s = max_activate(r);
            const auto fv = pyramid_histogram(s, l);
            const double n = static_cast<double>(s.index.size());
            for (int level = 0; level < 3; ++level) CHECK(level_total(fv, l, level) == n);
            for (float v : fv.values) CHECK(v >= 0.0f);
            CHECK(std::is_sorted(fv.indices.begin(), fv.indices.end()));
        }
    }
    SUBCASE("moving an activation inside a finest block changes nothing") {
        const auto a = pyramid_histogram(single_activation(16, 16, 4, 4, 8, 2, 0.3), l);
        const auto b = pyramid_histogram(single_activation(16, 16, 4, 7, 11, 2, 0.3), l);
        const auto c = pyramid_histogram(single_activation(16, 16, 4, 8, 11, 2, 0.3), l);
        CHECK(a == b);
        CHECK_FALSE(a == c);
    }
    SUBCASE("index route equals maps route") {
        std::mt19937_64 rng(42);
        for (int trial = 0; trial < 10; ++trial) {
            std::vector<ResponseMap> r;
            for (int m = 0; m < 4; ++m) r.push_back(random_matrix(10, 10, rng, -1.5, 1.5));
            auto s = max_activate(r);
            std::size_t clamps_maps = 0, clamps_index = 0;
            const auto from_maps = pyramid_histogram(s, l, &clamps_maps);
            s.drop_maps();
            const auto from_index = pyramid_histogram(s, l, &clamps_index);
            CHECK(from_maps == from_index);
            CHECK(clamps_maps == clamps_index);
        }
    }
    SUBCASE("values above the top edge are clamped into the last bin and counted") {
        std::size_t clamps = 0;
        const auto fv = pyramid_histogram(single_activation(8, 8, 4, 0, 0, 0, 7.5), l, &clamps);
        CHECK(clamps == 1);
        CHECK(fv.at(l.encode(0, 0, 9)) == 1.0);
        clamps = 0;
        pyramid_histogram(single_activation(8, 8, 4, 0, 0, 0, 1.0), l, &clamps);
        CHECK(clamps == 0);
    }
    SUBCASE("layout mismatch") {
        CHECK_THROWS_AS(pyramid_histogram(single_activation(8, 8, 3, 0, 0, 0, 0.5), l), DimensionError);
    }
}

TEST_CASE("fit_bins") {
    SUBCASE("99th percentile with linear interpolation") {
        // Magnitudes 1..101: the 99th percentile sits exactly on 100.
        std::vector<ResponseMap> maps{Matrix(1, 101)};
        for (int i = 0; i < 101; ++i) maps[0](0, i) = i + 1.0;
        const std::vector<FeatureMapStack> stacks{max_activate(maps)};
        const auto edges = fit_bins(stacks, 2);
        REQUIRE(edges.size() == 3);
        CHECK(edges[0] == 0.0);
        CHECK(edges[1] == doctest::Approx(50.0));
        CHECK(edges[2] == doctest::Approx(100.0));
    }
    SUBCASE("interpolates between order statistics") {
        // Ten values 1..10: position 0.99 * 9 = 8.91, so q = 9 + 0.91.
        std::vector<ResponseMap> maps{Matrix(1, 10)};
        for (int i = 0; i < 10; ++i) maps[0](0, i) = i + 1.0;
        const std::vector<FeatureMapStack> stacks{max_activate(maps)};
        CHECK(fit_bins(stacks, 1)[1] == doctest::Approx(9.91));
    }
    SUBCASE("one repeated value") {
        std::vector<ResponseMap> maps{Matrix(3, 3, 0.4)};
        const std::vector<FeatureMapStack> stacks{max_activate(maps)};
        const auto edges = fit_bins(stacks, 4);
        CHECK(edges.back() == doctest::Approx(0.4));
        CHECK(edges.front() == 0.0);
    }
    SUBCASE("nothing activated") {
        std::vector<ResponseMap> maps{Matrix(3, 3)};
        const std::vector<FeatureMapStack> stacks{max_activate(maps)};
        CHECK_THROWS_AS(fit_bins(stacks, 4), DataError);
        CHECK_THROWS_AS(fit_bins(stacks, 0), ConfigError);
    }
    SUBCASE("about 1% of fitted magnitudes clamp") {
        std::mt19937_64 rng(43);
        std::vector<FeatureMapStack> stacks;
        for (int i = 0; i < 5; ++i) {
            const auto img = random_image(20, rng);
            stacks.push_back(compute_stack(img, make_gabor_bank(), true));
        }
        FeatureLayout l;
        l.filters = 16;
        l.bins = 50;
        l.bin_edges = fit_bins(stacks, 50);
        std::size_t clamps = 0, total = 0;
        for (const auto& s : stacks) {
            pyramid_histogram(s, l, &clamps);
            total += s.index.size();
        }
        CHECK(clamps <= total / 100 + 1);
    }
}

TEST_CASE("compute_stack uses the whole dictionary") {
    std::mt19937_64 rng(44);
    const auto img = random_image(16, rng);
    const auto bank = make_gabor_bank();
    const auto s = compute_stack(img, bank, true);
    CHECK(s.filters == 16);
    CHECK(s.rows == 12);
    CHECK(s.cols == 12);
    CHECK(s.index.size() == 144);
    const auto raw = compute_stack(img, bank, false);
    CHECK(raw.index.size() == 144);
    // Normalization rescales every map by one constant, so winners agree.
    for (std::size_t i = 0; i < s.index.size(); ++i) CHECK(s.index[i].filter == raw.index[i].filter);
}

TEST_CASE("selected_filters decodes stump dimensions") {
    const auto l = layout_for(16, 50, 1.0);
    StrongClassifier c;
    c.stumps.push_back(Stump{1050, 0.5, 1.0, 0.0, false});
    c.stumps.push_back(Stump{l.encode(7, 20, 49), 0.5, -2.0, 0.1, false});
    c.stumps.push_back(Stump{0, 0.0, 0.0, 0.3, false});
    CHECK(selected_filters(c, l) == std::set<int>{1, 7});
}
