// Runs every acceptance criterion and prints one PASS/FAIL line per criterion.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "deepboost/boosting.hpp"
#include "deepboost/deepmodel.hpp"
#include "deepboost/dictlearn.hpp"
#include "deepboost/evalkit.hpp"
#include "deepboost/features.hpp"
#include "deepboost/filters.hpp"
#include "deepboost/model_io.hpp"
#include "deepboost/synth.hpp"
#include "test_util.hpp"

using namespace deepboost;
using deepboost::testing::brute_correlate;
using deepboost::testing::random_image;
using deepboost::testing::random_matrix;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

// Train/test split convention shared with the CLI.
constexpr std::uint64_t kTestSeedOffset = 1000003;

LabeledDataset bars(const std::string& name, int n, std::uint64_t seed, double distractor = -1.0) {
    SynthOptions so;
    so.n_per_class = n;
    so.seed = seed;
    if (distractor >= 0.0) so.distractor_fraction = distractor;
    return make_synthetic(name, so);
}

double test_accuracy(const DeepBoostModel& m, const LabeledDataset& test) {
    int correct = 0;
    for (std::size_t i = 0; i < test.size(); ++i) correct += predict(m, test.images[i]).label == test.labels[i];
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

DeepBoostConfig config(int layers, double lambda, std::uint64_t seed) {
    DeepBoostConfig c;
    c.layers = layers;
    c.rounds = {50};
    c.joint.lambda = lambda;
    c.seed = seed;
    return c;
}

Outcome synthetic_separability() {
    const auto t0 = Clock::now();
    const auto train = bars("synth-bars", 100, 7);
    const auto test = bars("synth-bars", 100, 7 + kTestSeedOffset);
    const double acc1 = test_accuracy(train_multiclass(train, config(1, 0.1, 7)), test);
    const double acc2 = test_accuracy(train_multiclass(train, config(2, 0.1, 7)), test);
    const double secs = seconds_since(t0);
    Outcome o;
    o.pass = acc1 >= 0.95 && acc2 >= acc1 - 0.01 && secs <= 300.0;
    o.detail = "1-layer test acc " + fmt("%.4f", acc1) + ", 2-layer " + fmt("%.4f", acc2) + ", " +
               fmt("%.1fs", secs);
    return o;
}

Outcome regularizer_ablation() {
    double sum_reg = 0.0, sum_plain = 0.0;
    int layers_checked = 0, increases = 0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const auto train = bars("synth-bars-distract", 100, seed, 0.2);
        const auto test = bars("synth-bars-distract", 100, seed + kTestSeedOffset, 0.2);
        const auto with = train_multiclass(train, config(1, 0.1, seed));
        const auto without = train_multiclass(train, config(1, 0.0, seed));
        sum_reg += test_accuracy(with, test);
        sum_plain += test_accuracy(without, test);
        for (const auto& cm : with.class_models)
            for (const auto& lm : cm.layers) {
                ++layers_checked;
                for (std::size_t i = 1; i < lm.trace.size(); ++i)
                    if (!(lm.trace[i].regularizer < lm.trace[i - 1].regularizer)) ++increases;
            }
    }
    Outcome o;
    o.pass = sum_reg / 5.0 >= sum_plain / 5.0 && increases == 0;
    o.detail = "mean test acc lambda=0.1 " + fmt("%.4f", sum_reg / 5.0) + " vs lambda=0 " +
               fmt("%.4f", sum_plain / 5.0) + "; regularizer non-decreasing steps " + std::to_string(increases) +
               " over " + std::to_string(layers_checked) + " layer traces";
    return o;
}

Outcome gradient_check() {
    std::mt19937_64 rng(300);
    const double h = 1e-5;
    double worst = 0.0;
    const int instances = 12;
    for (int t = 0; t < instances; ++t) {
        const std::vector<Image> negs{random_image(12, rng), random_image(12, rng)};
        const ImageRefs refs{&negs[0], &negs[1]};
        AnalysisDictionary d;
        d.filters.push_back(Filter{random_matrix(5, 5, rng), 0, 1, {}});
        const Matrix g = reg_gradient(d, {0}, refs)[0];
        auto loss = [&](const Matrix& k) {
            double s = 0.0;
            for (const auto& n : negs) s += brute_correlate(n.pixels(), k).squared_norm();
            return s;
        };
        for (int r = 0; r < 5; ++r)
            for (int c = 0; c < 5; ++c) {
                Matrix kp = d.filters[0].kernel, km = d.filters[0].kernel;
                kp(r, c) += h;
                km(r, c) -= h;
                const double fd = (loss(kp) - loss(km)) / (2.0 * h);
                worst = std::max(worst, std::abs(g(r, c) - fd) / std::max(std::abs(fd), 1e-8));
            }
    }
    return Outcome{worst <= 1e-4,
                   "worst entrywise relative error " + fmt("%.2e", worst) + " over " + std::to_string(instances) +
                       " instances"};
}

FeatureVector dense_row(const std::vector<double>& v) {
    FeatureVector fv;
    fv.dim = v.size();
    for (std::size_t d = 0; d < v.size(); ++d)
        if (v[d] != 0.0) {
            fv.indices.push_back(static_cast<std::uint32_t>(d));
            fv.values.push_back(static_cast<float>(v[d]));
        }
    return fv;
}

Outcome boosting_descent() {
    std::mt19937_64 rng(400);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int violations = 0;
    for (int t = 0; t < 20; ++t) {
        std::vector<FeatureVector> rows;
        std::vector<double> y;
        for (int i = 0; i < 40; ++i) {
            std::vector<double> x(12);
            for (auto& v : x) v = u(rng) < 0.4 ? std::round(u(rng) * 9.0 + 1.0) : 0.0;
            rows.push_back(dense_row(x));
            y.push_back(u(rng) < 0.5 ? 1.0 : -1.0);
        }
        BoostOptions o;
        o.rounds = 30;
        const auto r = train_strong(rows, y, o);
        double prev = 40.0;
        for (const auto& d : r.rounds) {
            if (d.exp_loss > prev + 1e-9) ++violations;
            prev = d.exp_loss;
        }
    }

    std::vector<FeatureVector> rows;
    std::vector<double> y;
    for (int i = 0; i < 40; ++i) {
        const bool pos = i % 2 == 0;
        rows.push_back(dense_row({pos ? 6.0 + 3.0 * u(rng) : 1.0 + 3.0 * u(rng), 1.0 + 8.0 * u(rng)}));
        y.push_back(pos ? 1.0 : -1.0);
    }
    BoostOptions o;
    o.rounds = 5;
    const auto sig = train_strong(rows, y, o);
    o.kind = StumpKind::indicator;
    const auto ind = train_strong(rows, y, o);
    int sig_correct = 0, agree = 0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        sig_correct += sig.train_scores[i] * y[i] > 0.0;
        agree += (sig.train_scores[i] > 0.0) == (ind.train_scores[i] > 0.0);
    }
    Outcome out;
    out.pass = violations == 0 && sig_correct == 40 && agree == 40;
    out.detail = std::to_string(violations) + " loss increases over 20 datasets; separable set " +
                 std::to_string(sig_correct) + "/40 correct in " + std::to_string(sig.rounds.size()) +
                 " rounds, indicator oracle agrees on " + std::to_string(agree) + "/40";
    return out;
}

Outcome sparsity_and_pyramid() {
    std::mt19937_64 rng(500);
    const auto bank = make_gabor_bank();
    FeatureLayout layout;
    layout.filters = 16;
    layout.bins = 50;
    layout.bin_edges.resize(51);
    for (int i = 0; i <= 50; ++i) layout.bin_edges[i] = 4.0 * i / 50.0;
    int multi = 0, level_errors = 0;
    for (int t = 0; t < 200; ++t) {
        const int side = 12 + static_cast<int>(rng() % 25);
        const auto stack = compute_stack(random_image(side, rng), bank, true);
        for (int y = 0; y < stack.rows; ++y)
            for (int x = 0; x < stack.cols; ++x) {
                int nz = 0;
                for (const auto& m : stack.maps) nz += m(y, x) != 0.0;
                multi += nz > 1;
            }
        const auto fv = pyramid_histogram(stack, layout);
        double totals[3] = {0, 0, 0};
        for (std::size_t k = 0; k < fv.indices.size(); ++k) {
            const int block = layout.decode(fv.indices[k]).block;
            totals[block == 0 ? 0 : block < 5 ? 1 : 2] += fv.values[k];
        }
        for (double tot : totals) level_errors += tot != static_cast<double>(stack.index.size());
    }
    const bool dim_ok = layout.dim() == 16800;
    return Outcome{multi == 0 && level_errors == 0 && dim_ok,
                   std::to_string(multi) + " pixels with >1 winner, " + std::to_string(level_errors) +
                       " level-total mismatches over 200 images; D = " + std::to_string(layout.dim())};
}

Outcome composition_and_compression() {
    const auto bank = make_gabor_bank();
    const auto composed = compose_all(bank.filters);
    std::mt19937_64 rng(7);
    const auto kept = compress(composed, kDefaultCompressionThreshold, rng);
    double min_dist = INFINITY;
    for (std::size_t i = 0; i < kept.size(); ++i)
        for (std::size_t j = i + 1; j < kept.size(); ++j)
            min_dist = std::min(min_dist, l2_distance(kept[i].kernel, kept[j].kernel));

    // Layer-2 training on the bars data with the full and the compressed dictionary.
    const auto train = bars("synth-bars", 100, 7);
    ImageRefs pos, neg;
    for (std::size_t i = 0; i < train.size(); ++i) (train.labels[i] == 0 ? pos : neg).push_back(&train.images[i]);
    JointConfig jc;
    jc.normalize_responses = false;
    auto time_layer = [&](std::vector<Filter> filters) {
        const AnalysisDictionary d{std::move(filters), 2, 0};
        const auto t0 = Clock::now();
        joint_train_layer(pos, neg, d, jc);
        return seconds_since(t0);
    };
    const double t_full = time_layer(composed);
    const double t_kept = time_layer(kept);
    Outcome o;
    o.pass = composed.size() == 120 && min_dist >= kDefaultCompressionThreshold && t_kept < t_full;
    o.detail = std::to_string(composed.size()) + " composed, " + std::to_string(kept.size()) +
               " after compression, min pair distance " + fmt("%.4f", min_dist) + "; layer-2 training " +
               fmt("%.2fs", t_kept) + " compressed vs " + fmt("%.2fs", t_full) + " uncompressed";
    return o;
}

Outcome response_normalization() {
    std::mt19937_64 rng(700);
    const auto bank = make_gabor_bank();
    double worst_ms = 0.0, worst_affine = 0.0;
    for (int t = 0; t < 50; ++t) {
        const int side = 10 + static_cast<int>(rng() % 20);
        const Matrix px = random_matrix(side, side, rng, 0.2, 0.8);
        const auto nr = normalized_responses(Image(px), bank);
        double s = 0.0;
        std::size_t n = 0;
        for (const auto& m : nr.maps) s += m.squared_norm(), n += m.size();
        worst_ms = std::max(worst_ms, std::abs(s / static_cast<double>(n) - 1.0));

        std::uniform_real_distribution<double> ua(0.3, 1.2);
        const double a = (rng() & 1 ? 1.0 : -1.0) * ua(rng);
        const double b = a > 0 ? 0.5 - 0.5 * a : 0.5 - 0.5 * a;  // keeps values inside [0, 1]
        Matrix moved = px;
        for (double& v : moved.values()) v = a * v + b;
        const auto nr2 = normalized_responses(Image(moved), bank);
        for (std::size_t m = 0; m < nr.maps.size(); ++m)
            for (std::size_t i = 0; i < nr.maps[m].size(); ++i)
                worst_affine = std::max(worst_affine, std::abs(nr.maps[m].values()[i] - nr2.maps[m].values()[i]));
    }
    return Outcome{worst_ms <= 1e-8 && worst_affine <= 1e-6,
                   "max |mean square - 1| " + fmt("%.2e", worst_ms) + ", max affine deviation " +
                       fmt("%.2e", worst_affine) + " over 50 images"};
}

Outcome metric_oracles() {
    const double m = mae(std::vector<double>{20, 30}, std::vector<double>{22, 27});
    const double cs = cum_score(std::vector<double>{0, 1, 3, 7}, 1);
    const std::vector<double> errs{0, 1, 3, 7};
    const auto curve = cum_score_curve(errs, 10);
    const bool monotone = std::is_sorted(curve.begin(), curve.end());
    const bool ends = curve.front() == 25.0 && curve.back() == 100.0 && cum_score(errs, 7) == 100.0;
    return Outcome{m == 2.5 && cs == 50.0 && monotone && ends,
                   "mae " + fmt("%.4f", m) + ", cum_score(l=1) " + fmt("%.1f%%", cs) + ", curve " +
                       fmt("%.1f", curve.front()) + ".." + fmt("%.1f", curve.back()) +
                       (monotone ? " monotone" : " NOT monotone")};
}

Outcome determinism_and_persistence() {
    const auto train = bars("synth-bars", 40, 9);
    const auto a = train_multiclass(train, config(2, 0.1, 9));
    const auto b = train_multiclass(train, config(2, 0.1, 9));
    const auto bytes = serialize_model(a);
    const bool same_bytes = bytes == serialize_model(b);
    const auto loaded = deserialize_model(bytes);
    const auto test = bars("synth-bars", 50, 9 + kTestSeedOffset);
    int mismatches = 0;
    for (const auto& img : test.images) {
        const auto p = predict(a, img), q = predict(loaded, img);
        mismatches += p.label != q.label || p.scores != q.scores;
    }
    return Outcome{same_bytes && mismatches == 0,
                   std::string(same_bytes ? "identical" : "DIFFERENT") + " model bytes (" +
                       std::to_string(bytes.size()) + " B); " + std::to_string(mismatches) + "/" +
                       std::to_string(test.size()) + " predictions changed after reload"};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"synthetic separability", synthetic_separability},
        {"regularizer ablation direction", regularizer_ablation},
        {"gradient correctness", gradient_check},
        {"boosting descent", boosting_descent},
        {"activation sparsity and pyramid conservation", sparsity_and_pyramid},
        {"composition and compression", composition_and_compression},
        {"response normalization", response_normalization},
        {"metric oracles", metric_oracles},
        {"determinism and persistence", determinism_and_persistence},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = Outcome{false, std::string("threw: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
