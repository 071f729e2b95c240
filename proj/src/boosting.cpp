#include "deepboost/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>

#include "deepboost/error.hpp"
#include "deepboost/filters.hpp"

namespace deepboost {

namespace {

struct Bucket {
    double value;
    double w;
    double wy;
};

struct Candidate {
    double err = std::numeric_limits<double>::infinity();
    std::size_t dim = 0;
    double threshold = 0.0;
    double a = 0.0;
    double b = 0.0;

    // Errors within `eps` count as ties, which go to the lower dimension.
    bool better_than(const Candidate& o, double eps) const {
        return err < o.err - eps || (err <= o.err + eps && dim < o.dim);
    }
};

inline double transfer(StumpKind kind, double x) {
    return kind == StumpKind::sigmoid ? sigmoid(x) : (x > 0.0 ? 1.0 : 0.0);
}

struct Totals {
    double w = 0.0;
    double wy = 0.0;
    double wyy = 0.0;
};

// Closed-form weighted least squares for (a, b) given the per-sample
// regressor s; returns false when s is (numerically) constant.
bool solve_ab(double W, double S, double Q, double Y, double P, double& a, double& b) {
    const double det = Q * W - S * S;
    if (!(det > 1e-12 * Q * W)) return false;
    a = (P * W - S * Y) / det;
    b = (Q * Y - S * P) / det;
    return true;
}

void search_buckets(const std::vector<Bucket>& buckets, const Totals& tot, std::size_t d, StumpKind kind,
                    double eps, Candidate& best) {
    if (buckets.size() < 2) return;
    std::vector<double> values(buckets.size());
    for (std::size_t u = 0; u < buckets.size(); ++u) values[u] = buckets[u].value;
    for (double delta : threshold_candidates(values)) {
        double S = 0.0, Q = 0.0, P = 0.0;
        for (const auto& bk : buckets) {
            const double s = transfer(kind, bk.value - delta);
            S += bk.w * s;
            Q += bk.w * s * s;
            P += bk.wy * s;
        }
        double a = 0.0, b = 0.0;
        if (!solve_ab(tot.w, S, Q, tot.wy, P, a, b)) continue;
        Candidate c{tot.wyy - a * P - b * tot.wy, d, delta, a, b};
        if (c.better_than(best, eps)) best = c;
    }
}

Totals totals(std::span<const double> y, const SampleWeights& w) {
    Totals t;
    for (std::size_t i = 0; i < y.size(); ++i) {
        t.w += w[i];
        t.wy += w[i] * y[i];
        t.wyy += w[i] * y[i] * y[i];
    }
    return t;
}

// Rounding noise between summation orders is far below this.
double tie_eps(const Totals& t) { return 1e-12 * std::max(1.0, t.wyy); }

Candidate constant_fit(const Totals& t) {
    const double b = t.wy / t.w;
    return Candidate{t.wyy - b * t.wy, 0, 0.0, 0.0, b};
}

void check_inputs(std::size_t n, std::span<const double> y, const SampleWeights& w) {
    if (y.size() != n || w.size() != n)
        throw DimensionError("stump fit: " + std::to_string(n) + " samples, " + std::to_string(y.size()) +
                             " labels, " + std::to_string(w.size()) + " weights");
    if (n < 1) throw DataError("stump fit needs samples");
}

StumpFit to_fit(const Candidate& c, StumpKind kind) {
    return StumpFit{Stump{c.dim, c.threshold, c.a, c.b, kind == StumpKind::indicator}, c.err};
}

}  // namespace

double Stump::eval_value(double x) const {
    const double s = indicator ? (x > threshold ? 1.0 : 0.0) : sigmoid(x - threshold);
    return a * s + b;
}

double Stump::eval(const FeatureVector& x) const { return eval_value(x.at(dim)); }

double StrongClassifier::score(const FeatureVector& x) const {
    double f = 0.0;
    for (const auto& s : stumps) f += s.eval(x);
    return f;
}

SampleWeights::SampleWeights(std::vector<double> w) : w_(std::move(w)) {
    for (double v : w_)
        if (!(v >= 0.0) || !std::isfinite(v)) throw DataError("sample weights must be finite and nonnegative");
}

SampleWeights SampleWeights::uniform(std::size_t n) {
    return SampleWeights(std::vector<double>(n, n ? 1.0 / static_cast<double>(n) : 0.0));
}

double SampleWeights::sum() const {
    double s = 0.0;
    for (double v : w_) s += v;
    return s;
}

void SampleWeights::normalize() {
    const double s = sum();
    if (!(s > 0.0) || !std::isfinite(s)) throw TrainingError("sample weights vanished or diverged");
    for (double& v : w_) v /= s;
}

std::vector<double> threshold_candidates(std::span<const double> sorted_distinct) {
    const std::size_t u = sorted_distinct.size();
    std::vector<double> out;
    if (u < 2) return out;
    const std::size_t mids = u - 1;
    auto midpoint = [&](std::size_t i) { return 0.5 * (sorted_distinct[i] + sorted_distinct[i + 1]); };
    if (mids <= static_cast<std::size_t>(kMaxThresholdCandidates)) {
        out.reserve(mids);
        for (std::size_t i = 0; i < mids; ++i) out.push_back(midpoint(i));
    } else {
        out.reserve(kMaxThresholdCandidates);
        for (int i = 0; i < kMaxThresholdCandidates; ++i)
            out.push_back(midpoint(static_cast<std::size_t>((i + 0.5) * static_cast<double>(mids) / kMaxThresholdCandidates)));
    }
    return out;
}

FeatureColumns::FeatureColumns(std::span<const FeatureVector> rows) : samples_(rows.size()) {
    dim_ = rows.empty() ? 0 : rows.front().dim;
    std::vector<std::size_t> counts(dim_, 0);
    for (const auto& r : rows) {
        if (r.dim != dim_) throw DimensionError("feature rows have different dimensions");
        for (std::size_t k = 0; k < r.indices.size(); ++k)
            if (r.values[k] != 0.0f) ++counts[r.indices[k]];
    }
    std::vector<std::size_t> slot(dim_, 0);
    start_.push_back(0);
    for (std::size_t d = 0; d < dim_; ++d)
        if (counts[d] > 0) {
            slot[d] = active_.size();
            active_.push_back(static_cast<std::uint32_t>(d));
            start_.push_back(start_.back() + counts[d]);
        }
    entries_.resize(start_.back());
    std::vector<std::size_t> fill(start_.begin(), start_.end() - 1);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        for (std::size_t k = 0; k < r.indices.size(); ++k)
            if (r.values[k] != 0.0f)
                entries_[fill[slot[r.indices[k]]]++] = Entry{static_cast<std::uint32_t>(i), r.values[k]};
    }
    for (std::size_t k = 0; k < active_.size(); ++k)
        std::sort(entries_.begin() + static_cast<std::ptrdiff_t>(start_[k]),
                  entries_.begin() + static_cast<std::ptrdiff_t>(start_[k + 1]),
                  [](const Entry& a, const Entry& b) { return a.value < b.value || (a.value == b.value && a.sample < b.sample); });
}

std::span<const FeatureColumns::Entry> FeatureColumns::entries(std::size_t k) const {
    return std::span<const Entry>(entries_).subspan(start_[k], start_[k + 1] - start_[k]);
}

std::vector<double> FeatureColumns::column(std::size_t d) const {
    std::vector<double> out(samples_, 0.0);
    auto it = std::lower_bound(active_.begin(), active_.end(), static_cast<std::uint32_t>(d));
    if (it != active_.end() && *it == d)
        for (const auto& e : entries(static_cast<std::size_t>(it - active_.begin()))) out[e.sample] = e.value;
    return out;
}

StumpFit fit_stump(const FeatureColumns& X, std::span<const double> y, const SampleWeights& w, StumpKind kind) {
    check_inputs(X.samples(), y, w);
    const Totals tot = totals(y, w);
    if (!(tot.w > 0.0)) throw TrainingError("all sample weights are zero");

    const auto active = X.active_dims();
    const int n_active = static_cast<int>(active.size());
    const Candidate constant = constant_fit(tot);
    const double eps = tie_eps(tot);
    Candidate best = constant;

#pragma omp parallel
    {
        Candidate local;
        std::vector<Bucket> buckets;
#pragma omp for schedule(dynamic, 32) nowait
        for (int k = 0; k < n_active; ++k) {
            const auto entries = X.entries(static_cast<std::size_t>(k));
            // Implicit zeros form one bucket holding whatever weight the listed entries do not.
            double listed_w = 0.0, listed_wy = 0.0;
            for (const auto& e : entries) {
                listed_w += w[e.sample];
                listed_wy += w[e.sample] * y[e.sample];
            }
            const bool has_zeros = entries.size() < X.samples();
            const double zero_w = tot.w - listed_w;
            const bool zero_bucket = has_zeros && zero_w > 1e-14 * tot.w;
            buckets.clear();
            bool zero_placed = !zero_bucket;
            for (std::size_t i = 0; i < entries.size();) {
                const double v = entries[i].value;
                if (!zero_placed && v > 0.0) {
                    buckets.push_back(Bucket{0.0, zero_w, tot.wy - listed_wy});
                    zero_placed = true;
                }
                Bucket bk{v, 0.0, 0.0};
                for (; i < entries.size() && entries[i].value == v; ++i) {
                    bk.w += w[entries[i].sample];
                    bk.wy += w[entries[i].sample] * y[entries[i].sample];
                }
                if (bk.w > 0.0) buckets.push_back(bk);
            }
            if (!zero_placed) buckets.push_back(Bucket{0.0, zero_w, tot.wy - listed_wy});
            search_buckets(buckets, tot, active[k], kind, eps, local);
        }
#pragma omp critical
        if (local.better_than(best, eps)) best = local;
    }
    // The constant fit wins ties against any stump.
    if (!(best.err < constant.err - eps)) best = constant;
    return to_fit(best, kind);
}

StumpFit fit_stump(std::span<const FeatureVector> X, std::span<const double> y, const SampleWeights& w) {
    return fit_stump(FeatureColumns(X), y, w, StumpKind::sigmoid);
}

StumpFit fit_stump_indicator(std::span<const FeatureVector> X, std::span<const double> y, const SampleWeights& w) {
    return fit_stump(FeatureColumns(X), y, w, StumpKind::indicator);
}

namespace reference {

StumpFit fit_stump(const std::vector<std::vector<double>>& X, std::span<const double> y, const SampleWeights& w,
                   StumpKind kind) {
    const std::size_t n = X.size();
    check_inputs(n, y, w);
    const Totals tot = totals(y, w);
    if (!(tot.w > 0.0)) throw TrainingError("all sample weights are zero");
    const std::size_t dim = X.front().size();
    const Candidate constant = constant_fit(tot);
    const double eps = tie_eps(tot);
    Candidate best = constant;
    for (std::size_t d = 0; d < dim; ++d) {
        std::vector<double> vals;
        for (std::size_t i = 0; i < n; ++i)
            if (w[i] > 0.0) vals.push_back(X[i][d]);
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        for (double delta : threshold_candidates(vals)) {
            double S = 0.0, Q = 0.0, P = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double s = transfer(kind, X[i][d] - delta);
                S += w[i] * s;
                Q += w[i] * s * s;
                P += w[i] * y[i] * s;
            }
            double a = 0.0, b = 0.0;
            if (!solve_ab(tot.w, S, Q, tot.wy, P, a, b)) continue;
            double err = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const double r = a * transfer(kind, X[i][d] - delta) + b - y[i];
                err += w[i] * r * r;
            }
            const Candidate c{err, d, delta, a, b};
            if (c.better_than(best, eps)) best = c;
        }
    }
    if (!(best.err < constant.err - eps)) best = constant;
    return to_fit(best, kind);
}

}  // namespace reference

SampleWeights update_weights(const SampleWeights& w, std::span<const double> f_values, std::span<const double> y) {
    if (f_values.size() != w.size() || y.size() != w.size())
        throw DimensionError("update_weights: weights, predictions and labels differ in length");
    std::vector<double> next(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) next[i] = w[i] * std::exp(-y[i] * f_values[i]);
    SampleWeights out(std::move(next));
    out.normalize();
    return out;
}

double exponential_loss(std::span<const double> scores, std::span<const double> y) {
    if (scores.size() != y.size()) throw DimensionError("exponential_loss: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) s += std::exp(-y[i] * scores[i]);
    return s;
}

BoostResult train_strong(std::span<const FeatureVector> rows, std::span<const double> y, const BoostOptions& opts) {
    if (opts.rounds < 0) throw ConfigError("boosting rounds must be nonnegative");
    if (rows.size() != y.size()) throw DimensionError("train_strong: rows and labels differ in length");
    const std::size_t n = rows.size();
    BoostResult result;
    result.classifier.rounds = opts.rounds;
    result.train_scores.assign(n, 0.0);
    if (opts.rounds == 0 || n == 0) return result;

    const FeatureColumns cols(rows);
    SampleWeights w = SampleWeights::uniform(n);
    int zero_streak = 0;
    std::vector<double> f(n);
    for (int round = 1; round <= opts.rounds; ++round) {
        StumpFit fit = fit_stump(cols, y, w, opts.kind);
        Stump stump = fit.stump;
        const auto column = cols.column(stump.dim);
        for (std::size_t i = 0; i < n; ++i) f[i] = stump.eval_value(column[i]);

        // The fitted f is a descent direction for the exponential loss; halve
        // it until a full step does not overshoot.
        int shrink = 0;
        auto ratio = [&] {
            double r = 0.0;
            for (std::size_t i = 0; i < n; ++i) r += w[i] * std::exp(-y[i] * f[i]);
            return r;
        };
        while (ratio() > 1.0 && shrink < 60) {
            stump.a *= 0.5;
            stump.b *= 0.5;
            for (double& v : f) v *= 0.5;
            ++shrink;
        }

        w = update_weights(w, f, y);
        int wrong = 0;
        for (std::size_t i = 0; i < n; ++i) {
            result.train_scores[i] += f[i];
            if ((result.train_scores[i] > 0.0 ? 1.0 : -1.0) != y[i]) ++wrong;
        }
        result.classifier.stumps.push_back(stump);
        RoundDiagnostics diag;
        diag.round = round;
        diag.stump = stump;
        diag.weighted_error = fit.weighted_error;
        diag.train_error = static_cast<double>(wrong) / static_cast<double>(n);
        diag.exp_loss = exponential_loss(result.train_scores, y);
        diag.shrink_steps = shrink;
        result.rounds.push_back(diag);

        zero_streak = wrong == 0 ? zero_streak + 1 : 0;
        if (opts.early_stop_rounds > 0 && zero_streak >= opts.early_stop_rounds) break;
    }
    return result;
}

void write_round_csv(const std::filesystem::path& file, std::span<const RoundDiagnostics> rounds) {
    if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
    std::ofstream out(file);
    if (!out) throw DataError("cannot write " + file.string());
    out.precision(17);
    out << "round,dim,threshold,a,b,weighted_error,train_error,exp_loss\n";
    for (const auto& r : rounds)
        out << r.round << ',' << r.stump.dim << ',' << r.stump.threshold << ',' << r.stump.a << ',' << r.stump.b
            << ',' << r.weighted_error << ',' << r.train_error << ',' << r.exp_loss << '\n';
}

}  // namespace deepboost
