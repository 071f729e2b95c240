#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "deepboost/features.hpp"

namespace deepboost {

/// Regression stump f(x) = a * s(x[dim] - threshold) + b, where s is the
/// logistic sigmoid (production) or the step 1[x > 0] (indicator variant).
struct Stump {
    std::size_t dim = 0;
    double threshold = 0.0;
    double a = 0.0;
    double b = 0.0;
    bool indicator = false;

    double eval_value(double x) const;
    double eval(const FeatureVector& x) const;
    bool operator==(const Stump&) const = default;
};

/// Additive ensemble F(x) = sum of stump outputs.
struct StrongClassifier {
    std::vector<Stump> stumps;
    int rounds = 0;  ///< round budget the ensemble was trained with

    double score(const FeatureVector& x) const;
    bool operator==(const StrongClassifier&) const = default;
};

class SampleWeights {
public:
    SampleWeights() = default;
    explicit SampleWeights(std::vector<double> w);
    static SampleWeights uniform(std::size_t n);

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const { return w_; }
    double sum() const;
    /// Rescales to unit sum; throws TrainingError when the total is zero or not finite.
    void normalize();

private:
    std::vector<double> w_;
};

enum class StumpKind { sigmoid, indicator };

inline constexpr int kMaxThresholdCandidates = 64;

struct StumpFit {
    Stump stump;
    double weighted_error = 0.0;  ///< sum_i w_i (f(x_i) - y_i)^2 with the weights as given
};

/// Column-major view of sparse training rows, built once per boosting run.
class FeatureColumns {
public:
    FeatureColumns(std::span<const FeatureVector> rows);

    std::size_t dim() const { return dim_; }
    std::size_t samples() const { return samples_; }
    /// x_i^d for every sample.
    std::vector<double> column(std::size_t d) const;

    struct Entry {
        std::uint32_t sample;
        double value;
    };
    /// Nonzero entries of active dimension `k`, sorted by value then sample.
    std::span<const Entry> entries(std::size_t k) const;
    std::span<const std::uint32_t> active_dims() const { return active_; }

private:
    std::size_t dim_ = 0;
    std::size_t samples_ = 0;
    std::vector<std::uint32_t> active_;
    std::vector<std::size_t> start_;
    std::vector<Entry> entries_;
};

/// Weighted least-squares stump search over every dimension and up to 64
/// threshold candidates per dimension (midpoints between distinct observed
/// values with positive weight, thinned evenly when there are more). (a, b)
/// are solved in closed form. The best constant predictor (a = 0) is always
/// a candidate; ties go to the lowest dimension, then the lowest threshold.
StumpFit fit_stump(const FeatureColumns& X, std::span<const double> y, const SampleWeights& w,
                   StumpKind kind = StumpKind::sigmoid);
StumpFit fit_stump(std::span<const FeatureVector> X, std::span<const double> y, const SampleWeights& w);
StumpFit fit_stump_indicator(std::span<const FeatureVector> X, std::span<const double> y, const SampleWeights& w);

namespace reference {
/// Serial dense brute-force search over rows x[i][d]; same candidate rule.
StumpFit fit_stump(const std::vector<std::vector<double>>& X, std::span<const double> y,
                   const SampleWeights& w, StumpKind kind = StumpKind::sigmoid);
}  // namespace reference

/// Threshold candidates from sorted distinct values, at most kMaxThresholdCandidates.
std::vector<double> threshold_candidates(std::span<const double> sorted_distinct);

/// w_i <- w_i exp(-y_i f_i), renormalized.
SampleWeights update_weights(const SampleWeights& w, std::span<const double> f_values, std::span<const double> y);

struct RoundDiagnostics {
    int round = 0;
    Stump stump;
    double weighted_error = 0.0;
    double train_error = 0.0;  ///< misclassification rate of sign(F) after this round
    double exp_loss = 0.0;     ///< sum_i exp(-y_i F(x_i)) after this round
    int shrink_steps = 0;      ///< halvings applied so the exponential loss does not rise
};

struct BoostResult {
    StrongClassifier classifier;
    std::vector<RoundDiagnostics> rounds;
    std::vector<double> train_scores;  ///< F(x_i) at the end
};

struct BoostOptions {
    int rounds = 50;
    StumpKind kind = StumpKind::sigmoid;
    int early_stop_rounds = 3;  ///< consecutive zero-error rounds before stopping
};

/// Gentle AdaBoost over `rows` with labels in {-1, +1}.
BoostResult train_strong(std::span<const FeatureVector> rows, std::span<const double> y, const BoostOptions& opts);

/// Sum_i exp(-y_i scores_i).
double exponential_loss(std::span<const double> scores, std::span<const double> y);

void write_round_csv(const std::filesystem::path& file, std::span<const RoundDiagnostics> rounds);

}  // namespace deepboost
