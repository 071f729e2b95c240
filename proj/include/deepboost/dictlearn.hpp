#pragma once

#include <filesystem>
#include <set>
#include <span>
#include <vector>

#include "deepboost/boosting.hpp"
#include "deepboost/features.hpp"
#include "deepboost/filters.hpp"

namespace deepboost {

using ImageRefs = std::vector<const Image*>;

struct JointConfig {
    double lambda = 0.1;
    double eta = 0.01;  ///< initial gradient step
    int grad_steps = 10;
    int outer_iters = 5;
    double tol = 1e-3;  ///< relative objective decrease that counts as converged
    int rounds = 50;    ///< boosting rounds per outer iteration
    int bins = kDefaultBins;
    int backtrack_halvings = 20;
    bool normalize_responses = true;  ///< response normalization (layer 1)

    void validate() const;
};

struct ObjectiveRecord {
    int iteration = 0;
    double empirical = 0.0;    ///< 1/2 sum_i exp(-y_i F(x_i))
    double regularizer = 0.0;  ///< sum over negatives and filters of ||g * I||^2
    double total = 0.0;        ///< empirical + lambda * regularizer
    int boosting_rounds = 0;
    double train_error = 0.0;
};

/// Where a selected filter fires most strongly on the reference positive image.
struct TemplatePlacement {
    int filter_id = 0;
    int w = 0;
    int h = 0;
    bool operator==(const TemplatePlacement&) const = default;
};

struct LayerModel {
    AnalysisDictionary dictionary;
    StrongClassifier classifier;
    FeatureLayout layout;
    bool normalize_responses = true;
    std::vector<int> selected_ids;
    std::vector<ObjectiveRecord> trace;
    std::vector<RoundDiagnostics> rounds;  ///< diagnostics of the final boosting pass
    std::vector<TemplatePlacement> placements;
    bool stalled = false;

    /// Feature vector of `image` under this layer's dictionary and bin edges.
    FeatureVector features(const Image& image) const;
    double score(const Image& image) const { return classifier.score(features(image)); }
};

/// sum over negatives and filters of the squared Frobenius norm of the valid
/// correlation response.
double reg_loss(const AnalysisDictionary& dict, const ImageRefs& negatives);

/// d reg_loss / d g for every filter whose id is in `selected`; zero for the rest.
std::vector<Matrix> reg_gradient(const AnalysisDictionary& dict, const std::set<int>& selected,
                                 const ImageRefs& negatives);

/// reg_loss and its gradient as quadratic forms g^T H g and 2 H g in the Gram
/// matrix H of all k x k negative patches. Built once per negative set.
class NegativeGram {
public:
    NegativeGram(const ImageRefs& negatives, int k);

    int kernel_size() const { return k_; }
    const Matrix& gram() const { return gram_; }
    double filter_loss(const Matrix& kernel) const;
    Matrix filter_gradient(const Matrix& kernel) const;
    double loss(const AnalysisDictionary& dict) const;

private:
    int k_;
    Matrix gram_;
};

struct FilterUpdate {
    AnalysisDictionary dictionary;
    bool stalled = false;
    double loss_before = 0.0;
    double loss_after = 0.0;
    double eta = 0.0;  ///< step size after backtracking
    int steps = 0;
};

/// grad_steps steps of g <- g - eta * lambda * grad on the selected filters,
/// halving eta (up to backtrack_halvings times per step) until reg_loss
/// strictly drops. If a step cannot be made, the input comes back unchanged
/// with `stalled` set.
FilterUpdate update_filters(const AnalysisDictionary& dict, const std::set<int>& selected,
                            const ImageRefs& negatives, const JointConfig& config);
FilterUpdate update_filters(const AnalysisDictionary& dict, const std::set<int>& selected, const NegativeGram& gram,
                            const JointConfig& config);

/// Objective value given trained scores and a regularizer value.
ObjectiveRecord objective_terms(std::span<const double> scores, std::span<const double> y, double reg, double lambda);

/// Full objective: features of every image under `dict`, the classifier's
/// exponential loss over positives (+1) and negatives (-1), plus lambda * reg_loss.
double objective(const AnalysisDictionary& dict, const StrongClassifier& classifier, const FeatureLayout& layout,
                 const ImageRefs& positives, const ImageRefs& negatives, double lambda, bool normalize);

/// Alternates boosting on the current dictionary's features with gradient
/// updates of the selected filters until the objective's relative decrease
/// falls below tol, outer_iters is reached, or an update stalls.
LayerModel joint_train_layer(const ImageRefs& positives, const ImageRefs& negatives,
                             const AnalysisDictionary& dictionary, const JointConfig& config);

void write_trace_csv(const std::filesystem::path& file, std::span<const ObjectiveRecord> trace);

}  // namespace deepboost
