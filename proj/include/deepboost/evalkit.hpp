#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace deepboost {

/// K x K counts, rows = true class, columns = predicted class.
using Confusion = std::vector<std::vector<long>>;

Confusion confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int num_classes);

/// trace / total; throws DataError when the matrix is empty or all zero.
double accuracy(const Confusion& confusion);

/// Mean absolute error.
double mae(std::span<const double> truth, std::span<const double> predicted);

/// Percentage of absolute errors <= level.
double cum_score(std::span<const double> abs_errors, double level);

/// cum_score at every integer level 0..max_level.
std::vector<double> cum_score_curve(std::span<const double> abs_errors, int max_level = 10);

struct EvalReport {
    double accuracy = 0.0;
    Confusion confusion;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<std::string> class_names;
    std::optional<double> mae;
    std::vector<double> cum_scores;  ///< levels 0..n-1, empty unless age mode
};

/// Accuracy, confusion and per-class precision/recall. With `ages`, class
/// names are read as integer ages and MAE plus the cumulative-score curve are
/// filled in.
EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                                const std::vector<std::string>& class_names, bool ages = false, int max_level = 10);

std::string report_json(const EvalReport& report);
void write_report(const std::filesystem::path& dir, const EvalReport& report);

}  // namespace deepboost
