#include "deepboost/evalkit.hpp"

#include <cmath>
#include <fstream>
#include "json.hpp"

#include "deepboost/error.hpp"
#include "deepboost/imagekit.hpp"
#include "deepboost/render.hpp"

namespace deepboost {

Confusion confusion_matrix(std::span<const int> truth, std::span<const int> predicted, int num_classes) {
    if (truth.size() != predicted.size()) throw DimensionError("truth and predictions differ in length");
    Confusion c(num_classes, std::vector<long>(num_classes, 0));
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] < 0 || truth[i] >= num_classes || predicted[i] < 0 || predicted[i] >= num_classes)
            throw DataError("class index out of range in confusion matrix");
        ++c[truth[i]][predicted[i]];
    }
    return c;
}

double accuracy(const Confusion& confusion) {
    long total = 0, hit = 0;
    for (std::size_t r = 0; r < confusion.size(); ++r) {
        if (confusion[r].size() != confusion.size()) throw DimensionError("confusion matrix is not square");
        for (std::size_t c = 0; c < confusion[r].size(); ++c) {
            total += confusion[r][c];
            if (r == c) hit += confusion[r][c];
        }
    }
    if (total == 0) throw DataError("confusion matrix is empty");
    return static_cast<double>(hit) / static_cast<double>(total);
}

double mae(std::span<const double> truth, std::span<const double> predicted) {
    if (truth.size() != predicted.size()) throw DimensionError("mae: length mismatch");
    if (truth.empty()) throw DataError("mae needs at least one sample");
    double s = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) s += std::abs(truth[i] - predicted[i]);
    return s / static_cast<double>(truth.size());
}

double cum_score(std::span<const double> abs_errors, double level) {
    if (abs_errors.empty()) throw DataError("cum_score needs at least one error");
    if (level < 0.0) throw DataError("cum_score level must be >= 0");
    std::size_t hit = 0;
    for (double e : abs_errors)
        if (e <= level) ++hit;
    return 100.0 * static_cast<double>(hit) / static_cast<double>(abs_errors.size());
}

std::vector<double> cum_score_curve(std::span<const double> abs_errors, int max_level) {
    std::vector<double> out;
    for (int l = 0; l <= max_level; ++l) out.push_back(cum_score(abs_errors, l));
    return out;
}

EvalReport evaluate_predictions(std::span<const int> truth, std::span<const int> predicted,
                                const std::vector<std::string>& class_names, bool ages, int max_level) {
    const int k = static_cast<int>(class_names.size());
    EvalReport rep;
    rep.class_names = class_names;
    rep.confusion = confusion_matrix(truth, predicted, k);
    rep.accuracy = accuracy(rep.confusion);
    rep.precision.assign(k, 0.0);
    rep.recall.assign(k, 0.0);
    for (int c = 0; c < k; ++c) {
        long tp = rep.confusion[c][c], row = 0, col = 0;
        for (int j = 0; j < k; ++j) {
            row += rep.confusion[c][j];
            col += rep.confusion[j][c];
        }
        rep.precision[c] = col ? static_cast<double>(tp) / col : 0.0;
        rep.recall[c] = row ? static_cast<double>(tp) / row : 0.0;
    }
    if (ages) {
        std::vector<double> age(k);
        for (int c = 0; c < k; ++c) {
            try {
                age[c] = std::stod(class_names[c]);
            } catch (const std::exception&) {
                throw DataError("class name '" + class_names[c] + "' is not an age");
            }
        }
        std::vector<double> t, p, err;
        for (std::size_t i = 0; i < truth.size(); ++i) {
            t.push_back(age[truth[i]]);
            p.push_back(age[predicted[i]]);
            err.push_back(std::abs(t.back() - p.back()));
        }
        rep.mae = mae(t, p);
        rep.cum_scores = cum_score_curve(err, max_level);
    }
    return rep;
}

std::string report_json(const EvalReport& report) {
    nlohmann::json j;
    j["accuracy"] = report.accuracy;
    j["confusion"] = report.confusion;
    j["class_names"] = report.class_names;
    j["precision"] = report.precision;
    j["recall"] = report.recall;
    if (report.mae) j["mae"] = *report.mae;
    if (!report.cum_scores.empty()) j["cum_scores"] = report.cum_scores;
    return j.dump(2);
}

void write_report(const std::filesystem::path& dir, const EvalReport& report) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "report.json");
        if (!out) throw DataError("cannot write " + (dir / "report.json").string());
        out << report_json(report) << "\n";
    }
    {
        std::ofstream out(dir / "confusion.csv");
        for (const auto& row : report.confusion) {
            for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << row[c];
            out << "\n";
        }
    }
    if (!report.cum_scores.empty()) {
        std::ofstream out(dir / "cum_score.csv");
        out << "level,cum_score\n";
        for (std::size_t l = 0; l < report.cum_scores.size(); ++l) out << l << ',' << report.cum_scores[l] << "\n";
        write_png(dir / "cum_score.png", render_curve(report.cum_scores, 0.0, 100.0));
    }
}

}  // namespace deepboost
