#include "deepboost/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "deepboost/error.hpp"

namespace deepboost {

Matrix::Matrix(int rows, int cols, double fill)
    : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols, fill) {
    if (rows < 0 || cols < 0) throw DimensionError("negative matrix dimension");
}

Matrix::Matrix(int rows, int cols, std::vector<double> values)
    : rows_(rows), cols_(cols), data_(std::move(values)) {
    if (rows < 0 || cols < 0 || data_.size() != static_cast<std::size_t>(rows) * cols)
        throw DimensionError("matrix storage does not match " + std::to_string(rows) + "x" +
                             std::to_string(cols));
}

double Matrix::sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Matrix::mean() const { return data_.empty() ? 0.0 : sum() / static_cast<double>(data_.size()); }

double Matrix::squared_norm() const {
    double s = 0.0;
    for (double v : data_) s += v * v;
    return s;
}

double Matrix::min() const { return data_.empty() ? 0.0 : *std::min_element(data_.begin(), data_.end()); }
double Matrix::max() const { return data_.empty() ? 0.0 : *std::max_element(data_.begin(), data_.end()); }

Matrix& Matrix::operator+=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("matrix shape mismatch in +");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    if (rows_ != other.rows_ || cols_ != other.cols_) throw DimensionError("matrix shape mismatch in -");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

double l2_distance(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) throw DimensionError("l2_distance shape mismatch");
    double s = 0.0;
    auto av = a.values();
    auto bv = b.values();
    for (std::size_t i = 0; i < av.size(); ++i) {
        double d = av[i] - bv[i];
        s += d * d;
    }
    return std::sqrt(s);
}

}  // namespace deepboost
