#include "deepboost/kernels.hpp"

#include <omp.h>

#include <string>

#include "deepboost/error.hpp"

namespace deepboost::kernels {

namespace {

void check_fits(const Matrix& image, int kh, int kw) {
    if (kh > image.rows() || kw > image.cols() || kh <= 0 || kw <= 0)
        throw DimensionError("kernel " + std::to_string(kh) + "x" + std::to_string(kw) +
                             " does not fit image " + std::to_string(image.rows()) + "x" +
                             std::to_string(image.cols()));
}

inline double patch_dot(const Matrix& image, const Matrix& kernel, int y, int x) {
    double acc = 0.0;
    for (int u = 0; u < kernel.rows(); ++u)
        for (int v = 0; v < kernel.cols(); ++v) acc += kernel(u, v) * image(y + u, x + v);
    return acc;
}

void add_patch_outer(const Matrix& image, int k, Matrix& gram, std::vector<double>& patch) {
    const int n = k * k;
    for (int y = 0; y + k <= image.rows(); ++y)
        for (int x = 0; x + k <= image.cols(); ++x) {
            for (int u = 0; u < k; ++u)
                for (int v = 0; v < k; ++v) patch[u * k + v] = image(y + u, x + v);
            for (int a = 0; a < n; ++a) {
                const double pa = patch[a];
                for (int b = a; b < n; ++b) gram(a, b) += pa * patch[b];
            }
        }
}

void mirror_upper(Matrix& gram) {
    for (int a = 0; a < gram.rows(); ++a)
        for (int b = 0; b < a; ++b) gram(a, b) = gram(b, a);
}

}  // namespace

namespace reference {

Matrix correlate_valid(const Matrix& image, const Matrix& kernel) {
    check_fits(image, kernel.rows(), kernel.cols());
    Matrix out(image.rows() - kernel.rows() + 1, image.cols() - kernel.cols() + 1);
    for (int y = 0; y < out.rows(); ++y)
        for (int x = 0; x < out.cols(); ++x) out(y, x) = patch_dot(image, kernel, y, x);
    return out;
}

Matrix correlate_adjoint(const Matrix& image, const Matrix& response) {
    const int kh = image.rows() - response.rows() + 1;
    const int kw = image.cols() - response.cols() + 1;
    check_fits(image, kh, kw);
    Matrix out(kh, kw);
    for (int u = 0; u < kh; ++u)
        for (int v = 0; v < kw; ++v) {
            double acc = 0.0;
            for (int y = 0; y < response.rows(); ++y)
                for (int x = 0; x < response.cols(); ++x) acc += response(y, x) * image(y + u, x + v);
            out(u, v) = acc;
        }
    return out;
}

Matrix patch_gram(std::span<const Matrix* const> images, int k) {
    Matrix gram(k * k, k * k);
    std::vector<double> patch(static_cast<std::size_t>(k) * k);
    for (const Matrix* img : images) {
        check_fits(*img, k, k);
        add_patch_outer(*img, k, gram, patch);
    }
    mirror_upper(gram);
    return gram;
}

}  // namespace reference

Matrix correlate_valid(const Matrix& image, const Matrix& kernel) {
    check_fits(image, kernel.rows(), kernel.cols());
    Matrix out(image.rows() - kernel.rows() + 1, image.cols() - kernel.cols() + 1);
    const int rows = out.rows();
    const int cols = out.cols();
#pragma omp parallel for schedule(static) if (rows * cols > 4096)
    for (int y = 0; y < rows; ++y)
        for (int x = 0; x < cols; ++x) out(y, x) = patch_dot(image, kernel, y, x);
    return out;
}

std::vector<Matrix> correlate_bank(const Matrix& image, std::span<const Matrix> kernels) {
    for (const auto& k : kernels) check_fits(image, k.rows(), k.cols());
    std::vector<Matrix> out(kernels.size());
    const int m = static_cast<int>(kernels.size());
#pragma omp parallel for schedule(static)
    for (int i = 0; i < m; ++i) out[i] = reference::correlate_valid(image, kernels[i]);
    return out;
}

Matrix correlate_adjoint(const Matrix& image, const Matrix& response) {
    const int kh = image.rows() - response.rows() + 1;
    const int kw = image.cols() - response.cols() + 1;
    check_fits(image, kh, kw);
    Matrix out(kh, kw);
#pragma omp parallel for collapse(2) schedule(static)
    for (int u = 0; u < kh; ++u)
        for (int v = 0; v < kw; ++v) {
            double acc = 0.0;
            for (int y = 0; y < response.rows(); ++y)
                for (int x = 0; x < response.cols(); ++x) acc += response(y, x) * image(y + u, x + v);
            out(u, v) = acc;
        }
    return out;
}

Matrix patch_gram(std::span<const Matrix* const> images, int k) {
    for (const Matrix* img : images) check_fits(*img, k, k);
    const int n = static_cast<int>(images.size());
    // One partial Gram per image, summed afterwards in image order so the
    // result does not depend on the thread schedule.
    std::vector<Matrix> partial(images.size());
#pragma omp parallel
    {
        std::vector<double> patch(static_cast<std::size_t>(k) * k);
#pragma omp for schedule(static)
        for (int i = 0; i < n; ++i) {
            partial[i] = Matrix(k * k, k * k);
            add_patch_outer(*images[i], k, partial[i], patch);
        }
    }
    Matrix gram(k * k, k * k);
    for (const auto& p : partial) gram += p;
    mirror_upper(gram);
    return gram;
}

void set_num_threads(int n) {
    if (n > 0) omp_set_num_threads(n);
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace deepboost::kernels
