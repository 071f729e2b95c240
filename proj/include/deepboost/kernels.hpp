#pragma once

// Data-parallel inner loops. Every kernel has a plain serial version in
// `kernels::reference` that the tests and the benchmark compare against. The
// OpenMP versions are deterministic for any thread count; the correlation
// kernels are bit-identical to the reference, patch_gram agrees to rounding.

#include <span>
#include <vector>

#include "deepboost/matrix.hpp"

namespace deepboost::kernels {

namespace reference {

/// Valid-mode correlation (no kernel flip, no padding).
Matrix correlate_valid(const Matrix& image, const Matrix& kernel);

/// out(u,v) = sum_{y,x} response(y,x) * image(y+u, x+v); the adjoint of
/// correlate_valid with respect to the kernel.
Matrix correlate_adjoint(const Matrix& image, const Matrix& response);

/// Sum over all images and all valid k x k patches p of p p^T (row-major patch order).
Matrix patch_gram(std::span<const Matrix* const> images, int k);

}  // namespace reference

Matrix correlate_valid(const Matrix& image, const Matrix& kernel);
std::vector<Matrix> correlate_bank(const Matrix& image, std::span<const Matrix> kernels);
Matrix correlate_adjoint(const Matrix& image, const Matrix& response);
Matrix patch_gram(std::span<const Matrix* const> images, int k);

/// Sets the OpenMP worker count used by every parallel kernel (<= 0 keeps the default).
void set_num_threads(int n);
int max_threads();

}  // namespace deepboost::kernels
