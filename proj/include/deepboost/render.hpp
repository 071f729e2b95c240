#pragma once

#include <span>
#include <vector>

#include "deepboost/deepmodel.hpp"
#include "deepboost/filters.hpp"

namespace deepboost {

/// Rescales to [0,1]; a constant matrix becomes all zeros.
Matrix min_max_stretch(const Matrix& m);

/// Stretched kernels tiled in a near-square grid, each enlarged `scale` times,
/// separated by one-pixel gaps.
Matrix render_filter_grid(std::span<const Filter> filters, int scale = 4);

/// Pairwise kernel distances mapped to intensity (0 = identical).
Matrix render_similarity(std::span<const Filter> filters, int scale = 4);

struct TemplateRender {
    Matrix canvas;
    bool blank = false;  ///< the layer selected no features
};

/// Adds each selected filter's stretched kernel at its recorded placement,
/// then clamps to [0,1]. Placements live on an `image_size` lattice and are
/// scaled to the canvas.
TemplateRender render_template(const ClassModel& model, int layer, int canvas_size, int image_size);

/// Polyline of `values` (x = index) on a white canvas with a black curve.
Matrix render_curve(std::span<const double> values, double y_min, double y_max, int width = 320, int height = 240);

}  // namespace deepboost
