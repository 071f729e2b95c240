#include "deepboost/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "deepboost/error.hpp"

namespace deepboost {

Matrix min_max_stretch(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    const double lo = m.min();
    const double hi = m.max();
    if (!(hi > lo)) return out;
    auto src = m.values();
    auto dst = out.values();
    for (std::size_t i = 0; i < src.size(); ++i) dst[i] = (src[i] - lo) / (hi - lo);
    return out;
}

Matrix render_filter_grid(std::span<const Filter> filters, int scale) {
    if (filters.empty()) return Matrix(1, 1);
    const int k = filters.front().kernel.rows();
    const int n = static_cast<int>(filters.size());
    const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
    const int rows = (n + cols - 1) / cols;
    const int tile = k * scale;
    Matrix grid(rows * (tile + 1) + 1, cols * (tile + 1) + 1, 0.5);
    for (int i = 0; i < n; ++i) {
        const Matrix s = min_max_stretch(filters[i].kernel);
        const int oy = 1 + (i / cols) * (tile + 1);
        const int ox = 1 + (i % cols) * (tile + 1);
        for (int y = 0; y < tile; ++y)
            for (int x = 0; x < tile; ++x) grid(oy + y, ox + x) = s(y / scale, x / scale);
    }
    return grid;
}

Matrix render_similarity(std::span<const Filter> filters, int scale) {
    const Matrix d = distance_matrix(filters);
    const double hi = d.max();
    Matrix out(d.rows() * scale, d.cols() * scale);
    for (int y = 0; y < out.rows(); ++y)
        for (int x = 0; x < out.cols(); ++x) out(y, x) = hi > 0.0 ? d(y / scale, x / scale) / hi : 0.0;
    return out;
}

TemplateRender render_template(const ClassModel& model, int layer, int canvas_size, int image_size) {
    if (layer < 1 || layer > static_cast<int>(model.layers.size()))
        throw DataError("layer " + std::to_string(layer) + " is not trained (model has " +
                        std::to_string(model.layers.size()) + ")");
    if (canvas_size < 1 || image_size < 1) throw ConfigError("canvas and image sizes must be positive");
    const LayerModel& lm = model.layers[layer - 1];
    TemplateRender out{Matrix(canvas_size, canvas_size), lm.placements.empty()};
    const double scale = static_cast<double>(canvas_size) / image_size;
    for (const auto& p : lm.placements) {
        const int m = lm.dictionary.index_of(p.filter_id);
        if (m < 0) throw DataError("placement references unknown filter " + std::to_string(p.filter_id));
        const Matrix s = min_max_stretch(lm.dictionary.filters[m].kernel);
        const int oy = static_cast<int>(std::lround(p.h * scale));
        const int ox = static_cast<int>(std::lround(p.w * scale));
        for (int y = 0; y < s.rows(); ++y)
            for (int x = 0; x < s.cols(); ++x) {
                const int cy = oy + y, cx = ox + x;
                if (cy >= 0 && cy < canvas_size && cx >= 0 && cx < canvas_size) out.canvas(cy, cx) += s(y, x);
            }
    }
    for (double& v : out.canvas.values()) v = std::clamp(v, 0.0, 1.0);
    return out;
}

Matrix render_curve(std::span<const double> values, double y_min, double y_max, int width, int height) {
    Matrix img(height, width, 1.0);
    if (values.empty() || !(y_max > y_min)) return img;
    const int margin = 10;
    auto to_px = [&](std::size_t i, double v) {
        const double fx = values.size() > 1 ? static_cast<double>(i) / (values.size() - 1) : 0.0;
        const double fy = std::clamp((v - y_min) / (y_max - y_min), 0.0, 1.0);
        return std::pair<int, int>{margin + static_cast<int>(std::lround(fx * (width - 2 * margin - 1))),
                                   height - 1 - margin - static_cast<int>(std::lround(fy * (height - 2 * margin - 1)))};
    };
    for (int x = margin; x < width - margin; ++x) img(height - 1 - margin, x) = 0.6;
    for (int y = margin; y < height - margin; ++y) img(y, margin) = 0.6;
    for (std::size_t i = 0; i + 1 < values.size() || (values.size() == 1 && i == 0); ++i) {
        auto [x0, y0] = to_px(i, values[i]);
        auto [x1, y1] = values.size() > 1 ? to_px(i + 1, values[i + 1]) : std::pair<int, int>{x0, y0};
        // Bresenham
        const int dx = std::abs(x1 - x0), sx = x0 < x1 ? 1 : -1;
        const int dy = -std::abs(y1 - y0), sy = y0 < y1 ? 1 : -1;
        int err = dx + dy;
        while (true) {
            img(y0, x0) = 0.0;
            if (x0 == x1 && y0 == y1) break;
            const int e2 = 2 * err;
            if (e2 >= dy) {
                err += dy;
                x0 += sx;
            }
            if (e2 <= dx) {
                err += dx;
                y0 += sy;
            }
        }
        if (values.size() == 1) break;
    }
    return img;
}

}  // namespace deepboost
