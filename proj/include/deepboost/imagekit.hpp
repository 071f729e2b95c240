#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "deepboost/matrix.hpp"

namespace deepboost {

/// Grayscale image with values in [0,1], row-major.
class Image {
public:
    Image() = default;
    /// Throws DataError if any value is non-finite or outside [0,1].
    explicit Image(Matrix pixels);
    Image(int width, int height, std::vector<double> values);

    int width() const { return pixels_.cols(); }
    int height() const { return pixels_.rows(); }
    const Matrix& pixels() const { return pixels_; }
    double operator()(int y, int x) const { return pixels_(y, x); }

    bool operator==(const Image&) const = default;

private:
    Matrix pixels_;
};

/// Signed filter responses of one kernel over the valid lattice of an image.
using ResponseMap = Matrix;

struct LabeledDataset {
    std::vector<Image> images;
    std::vector<int> labels;  ///< zero-based index into class_names
    std::vector<std::string> class_names;
    int skipped_files = 0;  ///< unreadable files skipped by the directory loader

    std::size_t size() const { return images.size(); }
    int num_classes() const { return static_cast<int>(class_names.size()); }

    /// Checks |images| = |labels| and that every label is in range.
    void validate() const;
    /// validate() plus K >= 2.
    void validate_for_multiclass() const;
};

/// 0.299 R + 0.587 G + 0.114 B, inputs and output in the same units.
double luminance(double r, double g, double b);

/// Reads `<root>/<class>/*.{png,pgm,jpg,...}`. Classes are labelled in sorted
/// directory-name order; every image is converted to luminance and resized to
/// target_size x target_size.
LabeledDataset load_image_dir(const std::filesystem::path& root, int target_size);

/// Decodes a single image file the same way load_image_dir does.
Image load_image_file(const std::filesystem::path& file, int target_size);

/// Reads CIFAR-10 binary batches (1 label byte + 3072 channel-planar bytes per
/// record). `path` may be one batch file or a directory of `*.bin` batches.
LabeledDataset load_cifar10(const std::filesystem::path& path);

/// Decodes CIFAR-10 records from an in-memory buffer.
LabeledDataset decode_cifar10(const std::vector<unsigned char>& bytes);

/// Valid-mode correlation of a square kernel over the image (no kernel flip,
/// no padding). Output is (height-k+1) x (width-k+1).
ResponseMap convolve_valid(const Image& image, const Matrix& kernel);

/// Writes an 8-bit grayscale image, values clamped to [0,1].
void write_png(const std::filesystem::path& file, const Matrix& values);

}  // namespace deepboost
