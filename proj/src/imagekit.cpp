#include "deepboost/imagekit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <iterator>
#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

#include "deepboost/error.hpp"
#include "deepboost/kernels.hpp"

namespace fs = std::filesystem;

namespace deepboost {

namespace {

constexpr std::size_t kCifarRecord = 3073;
constexpr int kCifarSide = 32;

const std::vector<std::string> kCifarNames = {"airplane", "automobile", "bird",  "cat",  "deer",
                                              "dog",      "frog",       "horse", "ship", "truck"};

bool is_image_extension(const fs::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".png" || ext == ".pgm" || ext == ".jpg" || ext == ".jpeg" || ext == ".bmp" ||
           ext == ".ppm";
}

Matrix to_matrix(const cv::Mat& m) {
    Matrix out(m.rows, m.cols);
    for (int y = 0; y < m.rows; ++y)
        for (int x = 0; x < m.cols; ++x) out(y, x) = m.at<double>(y, x);
    return out;
}

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

}  // namespace

Image::Image(Matrix pixels) : pixels_(std::move(pixels)) {
    for (double v : pixels_.values())
        if (!std::isfinite(v) || v < 0.0 || v > 1.0)
            throw DataError("image value outside [0,1]: " + std::to_string(v));
}

Image::Image(int width, int height, std::vector<double> values)
    : Image(Matrix(height, width, std::move(values))) {}

void LabeledDataset::validate() const {
    if (images.size() != labels.size())
        throw DataError("dataset has " + std::to_string(images.size()) + " images but " +
                        std::to_string(labels.size()) + " labels");
    for (int l : labels)
        if (l < 0 || l >= num_classes()) throw DataError("label " + std::to_string(l) + " out of range");
}

void LabeledDataset::validate_for_multiclass() const {
    validate();
    if (num_classes() < 2)
        throw DataError("multiclass training needs at least 2 classes, dataset has " +
                        std::to_string(num_classes()));
}

double luminance(double r, double g, double b) { return 0.299 * r + 0.587 * g + 0.114 * b; }

Image load_image_file(const fs::path& file, int target_size) {
    if (target_size <= 0) throw ConfigError("target size must be positive");
    cv::Mat raw = cv::imread(file.string(), cv::IMREAD_COLOR);
    if (raw.empty()) throw DataError("cannot decode image " + file.string());
    cv::Mat gray(raw.rows, raw.cols, CV_64F);
    for (int y = 0; y < raw.rows; ++y)
        for (int x = 0; x < raw.cols; ++x) {
            const auto& bgr = raw.at<cv::Vec3b>(y, x);
            gray.at<double>(y, x) = luminance(bgr[2], bgr[1], bgr[0]) / 255.0;
        }
    cv::Mat resized;
    if (gray.rows == target_size && gray.cols == target_size)
        resized = gray;
    else
        cv::resize(gray, resized, cv::Size(target_size, target_size), 0, 0, cv::INTER_AREA);
    Matrix m = to_matrix(resized);
    for (double& v : m.values()) v = clamp01(v);
    return Image(std::move(m));
}

LabeledDataset load_image_dir(const fs::path& root, int target_size) {
    if (!fs::is_directory(root)) throw DataError("not a directory: " + root.string());
    std::vector<fs::path> class_dirs;
    for (const auto& entry : fs::directory_iterator(root))
        if (entry.is_directory()) class_dirs.push_back(entry.path());
    std::sort(class_dirs.begin(), class_dirs.end());
    if (class_dirs.empty()) throw DataError("no class subdirectories under " + root.string());

    LabeledDataset ds;
    for (std::size_t c = 0; c < class_dirs.size(); ++c) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(class_dirs[c]))
            if (entry.is_regular_file() && is_image_extension(entry.path())) files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        const std::string name = class_dirs[c].filename().string();
        int loaded = 0;
        for (const auto& f : files) {
            try {
                ds.images.push_back(load_image_file(f, target_size));
                ds.labels.push_back(static_cast<int>(c));
                ++loaded;
            } catch (const DataError& e) {
                std::cerr << "warning: skipping " << f.string() << ": " << e.what() << "\n";
                ++ds.skipped_files;
            }
        }
        if (loaded == 0) throw DataError("class directory '" + name + "' has no readable images");
        ds.class_names.push_back(name);
    }
    return ds;
}

LabeledDataset decode_cifar10(const std::vector<unsigned char>& bytes) {
    if (bytes.size() % kCifarRecord != 0)
        throw DataError("CIFAR-10 data length " + std::to_string(bytes.size()) +
                        " is not a multiple of 3073");
    LabeledDataset ds;
    ds.class_names = kCifarNames;
    const std::size_t n = bytes.size() / kCifarRecord;
    const std::size_t plane = kCifarSide * kCifarSide;
    ds.images.reserve(n);
    ds.labels.reserve(n);
    for (std::size_t r = 0; r < n; ++r) {
        const unsigned char* rec = bytes.data() + r * kCifarRecord;
        if (rec[0] > 9)
            throw DataError("CIFAR-10 record " + std::to_string(r) + " has label " + std::to_string(rec[0]));
        std::vector<double> px(plane);
        for (std::size_t i = 0; i < plane; ++i)
            px[i] = clamp01(luminance(rec[1 + i], rec[1 + plane + i], rec[1 + 2 * plane + i]) / 255.0);
        ds.images.emplace_back(kCifarSide, kCifarSide, std::move(px));
        ds.labels.push_back(rec[0]);
    }
    return ds;
}

LabeledDataset load_cifar10(const fs::path& path) {
    std::vector<fs::path> files;
    if (fs::is_directory(path)) {
        for (const auto& entry : fs::directory_iterator(path))
            if (entry.is_regular_file() && entry.path().extension() == ".bin") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
    } else {
        files.push_back(path);
    }
    if (files.empty()) throw DataError("no CIFAR-10 batch files under " + path.string());
    std::vector<unsigned char> bytes;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw DataError("cannot open " + f.string());
        std::vector<unsigned char> chunk((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (chunk.size() % kCifarRecord != 0)
            throw DataError(f.string() + ": length " + std::to_string(chunk.size()) +
                            " is not a multiple of 3073");
        bytes.insert(bytes.end(), chunk.begin(), chunk.end());
    }
    return decode_cifar10(bytes);
}

ResponseMap convolve_valid(const Image& image, const Matrix& kernel) {
    if (kernel.rows() != kernel.cols()) throw DimensionError("kernel must be square");
    return kernels::correlate_valid(image.pixels(), kernel);
}

void write_png(const fs::path& file, const Matrix& values) {
    cv::Mat out(values.rows(), values.cols(), CV_8U);
    for (int y = 0; y < values.rows(); ++y)
        for (int x = 0; x < values.cols(); ++x)
            out.at<unsigned char>(y, x) = static_cast<unsigned char>(std::lround(clamp01(values(y, x)) * 255.0));
    if (file.has_parent_path()) fs::create_directories(file.parent_path());
    if (!cv::imwrite(file.string(), out)) throw DataError("cannot write " + file.string());
}

}  // namespace deepboost
