#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace solar {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

/// Activations of shape h x w x d. Stored as an (h*w) x d matrix whose row
/// index is the flattened location r*w + c.
class FeatureMap {
public:
    FeatureMap() = default;
    FeatureMap(int height, int width, int channels);
    FeatureMap(int height, int width, Matrix data);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return static_cast<int>(data_.cols()); }
    int locations() const { return height_ * width_; }

    double& at(int r, int c, int ch) { return data_(r * width_ + c, ch); }
    double at(int r, int c, int ch) const { return data_(r * width_ + c, ch); }

    Matrix& data() { return data_; }
    const Matrix& data() const { return data_; }

    bool same_shape(const FeatureMap& other) const;

private:
    int height_ = 0;
    int width_ = 0;
    Matrix data_;
};

/// Pixel array H x W x c with c in {1, 3} and values in [0, 1].
class Image {
public:
    Image() = default;
    Image(int height, int width, int channels);

    int height() const { return height_; }
    int width() const { return width_; }
    int channels() const { return channels_; }

    double& at(int r, int c, int ch) { return pixels_[(static_cast<std::size_t>(r) * width_ + c) * channels_ + ch]; }
    double at(int r, int c, int ch) const { return pixels_[(static_cast<std::size_t>(r) * width_ + c) * channels_ + ch]; }

    const std::vector<double>& pixels() const { return pixels_; }
    std::vector<double>& pixels() { return pixels_; }

    /// Pixels as a feature map with one channel per colour plane.
    FeatureMap as_feature_map() const;

private:
    int height_ = 0;
    int width_ = 0;
    int channels_ = 0;
    std::vector<double> pixels_;
};

}  // namespace solar
