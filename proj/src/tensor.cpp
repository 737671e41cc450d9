#include "solar/tensor.hpp"

#include "solar/errors.hpp"

#include <string>

namespace solar {

FeatureMap::FeatureMap(int height, int width, int channels)
    : height_(height), width_(width) {
    if (height < 1 || width < 1 || channels < 1) {
        throw ValidationError("feature map dimensions must be positive, got " + std::to_string(height) + "x" +
                              std::to_string(width) + "x" + std::to_string(channels));
    }
    data_ = Matrix::Zero(static_cast<Eigen::Index>(height) * width, channels);
}

FeatureMap::FeatureMap(int height, int width, Matrix data)
    : height_(height), width_(width), data_(std::move(data)) {
    if (height < 1 || width < 1 || data_.cols() < 1) {
        throw ValidationError("feature map dimensions must be positive");
    }
    if (data_.rows() != static_cast<Eigen::Index>(height) * width) {
        throw ValidationError("feature map data has " + std::to_string(data_.rows()) + " rows, expected " +
                              std::to_string(height * width));
    }
}

bool FeatureMap::same_shape(const FeatureMap& other) const {
    return height_ == other.height_ && width_ == other.width_ && channels() == other.channels();
}

Image::Image(int height, int width, int channels)
    : height_(height), width_(width), channels_(channels) {
    if (height < 1 || width < 1) {
        throw ValidationError("image dimensions must be positive");
    }
    if (channels != 1 && channels != 3) {
        throw ValidationError("image must have 1 or 3 channels, got " + std::to_string(channels));
    }
    pixels_.assign(static_cast<std::size_t>(height) * width * channels, 0.0);
}

FeatureMap Image::as_feature_map() const {
    FeatureMap f(height_, width_, channels_);
    for (int r = 0; r < height_; ++r) {
        for (int c = 0; c < width_; ++c) {
            for (int ch = 0; ch < channels_; ++ch) {
                f.at(r, c, ch) = at(r, c, ch);
            }
        }
    }
    return f;
}

}  // namespace solar
