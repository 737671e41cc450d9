#pragma once

#include "solar/network.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace solar {

/// [1, sqrt(2), 1/sqrt(2)]
std::vector<double> default_scales();

/// Axis-aligned box [x0, y0, x1) x [y0, y1) in pixel coordinates.
struct BoundingBox {
    double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

/// Crop rounded outward to whole pixels and clamped to the image.
Image crop(const Image& image, const BoundingBox& box);

/// Bilinear resampling with half-pixel centres.
Image resize_bilinear(const Image& image, int height, int width);

/// Resize by `scale`; output size is round(H*scale) x round(W*scale).
Image rescale(const Image& image, double scale);

/// l2_normalize(whiten(gem_pool(clip_features(backbone(image))))).
Descriptor global_descriptor(const Image& image, const DescriptorModel& model, ForwardTrace* trace = nullptr);

/// Mean of the per-scale descriptors, re-normalized. A single scale returns
/// that scale's descriptor unchanged.
Descriptor multi_scale_descriptor(const Image& image, const DescriptorModel& model, std::span<const double> scales);

/// Runs fn(i) for i in [0, n) across hardware threads. Results must be written
/// to per-index slots by the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

/// Descriptors of many images against one immutable model, one row per image.
Matrix extract_descriptors(std::span<const Image> images, const DescriptorModel& model, std::span<const double> scales);

}  // namespace solar
