#include "solar/pipeline.hpp"

#include "solar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

namespace solar {

std::vector<double> default_scales() { return {1.0, std::sqrt(2.0), 1.0 / std::sqrt(2.0)}; }

Image crop(const Image& image, const BoundingBox& box) {
    const int x0 = std::clamp(static_cast<int>(std::floor(box.x0)), 0, image.width());
    const int y0 = std::clamp(static_cast<int>(std::floor(box.y0)), 0, image.height());
    const int x1 = std::clamp(static_cast<int>(std::ceil(box.x1)), 0, image.width());
    const int y1 = std::clamp(static_cast<int>(std::ceil(box.y1)), 0, image.height());
    if (x1 <= x0 || y1 <= y0) throw ValidationError("bounding box does not overlap the image");
    Image out(y1 - y0, x1 - x0, image.channels());
    for (int r = y0; r < y1; ++r) {
        for (int c = x0; c < x1; ++c) {
            for (int ch = 0; ch < image.channels(); ++ch) out.at(r - y0, c - x0, ch) = image.at(r, c, ch);
        }
    }
    return out;
}

Image resize_bilinear(const Image& image, int height, int width) {
    if (height == image.height() && width == image.width()) return image;
    Image out(height, width, image.channels());
    const double sy = static_cast<double>(image.height()) / height;
    const double sx = static_cast<double>(image.width()) / width;
    for (int r = 0; r < height; ++r) {
        const double fy = std::clamp((r + 0.5) * sy - 0.5, 0.0, image.height() - 1.0);
        const int y0 = static_cast<int>(fy);
        const int y1 = std::min(y0 + 1, image.height() - 1);
        const double wy = fy - y0;
        for (int c = 0; c < width; ++c) {
            const double fx = std::clamp((c + 0.5) * sx - 0.5, 0.0, image.width() - 1.0);
            const int x0 = static_cast<int>(fx);
            const int x1 = std::min(x0 + 1, image.width() - 1);
            const double wx = fx - x0;
            for (int ch = 0; ch < image.channels(); ++ch) {
                const double top = (1 - wx) * image.at(y0, x0, ch) + wx * image.at(y0, x1, ch);
                const double bottom = (1 - wx) * image.at(y1, x0, ch) + wx * image.at(y1, x1, ch);
                out.at(r, c, ch) = (1 - wy) * top + wy * bottom;
            }
        }
    }
    return out;
}

Image rescale(const Image& image, double scale) {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ValidationError("scale must be a positive finite number");
    if (scale == 1.0) return image;
    const int h = static_cast<int>(std::lround(image.height() * scale));
    const int w = static_cast<int>(std::lround(image.width() * scale));
    if (h < 1 || w < 1) throw ValidationError("scale " + std::to_string(scale) + " collapses the image");
    return resize_bilinear(image, h, w);
}

Descriptor global_descriptor(const Image& image, const DescriptorModel& model, ForwardTrace* trace) {
    const FeatureMap features = clip_features(toy_fcn_forward(image, model, trace));
    const Vector pooled = gem_pool(features, model.gem);
    const Vector whitened = whiten(pooled, model.whitening);
    Descriptor d = l2_normalize(whitened);
    if (trace) {
        trace->pooled = pooled;
        trace->whitened = whitened;
        trace->descriptor = d;
    }
    return d;
}

Descriptor multi_scale_descriptor(const Image& image, const DescriptorModel& model, std::span<const double> scales) {
    if (scales.empty()) throw ValidationError("multi_scale_descriptor: no scales given");
    std::vector<Image> scaled;
    for (double s : scales) {
        Image img = rescale(image, s);
        if (img.height() < model.spec.min_input || img.width() < model.spec.min_input) {
            std::ostringstream msg;
            msg << "scale " << s << " shrinks the " << image.height() << "x" << image.width() << " image to "
                << img.height() << "x" << img.width() << ", below the minimum input " << model.spec.min_input;
            throw ValidationError(msg.str());
        }
        scaled.push_back(std::move(img));
    }
    if (scaled.size() == 1) return global_descriptor(scaled.front(), model);
    Vector sum = Vector::Zero(model.whitening.output_dim());
    for (const Image& img : scaled) sum += global_descriptor(img, model);
    return l2_normalize(sum / static_cast<double>(scaled.size()));
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn) {
    const std::size_t workers = std::min<std::size_t>(n, std::max(1u, std::thread::hardware_concurrency()));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> threads;
    for (std::size_t t = 0; t < workers; ++t) {
        threads.emplace_back([&, t] {
            for (std::size_t i = t; i < n; i += workers) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(failure_mutex);
                    if (!failure) failure = std::current_exception();
                    return;
                }
            }
        });
    }
    for (std::thread& th : threads) th.join();
    if (failure) std::rethrow_exception(failure);
}

Matrix extract_descriptors(std::span<const Image> images, const DescriptorModel& model, std::span<const double> scales) {
    Matrix out(static_cast<Eigen::Index>(images.size()), model.whitening.output_dim());
    parallel_for(images.size(), [&](std::size_t i) {
        out.row(static_cast<Eigen::Index>(i)) = multi_scale_descriptor(images[i], model, scales).transpose();
    });
    return out;
}

}  // namespace solar
