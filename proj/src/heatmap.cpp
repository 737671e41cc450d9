#include "solar/heatmap.hpp"

#include "solar/errors.hpp"
#include "solar/image_io.hpp"

#include <algorithm>

namespace solar {

Heatmap attention_heatmap(const DescriptorModel& model, const Image& image, const HeatmapRequest& req) {
    if (!model.soa.count(req.insertion)) {
        throw ValidationError("model has no SOA block at insertion " + std::to_string(req.insertion));
    }
    if (req.x < 0 || req.y < 0 || req.x >= image.width() || req.y >= image.height()) {
        throw ValidationError("heatmap location (" + std::to_string(req.x) + ", " + std::to_string(req.y) +
                              ") lies outside the " + std::to_string(image.width()) + "x" +
                              std::to_string(image.height()) + " image");
    }
    ForwardTrace trace;
    if (model.spec.kind == BackboneKind::ToyFcn) {
        toy_fcn_forward(image, model, &trace);
    } else {
        l2net_forward(image, model, &trace);
    }
    const FeatureMap& at = trace.soa_inputs.at(req.insertion);
    const AttentionMap& z = trace.attention.at(req.insertion);
    const int stride = model.spec.cumulative_stride(req.insertion);
    const int i = std::min(req.y / stride, at.height() - 1);
    const int j = std::min(req.x / stride, at.width() - 1);

    Heatmap h;
    h.raw.resize(at.height(), at.width());
    for (int r = 0; r < at.height(); ++r) {
        for (int c = 0; c < at.width(); ++c) h.raw(r, c) = z(i * at.width() + j, r * at.width() + c);
    }
    const double lo = h.raw.minCoeff(), hi = h.raw.maxCoeff();
    h.normalized = hi > lo ? Matrix((h.raw.array() - lo) / (hi - lo)) : Matrix(Matrix::Ones(h.raw.rows(), h.raw.cols()));

    h.upscaled = Image(image.height(), image.width(), 1);
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            const auto rr = static_cast<Eigen::Index>(static_cast<long>(r) * at.height() / image.height());
            const auto cc = static_cast<Eigen::Index>(static_cast<long>(c) * at.width() / image.width());
            h.upscaled.at(r, c, 0) = h.normalized(rr, cc);
        }
    }
    return h;
}

void export_attention_heatmap(const DescriptorModel& model, const Image& image, const HeatmapRequest& req,
                              const std::filesystem::path& path) {
    write_image(path, attention_heatmap(model, image, req).upscaled);
}

}  // namespace solar
