#include "solar/losses.hpp"

#include "solar/errors.hpp"

#include <cmath>

namespace solar {

namespace {

void require_non_empty(std::span<const Triplet> triplets) {
    if (triplets.empty()) throw ValidationError("loss over an empty set of triplets");
    for (const Triplet& t : triplets) {
        if (t.anchor.size() != t.positive.size() || t.anchor.size() != t.negative.size()) {
            throw ValidationError("triplet descriptors differ in dimension");
        }
    }
}

double hinge_argument(const Triplet& t, double margin) {
    return (t.anchor - t.positive).squaredNorm() - (t.anchor - t.negative).squaredNorm() + margin;
}

double sos_inner(const Triplet& t) {
    return (t.anchor - t.negative).squaredNorm() - (t.positive - t.negative).squaredNorm();
}

}  // namespace

double fos_loss(std::span<const Triplet> triplets, double margin) {
    require_non_empty(triplets);
    double sum = 0.0;
    for (const Triplet& t : triplets) sum += std::max(0.0, hinge_argument(t, margin));
    return sum / static_cast<double>(triplets.size());
}

double sos_loss(std::span<const Triplet> triplets) {
    require_non_empty(triplets);
    double sum = 0.0;
    for (const Triplet& t : triplets) {
        const double e = sos_inner(t);
        sum += e * e;
    }
    return std::sqrt(sum) / static_cast<double>(triplets.size());
}

double total_loss(std::span<const Triplet> triplets, const LossConfig& cfg) {
    return fos_loss(triplets, cfg.margin) + cfg.lambda * sos_loss(triplets);
}

LossBreakdown loss_with_gradients(std::span<const Triplet> triplets, const LossConfig& cfg) {
    require_non_empty(triplets);
    const double count = static_cast<double>(triplets.size());
    LossBreakdown out;
    out.fos = fos_loss(triplets, cfg.margin);
    out.sos = sos_loss(triplets);
    out.total = out.fos + cfg.lambda * out.sos;

    const double root = out.sos * count;  // sqrt(sum e^2)
    out.gradients.reserve(triplets.size());
    for (const Triplet& t : triplets) {
        TripletGradient g{Vector::Zero(t.anchor.size()), Vector::Zero(t.anchor.size()), Vector::Zero(t.anchor.size())};
        if (hinge_argument(t, cfg.margin) > 0.0) {
            g.d_anchor += 2.0 * (t.negative - t.positive) / count;
            g.d_positive += -2.0 * (t.anchor - t.positive) / count;
            g.d_negative += 2.0 * (t.anchor - t.negative) / count;
        }
        if (root > 0.0 && cfg.lambda != 0.0) {
            const double w = cfg.lambda * sos_inner(t) / (count * root);
            g.d_anchor += w * 2.0 * (t.anchor - t.negative);
            g.d_positive += w * -2.0 * (t.positive - t.negative);
            g.d_negative += w * 2.0 * (t.positive - t.anchor);
        }
        out.gradients.push_back(std::move(g));
    }
    return out;
}

}  // namespace solar
