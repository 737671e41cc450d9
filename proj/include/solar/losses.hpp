#pragma once

#include "solar/pooling.hpp"

#include <span>
#include <string>
#include <vector>

namespace solar {

inline constexpr double kDefaultMargin = 1.25;
inline constexpr double kDefaultLambda = 10.0;

struct Triplet {
    Descriptor anchor;
    Descriptor positive;
    Descriptor negative;
    int anchor_class = 0;
    int negative_class = 1;
    // Optional provenance for bookkeeping; not used by the losses.
    std::string anchor_id;
    std::string positive_id;
    std::string negative_id;
};

struct LossConfig {
    double margin = kDefaultMargin;
    double lambda = kDefaultLambda;
};

/// Mean hinge max(0, |a-p|^2 - |a-n|^2 + m) over the triplets.
double fos_loss(std::span<const Triplet> triplets, double margin);

/// (1/|T|) sqrt( sum_t (|a-n|^2 - |p-n|^2)^2 ). The 1/|T| sits outside the root.
double sos_loss(std::span<const Triplet> triplets);

/// fos_loss + lambda * sos_loss.
double total_loss(std::span<const Triplet> triplets, const LossConfig& cfg);

struct TripletGradient {
    Vector d_anchor;
    Vector d_positive;
    Vector d_negative;
};

struct LossBreakdown {
    double fos = 0.0;
    double sos = 0.0;
    double total = 0.0;
    std::vector<TripletGradient> gradients;  // one per triplet, d total / d descriptor
};

/// Losses and their gradients w.r.t. every descriptor. At the hinge kink
/// (argument exactly 0) and at sos == 0 the gradient contribution is 0.
LossBreakdown loss_with_gradients(std::span<const Triplet> triplets, const LossConfig& cfg);

}  // namespace solar
