#pragma once

#include "solar/tensor.hpp"

namespace solar {

/// Lower bound applied to activations before the GeM power.
inline constexpr double kClipEpsilon = 1e-6;
inline constexpr double kDefaultGemP = 3.0;
inline constexpr double kMaxGemP = 100.0;

/// Unit-norm descriptor vector.
using Descriptor = Vector;

class GemParam;

namespace detail {
/// Raw exponent storage for the optimizer; callers must project() afterwards.
double& gem_storage(GemParam& gem);
}  // namespace detail

/// GeM exponent. Always >= 1.
class GemParam {
public:
    explicit GemParam(double p = kDefaultGemP);

    double value() const { return p_; }
    /// Throws ValidationError when p < 1 or non-finite.
    void set(double p);
    /// Clamp into [1, inf) after an unconstrained optimizer update.
    void project();

private:
    friend double& detail::gem_storage(GemParam& gem);
    double p_;
};

/// max(f, eps) elementwise.
FeatureMap clip_features(const FeatureMap& f, double eps = kClipEpsilon);

/// Per-channel generalized mean ((1/N) sum_i f_i^p)^(1/p) over the h*w
/// locations. Entries are clipped to kClipEpsilon first. Evaluated relative to
/// the channel maximum so that large p neither overflows nor underflows.
Vector gem_pool(const FeatureMap& f, const GemParam& p);

struct GemGradient {
    Matrix d_features;  // same layout as FeatureMap::data()
    double d_p = 0.0;
};

/// Backward pass of gem_pool. `pooled` is the forward output. Entries that
/// were raised to the clip floor receive zero gradient.
GemGradient gem_pool_backward(const FeatureMap& f, const GemParam& p, const Vector& pooled, const Vector& d_pooled);

/// v / ||v||. Zero (or non-finite) vectors are rejected.
Descriptor l2_normalize(const Vector& v);

/// Gradient of l2_normalize w.r.t. its input given the forward input.
Vector l2_normalize_backward(const Vector& input, const Vector& d_output);

/// Learned affine projection applied after pooling.
struct WhiteningLayer {
    Matrix weight;  // d_out x d_in
    Vector bias;    // d_out

    static WhiteningLayer identity(int dim);
    int input_dim() const { return static_cast<int>(weight.cols()); }
    int output_dim() const { return static_cast<int>(weight.rows()); }
};

Vector whiten(const Vector& v, const WhiteningLayer& layer);

struct WhiteningGradient {
    Matrix d_weight;
    Vector d_bias;
    Vector d_input;
};

WhiteningGradient whiten_backward(const Vector& input, const WhiteningLayer& layer, const Vector& d_output);

}  // namespace solar
