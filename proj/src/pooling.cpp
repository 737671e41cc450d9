#include "solar/pooling.hpp"

#include "solar/errors.hpp"

#include <cmath>
#include <string>

namespace solar {

GemParam::GemParam(double p) : p_(p) { set(p); }

void GemParam::set(double p) {
    if (!std::isfinite(p) || p < 1.0) {
        throw ValidationError("GeM exponent must be >= 1, got " + std::to_string(p));
    }
    p_ = p;
}

double& detail::gem_storage(GemParam& gem) { return gem.p_; }

void GemParam::project() {
    if (!std::isfinite(p_) || p_ < 1.0) p_ = 1.0;
}

FeatureMap clip_features(const FeatureMap& f, double eps) {
    if (!(eps > 0.0)) throw ValidationError("clip epsilon must be positive");
    if (!f.data().allFinite()) throw ValidationError("feature map contains non-finite values");
    return FeatureMap(f.height(), f.width(), f.data().cwiseMax(eps));
}

Vector gem_pool(const FeatureMap& f, const GemParam& param) {
    if (f.locations() == 0 || f.channels() == 0) throw ValidationError("gem_pool on an empty feature map");
    if (!f.data().allFinite()) throw ValidationError("feature map contains non-finite values");
    const double p = param.value();
    const Matrix x = f.data().cwiseMax(kClipEpsilon);
    const double n = static_cast<double>(x.rows());
    Vector out(x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double peak = x.col(c).maxCoeff();
        double s = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) s += std::pow(x(i, c) / peak, p);
        out[c] = peak * std::pow(s / n, 1.0 / p);
    }
    return out;
}

GemGradient gem_pool_backward(const FeatureMap& f, const GemParam& param, const Vector& pooled, const Vector& d_pooled) {
    const double p = param.value();
    const Matrix& raw = f.data();
    const double n = static_cast<double>(raw.rows());
    GemGradient g;
    g.d_features = Matrix::Zero(raw.rows(), raw.cols());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        const double y = pooled[c];
        const double peak = std::max(raw.col(c).maxCoeff(), kClipEpsilon);
        double s = 0.0;
        double s_log = 0.0;
        for (Eigen::Index i = 0; i < raw.rows(); ++i) {
            const double x = std::max(raw(i, c), kClipEpsilon);
            const double r = x / peak;
            const double rp = std::pow(r, p);
            s += rp;
            s_log += rp * std::log(r);
            if (raw(i, c) >= kClipEpsilon) {
                g.d_features(i, c) = d_pooled[c] * std::pow(x / y, p - 1.0) / n;
            }
        }
        // d log y / dp = -log(s/n)/p^2 + (sum r^p log r)/(p s)
        const double dlog = -std::log(s / n) / (p * p) + s_log / (p * s);
        g.d_p += d_pooled[c] * y * dlog;
    }
    return g;
}

Descriptor l2_normalize(const Vector& v) {
    const double norm = v.norm();
    if (!std::isfinite(norm)) throw ValidationError("l2_normalize: vector has non-finite entries");
    if (norm == 0.0) throw ValidationError("l2_normalize: zero vector has no direction");
    return v / norm;
}

Vector l2_normalize_backward(const Vector& input, const Vector& d_output) {
    const double norm = input.norm();
    const Vector u = input / norm;
    return (d_output - u * u.dot(d_output)) / norm;
}

WhiteningLayer WhiteningLayer::identity(int dim) {
    if (dim < 1) throw ValidationError("whitening dimension must be positive");
    return {Matrix::Identity(dim, dim), Vector::Zero(dim)};
}

Vector whiten(const Vector& v, const WhiteningLayer& layer) {
    if (v.size() != layer.weight.cols()) {
        throw ValidationError("whiten: input has dimension " + std::to_string(v.size()) + ", layer expects " +
                              std::to_string(layer.weight.cols()));
    }
    if (layer.bias.size() != layer.weight.rows()) throw ValidationError("whiten: bias/weight shape mismatch");
    return layer.weight * v + layer.bias;
}

WhiteningGradient whiten_backward(const Vector& input, const WhiteningLayer& layer, const Vector& d_output) {
    return {d_output * input.transpose(), d_output, layer.weight.transpose() * d_output};
}

}  // namespace solar
