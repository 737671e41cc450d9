#include "solar/soa.hpp"

#include "solar/errors.hpp"

#include <cmath>
#include <random>
#include <string>

namespace solar {

void SoaParams::validate() const {
    const auto d = value.cols();
    if (value.rows() != d || output.rows() != d || output.cols() != d) {
        throw ValidationError("SOA value/output projections must be d x d");
    }
    if (query.cols() != d || key.cols() != d || key.rows() != query.rows()) {
        throw ValidationError("SOA query/key projections must be d_qk x d");
    }
    if (query.rows() < 1 || query.rows() > d) throw ValidationError("SOA requires 1 <= d_qk <= d");
    if (!std::isfinite(alpha)) throw ValidationError("SOA alpha must be finite");
}

SoaParams init_soa(int channels, int reduction, std::uint64_t seed) {
    if (channels < 1 || reduction < 1) throw ValidationError("init_soa: channels and reduction must be positive");
    if (channels % reduction != 0) {
        throw ValidationError("init_soa: " + std::to_string(channels) + " channels not divisible by reduction " +
                              std::to_string(reduction));
    }
    const int reduced = channels / reduction;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / channels));
    auto draw = [&](int rows, int cols) {
        Matrix m(rows, cols);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = normal(rng);
        return m;
    };
    SoaParams params;
    params.query = draw(reduced, channels);
    params.key = draw(reduced, channels);
    params.value = draw(channels, channels);
    params.output = Matrix::Zero(channels, channels);
    params.alpha = 1.0 / std::sqrt(static_cast<double>(reduced));
    return params;
}

Heads project_heads(const FeatureMap& f, const SoaParams& params) {
    if (f.channels() != params.channels()) {
        throw ValidationError("SOA expects " + std::to_string(params.channels()) + " channels, feature map has " +
                              std::to_string(f.channels()));
    }
    const Matrix& x = f.data();
    return {params.query * x.transpose(), params.key * x.transpose(), x * params.value.transpose()};
}

AttentionMap attention_map(const Matrix& q, const Matrix& k, double alpha) {
    if (q.rows() != k.rows() || q.cols() != k.cols()) throw ValidationError("attention_map: q and k differ in shape");
    Matrix z = alpha * (q.transpose() * k);
    if (!z.allFinite()) throw ValidationError("attention_map: non-finite logits");
    for (Eigen::Index i = 0; i < z.rows(); ++i) {
        auto row = z.row(i);
        row.array() -= row.maxCoeff();
        row = row.array().exp().matrix();
        row /= row.sum();
    }
    return z;
}

SoaOutput soa_forward(const FeatureMap& f, const SoaParams& params) {
    params.validate();
    Heads heads = project_heads(f, params);
    AttentionMap z = attention_map(heads.q, heads.k, params.alpha);
    // A zero psi makes the block an exact identity; skip the add so that
    // signed zeros in f survive bit-for-bit.
    if (params.output.isZero(0.0)) return {f, std::move(z)};
    Matrix out = f.data() + (z * heads.v) * params.output.transpose();
    return {FeatureMap(f.height(), f.width(), std::move(out)), std::move(z)};
}

SoaGradient soa_backward(const FeatureMap& f, const SoaParams& params, const AttentionMap& z, const Matrix& d_out) {
    const Matrix& x = f.data();
    const Matrix q = params.query * x.transpose();
    const Matrix k = params.key * x.transpose();
    const Matrix v = x * params.value.transpose();
    const Matrix mixed = z * v;

    SoaGradient g;
    g.d_output = d_out.transpose() * mixed;
    const Matrix d_mixed = d_out * params.output;
    const Matrix d_z = d_mixed * v.transpose();
    const Matrix d_v = z.transpose() * d_mixed;

    // softmax backward, row-wise
    Matrix d_logits = z.cwiseProduct(d_z);
    const Vector row_dot = d_logits.rowwise().sum();
    d_logits -= z.cwiseProduct(row_dot.replicate(1, z.cols()));
    d_logits *= params.alpha;

    // logits = q^T k, q is d_qk x N
    const Matrix d_q = k * d_logits.transpose();  // d_qk x N
    const Matrix d_k = q * d_logits;              // d_qk x N

    g.d_query = d_q * x;
    g.d_key = d_k * x;
    g.d_value = d_v.transpose() * x;
    g.d_features = d_out + d_q.transpose() * params.query + d_k.transpose() * params.key + d_v * params.value;
    return g;
}

}  // namespace solar
