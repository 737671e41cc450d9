#pragma once

#include "solar/tensor.hpp"

#include <cstdint>

namespace solar {

inline constexpr int kDefaultSoaReduction = 2;

/// Parameters of one second-order attention block. All projections are plain
/// linear 1x1 maps (no normalization or activation inside the block).
struct SoaParams {
    Matrix query;   // d_qk x d
    Matrix key;     // d_qk x d
    Matrix value;   // d x d
    Matrix output;  // d x d, the psi projection; zero at init
    double alpha = 1.0;

    int channels() const { return static_cast<int>(value.cols()); }
    int reduced_channels() const { return static_cast<int>(query.rows()); }
    void validate() const;
};

/// d_qk = d / reduction; query/key/value ~ N(0, 2/d); output = 0;
/// alpha = 1/sqrt(d_qk). Deterministic in `seed`.
SoaParams init_soa(int channels, int reduction, std::uint64_t seed);

/// Row-stochastic (h*w) x (h*w) matrix.
using AttentionMap = Matrix;

struct Heads {
    Matrix q;  // d_qk x N
    Matrix k;  // d_qk x N
    Matrix v;  // N x d
};

Heads project_heads(const FeatureMap& f, const SoaParams& params);

/// softmax over the key index of alpha * q^T k, stabilized by the row maximum.
AttentionMap attention_map(const Matrix& q, const Matrix& k, double alpha);

struct SoaOutput {
    FeatureMap features;
    AttentionMap attention;
};

/// f + psi(z v), reshaped back to the input's h x w x d.
SoaOutput soa_forward(const FeatureMap& f, const SoaParams& params);

struct SoaGradient {
    Matrix d_features;  // N x d
    Matrix d_query;
    Matrix d_key;
    Matrix d_value;
    Matrix d_output;
};

/// Backward pass given the forward input and the attention it produced.
SoaGradient soa_backward(const FeatureMap& f, const SoaParams& params, const AttentionMap& z, const Matrix& d_out);

}  // namespace solar
