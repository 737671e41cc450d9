#pragma once

#include "solar/pooling.hpp"
#include "solar/soa.hpp"
#include "solar/tensor.hpp"

#include <cstdint>
#include <map>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace solar {

enum class BackboneKind { ToyFcn, L2Net };

std::string to_string(BackboneKind kind);
BackboneKind parse_backbone_kind(const std::string& text);

struct ConvSpec {
    int kernel = 3;
    int stride = 1;
    int padding = 1;
    int out_channels = 0;

    bool operator==(const ConvSpec&) const = default;
};

/// Layer stack plus the set of SOA insertion points.
///
/// Insertion points are named by label. For toy_fcn the three stages carry
/// labels 3, 4, 5 (the conv3_x/conv4_x/conv5_x analogs) and SOA is legal after
/// stages labelled 4 and 5. For l2net the labels are the layer numbers 1..7
/// and SOA is legal after layers 3..6.
struct BackboneSpec {
    BackboneKind kind = BackboneKind::ToyFcn;
    int in_channels = 3;
    std::vector<ConvSpec> layers;
    std::set<int> soa_insertions;
    int soa_reduction = kDefaultSoaReduction;
    int min_input = 32;

    static BackboneSpec toy_fcn(std::set<int> insertions = {}, std::vector<int> widths = {16, 32, 64}, int in_channels = 3);
    static BackboneSpec l2net(std::set<int> insertions = {});

    /// Label of the layer at `index` (0-based).
    int label_of(std::size_t index) const;
    std::set<int> legal_insertions() const;
    int channels_after(int label) const;
    /// Product of strides up to and including the layer with this label.
    int cumulative_stride(int label) const;
    /// Spatial size after each layer for an input of the given size.
    std::vector<std::pair<int, int>> output_sizes(int height, int width) const;
    int descriptor_dim() const { return layers.back().out_channels; }

    void validate() const;
    std::string to_text() const;
    static BackboneSpec from_text(const std::string& text);

    bool operator==(const BackboneSpec&) const = default;
};

struct ConvLayer {
    Matrix weight;  // out x (k*k*in), column order (kernel row, kernel col, in channel)
    Vector bias;    // empty when the layer has no bias
};

/// Backbone weights, SOA blocks, GeM exponent and whitening: everything the
/// global pipeline needs. For l2net only the conv layers and SOA blocks are used.
struct DescriptorModel {
    BackboneSpec spec;
    std::vector<ConvLayer> conv;
    std::map<int, SoaParams> soa;
    GemParam gem;
    WhiteningLayer whitening;

    /// He-normal conv weights, fresh SOA blocks (psi = 0), p = 3, identity
    /// whitening. All tensors are rounded to float32 so that checkpoints
    /// reproduce the in-memory model exactly.
    static DescriptorModel create(const BackboneSpec& spec, std::uint64_t seed);

    /// Adds (or replaces) a fresh SOA block at `label`.
    void insert_soa(int label, std::uint64_t seed);

    void validate() const;
};

enum class ParamGroup { Backbone, Soa, Gem, Whitening };

struct ParamView {
    std::string name;
    std::vector<int> shape;
    std::span<double> values;
    ParamGroup group;
};

/// Gradient storage with the same layout as a DescriptorModel.
struct ModelGradient {
    std::vector<ConvLayer> conv;
    std::map<int, SoaParams> soa;
    double p = 0.0;
    WhiteningLayer whitening;

    static ModelGradient zeros_like(const DescriptorModel& model);
    void set_zero();
    ModelGradient& operator+=(const ModelGradient& other);
};

/// Trainable tensors in a fixed canonical order. The GeM view aliases the raw
/// exponent; call model.gem.project() after writing through it.
std::vector<ParamView> parameter_views(DescriptorModel& model);
std::vector<ParamView> parameter_views(ModelGradient& grad, const DescriptorModel& model);

/// Rounds every stored tensor to the nearest float32 value.
void round_to_float(DescriptorModel& model);

/// Cached activations of one forward pass.
struct ForwardTrace {
    std::vector<FeatureMap> conv_inputs;
    std::vector<FeatureMap> pre_activations;
    std::map<int, FeatureMap> soa_inputs;
    std::map<int, AttentionMap> attention;
    std::vector<FeatureMap> layer_outputs;  // after activation and SOA
    FeatureMap final_map;
    Vector pooled;
    Vector whitened;
    Descriptor descriptor;
};

/// Convolution with zero padding via im2col.
FeatureMap conv_forward(const FeatureMap& input, const ConvLayer& layer, const ConvSpec& spec);

struct ConvGradient {
    Matrix d_input;
    Matrix d_weight;
    Vector d_bias;
};

ConvGradient conv_backward(const FeatureMap& input, const ConvLayer& layer, const ConvSpec& spec, const Matrix& d_output,
                           bool need_input_grad);

/// Per-channel zero-mean unit-variance standardization over locations.
FeatureMap instance_standardize(const FeatureMap& f);

/// Converts pixels to the model's input channel count (grey replicated to
/// RGB, RGB averaged to grey).
FeatureMap image_input(const Image& image, int channels);

/// Toy FCN backbone with SOA blocks; output spatial size ceil(H/8) x ceil(W/8).
FeatureMap toy_fcn_forward(const Image& image, const DescriptorModel& model, ForwardTrace* trace = nullptr);

/// L2-Net patch descriptor (128-d, unit norm) for an exact 32x32 grey patch.
Descriptor l2net_forward(const Image& patch, const DescriptorModel& model, ForwardTrace* trace = nullptr);

/// Backpropagates d(loss)/d(descriptor) through a toy-FCN global pipeline
/// trace, accumulating into `grad`. With `train_backbone` false, conv weights
/// receive no gradient and propagation stops below the lowest SOA block (or
/// right after GeM when SOA is not trained either).
void global_descriptor_backward(const DescriptorModel& model, const ForwardTrace& trace, const Vector& d_descriptor,
                                ModelGradient& grad, bool train_backbone, bool train_soa = true);

}  // namespace solar
