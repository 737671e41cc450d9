#include "solar/network.hpp"

#include "solar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace solar {

std::string to_string(BackboneKind kind) { return kind == BackboneKind::ToyFcn ? "toy_fcn" : "l2net"; }

BackboneKind parse_backbone_kind(const std::string& text) {
    if (text == "toy_fcn") return BackboneKind::ToyFcn;
    if (text == "l2net") return BackboneKind::L2Net;
    throw ValidationError("unknown backbone kind '" + text + "'");
}

BackboneSpec BackboneSpec::toy_fcn(std::set<int> insertions, std::vector<int> widths, int in_channels) {
    if (widths.size() != 3) throw ValidationError("toy_fcn needs exactly three stage widths");
    BackboneSpec spec;
    spec.kind = BackboneKind::ToyFcn;
    spec.in_channels = in_channels;
    for (int w : widths) spec.layers.push_back({3, 2, 1, w});
    spec.soa_insertions = std::move(insertions);
    spec.validate();
    return spec;
}

BackboneSpec BackboneSpec::l2net(std::set<int> insertions) {
    BackboneSpec spec;
    spec.kind = BackboneKind::L2Net;
    spec.in_channels = 1;
    spec.layers = {{3, 1, 1, 32}, {3, 1, 1, 32}, {3, 2, 1, 64}, {3, 1, 1, 64},
                   {3, 2, 1, 128}, {3, 1, 1, 128}, {8, 1, 0, 128}};
    spec.soa_insertions = std::move(insertions);
    spec.min_input = 32;
    spec.validate();
    return spec;
}

int BackboneSpec::label_of(std::size_t index) const {
    return kind == BackboneKind::ToyFcn ? static_cast<int>(index) + 3 : static_cast<int>(index) + 1;
}

std::set<int> BackboneSpec::legal_insertions() const {
    return kind == BackboneKind::ToyFcn ? std::set<int>{4, 5} : std::set<int>{3, 4, 5, 6};
}

int BackboneSpec::channels_after(int label) const {
    for (std::size_t i = 0; i < layers.size(); ++i) {
        if (label_of(i) == label) return layers[i].out_channels;
    }
    throw ValidationError("no layer with label " + std::to_string(label));
}

int BackboneSpec::cumulative_stride(int label) const {
    int stride = 1;
    for (std::size_t i = 0; i < layers.size(); ++i) {
        stride *= layers[i].stride;
        if (label_of(i) == label) return stride;
    }
    throw ValidationError("no layer with label " + std::to_string(label));
}

std::vector<std::pair<int, int>> BackboneSpec::output_sizes(int height, int width) const {
    std::vector<std::pair<int, int>> sizes;
    for (const ConvSpec& l : layers) {
        height = (height + 2 * l.padding - l.kernel) / l.stride + 1;
        width = (width + 2 * l.padding - l.kernel) / l.stride + 1;
        sizes.emplace_back(height, width);
    }
    return sizes;
}

void BackboneSpec::validate() const {
    if (in_channels != 1 && in_channels != 3) throw ValidationError("backbone input must have 1 or 3 channels");
    if (layers.empty()) throw ValidationError("backbone has no layers");
    if (kind == BackboneKind::ToyFcn && layers.size() != 3) throw ValidationError("toy_fcn has exactly three stages");
    if (kind == BackboneKind::L2Net && layers.size() != 7) throw ValidationError("l2net has exactly seven layers");
    for (const ConvSpec& l : layers) {
        if (l.kernel < 1 || l.stride < 1 || l.padding < 0 || l.out_channels < 1) {
            throw ValidationError("invalid convolution layer specification");
        }
    }
    const std::set<int> legal = legal_insertions();
    for (int label : soa_insertions) {
        if (!legal.count(label)) {
            throw ValidationError("SOA cannot be inserted after " + to_string(kind) + " layer " + std::to_string(label));
        }
        if (channels_after(label) % soa_reduction != 0) {
            throw ValidationError("SOA reduction does not divide the channel count at layer " + std::to_string(label));
        }
    }
    if (soa_reduction < 1) throw ValidationError("SOA reduction must be positive");
    if (min_input < 1) throw ValidationError("minimum input size must be positive");
}

std::string BackboneSpec::to_text() const {
    std::ostringstream out;
    out << "kind=" << solar::to_string(kind) << "\n";
    out << "in_channels=" << in_channels << "\n";
    out << "layers=";
    for (std::size_t i = 0; i < layers.size(); ++i) {
        const ConvSpec& l = layers[i];
        out << (i ? ";" : "") << l.kernel << "," << l.stride << "," << l.padding << "," << l.out_channels;
    }
    out << "\nsoa=";
    bool first = true;
    for (int label : soa_insertions) {
        out << (first ? "" : ",") << label;
        first = false;
    }
    out << "\nsoa_reduction=" << soa_reduction << "\nmin_input=" << min_input << "\n";
    return out.str();
}

namespace {

std::vector<int> parse_int_list(const std::string& text, char sep) {
    std::vector<int> values;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep)) {
        if (item.empty()) continue;
        try {
            std::size_t used = 0;
            values.push_back(std::stoi(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::exception&) {
            throw ValidationError("expected an integer, got '" + item + "'");
        }
    }
    return values;
}

}  // namespace

BackboneSpec BackboneSpec::from_text(const std::string& text) {
    BackboneSpec spec;
    spec.layers.clear();
    std::istringstream in(text);
    std::string line;
    bool have_kind = false;
    bool have_layers = false;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("backbone header line without '=': " + line);
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key == "kind") {
            spec.kind = parse_backbone_kind(value);
            have_kind = true;
        } else if (key == "in_channels") {
            spec.in_channels = parse_int_list(value, ',').at(0);
        } else if (key == "layers") {
            std::stringstream ss(value);
            std::string layer;
            while (std::getline(ss, layer, ';')) {
                const auto v = parse_int_list(layer, ',');
                if (v.size() != 4) throw ValidationError("layer spec needs kernel,stride,padding,channels: " + layer);
                spec.layers.push_back({v[0], v[1], v[2], v[3]});
            }
            have_layers = true;
        } else if (key == "soa") {
            const auto v = parse_int_list(value, ',');
            spec.soa_insertions = std::set<int>(v.begin(), v.end());
        } else if (key == "soa_reduction") {
            spec.soa_reduction = parse_int_list(value, ',').at(0);
        } else if (key == "min_input") {
            spec.min_input = parse_int_list(value, ',').at(0);
        }
    }
    if (!have_kind || !have_layers) throw ValidationError("backbone header lacks kind or layers");
    spec.validate();
    return spec;
}

// ---------------------------------------------------------------------------

DescriptorModel DescriptorModel::create(const BackboneSpec& spec, std::uint64_t seed) {
    spec.validate();
    DescriptorModel model;
    model.spec = spec;
    std::mt19937_64 rng(seed);
    int in = spec.in_channels;
    for (const ConvSpec& l : spec.layers) {
        const int fan_in = l.kernel * l.kernel * in;
        std::normal_distribution<double> normal(0.0, std::sqrt(2.0 / fan_in));
        ConvLayer layer;
        layer.weight.resize(l.out_channels, fan_in);
        for (Eigen::Index i = 0; i < layer.weight.size(); ++i) layer.weight.data()[i] = normal(rng);
        if (spec.kind == BackboneKind::ToyFcn) layer.bias = Vector::Zero(l.out_channels);
        model.conv.push_back(std::move(layer));
        in = l.out_channels;
    }
    for (int label : spec.soa_insertions) {
        model.soa[label] = init_soa(spec.channels_after(label), spec.soa_reduction, seed * 1000003ULL + label);
    }
    if (spec.kind == BackboneKind::ToyFcn) model.whitening = WhiteningLayer::identity(spec.descriptor_dim());
    round_to_float(model);
    return model;
}

void DescriptorModel::insert_soa(int label, std::uint64_t seed) {
    if (!spec.legal_insertions().count(label)) {
        throw ValidationError("SOA cannot be inserted after layer " + std::to_string(label));
    }
    spec.soa_insertions.insert(label);
    spec.validate();
    soa[label] = init_soa(spec.channels_after(label), spec.soa_reduction, seed);
    round_to_float(*this);
}

void DescriptorModel::validate() const {
    spec.validate();
    if (conv.size() != spec.layers.size()) throw ValidationError("model has the wrong number of conv layers");
    int in = spec.in_channels;
    for (std::size_t i = 0; i < conv.size(); ++i) {
        const ConvSpec& l = spec.layers[i];
        if (conv[i].weight.rows() != l.out_channels || conv[i].weight.cols() != l.kernel * l.kernel * in) {
            throw ValidationError("conv layer " + std::to_string(i) + " has the wrong weight shape");
        }
        if (conv[i].bias.size() != 0 && conv[i].bias.size() != l.out_channels) {
            throw ValidationError("conv layer " + std::to_string(i) + " has the wrong bias shape");
        }
        in = l.out_channels;
    }
    for (int label : spec.soa_insertions) {
        auto it = soa.find(label);
        if (it == soa.end()) throw ValidationError("missing SOA block at layer " + std::to_string(label));
        it->second.validate();
        if (it->second.channels() != spec.channels_after(label)) {
            throw ValidationError("SOA block at layer " + std::to_string(label) + " has the wrong channel count");
        }
    }
    if (soa.size() != spec.soa_insertions.size()) throw ValidationError("SOA blocks do not match the insertion set");
    if (spec.kind == BackboneKind::ToyFcn && whitening.input_dim() != spec.descriptor_dim()) {
        throw ValidationError("whitening input does not match the descriptor dimension");
    }
}

ModelGradient ModelGradient::zeros_like(const DescriptorModel& model) {
    ModelGradient g;
    for (const ConvLayer& l : model.conv) {
        g.conv.push_back({Matrix::Zero(l.weight.rows(), l.weight.cols()), Vector::Zero(l.bias.size())});
    }
    for (const auto& [label, s] : model.soa) {
        SoaParams z;
        z.query = Matrix::Zero(s.query.rows(), s.query.cols());
        z.key = Matrix::Zero(s.key.rows(), s.key.cols());
        z.value = Matrix::Zero(s.value.rows(), s.value.cols());
        z.output = Matrix::Zero(s.output.rows(), s.output.cols());
        z.alpha = 0.0;
        g.soa.emplace(label, std::move(z));
    }
    g.whitening = {Matrix::Zero(model.whitening.weight.rows(), model.whitening.weight.cols()),
                   Vector::Zero(model.whitening.bias.size())};
    return g;
}

void ModelGradient::set_zero() {
    for (ConvLayer& l : conv) {
        l.weight.setZero();
        l.bias.setZero();
    }
    for (auto& [label, s] : soa) {
        s.query.setZero();
        s.key.setZero();
        s.value.setZero();
        s.output.setZero();
    }
    p = 0.0;
    whitening.weight.setZero();
    whitening.bias.setZero();
}

ModelGradient& ModelGradient::operator+=(const ModelGradient& other) {
    for (std::size_t i = 0; i < conv.size(); ++i) {
        conv[i].weight += other.conv[i].weight;
        conv[i].bias += other.conv[i].bias;
    }
    for (auto& [label, s] : soa) {
        const SoaParams& o = other.soa.at(label);
        s.query += o.query;
        s.key += o.key;
        s.value += o.value;
        s.output += o.output;
    }
    p += other.p;
    whitening.weight += other.whitening.weight;
    whitening.bias += other.whitening.bias;
    return *this;
}

namespace {

std::span<double> span_of(Matrix& m) { return {m.data(), static_cast<std::size_t>(m.size())}; }
std::span<double> span_of(Vector& v) { return {v.data(), static_cast<std::size_t>(v.size())}; }
std::vector<int> shape_of(const Matrix& m) { return {static_cast<int>(m.rows()), static_cast<int>(m.cols())}; }
std::vector<int> shape_of(const Vector& v) { return {static_cast<int>(v.size())}; }

template <typename ConvT, typename SoaT, typename WhitenT>
std::vector<ParamView> collect_views(ConvT& conv, SoaT& soa, double& p, WhitenT& whitening, bool has_head) {
    std::vector<ParamView> views;
    for (std::size_t i = 0; i < conv.size(); ++i) {
        const std::string base = "conv" + std::to_string(i + 1);
        views.push_back({base + ".weight", shape_of(conv[i].weight), span_of(conv[i].weight), ParamGroup::Backbone});
        if (conv[i].bias.size() > 0) {
            views.push_back({base + ".bias", shape_of(conv[i].bias), span_of(conv[i].bias), ParamGroup::Backbone});
        }
    }
    for (auto& [label, s] : soa) {
        const std::string base = "soa" + std::to_string(label);
        views.push_back({base + ".query", shape_of(s.query), span_of(s.query), ParamGroup::Soa});
        views.push_back({base + ".key", shape_of(s.key), span_of(s.key), ParamGroup::Soa});
        views.push_back({base + ".value", shape_of(s.value), span_of(s.value), ParamGroup::Soa});
        views.push_back({base + ".output", shape_of(s.output), span_of(s.output), ParamGroup::Soa});
    }
    if (has_head) {
        views.push_back({"gem.p", {1}, std::span<double>(&p, 1), ParamGroup::Gem});
        views.push_back({"whiten.weight", shape_of(whitening.weight), span_of(whitening.weight), ParamGroup::Whitening});
        views.push_back({"whiten.bias", shape_of(whitening.bias), span_of(whitening.bias), ParamGroup::Whitening});
    }
    return views;
}

}  // namespace

std::vector<ParamView> parameter_views(DescriptorModel& model) {
    return collect_views(model.conv, model.soa, detail::gem_storage(model.gem), model.whitening,
                         model.spec.kind == BackboneKind::ToyFcn);
}

std::vector<ParamView> parameter_views(ModelGradient& grad, const DescriptorModel& model) {
    return collect_views(grad.conv, grad.soa, grad.p, grad.whitening, model.spec.kind == BackboneKind::ToyFcn);
}

void round_to_float(DescriptorModel& model) {
    for (ParamView& v : parameter_views(model)) {
        for (double& x : v.values) x = static_cast<double>(static_cast<float>(x));
    }
    model.gem.project();
}

// ---------------------------------------------------------------------------

namespace {

Matrix im2col(const FeatureMap& in, const ConvSpec& spec, int out_h, int out_w) {
    const int k = spec.kernel;
    const int ch = in.channels();
    Matrix cols = Matrix::Zero(static_cast<Eigen::Index>(out_h) * out_w, static_cast<Eigen::Index>(k) * k * ch);
    const Matrix& x = in.data();
    for (int orow = 0; orow < out_h; ++orow) {
        for (int ocol = 0; ocol < out_w; ++ocol) {
            const Eigen::Index row = static_cast<Eigen::Index>(orow) * out_w + ocol;
            for (int kr = 0; kr < k; ++kr) {
                const int r = orow * spec.stride - spec.padding + kr;
                if (r < 0 || r >= in.height()) continue;
                for (int kc = 0; kc < k; ++kc) {
                    const int c = ocol * spec.stride - spec.padding + kc;
                    if (c < 0 || c >= in.width()) continue;
                    cols.row(row).segment((kr * k + kc) * ch, ch) = x.row(static_cast<Eigen::Index>(r) * in.width() + c);
                }
            }
        }
    }
    return cols;
}

Matrix col2im(const Matrix& cols, const ConvSpec& spec, int in_h, int in_w, int ch, int out_h, int out_w) {
    const int k = spec.kernel;
    Matrix x = Matrix::Zero(static_cast<Eigen::Index>(in_h) * in_w, ch);
    for (int orow = 0; orow < out_h; ++orow) {
        for (int ocol = 0; ocol < out_w; ++ocol) {
            const Eigen::Index row = static_cast<Eigen::Index>(orow) * out_w + ocol;
            for (int kr = 0; kr < k; ++kr) {
                const int r = orow * spec.stride - spec.padding + kr;
                if (r < 0 || r >= in_h) continue;
                for (int kc = 0; kc < k; ++kc) {
                    const int c = ocol * spec.stride - spec.padding + kc;
                    if (c < 0 || c >= in_w) continue;
                    x.row(static_cast<Eigen::Index>(r) * in_w + c) += cols.row(row).segment((kr * k + kc) * ch, ch);
                }
            }
        }
    }
    return x;
}

std::pair<int, int> conv_output_size(const FeatureMap& in, const ConvSpec& spec) {
    const int h = (in.height() + 2 * spec.padding - spec.kernel) / spec.stride + 1;
    const int w = (in.width() + 2 * spec.padding - spec.kernel) / spec.stride + 1;
    if (h < 1 || w < 1) throw ValidationError("feature map too small for a " + std::to_string(spec.kernel) + "x" +
                                              std::to_string(spec.kernel) + " convolution");
    return {h, w};
}

FeatureMap relu(const FeatureMap& f) { return FeatureMap(f.height(), f.width(), f.data().cwiseMax(0.0)); }

}  // namespace

FeatureMap conv_forward(const FeatureMap& input, const ConvLayer& layer, const ConvSpec& spec) {
    const auto [h, w] = conv_output_size(input, spec);
    if (layer.weight.cols() != static_cast<Eigen::Index>(spec.kernel) * spec.kernel * input.channels()) {
        throw ValidationError("conv weight does not match the input channel count");
    }
    Matrix out = im2col(input, spec, h, w) * layer.weight.transpose();
    if (layer.bias.size() > 0) out.rowwise() += layer.bias.transpose();
    return FeatureMap(h, w, std::move(out));
}

ConvGradient conv_backward(const FeatureMap& input, const ConvLayer& layer, const ConvSpec& spec, const Matrix& d_output,
                           bool need_input_grad) {
    const auto [h, w] = conv_output_size(input, spec);
    const Matrix cols = im2col(input, spec, h, w);
    ConvGradient g;
    g.d_weight = d_output.transpose() * cols;
    g.d_bias = layer.bias.size() > 0 ? Vector(d_output.colwise().sum().transpose()) : Vector();
    if (need_input_grad) {
        g.d_input = col2im(d_output * layer.weight, spec, input.height(), input.width(), input.channels(), h, w);
    }
    return g;
}

FeatureMap instance_standardize(const FeatureMap& f) {
    constexpr double kVarianceEpsilon = 1e-5;
    Matrix x = f.data();
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        const double mean = x.col(c).mean();
        x.col(c).array() -= mean;
        const double var = x.col(c).squaredNorm() / static_cast<double>(x.rows());
        x.col(c) /= std::sqrt(var + kVarianceEpsilon);
    }
    return FeatureMap(f.height(), f.width(), std::move(x));
}

FeatureMap image_input(const Image& image, int channels) {
    FeatureMap f(image.height(), image.width(), channels);
    for (int r = 0; r < image.height(); ++r) {
        for (int c = 0; c < image.width(); ++c) {
            if (channels == image.channels()) {
                for (int ch = 0; ch < channels; ++ch) f.at(r, c, ch) = image.at(r, c, ch);
            } else if (channels == 3) {
                for (int ch = 0; ch < 3; ++ch) f.at(r, c, ch) = image.at(r, c, 0);
            } else {
                f.at(r, c, 0) = (image.at(r, c, 0) + image.at(r, c, 1) + image.at(r, c, 2)) / 3.0;
            }
        }
    }
    return f;
}

namespace {

void check_size(const Image& image, const DescriptorModel& model) {
    if (image.height() < model.spec.min_input || image.width() < model.spec.min_input) {
        throw ValidationError("image " + std::to_string(image.height()) + "x" + std::to_string(image.width()) +
                              " is smaller than the minimum input " + std::to_string(model.spec.min_input));
    }
}

FeatureMap apply_soa(const FeatureMap& x, int label, const DescriptorModel& model, ForwardTrace* trace) {
    auto it = model.soa.find(label);
    if (it == model.soa.end()) return x;
    SoaOutput out = soa_forward(x, it->second);
    if (trace) {
        trace->soa_inputs[label] = x;
        trace->attention[label] = std::move(out.attention);
    }
    return std::move(out.features);
}

}  // namespace

FeatureMap toy_fcn_forward(const Image& image, const DescriptorModel& model, ForwardTrace* trace) {
    if (model.spec.kind != BackboneKind::ToyFcn) throw ValidationError("toy_fcn_forward needs a toy_fcn model");
    check_size(image, model);
    FeatureMap x = image_input(image, model.spec.in_channels);
    for (std::size_t i = 0; i < model.conv.size(); ++i) {
        if (trace) trace->conv_inputs.push_back(x);
        FeatureMap pre = conv_forward(x, model.conv[i], model.spec.layers[i]);
        x = relu(pre);
        if (trace) trace->pre_activations.push_back(std::move(pre));
        x = apply_soa(x, model.spec.label_of(i), model, trace);
        if (trace) trace->layer_outputs.push_back(x);
    }
    if (trace) trace->final_map = x;
    return x;
}

Descriptor l2net_forward(const Image& patch, const DescriptorModel& model, ForwardTrace* trace) {
    if (model.spec.kind != BackboneKind::L2Net) throw ValidationError("l2net_forward needs an l2net model");
    if (patch.height() != 32 || patch.width() != 32 || patch.channels() != 1) {
        throw ValidationError("l2net expects a 32x32 grey patch, got " + std::to_string(patch.height()) + "x" +
                              std::to_string(patch.width()) + "x" + std::to_string(patch.channels()));
    }
    FeatureMap x = instance_standardize(image_input(patch, 1));
    const std::size_t last = model.conv.size() - 1;
    for (std::size_t i = 0; i < model.conv.size(); ++i) {
        if (trace) trace->conv_inputs.push_back(x);
        FeatureMap pre = conv_forward(x, model.conv[i], model.spec.layers[i]);
        if (i == last) {
            x = pre;
        } else {
            x = relu(instance_standardize(pre));
            x = apply_soa(x, model.spec.label_of(i), model, trace);
        }
        if (trace) {
            trace->pre_activations.push_back(std::move(pre));
            trace->layer_outputs.push_back(x);
        }
    }
    Descriptor d = l2_normalize(x.data().row(0).transpose());
    if (trace) {
        trace->final_map = x;
        trace->descriptor = d;
    }
    return d;
}

void global_descriptor_backward(const DescriptorModel& model, const ForwardTrace& trace, const Vector& d_descriptor,
                                ModelGradient& grad, bool train_backbone, bool train_soa) {
    if (model.spec.kind != BackboneKind::ToyFcn) throw ValidationError("backward pass supports toy_fcn models only");
    const Vector d_whitened = l2_normalize_backward(trace.whitened, d_descriptor);
    const WhiteningGradient wg = whiten_backward(trace.pooled, model.whitening, d_whitened);
    grad.whitening.weight += wg.d_weight;
    grad.whitening.bias += wg.d_bias;

    const GemGradient gg = gem_pool_backward(trace.final_map, model.gem, trace.pooled, wg.d_input);
    grad.p += gg.d_p;

    // Lowest layer index that still has something trainable at or below it.
    std::size_t lowest = 0;
    if (!train_backbone) {
        if (model.soa.empty() || !train_soa) return;
        lowest = model.conv.size();
        for (std::size_t i = 0; i < model.conv.size(); ++i) {
            if (model.soa.count(model.spec.label_of(i))) {
                lowest = i;
                break;
            }
        }
    }

    Matrix d_x = gg.d_features;
    for (std::size_t idx = model.conv.size(); idx-- > 0;) {
        const int label = model.spec.label_of(idx);
        if (auto it = model.soa.find(label); it != model.soa.end()) {
            SoaGradient sg = soa_backward(trace.soa_inputs.at(label), it->second, trace.attention.at(label), d_x);
            SoaParams& acc = grad.soa.at(label);
            acc.query += sg.d_query;
            acc.key += sg.d_key;
            acc.value += sg.d_value;
            acc.output += sg.d_output;
            d_x = std::move(sg.d_features);
        }
        if (!train_backbone && idx <= lowest) return;
        const Matrix& pre = trace.pre_activations[idx].data();
        d_x = d_x.cwiseProduct((pre.array() > 0.0).cast<double>().matrix());
        const bool need_input = idx > 0 && (train_backbone || idx > lowest);
        ConvGradient cg = conv_backward(trace.conv_inputs[idx], model.conv[idx], model.spec.layers[idx], d_x, need_input);
        if (train_backbone) {
            grad.conv[idx].weight += cg.d_weight;
            if (cg.d_bias.size() > 0) grad.conv[idx].bias += cg.d_bias;
        }
        if (!need_input) return;
        d_x = std::move(cg.d_input);
    }
}

}  // namespace solar
