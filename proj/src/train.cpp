#include "solar/train.hpp"

#include "solar/checkpoint.hpp"
#include "solar/errors.hpp"
#include "solar/fileutil.hpp"
#include "solar/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <set>
#include <sstream>

namespace solar {

namespace {

constexpr double kBeta1 = 0.9;
constexpr double kBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

std::uint64_t mix(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
    std::uint64_t x = a * 0x9E3779B97F4A7C15ULL ^ (b + 0x632BE59BD9B4E019ULL) ^ (c * 0xBF58476D1CE4E5B9ULL);
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ULL;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ValidationError("setting '" + key + "' expects true/false, got '" + v + "'");
}

double parse_real(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size() || !std::isfinite(x)) {
        throw ValidationError("setting '" + key + "' expects a number, got '" + v + "'");
    }
    return x;
}

long long parse_int(const std::string& key, const std::string& v) {
    std::size_t used = 0;
    long long x = 0;
    try {
        x = std::stoll(v, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != v.size()) throw ValidationError("setting '" + key + "' expects an integer, got '" + v + "'");
    return x;
}

int parse_small_int(const std::string& key, const std::string& v) {
    const long long x = parse_int(key, v);
    if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max()) {
        throw ValidationError("setting '" + key + "' is out of range");
    }
    return static_cast<int>(x);
}

bool trainable(ParamGroup g, const TrainConfig& cfg) {
    switch (g) {
        case ParamGroup::Backbone: return !cfg.freeze_backbone;
        case ParamGroup::Soa: return cfg.train_soa;
        case ParamGroup::Gem: return cfg.train_p;
        case ParamGroup::Whitening: return cfg.train_whitening;
    }
    return false;
}

// Single-scale descriptors of data.images[items[i]] for each i in `which`.
Matrix refresh(const DescriptorModel& model, const LabeledImages& data, std::span<const std::size_t> items,
               std::span<const std::size_t> which) {
    std::vector<Descriptor> out(which.size());
    parallel_for(which.size(), [&](std::size_t i) { out[i] = global_descriptor(data.images[items[which[i]]], model); });
    const int dim = out.empty() ? 0 : static_cast<int>(out.front().size());
    Matrix m(static_cast<Eigen::Index>(which.size()), dim);
    for (std::size_t i = 0; i < out.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = out[i].transpose();
    return m;
}

struct MinedAnchor {
    std::size_t anchor;  // local indices into `items`
    std::size_t positive;
    std::vector<std::size_t> negatives;
};

// Forward every distinct image of a batch, evaluate the loss and return the
// summed gradient.
struct BatchResult {
    LossBreakdown loss;
    ModelGradient grad;
    std::size_t triplets = 0;
};

BatchResult batch_gradient(const DescriptorModel& model, const LabeledImages& data, std::span<const std::size_t> items,
                           std::span<const MinedAnchor> batch, const TrainConfig& cfg) {
    std::vector<std::size_t> slots;
    auto slot_of = [&](std::size_t local) {
        auto it = std::find(slots.begin(), slots.end(), local);
        if (it != slots.end()) return static_cast<std::size_t>(it - slots.begin());
        slots.push_back(local);
        return slots.size() - 1;
    };
    struct Ref {
        std::size_t a, p, n;
    };
    std::vector<Ref> refs;
    for (const MinedAnchor& m : batch) {
        const std::size_t a = slot_of(m.anchor), p = slot_of(m.positive);
        for (std::size_t n : m.negatives) refs.push_back({a, p, slot_of(n)});
    }

    std::vector<ForwardTrace> traces(slots.size());
    parallel_for(slots.size(), [&](std::size_t s) { global_descriptor(data.images[items[slots[s]]], model, &traces[s]); });

    std::vector<Triplet> triplets;
    for (const Ref& r : refs) {
        Triplet t;
        t.anchor = traces[r.a].descriptor;
        t.positive = traces[r.p].descriptor;
        t.negative = traces[r.n].descriptor;
        t.anchor_class = data.labels[items[slots[r.a]]];
        t.negative_class = data.labels[items[slots[r.n]]];
        triplets.push_back(std::move(t));
    }
    BatchResult out;
    out.loss = loss_with_gradients(triplets, cfg.loss);
    out.triplets = triplets.size();

    std::vector<Vector> d_desc(slots.size(), Vector::Zero(traces.front().descriptor.size()));
    for (std::size_t i = 0; i < refs.size(); ++i) {
        d_desc[refs[i].a] += out.loss.gradients[i].d_anchor;
        d_desc[refs[i].p] += out.loss.gradients[i].d_positive;
        d_desc[refs[i].n] += out.loss.gradients[i].d_negative;
    }
    std::vector<ModelGradient> grads(slots.size(), ModelGradient::zeros_like(model));
    parallel_for(slots.size(), [&](std::size_t s) {
        global_descriptor_backward(model, traces[s], d_desc[s], grads[s], !cfg.freeze_backbone, cfg.train_soa);
    });
    out.grad = ModelGradient::zeros_like(model);
    for (const ModelGradient& g : grads) out.grad += g;  // fixed order keeps the sum reproducible
    return out;
}

float to_f(double x) { return static_cast<float>(x); }

// One Adam update over the trainable groups. Nothing is written unless every
// new parameter and moment is finite.
void adam_step(DescriptorModel& model, AdamState& opt, ModelGradient& grad, const TrainConfig& cfg, int epoch,
               const std::string& where) {
    std::vector<ParamView> params = parameter_views(model);
    std::vector<ParamView> grads = parameter_views(grad, model);
    const double factor = std::exp(-cfg.decay * (epoch - 1));
    const std::int64_t step = opt.step + 1;
    const double bc1 = 1.0 - std::pow(kBeta1, static_cast<double>(step));
    const double bc2 = 1.0 - std::pow(kBeta2, static_cast<double>(step));

    std::vector<std::vector<double>> new_x(params.size()), new_m(params.size()), new_v(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (!trainable(params[i].group, cfg)) continue;
        const double lr = (params[i].group == ParamGroup::Gem ? cfg.lr_p : cfg.lr) * factor;
        const std::size_t n = params[i].values.size();
        new_x[i].resize(n);
        new_m[i].resize(n);
        new_v[i].resize(n);
        for (std::size_t j = 0; j < n; ++j) {
            const double g = grads[i].values[j];
            const double m = to_f(kBeta1 * opt.m[i][j] + (1.0 - kBeta1) * g);
            const double v = to_f(kBeta2 * opt.v[i][j] + (1.0 - kBeta2) * g * g);
            double x = params[i].values[j] - lr * (m / bc1) / (std::sqrt(v / bc2) + kAdamEps);
            if (params[i].group == ParamGroup::Gem) x = std::max(x, 1.0);
            x = to_f(x);
            if (!std::isfinite(x) || !std::isfinite(m) || !std::isfinite(v)) {
                throw ValidationError("non-finite update of '" + params[i].name + "' at " + where +
                                      "; parameters left unchanged");
            }
            new_x[i][j] = x;
            new_m[i][j] = m;
            new_v[i][j] = v;
        }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (new_x[i].empty()) continue;
        std::copy(new_x[i].begin(), new_x[i].end(), params[i].values.begin());
        opt.m[i] = std::move(new_m[i]);
        opt.v[i] = std::move(new_v[i]);
    }
    model.gem.project();
    opt.step = step;
}

double trainable_norm(ModelGradient& grad, const DescriptorModel& model, const TrainConfig& cfg) {
    double s = 0.0;
    for (const ParamView& v : parameter_views(grad, model)) {
        if (!trainable(v.group, cfg)) continue;
        for (double x : v.values) s += x * x;
    }
    return std::sqrt(s);
}

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw ValidationError("epochs must be >= 0");
    if (batch_size < 1) throw ValidationError("batch_size must be positive");
    if (!(lr > 0.0) || !(lr_p > 0.0)) throw ValidationError("learning rates must be positive");
    if (lr_p < lr) throw ValidationError("lr_p must be >= lr");
    if (!(decay >= 0.0)) throw ValidationError("decay must be >= 0");
    if (!(loss.margin >= 0.0) || !(loss.lambda >= 0.0)) throw ValidationError("margin and lambda must be >= 0");
    if (mining.anchors_per_epoch < 1 || mining.negatives_per_anchor < 1 || mining.pool_size < 1) {
        throw ValidationError("mining sizes must be positive");
    }
    if (!(val_fraction >= 0.0 && val_fraction < 1.0)) throw ValidationError("val_fraction must be in [0, 1)");
}

std::string TrainConfig::to_text() const {
    std::string s;
    auto add = [&](const char* k, const std::string& v) { s += std::string(k) + "=" + v + "\n"; };
    auto b = [](bool x) { return std::string(x ? "true" : "false"); };
    add("epochs", std::to_string(epochs));
    add("batch_size", std::to_string(batch_size));
    add("lr", fmt(lr));
    add("lr_p", fmt(lr_p));
    add("decay", fmt(decay));
    add("margin", fmt(loss.margin));
    add("lambda", fmt(loss.lambda));
    add("anchors_per_epoch", std::to_string(mining.anchors_per_epoch));
    add("negatives_per_anchor", std::to_string(mining.negatives_per_anchor));
    add("pool_size", std::to_string(mining.pool_size));
    add("mining_seed", std::to_string(mining.seed));
    add("freeze_backbone", b(freeze_backbone));
    add("train_soa", b(train_soa));
    add("train_whitening", b(train_whitening));
    add("train_p", b(train_p));
    add("val_fraction", fmt(val_fraction));
    add("seed", std::to_string(seed));
    return s;
}

bool TrainConfig::set(const std::string& key, const std::string& value) {
    if (key == "epochs") epochs = parse_small_int(key, value);
    else if (key == "batch_size") batch_size = parse_small_int(key, value);
    else if (key == "lr") lr = parse_real(key, value);
    else if (key == "lr_p") lr_p = parse_real(key, value);
    else if (key == "decay") decay = parse_real(key, value);
    else if (key == "margin") loss.margin = parse_real(key, value);
    else if (key == "lambda") loss.lambda = parse_real(key, value);
    else if (key == "anchors_per_epoch") mining.anchors_per_epoch = parse_small_int(key, value);
    else if (key == "negatives_per_anchor") mining.negatives_per_anchor = parse_small_int(key, value);
    else if (key == "pool_size") mining.pool_size = parse_small_int(key, value);
    else if (key == "mining_seed") mining.seed = static_cast<std::uint64_t>(parse_int(key, value));
    else if (key == "freeze_backbone") freeze_backbone = parse_bool(key, value);
    else if (key == "train_soa") train_soa = parse_bool(key, value);
    else if (key == "train_whitening") train_whitening = parse_bool(key, value);
    else if (key == "train_p") train_p = parse_bool(key, value);
    else if (key == "val_fraction") val_fraction = parse_real(key, value);
    else if (key == "seed") seed = static_cast<std::uint64_t>(parse_int(key, value));
    else return false;
    return true;
}

std::map<std::string, std::string> parse_key_values(const std::string& text, const std::string& source) {
    std::map<std::string, std::string> out;
    std::istringstream in(text);
    std::string line;
    int number = 0;
    auto trim = [](std::string s) {
        const auto b = s.find_first_not_of(" \t\r");
        const auto e = s.find_last_not_of(" \t\r");
        return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    while (std::getline(in, line)) {
        ++number;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError(source + ":" + std::to_string(number) + ": expected key=value");
        }
        out[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

std::string EpochStats::to_json() const {
    nlohmann::json j;
    j["epoch"] = epoch;
    j["total"] = total;
    j["fos"] = fos;
    j["sos"] = sos;
    j["p"] = p;
    j["grad_norm"] = grad_norm;
    j["grad_p"] = grad_p;
    j["val_loss"] = val_loss ? nlohmann::json(*val_loss) : nlohmann::json(nullptr);
    j["batches"] = batches;
    j["triplets"] = triplets;
    j["wall_seconds"] = wall_seconds;
    return j.dump();
}

EpochStats EpochStats::from_json(const std::string& line) {
    try {
        const auto j = nlohmann::json::parse(line);
        EpochStats s;
        s.epoch = j.at("epoch").get<int>();
        s.total = j.at("total").get<double>();
        s.fos = j.at("fos").get<double>();
        s.sos = j.at("sos").get<double>();
        s.p = j.at("p").get<double>();
        s.grad_norm = j.at("grad_norm").get<double>();
        s.grad_p = j.at("grad_p").get<double>();
        if (!j.at("val_loss").is_null()) s.val_loss = j.at("val_loss").get<double>();
        s.batches = j.at("batches").get<int>();
        s.triplets = j.at("triplets").get<int>();
        s.wall_seconds = j.at("wall_seconds").get<double>();
        return s;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("malformed training report line: ") + e.what());
    }
}

bool EpochStats::same_result(const EpochStats& o) const {
    return epoch == o.epoch && total == o.total && fos == o.fos && sos == o.sos && p == o.p &&
           grad_norm == o.grad_norm && grad_p == o.grad_p && val_loss == o.val_loss && batches == o.batches &&
           triplets == o.triplets;
}

std::string TrainReport::to_jsonl() const {
    std::string out;
    for (const EpochStats& e : epochs) out += e.to_json() + "\n";
    return out;
}

bool TrainReport::same_result(const TrainReport& o) const {
    if (epochs.size() != o.epochs.size() || best_epoch != o.best_epoch) return false;
    for (std::size_t i = 0; i < epochs.size(); ++i) {
        if (!epochs[i].same_result(o.epochs[i])) return false;
    }
    return true;
}

AdamState AdamState::zeros_like(const DescriptorModel& model) {
    DescriptorModel copy = model;
    AdamState s;
    for (const ParamView& v : parameter_views(copy)) {
        s.m.emplace_back(v.values.size(), 0.0);
        s.v.emplace_back(v.values.size(), 0.0);
    }
    return s;
}

DataSplit split_classes(std::span<const int> labels, double val_fraction, std::uint64_t seed) {
    std::vector<int> classes(labels.begin(), labels.end());
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    std::size_t n_val = 0;
    if (val_fraction > 0.0) {
        n_val = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(val_fraction * classes.size())));
    }
    if (classes.size() < n_val + 2) {
        throw ValidationError("need at least 2 training classes after holding out " + std::to_string(n_val) +
                              " validation classes; have " + std::to_string(classes.size()));
    }
    std::mt19937_64 rng(seed);
    std::shuffle(classes.begin(), classes.end(), rng);
    const std::set<int> held(classes.begin(), classes.begin() + static_cast<std::ptrdiff_t>(n_val));
    DataSplit split;
    for (std::size_t i = 0; i < labels.size(); ++i) (held.count(labels[i]) ? split.validation : split.train).push_back(i);
    return split;
}

EpochStats run_epoch(DescriptorModel& model, AdamState& opt, const LabeledImages& data,
                     std::span<const std::size_t> items, const TrainConfig& cfg, int epoch) {
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const std::uint64_t seed = mix(cfg.seed, cfg.mining.seed, static_cast<std::uint64_t>(epoch));
    std::vector<int> labels;
    for (std::size_t i : items) labels.push_back(data.labels.at(i));

    const AnchorSample anchors = sample_anchors(labels, cfg.mining.anchors_per_epoch, mix(seed, 1));
    const std::vector<std::size_t> pool_items = draw_pool(items.size(), cfg.mining.pool_size, mix(seed, 2));

    // descriptors for every anchor and pool item, one row each
    std::vector<std::size_t> needed = pool_items;
    for (const AnchorPair& a : anchors.pairs) needed.push_back(a.anchor);
    std::sort(needed.begin(), needed.end());
    needed.erase(std::unique(needed.begin(), needed.end()), needed.end());
    const Matrix desc = refresh(model, data, items, needed);
    auto row_of = [&](std::size_t local) {
        return static_cast<Eigen::Index>(std::lower_bound(needed.begin(), needed.end(), local) - needed.begin());
    };

    LabeledPool pool;
    pool.descriptors.resize(static_cast<Eigen::Index>(pool_items.size()), desc.cols());
    for (std::size_t i = 0; i < pool_items.size(); ++i) {
        pool.descriptors.row(static_cast<Eigen::Index>(i)) = desc.row(row_of(pool_items[i]));
        pool.class_ids.push_back(labels[pool_items[i]]);
        pool.item_ids.push_back(data.ids[items[pool_items[i]]]);
    }

    std::vector<MinedAnchor> mined;
    for (const AnchorPair& a : anchors.pairs) {
        const Descriptor anchor = desc.row(row_of(a.anchor)).transpose();
        MinedAnchor m{a.anchor, a.positive, {}};
        for (std::size_t j : mine_hard_negatives(anchor, labels[a.anchor], pool, cfg.mining.negatives_per_anchor)) {
            m.negatives.push_back(pool_items[j]);
        }
        mined.push_back(std::move(m));
    }

    EpochStats stats;
    stats.epoch = epoch;
    stats.warnings = anchors.warnings;
    for (std::size_t b = 0; b < mined.size(); b += static_cast<std::size_t>(cfg.batch_size)) {
        const std::size_t end = std::min(mined.size(), b + static_cast<std::size_t>(cfg.batch_size));
        const std::string where = "epoch " + std::to_string(epoch) + " batch " + std::to_string(stats.batches + 1);
        BatchResult r = batch_gradient(model, data, items, std::span(mined).subspan(b, end - b), cfg);
        if (!std::isfinite(r.loss.total)) throw ValidationError("non-finite loss at " + where);
        stats.total += r.loss.total;
        stats.fos += r.loss.fos;
        stats.sos += r.loss.sos;
        stats.grad_norm += trainable_norm(r.grad, model, cfg);
        stats.grad_p += std::abs(r.grad.p);
        stats.triplets += static_cast<int>(r.triplets);
        adam_step(model, opt, r.grad, cfg, epoch, where);
        ++stats.batches;
    }
    if (stats.batches > 0) {
        const double n = stats.batches;
        stats.total /= n;
        stats.fos /= n;
        stats.sos /= n;
        stats.grad_norm /= n;
        stats.grad_p /= n;
    }
    stats.p = model.gem.value();
    stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return stats;
}

double validation_loss(const DescriptorModel& model, const LabeledImages& data,
                       std::span<const std::size_t> validation, const TrainConfig& cfg) {
    std::vector<std::size_t> all(data.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const Matrix desc = refresh(model, data, all, all);
    LabeledPool pool{desc, data.labels, data.ids};

    std::vector<Triplet> triplets;
    for (std::size_t vi = 0; vi < validation.size(); ++vi) {
        const std::size_t a = validation[vi];
        // next validation item of the same class, wrapping around
        std::size_t p = a;
        for (std::size_t step = 1; step < validation.size(); ++step) {
            const std::size_t cand = validation[(vi + step) % validation.size()];
            if (data.labels[cand] == data.labels[a]) {
                p = cand;
                break;
            }
        }
        if (p == a) continue;
        const Descriptor anchor = desc.row(static_cast<Eigen::Index>(a)).transpose();
        for (std::size_t n : mine_hard_negatives(anchor, data.labels[a], pool, cfg.mining.negatives_per_anchor)) {
            Triplet t;
            t.anchor = anchor;
            t.positive = desc.row(static_cast<Eigen::Index>(p)).transpose();
            t.negative = desc.row(static_cast<Eigen::Index>(n)).transpose();
            t.anchor_class = data.labels[a];
            t.negative_class = data.labels[n];
            triplets.push_back(std::move(t));
        }
    }
    if (triplets.empty()) throw ValidationError("validation split has no class with two or more items");
    return total_loss(triplets, cfg.loss);
}

namespace {

const char* kStateFile = "state.ckpt";
const char* kBestFile = "best.ckpt";
const char* kReportFile = "report.jsonl";

Container state_container(const DescriptorModel& model, const DescriptorModel& best, const AdamState& opt,
                          const TrainConfig& cfg, int epoch, int best_epoch, double best_val) {
    Container c = model_to_container(model);
    std::istringstream cfg_lines(cfg.to_text());
    std::string line;
    while (std::getline(cfg_lines, line)) c.header += "train.cfg." + line + "\n";
    c.header += "train.epoch=" + std::to_string(epoch) + "\n";
    c.header += "train.step=" + std::to_string(opt.step) + "\n";
    c.header += "train.best_epoch=" + std::to_string(best_epoch) + "\n";
    c.header += "train.best_val=" + fmt(best_val) + "\n";
    const Container best_c = model_to_container(best);
    for (std::size_t i = 0; i < c.tensors.size() && i < opt.m.size(); ++i) {
        const NamedTensor base = c.tensors[i];
        NamedTensor m{"adam.m." + base.name, base.shape, {}}, v{"adam.v." + base.name, base.shape, {}};
        for (double x : opt.m[i]) m.values.push_back(static_cast<float>(x));
        for (double x : opt.v[i]) v.values.push_back(static_cast<float>(x));
        c.tensors.push_back(std::move(m));
        c.tensors.push_back(std::move(v));
    }
    for (const NamedTensor& t : best_c.tensors) c.tensors.push_back({"best." + t.name, t.shape, t.values});
    return c;
}

Container prefixed(const Container& c, const std::string& prefix, const std::string& header) {
    Container out;
    out.header = header;
    for (const NamedTensor& t : c.tensors) {
        if (t.name.rfind(prefix, 0) == 0) out.tensors.push_back({t.name.substr(prefix.size()), t.shape, t.values});
    }
    return out;
}

}  // namespace

TrainResult train(DescriptorModel model, const LabeledImages& data, const TrainConfig& cfg, const TrainOptions& options) {
    cfg.validate();
    data.validate();
    model.validate();
    TrainResult result{model, {}};
    if (cfg.epochs == 0) return result;

    const DataSplit split = split_classes(data.labels, cfg.val_fraction, mix(cfg.seed, 0x5eed));
    AdamState opt = AdamState::zeros_like(model);
    DescriptorModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    int first = 1;
    TrainReport& report = result.report;

    const std::filesystem::path& dir = options.checkpoint_dir;
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
        if (std::filesystem::exists(dir / kStateFile)) {
            const Container state = read_container(dir / kStateFile);
            const auto header = parse_header(state.header);
            auto get = [&](const std::string& key) {
                auto it = header.find(key);
                if (it == header.end()) throw IoError("training state lacks '" + key + "'");
                return it->second;
            };
            // everything except the epoch budget must match the saved run
            TrainConfig saved = cfg;
            for (const auto& [k, v] : header) {
                if (k.rfind("train.cfg.", 0) == 0) saved.set(k.substr(10), v);
            }
            saved.epochs = cfg.epochs;
            if (saved.to_text() != cfg.to_text()) {
                throw ValidationError("checkpoint in " + dir.string() + " was written with a different configuration");
            }
            model = model_from_container(state);
            if (!(model.spec == result.model.spec)) {
                throw ValidationError("checkpoint in " + dir.string() + " holds a different architecture");
            }
            best = model_from_container(prefixed(state, "best.", state.header));
            const int done = std::stoi(get("train.epoch"));
            report.best_epoch = std::stoi(get("train.best_epoch"));
            best_val = std::stod(get("train.best_val"));
            opt.step = std::stoll(get("train.step"));
            DescriptorModel copy = model;
            const auto views = parameter_views(copy);
            for (std::size_t i = 0; i < views.size(); ++i) {
                const NamedTensor* m = state.find("adam.m." + views[i].name);
                const NamedTensor* v = state.find("adam.v." + views[i].name);
                if (!m || !v) throw IoError("training state lacks optimizer moments for '" + views[i].name + "'");
                opt.m[i].assign(m->values.begin(), m->values.end());
                opt.v[i].assign(v->values.begin(), v->values.end());
            }
            std::istringstream lines(read_file(dir / kReportFile));
            std::string line;
            while (static_cast<int>(report.epochs.size()) < done && std::getline(lines, line)) {
                report.epochs.push_back(EpochStats::from_json(line));
            }
            if (static_cast<int>(report.epochs.size()) != done) throw IoError("training report is shorter than the state");
            first = done + 1;
        }
    }

    for (int epoch = first; epoch <= cfg.epochs; ++epoch) {
        EpochStats stats = run_epoch(model, opt, data, split.train, cfg, epoch);
        for (const std::string& w : stats.warnings) {
            if (std::find(report.warnings.begin(), report.warnings.end(), w) == report.warnings.end()) {
                report.warnings.push_back(w);
            }
        }
        if (!split.validation.empty()) {
            stats.val_loss = validation_loss(model, data, split.validation, cfg);
            if (*stats.val_loss < best_val) {
                best_val = *stats.val_loss;
                best = model;
                report.best_epoch = epoch;
            }
        }
        report.epochs.push_back(stats);
        if (!dir.empty()) {
            write_file_atomic(dir / kReportFile, report.to_jsonl());
            save_model(dir / kBestFile, split.validation.empty() ? model : best);
            // the state file is written last: it marks the epoch as complete
            write_container(dir / kStateFile, state_container(model, best, opt, cfg, epoch, report.best_epoch, best_val));
        }
        if (options.on_epoch && !options.on_epoch(stats)) break;
    }
    if (split.validation.empty()) {
        report.best_epoch = report.epochs.empty() ? 0 : report.epochs.back().epoch;
        result.model = std::move(model);
    } else {
        result.model = std::move(best);
    }
    return result;
}

}  // namespace solar
