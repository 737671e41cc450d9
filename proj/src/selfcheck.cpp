#include "solar/selfcheck.hpp"

#include "solar/checkpoint.hpp"
#include "solar/metrics.hpp"
#include "solar/mining.hpp"
#include "solar/pipeline.hpp"
#include "solar/store.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <random>

namespace solar {

namespace {

Image noise_image(std::mt19937_64& rng, int size) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Image img(size, size, 3);
    for (double& x : img.pixels()) x = u(rng);
    return img;
}

FeatureMap random_map(std::mt19937_64& rng, int h, int w, int d, double scale) {
    std::uniform_real_distribution<double> u(-scale, scale);
    FeatureMap f(h, w, d);
    for (Eigen::Index i = 0; i < f.data().size(); ++i) f.data().data()[i] = u(rng);
    return f;
}

std::string num(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", x);
    return buf;
}

// Largest relative deviation between an analytic gradient and central
// differences of `f` over `params`.
double fd_error(std::span<double> params, std::span<const double> analytic, const std::function<double()>& f) {
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
        const double saved = params[i];
        const double h = 1e-6 * std::max(1.0, std::abs(saved));
        params[i] = saved + h;
        const double up = f();
        params[i] = saved - h;
        const double down = f();
        params[i] = saved;
        const double num_g = (up - down) / (2.0 * h);
        diff += (num_g - analytic[i]) * (num_g - analytic[i]);
        norm += analytic[i] * analytic[i];
    }
    return std::sqrt(diff) / std::max(std::sqrt(norm), 1e-12);
}

CheckResult identity_at_init(std::mt19937_64& rng) {
    const Image img = noise_image(rng, 48);
    const auto plain = DescriptorModel::create(BackboneSpec::toy_fcn(), 3);
    const auto with_soa = DescriptorModel::create(BackboneSpec::toy_fcn({4, 5}), 3);
    const bool same = global_descriptor(img, plain) == global_descriptor(img, with_soa);
    return {"identity-at-init", same, same ? "fresh SOA blocks leave the descriptor bit-identical" : "descriptors differ"};
}

CheckResult attention_rows(std::mt19937_64& rng) {
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const Matrix q = random_map(rng, 1, 12, 4, 5.0).data().transpose();
        const Matrix k = random_map(rng, 1, 12, 4, 5.0).data().transpose();
        const Matrix z = attention_map(q, k, 1.0);
        worst = std::max(worst, (z.rowwise().sum().array() - 1.0).abs().maxCoeff());
    }
    return {"attention rows sum to 1", worst <= 1e-6, "max deviation " + num(worst)};
}

CheckResult unit_norm(std::mt19937_64& rng) {
    auto model = DescriptorModel::create(BackboneSpec::toy_fcn({5}), 9);
    model.soa.at(5).output.setConstant(0.01);
    const Image img = noise_image(rng, 64);
    const auto scales = default_scales();
    const double dev = std::abs(multi_scale_descriptor(img, model, scales).norm() - 1.0);
    return {"descriptors are unit norm", dev <= 1e-6, "deviation " + num(dev)};
}

CheckResult gem_gradient(std::mt19937_64& rng) {
    FeatureMap f = random_map(rng, 3, 3, 4, 1.0);
    f.data() = f.data().cwiseAbs();
    GemParam p(2.7);
    const Vector w = random_map(rng, 1, 1, 4, 1.0).data().transpose();
    const Vector pooled = gem_pool(f, p);
    const GemGradient g = gem_pool_backward(f, p, pooled, w);
    auto loss = [&] { return w.dot(gem_pool(f, p)); };
    std::vector<double> analytic(g.d_features.data(), g.d_features.data() + g.d_features.size());
    const double e1 = fd_error({f.data().data(), static_cast<std::size_t>(f.data().size())}, analytic, loss);
    const double e2 = fd_error({&detail::gem_storage(p), 1}, std::vector<double>{g.d_p}, loss);
    const double e = std::max(e1, e2);
    return {"GeM gradient", e <= 1e-4, "relative error " + num(e)};
}

CheckResult soa_gradient(std::mt19937_64& rng) {
    FeatureMap f = random_map(rng, 3, 3, 4, 1.0);
    SoaParams s = init_soa(4, 2, 5);
    s.output = random_map(rng, 4, 1, 4, 0.5).data();
    const Matrix w = random_map(rng, 3, 3, 4, 1.0).data();
    const SoaOutput out = soa_forward(f, s);
    const SoaGradient g = soa_backward(f, s, out.attention, w);
    auto loss = [&] { return soa_forward(f, s).features.data().cwiseProduct(w).sum(); };
    std::vector<double> d_f(g.d_features.data(), g.d_features.data() + g.d_features.size());
    std::vector<double> d_q(g.d_query.data(), g.d_query.data() + g.d_query.size());
    const double e1 = fd_error({f.data().data(), static_cast<std::size_t>(f.data().size())}, d_f, loss);
    const double e2 = fd_error({s.query.data(), static_cast<std::size_t>(s.query.size())}, d_q, loss);
    const double e = std::max(e1, e2);
    return {"SOA gradient", e <= 1e-4, "relative error " + num(e)};
}

CheckResult loss_gradient(std::mt19937_64& rng) {
    auto unit = [&] {
        Vector v = random_map(rng, 1, 1, 6, 1.0).data().transpose();
        return Descriptor(v / v.norm());
    };
    std::vector<Triplet> ts;
    for (int i = 0; i < 4; ++i) ts.push_back(Triplet{unit(), unit(), unit(), 0, 1});
    const LossConfig cfg{0.5, 2.0};
    const LossBreakdown lb = loss_with_gradients(ts, cfg);
    std::vector<double> analytic(lb.gradients[0].d_anchor.data(), lb.gradients[0].d_anchor.data() + 6);
    const double e = fd_error({ts[0].anchor.data(), 6}, analytic, [&] { return total_loss(ts, cfg); });
    return {"loss gradient", e <= 1e-4, "relative error " + num(e)};
}

CheckResult serialization(std::mt19937_64& rng) {
    std::vector<StoreEntry> entries;
    std::normal_distribution<double> n(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        Vector v(8);
        for (int j = 0; j < 8; ++j) v[j] = n(rng);
        v /= v.norm();
        for (int j = 0; j < 8; ++j) v[j] = static_cast<float>(v[j]);
        entries.push_back({"e" + std::to_string(i), v});
    }
    const std::string bytes = encode_store(entries);
    bool ok = encode_store(decode_store(bytes)) == bytes;
    const auto model = DescriptorModel::create(BackboneSpec::toy_fcn({4}), 2);
    const std::string ckpt = encode_container(model_to_container(model));
    ok = ok && encode_container(model_to_container(model_from_container(decode_container(ckpt)))) == ckpt;
    return {"store and checkpoint roundtrip", ok, ok ? "byte exact" : "bytes changed"};
}

CheckResult metrics_sanity() {
    const std::vector<std::string> ranking = {"a", "j", "b", "x"};
    const double ap = *average_precision(ranking, {"a", "b"}, {"j"});
    const double ap2 = *average_precision(ranking, {"a", "b"}, {});
    const bool ok = ap == 1.0 && std::abs(ap2 - 5.0 / 6.0) < 1e-15;
    return {"AP with junk removal", ok, "AP " + num(ap) + " and " + num(ap2)};
}

CheckResult mining_sanity(std::mt19937_64& rng) {
    LabeledPool pool;
    pool.descriptors = random_map(rng, 1, 40, 8, 1.0).data();
    pool.descriptors.rowwise().normalize();
    for (int i = 0; i < 40; ++i) {
        pool.class_ids.push_back(i % 8);
        pool.item_ids.push_back("p" + std::to_string(i));
    }
    const Descriptor anchor = pool.descriptors.row(0).transpose();
    const auto negs = mine_hard_negatives(anchor, 0, pool, 5);
    bool ok = negs.size() == 5;
    std::set<int> classes;
    double last = -1.0;
    for (std::size_t i : negs) {
        const double d = (pool.descriptors.row(static_cast<Eigen::Index>(i)).transpose() - anchor).squaredNorm();
        ok = ok && pool.class_ids[i] != 0 && classes.insert(pool.class_ids[i]).second && d >= last;
        last = d;
    }
    return {"hard negatives are sorted and class-distinct", ok, std::to_string(negs.size()) + " negatives"};
}

}  // namespace

std::vector<CheckResult> run_self_check(unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::vector<CheckResult> out;
    auto guarded = [&](const std::string& name, const std::function<CheckResult()>& fn) {
        try {
            out.push_back(fn());
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("threw: ") + e.what()});
        }
    };
    guarded("identity-at-init", [&] { return identity_at_init(rng); });
    guarded("attention rows sum to 1", [&] { return attention_rows(rng); });
    guarded("descriptors are unit norm", [&] { return unit_norm(rng); });
    guarded("GeM gradient", [&] { return gem_gradient(rng); });
    guarded("SOA gradient", [&] { return soa_gradient(rng); });
    guarded("loss gradient", [&] { return loss_gradient(rng); });
    guarded("store and checkpoint roundtrip", [&] { return serialization(rng); });
    guarded("AP with junk removal", [] { return metrics_sanity(); });
    guarded("hard negatives are sorted and class-distinct", [&] { return mining_sanity(rng); });
    return out;
}

}  // namespace solar
