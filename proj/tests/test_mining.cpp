#include "doctest.h"
#include "solar/errors.hpp"
#include "solar/mining.hpp"
#include "support/oracles.hpp"

#include <map>
#include <random>
#include <set>

using namespace solar;

namespace {

LabeledPool random_pool(std::mt19937_64& rng, int n, int dim, int classes) {
    LabeledPool pool;
    pool.descriptors.resize(n, dim);
    std::uniform_int_distribution<int> cls(0, classes - 1);
    for (int i = 0; i < n; ++i) {
        pool.descriptors.row(i) = oracle::random_unit(rng, dim).transpose();
        pool.class_ids.push_back(cls(rng));
        pool.item_ids.push_back("item" + std::to_string(1000 + (i * 7919) % n));
    }
    return pool;
}

// filter -> sort by (distance, id) -> keep first per class -> take k
std::vector<std::size_t> brute_force(const Vector& anchor, int anchor_class, const LabeledPool& pool, int k) {
    std::vector<std::tuple<double, std::string, std::size_t>> all;
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool.class_ids[i] == anchor_class) continue;
        double d = 0;
        for (Eigen::Index j = 0; j < anchor.size(); ++j) {
            const double diff = pool.descriptors(static_cast<Eigen::Index>(i), j) - anchor[j];
            d += diff * diff;
        }
        all.emplace_back(d, pool.item_ids[i], i);
    }
    std::sort(all.begin(), all.end());
    std::vector<std::size_t> out;
    std::set<int> seen;
    for (const auto& [d, id, i] : all) {
        if (seen.count(pool.class_ids[i])) continue;
        seen.insert(pool.class_ids[i]);
        out.push_back(i);
        if (static_cast<int>(out.size()) == k) break;
    }
    return out;
}

}  // namespace

TEST_CASE("mining config defaults") {
    const MiningConfig full;
    CHECK(full.anchors_per_epoch == 2000);
    CHECK(full.negatives_per_anchor == 5);
    CHECK(full.pool_size == 20000);
    const MiningConfig desk = MiningConfig::desk_scale();
    CHECK(desk.anchors_per_epoch == 64);
    CHECK(desk.negatives_per_anchor == 5);
    CHECK(desk.pool_size == 512);
}

TEST_CASE("sample_anchors") {
    const std::vector<int> classes{0, 0, 1, 1, 2, 2, 3, 3};
    const AnchorSample s = sample_anchors(classes, 4, 42);
    CHECK(s.pairs.size() == 4);
    CHECK(s.warnings.empty());
    std::set<std::size_t> anchors;
    for (const auto& p : s.pairs) {
        CHECK(classes[p.anchor] == classes[p.positive]);
        CHECK(p.anchor != p.positive);
        anchors.insert(p.anchor);
    }
    CHECK(anchors.size() == 4);

    const AnchorSample again = sample_anchors(classes, 4, 42);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(again.pairs[i].anchor == s.pairs[i].anchor);
        CHECK(again.pairs[i].positive == s.pairs[i].positive);
    }

    // six eligible anchors, two singletons
    const std::vector<int> sparse{0, 0, 1, 1, 1, 2, 3, 4, 4};
    const AnchorSample saturated = sample_anchors(sparse, 10, 1);
    CHECK(saturated.pairs.size() == 7);
    CHECK(saturated.warnings.size() == 1);
    for (const auto& p : saturated.pairs) {
        CHECK(sparse[p.anchor] != 2);
        CHECK(sparse[p.anchor] != 3);
    }
    const std::vector<int> six{0, 0, 1, 1, 2, 2, 7};
    const AnchorSample s6 = sample_anchors(six, 10, 3);
    CHECK(s6.pairs.size() == 6);
    CHECK_FALSE(s6.warnings.empty());
}

TEST_CASE("draw_pool") {
    CHECK(draw_pool(5, 10, 1).size() == 5);
    const auto a = draw_pool(100, 20, 9);
    CHECK(a.size() == 20);
    CHECK(std::is_sorted(a.begin(), a.end()));
    CHECK(a == draw_pool(100, 20, 9));
    CHECK(a != draw_pool(100, 20, 10));
}

TEST_CASE("mine_hard_negatives excludes the anchor class") {
    LabeledPool pool;
    pool.descriptors = Matrix::Zero(8, 2);
    const Vector anchor = Vector::Unit(2, 0);
    for (int i = 0; i < 8; ++i) {
        const double angle = 0.2 * i;
        pool.descriptors.row(i) << std::cos(angle), std::sin(angle);
        pool.class_ids.push_back(i < 3 ? 0 : i);
        pool.item_ids.push_back("p" + std::to_string(i));
    }
    pool.descriptors.row(1) = anchor.transpose();  // own class at distance 0
    pool.validate();
    const auto picked = mine_hard_negatives(anchor, 0, pool, 5);
    CHECK(picked == std::vector<std::size_t>{3, 4, 5, 6, 7});
    CHECK_THROWS_AS(mine_hard_negatives(anchor, 0, pool, 6), ValidationError);
}

TEST_CASE("mine_hard_negatives breaks ties by id and keeps classes distinct") {
    LabeledPool pool;
    pool.descriptors = Matrix::Zero(4, 2);
    for (int i = 0; i < 4; ++i) pool.descriptors.row(i) << 0.0, 1.0;
    pool.class_ids = {1, 2, 2, 3};
    pool.item_ids = {"d", "c", "a", "b"};
    const auto picked = mine_hard_negatives(Vector::Unit(2, 0), 0, pool, 3);
    CHECK(picked == std::vector<std::size_t>{2, 3, 0});
}

TEST_CASE("mine_hard_negatives equals the brute-force oracle") {
    std::mt19937_64 rng(2024);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 20 + static_cast<int>(rng() % 481);
        const int classes = 6 + static_cast<int>(rng() % 40);
        LabeledPool pool = random_pool(rng, n, 8, classes);
        const Vector anchor = oracle::random_unit(rng, 8);
        const int anchor_class = static_cast<int>(rng() % classes);
        std::set<int> eligible;
        for (int c : pool.class_ids) {
            if (c != anchor_class) eligible.insert(c);
        }
        if (eligible.size() < 5) continue;
        const auto got = mine_hard_negatives(anchor, anchor_class, pool, 5);
        CHECK(got == brute_force(anchor, anchor_class, pool, 5));
        std::set<int> got_classes;
        for (auto i : got) {
            CHECK(pool.class_ids[i] != anchor_class);
            got_classes.insert(pool.class_ids[i]);
        }
        CHECK(got_classes.size() == got.size());
    }
}

TEST_CASE("build_triplets") {
    const LabeledDescriptor a{Vector::Unit(3, 0), 0, "a"};
    const LabeledDescriptor p{Vector::Unit(3, 1), 0, "p"};
    std::vector<LabeledDescriptor> negs;
    for (int i = 0; i < 5; ++i) negs.push_back({Vector::Unit(3, 2), i + 1, "n" + std::to_string(i)});
    const auto ts = build_triplets(a, p, negs);
    CHECK(ts.size() == 5);
    CHECK(ts[3].negative_id == "n3");
    CHECK(ts[3].anchor_id == "a");
    CHECK(ts[3].positive_id == "p");
    CHECK(ts[3].negative_class == 4);
    CHECK(build_triplets(a, p, std::span(negs).first(1)).size() == 1);
    CHECK_THROWS_AS(build_triplets(a, p, std::span<const LabeledDescriptor>{}), ValidationError);
    const LabeledDescriptor same{Vector::Unit(3, 2), 0, "s"};
    CHECK_THROWS_AS(build_triplets(a, p, std::span(&same, 1)), ValidationError);
}

TEST_CASE("labeled pool validation") {
    std::mt19937_64 rng(1);
    LabeledPool pool = random_pool(rng, 10, 4, 3);
    pool.validate();
    pool.item_ids[3] = pool.item_ids[4];
    CHECK_THROWS_AS(pool.validate(), ValidationError);
    pool = random_pool(rng, 10, 4, 3);
    pool.descriptors(0, 0) += 0.1;
    CHECK_THROWS_AS(pool.validate(), ValidationError);
}
