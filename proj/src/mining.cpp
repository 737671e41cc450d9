#include "solar/mining.hpp"

#include "solar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <unordered_set>

namespace solar {

void LabeledPool::validate() const {
    const auto n = static_cast<Eigen::Index>(class_ids.size());
    if (descriptors.rows() != n || static_cast<Eigen::Index>(item_ids.size()) != n) {
        throw ValidationError("labeled pool: descriptor, class and id counts differ");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        if (std::abs(descriptors.row(i).norm() - 1.0) > 1e-6) {
            throw ValidationError("labeled pool: descriptor '" + item_ids[i] + "' is not unit-norm");
        }
    }
    std::unordered_set<std::string> seen(item_ids.begin(), item_ids.end());
    if (seen.size() != item_ids.size()) throw ValidationError("labeled pool: duplicate item ids");
}

MiningConfig MiningConfig::desk_scale() {
    MiningConfig cfg;
    cfg.anchors_per_epoch = 64;
    cfg.negatives_per_anchor = 5;
    cfg.pool_size = 512;
    return cfg;
}

AnchorSample sample_anchors(std::span<const int> class_ids, int count, std::uint64_t seed) {
    if (count < 0) throw ValidationError("sample_anchors: negative anchor count");
    std::map<int, std::vector<std::size_t>> members;
    for (std::size_t i = 0; i < class_ids.size(); ++i) members[class_ids[i]].push_back(i);

    std::vector<std::size_t> eligible;
    for (std::size_t i = 0; i < class_ids.size(); ++i) {
        if (members[class_ids[i]].size() >= 2) eligible.push_back(i);
    }

    AnchorSample sample;
    std::mt19937_64 rng(seed);
    std::shuffle(eligible.begin(), eligible.end(), rng);
    std::size_t take = static_cast<std::size_t>(count);
    if (eligible.size() < take) {
        sample.warnings.push_back("requested " + std::to_string(count) + " anchors but only " +
                                  std::to_string(eligible.size()) + " are eligible; using all");
        take = eligible.size();
    }
    for (std::size_t i = 0; i < take; ++i) {
        const std::size_t anchor = eligible[i];
        const auto& same = members[class_ids[anchor]];
        std::uniform_int_distribution<std::size_t> pick(0, same.size() - 2);
        std::size_t j = pick(rng);
        // skip over the anchor itself
        const auto self = static_cast<std::size_t>(std::find(same.begin(), same.end(), anchor) - same.begin());
        if (j >= self) ++j;
        sample.pairs.push_back({anchor, same[j]});
    }
    return sample;
}

std::vector<std::size_t> draw_pool(std::size_t n, int pool_size, std::uint64_t seed) {
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    if (pool_size < 0 || static_cast<std::size_t>(pool_size) >= n) return idx;
    std::mt19937_64 rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(static_cast<std::size_t>(pool_size));
    std::sort(idx.begin(), idx.end());
    return idx;
}

std::vector<std::size_t> mine_hard_negatives(const Descriptor& anchor, int anchor_class, const LabeledPool& pool, int k) {
    if (k < 1) throw ValidationError("mine_hard_negatives: k must be positive");
    if (anchor.size() != pool.descriptors.cols()) throw ValidationError("mine_hard_negatives: dimension mismatch");

    struct Candidate {
        double distance;
        std::size_t index;
    };
    std::vector<Candidate> candidates;
    candidates.reserve(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i) {
        if (pool.class_ids[i] == anchor_class) continue;
        const auto row = pool.descriptors.row(static_cast<Eigen::Index>(i));
        candidates.push_back({(row.transpose() - anchor).squaredNorm(), i});
    }
    std::sort(candidates.begin(), candidates.end(), [&](const Candidate& a, const Candidate& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return pool.item_ids[a.index] < pool.item_ids[b.index];
    });

    std::vector<std::size_t> picked;
    std::set<int> used;
    for (const Candidate& c : candidates) {
        if (used.insert(pool.class_ids[c.index]).second) {
            picked.push_back(c.index);
            if (static_cast<int>(picked.size()) == k) return picked;
        }
    }
    throw ValidationError("mine_hard_negatives: need " + std::to_string(k) + " negatives from distinct classes, pool has " +
                          std::to_string(used.size()) + " eligible classes (short by " +
                          std::to_string(k - static_cast<int>(used.size())) + ")");
}

std::vector<Triplet> build_triplets(const LabeledDescriptor& anchor, const LabeledDescriptor& positive,
                                    std::span<const LabeledDescriptor> negatives) {
    if (negatives.empty()) throw ValidationError("build_triplets: no negatives");
    std::vector<Triplet> out;
    out.reserve(negatives.size());
    for (const LabeledDescriptor& n : negatives) {
        if (n.class_id == anchor.class_id) throw ValidationError("build_triplets: negative shares the anchor's class");
        out.push_back(Triplet{anchor.values, positive.values, n.values, anchor.class_id, n.class_id, anchor.id, positive.id,
                              n.id});
    }
    return out;
}

}  // namespace solar
