#pragma once

#include "solar/losses.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace solar {

/// Descriptors with class labels, searched for hard negatives.
struct LabeledPool {
    Matrix descriptors;  // n x d, unit rows
    std::vector<int> class_ids;
    std::vector<std::string> item_ids;

    std::size_t size() const { return class_ids.size(); }
    /// Checks shapes, unit norms (1e-6) and id uniqueness.
    void validate() const;
};

struct MiningConfig {
    int anchors_per_epoch = 2000;
    int negatives_per_anchor = 5;
    int pool_size = 20000;
    std::uint64_t seed = 0;

    /// 64 anchors / 5 negatives / 512 pool.
    static MiningConfig desk_scale();
};

struct AnchorPair {
    std::size_t anchor = 0;
    std::size_t positive = 0;
};

struct AnchorSample {
    std::vector<AnchorPair> pairs;
    std::vector<std::string> warnings;
};

/// Draws `count` anchors uniformly without replacement among items whose
/// class has at least two members, each with a random same-class positive.
/// When fewer anchors are eligible, all of them are returned and a warning is
/// recorded.
AnchorSample sample_anchors(std::span<const int> class_ids, int count, std::uint64_t seed);

/// Random subset of `pool_size` indices out of [0, n), sorted ascending.
std::vector<std::size_t> draw_pool(std::size_t n, int pool_size, std::uint64_t seed);

/// The k nearest (Euclidean) pool items whose class differs from the anchor,
/// keeping at most one item per class. Ties break on ascending item id.
std::vector<std::size_t> mine_hard_negatives(const Descriptor& anchor, int anchor_class, const LabeledPool& pool, int k);

struct LabeledDescriptor {
    Descriptor values;
    int class_id = 0;
    std::string id;
};

/// One triplet per negative, all sharing the anchor and positive.
std::vector<Triplet> build_triplets(const LabeledDescriptor& anchor, const LabeledDescriptor& positive,
                                    std::span<const LabeledDescriptor> negatives);

}  // namespace solar
