#include "solar/metrics.hpp"

#include "solar/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace solar {

RankedResult rank_database(const std::string& query_id, const Descriptor& query, const Matrix& database,
                           std::span<const std::string> database_ids) {
    if (database.rows() != static_cast<Eigen::Index>(database_ids.size())) {
        throw ValidationError("rank_database: id count does not match the database");
    }
    if (database.cols() != query.size()) throw ValidationError("rank_database: dimension mismatch");
    const Vector scores = database * query;
    std::vector<std::size_t> order(database_ids.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (scores[a] != scores[b]) return scores[a] > scores[b];
        return database_ids[a] < database_ids[b];
    });
    RankedResult r{query_id, {}};
    r.ranking.reserve(order.size());
    for (std::size_t i : order) r.ranking.push_back(database_ids[i]);
    return r;
}

namespace {

void check_disjoint(const std::set<std::string>& positives, const std::set<std::string>& junk) {
    for (const std::string& id : positives) {
        if (junk.count(id)) throw ValidationError("id '" + id + "' is both positive and junk");
    }
}

}  // namespace

std::optional<double> average_precision(std::span<const std::string> ranking, const std::set<std::string>& positives,
                                        const std::set<std::string>& junk) {
    check_disjoint(positives, junk);
    if (positives.empty()) return std::nullopt;
    double sum = 0.0;
    std::size_t rank = 0;
    std::size_t hits = 0;
    for (const std::string& id : ranking) {
        if (junk.count(id)) continue;
        ++rank;
        if (positives.count(id)) {
            ++hits;
            sum += static_cast<double>(hits) / static_cast<double>(rank);
        }
    }
    return sum / static_cast<double>(positives.size());
}

std::optional<double> precision_at_k(std::span<const std::string> ranking, const std::set<std::string>& positives,
                                     const std::set<std::string>& junk, std::size_t k) {
    check_disjoint(positives, junk);
    if (positives.empty()) return std::nullopt;
    if (k == 0) throw ValidationError("precision_at_k: k must be positive");
    std::size_t rank = 0;
    std::size_t hits = 0;
    for (const std::string& id : ranking) {
        if (rank == k) break;
        if (junk.count(id)) continue;
        ++rank;
        if (positives.count(id)) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(std::min(k, positives.size()));
}

ProtocolScores evaluate_protocol(std::span<const RankedResult> results, const RetrievalGroundTruth& gt, Protocol protocol,
                                 std::size_t k) {
    ProtocolScores s;
    s.protocol = protocol;
    for (const RankedResult& r : results) {
        const QueryGroundTruth* q = gt.find(r.query_id);
        if (!q) throw ValidationError("no ground truth for query '" + r.query_id + "'");
        const ProtocolSets sets = protocol_split(*q, protocol);
        const auto ap = average_precision(r.ranking, sets.positives, sets.junk);
        if (!ap) {
            s.skipped.push_back(r.query_id);
            continue;
        }
        s.map += *ap;
        s.mp_at_k += *precision_at_k(r.ranking, sets.positives, sets.junk, k);
        s.per_query_ap.emplace_back(r.query_id, *ap);
        ++s.evaluated;
    }
    if (s.evaluated == 0) {
        throw ValidationError("every query has zero positives under the " + to_string(protocol) + " protocol");
    }
    s.map /= static_cast<double>(s.evaluated);
    s.mp_at_k /= static_cast<double>(s.evaluated);
    return s;
}

double mean_ap(std::span<const RankedResult> results, const RetrievalGroundTruth& gt, Protocol protocol) {
    return evaluate_protocol(results, gt, protocol).map;
}

double mp_at_k(std::span<const RankedResult> results, const RetrievalGroundTruth& gt, Protocol protocol, std::size_t k) {
    return evaluate_protocol(results, gt, protocol, k).mp_at_k;
}

double fpr_at_95(const VerificationSet& v) {
    if (v.positive.size() < 20) throw ValidationError("fpr_at_95 needs at least 20 positive pairs");
    if (v.negative.empty()) throw ValidationError("fpr_at_95 needs negative pairs");
    for (const auto* list : {&v.positive, &v.negative}) {
        for (double d : *list) {
            if (!std::isfinite(d)) throw ValidationError("fpr_at_95: non-finite distance");
        }
    }
    std::vector<double> pos = v.positive;
    std::sort(pos.begin(), pos.end());
    // smallest index i with (i + 1) >= 0.95 n, in integer arithmetic
    const std::size_t needed = (95 * pos.size() + 99) / 100;
    const double threshold = pos[needed - 1];
    const auto fp = std::count_if(v.negative.begin(), v.negative.end(), [&](double d) { return d <= threshold; });
    return static_cast<double>(fp) / static_cast<double>(v.negative.size());
}

}  // namespace solar
