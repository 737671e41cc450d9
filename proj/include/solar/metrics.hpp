#pragma once

#include "solar/ground_truth.hpp"

#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace solar {

struct RankedResult {
    std::string query_id;
    std::vector<std::string> ranking;  // database ids, most similar first
};

/// Orders the database by descending inner product with the query; equal
/// scores fall back to ascending id.
RankedResult rank_database(const std::string& query_id, const Descriptor& query, const Matrix& database,
                           std::span<const std::string> database_ids);

/// Non-interpolated AP after removing junk ids from the ranking. Positives
/// absent from the ranking count as misses. nullopt when there are no
/// positives (the query is skipped rather than scored zero).
std::optional<double> average_precision(std::span<const std::string> ranking, const std::set<std::string>& positives,
                                        const std::set<std::string>& junk);

/// Hits in the junk-filtered top k divided by min(k, |positives|).
std::optional<double> precision_at_k(std::span<const std::string> ranking, const std::set<std::string>& positives,
                                     const std::set<std::string>& junk, std::size_t k);

struct ProtocolScores {
    Protocol protocol = Protocol::Medium;
    double map = 0.0;
    double mp_at_k = 0.0;
    std::size_t evaluated = 0;
    std::vector<std::string> skipped;
    std::vector<std::pair<std::string, double>> per_query_ap;
};

/// mAP and mP@k over every result whose query id appears in `gt`. Throws
/// when every query is skipped.
ProtocolScores evaluate_protocol(std::span<const RankedResult> results, const RetrievalGroundTruth& gt, Protocol protocol,
                                 std::size_t k = 10);

double mean_ap(std::span<const RankedResult> results, const RetrievalGroundTruth& gt, Protocol protocol);
double mp_at_k(std::span<const RankedResult> results, const RetrievalGroundTruth& gt, Protocol protocol,
               std::size_t k = 10);

/// Pair distances for a patch verification task.
struct VerificationSet {
    std::vector<double> positive;
    std::vector<double> negative;
};

/// Fraction of negative pairs at or below the smallest distance that admits
/// at least 95% of positive pairs. Needs >= 20 positives.
double fpr_at_95(const VerificationSet& v);

}  // namespace solar
