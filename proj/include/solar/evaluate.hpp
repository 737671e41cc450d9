#pragma once

#include "solar/dataset.hpp"
#include "solar/metrics.hpp"
#include "solar/network.hpp"

#include <span>
#include <string>
#include <vector>

namespace solar {

struct EvaluationReport {
    std::vector<ProtocolScores> protocols;

    const ProtocolScores& at(Protocol p) const;
    /// protocol | mAP | mP@10 | queries, one row per protocol.
    std::string to_table() const;
    /// One JSON record per protocol.
    std::string to_jsonl() const;
};

/// Ranks every query against the database by inner product.
std::vector<RankedResult> rank_all(const Matrix& queries, std::span<const std::string> query_ids, const Matrix& database,
                                   std::span<const std::string> database_ids);

EvaluationReport evaluate_rankings(std::span<const RankedResult> results, const RetrievalGroundTruth& gt,
                                   std::span<const Protocol> protocols = kAllProtocols);

/// Query descriptors, each query cropped to its ground-truth box first.
Matrix query_descriptors(const RetrievalBenchmark& bench, const DescriptorModel& model, std::span<const double> scales);

EvaluationReport evaluate_model(const DescriptorModel& model, const RetrievalBenchmark& bench,
                                std::span<const double> scales);

struct PSweepRow {
    double p = 0.0;
    double map[3] = {0.0, 0.0, 0.0};  // easy, medium, hard
};

struct PSweep {
    std::vector<PSweepRow> rows;
    double learned_p = 0.0;

    /// Header "p,mAP_easy,mAP_medium,mAP_hard,learned_p" plus one line per row.
    std::string to_csv() const;
};

/// Re-evaluates the model with its GeM exponent overridden by each value; no
/// retraining. Values must lie in [1, 100].
PSweep p_sweep(const DescriptorModel& model, const RetrievalBenchmark& bench, std::span<const double> p_values,
               std::span<const double> scales);

}  // namespace solar
