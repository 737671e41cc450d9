#include "solar/evaluate.hpp"

#include "solar/errors.hpp"
#include "solar/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>

namespace solar {

const ProtocolScores& EvaluationReport::at(Protocol p) const {
    for (const ProtocolScores& s : protocols) {
        if (s.protocol == p) return s;
    }
    throw ValidationError("protocol " + to_string(p) + " was not evaluated");
}

std::string EvaluationReport::to_table() const {
    std::string out = "protocol  mAP      mP@10    queries\n";
    char buf[128];
    for (const ProtocolScores& s : protocols) {
        std::snprintf(buf, sizeof(buf), "%-8s  %.4f   %.4f   %zu\n", to_string(s.protocol).c_str(), s.map, s.mp_at_k,
                      s.evaluated);
        out += buf;
    }
    return out;
}

std::string EvaluationReport::to_jsonl() const {
    std::string out;
    for (const ProtocolScores& s : protocols) {
        nlohmann::json j;
        j["protocol"] = to_string(s.protocol);
        j["mAP"] = s.map;
        j["mP@10"] = s.mp_at_k;
        j["evaluated"] = s.evaluated;
        j["skipped"] = s.skipped;
        nlohmann::json per = nlohmann::json::object();
        for (const auto& [id, ap] : s.per_query_ap) per[id] = ap;
        j["ap"] = per;
        out += j.dump() + "\n";
    }
    return out;
}

std::vector<RankedResult> rank_all(const Matrix& queries, std::span<const std::string> query_ids, const Matrix& database,
                                   std::span<const std::string> database_ids) {
    if (queries.rows() != static_cast<Eigen::Index>(query_ids.size())) {
        throw ValidationError("query descriptor count does not match the query ids");
    }
    std::vector<RankedResult> out(query_ids.size());
    parallel_for(query_ids.size(), [&](std::size_t i) {
        out[i] = rank_database(query_ids[i], queries.row(static_cast<Eigen::Index>(i)).transpose(), database, database_ids);
    });
    return out;
}

EvaluationReport evaluate_rankings(std::span<const RankedResult> results, const RetrievalGroundTruth& gt,
                                   std::span<const Protocol> protocols) {
    EvaluationReport r;
    for (Protocol p : protocols) r.protocols.push_back(evaluate_protocol(results, gt, p));
    return r;
}

Matrix query_descriptors(const RetrievalBenchmark& bench, const DescriptorModel& model, std::span<const double> scales) {
    std::vector<Image> crops;
    for (std::size_t i = 0; i < bench.queries.size(); ++i) {
        const QueryGroundTruth* q = bench.gt.find(bench.query_ids[i]);
        crops.push_back(q ? crop(bench.queries[i], q->bbox) : bench.queries[i]);
    }
    return extract_descriptors(crops, model, scales);
}

EvaluationReport evaluate_model(const DescriptorModel& model, const RetrievalBenchmark& bench,
                                std::span<const double> scales) {
    const Matrix q = query_descriptors(bench, model, scales);
    const Matrix db = extract_descriptors(bench.database, model, scales);
    const auto results = rank_all(q, bench.query_ids, db, bench.database_ids);
    return evaluate_rankings(results, bench.gt);
}

std::string PSweep::to_csv() const {
    std::string out = "p,mAP_easy,mAP_medium,mAP_hard,learned_p\n";
    char buf[160];
    for (const PSweepRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g,%.17g,%.17g,%.17g\n", r.p, r.map[0], r.map[1], r.map[2], learned_p);
        out += buf;
    }
    return out;
}

PSweep p_sweep(const DescriptorModel& model, const RetrievalBenchmark& bench, std::span<const double> p_values,
               std::span<const double> scales) {
    if (p_values.empty()) throw ValidationError("p sweep needs at least one value");
    for (double p : p_values) {
        if (!(p >= 1.0 && p <= kMaxGemP)) throw ValidationError("p sweep values must lie in [1, 100]");
    }
    PSweep sweep;
    sweep.learned_p = model.gem.value();
    DescriptorModel probe = model;
    for (double p : p_values) {
        probe.gem.set(p);
        const EvaluationReport rep = evaluate_model(probe, bench, scales);
        PSweepRow row;
        row.p = p;
        for (int i = 0; i < 3; ++i) row.map[i] = rep.at(kAllProtocols[i]).map;
        sweep.rows.push_back(row);
    }
    return sweep;
}

}  // namespace solar
