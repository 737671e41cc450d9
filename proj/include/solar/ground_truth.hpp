#pragma once

#include "solar/pipeline.hpp"

#include <filesystem>
#include <set>
#include <string>
#include <vector>

namespace solar {

struct QueryGroundTruth {
    std::string id;
    BoundingBox bbox;
    std::vector<std::string> easy;
    std::vector<std::string> hard;
    std::vector<std::string> junk;
};

/// Per-query easy/hard/junk database ids. JSON form:
///   {"queries": [{"id": "...", "bbox": [x0, y0, x1, y1],
///                 "easy": [...], "hard": [...], "junk": [...]}]}
struct RetrievalGroundTruth {
    std::vector<QueryGroundTruth> queries;

    const QueryGroundTruth* find(const std::string& id) const;
    /// Lists pairwise disjoint; every id present in `database_ids` when given.
    void validate(const std::vector<std::string>* database_ids = nullptr) const;
};

RetrievalGroundTruth parse_ground_truth(const std::string& json_text);
std::string ground_truth_to_json(const RetrievalGroundTruth& gt);
RetrievalGroundTruth read_ground_truth(const std::filesystem::path& path);
void write_ground_truth(const std::filesystem::path& path, const RetrievalGroundTruth& gt);

enum class Protocol { Easy, Medium, Hard };

std::string to_string(Protocol p);
Protocol parse_protocol(const std::string& text);
inline constexpr Protocol kAllProtocols[] = {Protocol::Easy, Protocol::Medium, Protocol::Hard};

struct ProtocolSets {
    std::set<std::string> positives;
    std::set<std::string> junk;
};

/// easy:   positives = easy,        junk = junk + hard
/// medium: positives = easy + hard, junk = junk
/// hard:   positives = hard,        junk = junk + easy
ProtocolSets protocol_split(const QueryGroundTruth& q, Protocol protocol);

}  // namespace solar
