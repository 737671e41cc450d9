#include "solar/ground_truth.hpp"

#include "solar/errors.hpp"
#include "solar/fileutil.hpp"

#include <json.hpp>

#include <unordered_set>

namespace solar {

using nlohmann::json;

const QueryGroundTruth* RetrievalGroundTruth::find(const std::string& id) const {
    for (const QueryGroundTruth& q : queries) {
        if (q.id == id) return &q;
    }
    return nullptr;
}

void RetrievalGroundTruth::validate(const std::vector<std::string>* database_ids) const {
    std::unordered_set<std::string> db;
    if (database_ids) db.insert(database_ids->begin(), database_ids->end());
    std::unordered_set<std::string> query_ids;
    for (const QueryGroundTruth& q : queries) {
        if (!query_ids.insert(q.id).second) throw ValidationError("duplicate query id '" + q.id + "'");
        std::unordered_set<std::string> seen;
        for (const auto* list : {&q.easy, &q.hard, &q.junk}) {
            for (const std::string& id : *list) {
                if (!seen.insert(id).second) {
                    throw ValidationError("query '" + q.id + "': id '" + id + "' appears in more than one list");
                }
                if (database_ids && !db.count(id)) {
                    throw ValidationError("query '" + q.id + "': id '" + id + "' is not in the database");
                }
            }
        }
    }
}

RetrievalGroundTruth parse_ground_truth(const std::string& json_text) {
    RetrievalGroundTruth gt;
    try {
        const json doc = json::parse(json_text);
        for (const json& q : doc.at("queries")) {
            QueryGroundTruth entry;
            entry.id = q.at("id").get<std::string>();
            const auto box = q.at("bbox").get<std::vector<double>>();
            if (box.size() != 4) throw ValidationError("query '" + entry.id + "': bbox needs 4 numbers");
            entry.bbox = {box[0], box[1], box[2], box[3]};
            entry.easy = q.at("easy").get<std::vector<std::string>>();
            entry.hard = q.at("hard").get<std::vector<std::string>>();
            entry.junk = q.at("junk").get<std::vector<std::string>>();
            gt.queries.push_back(std::move(entry));
        }
    } catch (const json::exception& e) {
        throw IoError(std::string("malformed ground truth: ") + e.what());
    }
    gt.validate();
    return gt;
}

std::string ground_truth_to_json(const RetrievalGroundTruth& gt) {
    json queries = json::array();
    for (const QueryGroundTruth& q : gt.queries) {
        queries.push_back({{"id", q.id},
                           {"bbox", {q.bbox.x0, q.bbox.y0, q.bbox.x1, q.bbox.y1}},
                           {"easy", q.easy},
                           {"hard", q.hard},
                           {"junk", q.junk}});
    }
    return json{{"queries", queries}}.dump(2) + "\n";
}

RetrievalGroundTruth read_ground_truth(const std::filesystem::path& path) { return parse_ground_truth(read_file(path)); }

void write_ground_truth(const std::filesystem::path& path, const RetrievalGroundTruth& gt) {
    write_file_atomic(path, ground_truth_to_json(gt));
}

std::string to_string(Protocol p) {
    switch (p) {
        case Protocol::Easy: return "easy";
        case Protocol::Medium: return "medium";
        case Protocol::Hard: return "hard";
    }
    return "?";
}

Protocol parse_protocol(const std::string& text) {
    if (text == "easy") return Protocol::Easy;
    if (text == "medium") return Protocol::Medium;
    if (text == "hard") return Protocol::Hard;
    throw ValidationError("unknown protocol '" + text + "' (expected easy, medium or hard)");
}

ProtocolSets protocol_split(const QueryGroundTruth& q, Protocol protocol) {
    ProtocolSets s;
    s.junk.insert(q.junk.begin(), q.junk.end());
    switch (protocol) {
        case Protocol::Easy:
            s.positives.insert(q.easy.begin(), q.easy.end());
            s.junk.insert(q.hard.begin(), q.hard.end());
            break;
        case Protocol::Medium:
            s.positives.insert(q.easy.begin(), q.easy.end());
            s.positives.insert(q.hard.begin(), q.hard.end());
            break;
        case Protocol::Hard:
            s.positives.insert(q.hard.begin(), q.hard.end());
            s.junk.insert(q.easy.begin(), q.easy.end());
            break;
    }
    return s;
}

}  // namespace solar
