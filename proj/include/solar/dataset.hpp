#pragma once

#include "solar/ground_truth.hpp"
#include "solar/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace solar {

struct LabeledImages {
    std::vector<Image> images;
    std::vector<int> labels;
    std::vector<std::string> ids;

    std::size_t size() const { return images.size(); }
    void validate() const;
};

/// Queries, database and ground truth for retrieval evaluation.
struct RetrievalBenchmark {
    std::vector<Image> queries;
    std::vector<std::string> query_ids;
    std::vector<Image> database;
    std::vector<std::string> database_ids;
    RetrievalGroundTruth gt;
};

struct SyntheticBenchmark {
    LabeledImages train;
    RetrievalBenchmark eval;
    std::vector<int> database_labels;
};

/// Each class is a seeded sum of oriented colour gratings. Instances are
/// random crops with zoom, brightness jitter, noise and partial occlusion:
/// easy = mild jitter, hard = strong jitter plus rotation, junk = half the
/// image occluded. Per class, half of the images (at least two) go to
/// evaluation: one query, the rest database entries cycling easy/hard/junk.
SyntheticBenchmark generate_synthetic_benchmark(int n_classes, int per_class, int image_size, std::uint64_t seed);

/// Directory layout:
///   train/<id>.ppm, train_labels.txt ("<id> <class>" per line)
///   queries/<id>.ppm, database/<id>.ppm, database_labels.txt, gt.json
void write_benchmark(const std::filesystem::path& dir, const SyntheticBenchmark& bench);
LabeledImages read_training_set(const std::filesystem::path& dir);
RetrievalBenchmark read_retrieval_benchmark(const std::filesystem::path& dir);

/// Sorted image files in a directory, ids taken from file stems.
std::vector<std::pair<std::string, std::filesystem::path>> list_images(const std::filesystem::path& dir);

}  // namespace solar
