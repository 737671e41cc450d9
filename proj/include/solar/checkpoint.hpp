#pragma once

#include "solar/network.hpp"

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace solar {

/// Single-file checkpoint, little-endian:
///
///   "SOLRCKPT" | u32 version = 1 | u32 header_len | header (UTF-8 key=value lines)
///   u32 tensor_count | tensor_count x { u16 name_len | name | u8 rank | rank x u32 dim | prod(dims) x f32 }
///
/// The header carries the BackboneSpec text plus any extra key=value metadata.
struct NamedTensor {
    std::string name;
    std::vector<int> shape;
    std::vector<float> values;
};

struct Container {
    std::string header;
    std::vector<NamedTensor> tensors;

    const NamedTensor* find(const std::string& name) const;
};

std::string encode_container(const Container& c);
Container decode_container(std::string_view bytes, const std::string& source = "<memory>");

/// Header as ordered key=value pairs.
std::map<std::string, std::string> parse_header(const std::string& header);

Container model_to_container(const DescriptorModel& model);
/// Rebuilds a model; tensor names and shapes must match the header's spec.
DescriptorModel model_from_container(const Container& c);

void save_model(const std::filesystem::path& path, const DescriptorModel& model);
DescriptorModel load_model(const std::filesystem::path& path);

void write_container(const std::filesystem::path& path, const Container& c);
Container read_container(const std::filesystem::path& path);

}  // namespace solar
