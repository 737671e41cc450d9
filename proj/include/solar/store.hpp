#pragma once

#include "solar/tensor.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace solar {

/// Binary descriptor store, all integers and floats little-endian:
///
///   "SOLR" | u32 version = 1 | u32 dim | u64 count
///   count x { u16 name_len | name (UTF-8) | dim x f32 }
struct StoreEntry {
    std::string name;
    Vector values;
};

inline constexpr std::uint32_t kStoreVersion = 1;

std::string encode_store(const std::vector<StoreEntry>& entries);
std::vector<StoreEntry> decode_store(std::string_view bytes, const std::string& source = "<memory>");

/// Rejects duplicate names, mixed dimensions and vectors that are not unit
/// norm within 1e-5.
void write_store(const std::filesystem::path& path, const std::vector<StoreEntry>& entries);
std::vector<StoreEntry> read_store(const std::filesystem::path& path);

}  // namespace solar
