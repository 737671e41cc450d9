#include "solar/store.hpp"

#include "solar/errors.hpp"
#include "solar/fileutil.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

namespace solar {

namespace {

constexpr std::string_view kMagic = "SOLR";
constexpr double kUnitTolerance = 1e-5;

}  // namespace

std::string encode_store(const std::vector<StoreEntry>& entries) {
    const std::uint32_t dim = entries.empty() ? 0 : static_cast<std::uint32_t>(entries.front().values.size());
    std::unordered_set<std::string> names;
    for (const StoreEntry& e : entries) {
        if (e.values.size() != dim) throw ValidationError("store entry '" + e.name + "' has a different dimension");
        if (e.name.empty() || e.name.size() > std::numeric_limits<std::uint16_t>::max()) {
            throw ValidationError("store entry names must be 1..65535 bytes");
        }
        if (!names.insert(e.name).second) throw ValidationError("duplicate store entry '" + e.name + "'");
        if (std::abs(e.values.norm() - 1.0) > kUnitTolerance) {
            throw ValidationError("store entry '" + e.name + "' is not unit norm");
        }
    }
    std::string out(kMagic);
    put_u32(out, kStoreVersion);
    put_u32(out, dim);
    put_u64(out, entries.size());
    for (const StoreEntry& e : entries) {
        put_u16(out, static_cast<std::uint16_t>(e.name.size()));
        out += e.name;
        for (Eigen::Index i = 0; i < e.values.size(); ++i) put_f32(out, static_cast<float>(e.values[i]));
    }
    return out;
}

std::vector<StoreEntry> decode_store(std::string_view bytes, const std::string& source) {
    ByteReader in(bytes, source);
    if (bytes.size() < 4 || bytes.substr(0, 4) != kMagic) in.fail("bad magic (expected \"SOLR\")", 0);
    in.bytes(4);
    const std::size_t version_at = in.offset();
    const std::uint32_t version = in.u32();
    if (version != kStoreVersion) in.fail("unsupported store version " + std::to_string(version), version_at);
    const std::uint32_t dim = in.u32();
    const std::uint64_t count = in.u64();
    std::vector<StoreEntry> entries;
    std::unordered_set<std::string> names;
    for (std::uint64_t r = 0; r < count; ++r) {
        const std::size_t record_at = in.offset();
        const std::uint16_t len = in.u16();
        StoreEntry e;
        e.name = std::string(in.bytes(len));
        e.values.resize(dim);
        for (std::uint32_t i = 0; i < dim; ++i) e.values[i] = in.f32();
        if (!names.insert(e.name).second) in.fail("duplicate entry name '" + e.name + "'", record_at);
        if (std::abs(e.values.norm() - 1.0) > kUnitTolerance) {
            in.fail("entry '" + e.name + "' is not unit norm", record_at);
        }
        entries.push_back(std::move(e));
    }
    if (!in.at_end()) in.fail("trailing bytes after " + std::to_string(count) + " records", in.offset());
    return entries;
}

void write_store(const std::filesystem::path& path, const std::vector<StoreEntry>& entries) {
    write_file_atomic(path, encode_store(entries));
}

std::vector<StoreEntry> read_store(const std::filesystem::path& path) { return decode_store(read_file(path), path.string()); }

}  // namespace solar
