#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace solar {

/// Writes `data` to `path.tmp`, holding an exclusive advisory lock on it, then
/// renames over `path`. Fails if another process holds the lock.
void write_file_atomic(const std::filesystem::path& path, std::string_view data);

std::string read_file(const std::filesystem::path& path);

// Little-endian encoding helpers.
void put_u16(std::string& out, std::uint16_t v);
void put_u32(std::string& out, std::uint32_t v);
void put_u64(std::string& out, std::uint64_t v);
void put_f32(std::string& out, float v);

/// Bounds-checked little-endian reader; errors name the byte offset.
class ByteReader {
public:
    ByteReader(std::string_view data, std::string source) : data_(data), source_(std::move(source)) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    std::string_view bytes(std::size_t n);

    std::size_t offset() const { return pos_; }
    bool at_end() const { return pos_ == data_.size(); }
    [[noreturn]] void fail(const std::string& what, std::size_t offset) const;

private:
    void need(std::size_t n, const char* what);

    std::string_view data_;
    std::string source_;
    std::size_t pos_ = 0;
};

}  // namespace solar
