#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

namespace artigen::numcore {

// Little-endian scalar and array I/O, independent of host byte order.
void write_u32(std::ostream& out, std::uint32_t v);
void write_u64(std::ostream& out, std::uint64_t v);
void write_f64(std::ostream& out, double v);
void write_f64s(std::ostream& out, std::span<const double> values);
std::uint32_t read_u32(std::istream& in);
std::uint64_t read_u64(std::istream& in);
double read_f64(std::istream& in);
std::vector<double> read_f64s(std::istream& in, std::size_t count);

// Container used for hypergraph caches and distance matrices:
//   8-byte magic, u32 version, u64 header length, JSON header, f64 payload.
struct BlobFile {
  nlohmann::json header;
  std::vector<double> payload;
};
void write_blob(const std::filesystem::path& path, const std::string& magic, const BlobFile& blob);
BlobFile read_blob(const std::filesystem::path& path, const std::string& magic);

// Canonical text form used for config hashes and deterministic output.
std::string canonical_dump(const nlohmann::json& j, int indent = 2);
std::string fnv1a_hex(const std::string& text);

void write_text_file(const std::filesystem::path& path, const std::string& text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace artigen::numcore
