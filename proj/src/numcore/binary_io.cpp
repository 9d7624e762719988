#include "artigen/numcore/binary_io.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "artigen/error.hpp"

namespace artigen::numcore {

namespace {

template <typename T>
void write_le(std::ostream& out, T v) {
  unsigned char bytes[sizeof(T)];
  for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(T));
}

template <typename T>
T read_le(std::istream& in) {
  unsigned char bytes[sizeof(T)];
  in.read(reinterpret_cast<char*>(bytes), sizeof(T));
  if (!in) throw IoError("unexpected end of binary stream");
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(bytes[i]) << (8 * i);
  return v;
}

constexpr std::uint32_t kBlobVersion = 1;

}  // namespace

void write_u32(std::ostream& out, std::uint32_t v) { write_le(out, v); }
void write_u64(std::ostream& out, std::uint64_t v) { write_le(out, v); }
void write_f64(std::ostream& out, double v) { write_le(out, std::bit_cast<std::uint64_t>(v)); }

void write_f64s(std::ostream& out, std::span<const double> values) {
  for (double v : values) write_f64(out, v);
}

std::uint32_t read_u32(std::istream& in) { return read_le<std::uint32_t>(in); }
std::uint64_t read_u64(std::istream& in) { return read_le<std::uint64_t>(in); }
double read_f64(std::istream& in) { return std::bit_cast<double>(read_le<std::uint64_t>(in)); }

std::vector<double> read_f64s(std::istream& in, std::size_t count) {
  std::vector<double> out(count);
  for (auto& v : out) v = read_f64(in);
  return out;
}

void write_blob(const std::filesystem::path& path, const std::string& magic, const BlobFile& blob) {
  if (magic.size() != 8) throw InvalidArgument("blob magic must be 8 bytes");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  const std::string header = blob.header.dump();
  out.write(magic.data(), 8);
  write_u32(out, kBlobVersion);
  write_u64(out, header.size());
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  write_u64(out, blob.payload.size());
  write_f64s(out, blob.payload);
  if (!out) throw IoError("write failed for " + path.string());
}

BlobFile read_blob(const std::filesystem::path& path, const std::string& magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  char got[8];
  in.read(got, 8);
  if (!in || std::string(got, 8) != magic) throw IoError(path.string() + ": bad magic, expected " + magic);
  const auto version = read_u32(in);
  if (version != kBlobVersion) throw IoError(path.string() + ": unsupported version " + std::to_string(version));
  const auto header_len = read_u64(in);
  std::string header(header_len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw IoError(path.string() + ": truncated header");
  BlobFile blob;
  try {
    blob.header = nlohmann::json::parse(header);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": corrupt header: " + e.what());
  }
  const auto count = read_u64(in);
  blob.payload = read_f64s(in, count);
  return blob;
}

std::string canonical_dump(const nlohmann::json& j, int indent) {
  // nlohmann::json objects are key-sorted std::maps, so dump() is canonical.
  return j.dump(indent);
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace artigen::numcore
