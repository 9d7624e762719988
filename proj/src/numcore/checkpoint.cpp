#include "artigen/numcore/checkpoint.hpp"

#include <fstream>

#include "artigen/error.hpp"
#include "artigen/numcore/binary_io.hpp"

namespace artigen::numcore {

namespace {
constexpr char kMagic[] = "ARTGCKPT";
}

std::filesystem::path sidecar_path(const std::filesystem::path& checkpoint) {
  return std::filesystem::path(checkpoint.string() + ".json");
}

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt, const nlohmann::json& config) {
  nlohmann::json header;
  header["format_version"] = kCheckpointFormatVersion;
  header["module_name"] = ckpt.module_name;
  header["meta"] = ckpt.meta;
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& [name, p] : ckpt.params) {
    entries.push_back({{"name", name}, {"shape", p.value.shape()}, {"step", p.step}});
  }
  header["params"] = entries;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write checkpoint " + path.string());
  out.write(kMagic, 8);
  write_u32(out, kCheckpointFormatVersion);
  write_u64(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, p] : ckpt.params) {
    write_f64s(out, p.value.data());
    write_f64s(out, p.first_moment.data());
    write_f64s(out, p.second_moment.data());
  }
  if (!out) throw IoError("write failed for checkpoint " + path.string());
  out.close();

  nlohmann::json side;
  side["module_name"] = ckpt.module_name;
  side["config"] = config;
  side["config_hash"] = fnv1a_hex(canonical_dump(config));
  write_text_file(sidecar_path(path), canonical_dump(side) + "\n");
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::string& expected_module) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read checkpoint " + path.string());
  char magic[8];
  in.read(magic, 8);
  if (!in || std::string(magic, 8) != std::string(kMagic, 8)) {
    throw IoError(path.string() + ": not a checkpoint (bad magic)");
  }
  const auto version = read_u32(in);
  if (version != kCheckpointFormatVersion) {
    throw IoError(path.string() + ": unsupported checkpoint version " + std::to_string(version));
  }
  const auto len = read_u64(in);
  if (len > (1u << 30)) throw IoError(path.string() + ": corrupt checkpoint header length");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError(path.string() + ": truncated checkpoint header");

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    ckpt.module_name = header.at("module_name").get<std::string>();
    ckpt.meta = header.at("meta");
    if (!expected_module.empty() && ckpt.module_name != expected_module) {
      throw IoError(path.string() + ": checkpoint belongs to module '" + ckpt.module_name + "', expected '" +
                    expected_module + "'");
    }
    for (const auto& e : header.at("params")) {
      const auto name = e.at("name").get<std::string>();
      const auto shape = e.at("shape").get<Shape>();
      const std::size_t n = shape_size(shape);
      Tensor value(shape, read_f64s(in, n));
      Tensor m(shape, read_f64s(in, n));
      Tensor v(shape, read_f64s(in, n));
      ckpt.params.add(name, std::move(value));
      auto& p = ckpt.params.at(name);
      p.first_moment = std::move(m);
      p.second_moment = std::move(v);
      p.step = e.at("step").get<std::uint64_t>();
    }
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": corrupt checkpoint header: " + e.what());
  } catch (const NumericalError& e) {
    throw IoError(path.string() + ": corrupt checkpoint payload: " + e.what());
  }
  in.peek();
  if (!in.eof()) throw IoError(path.string() + ": trailing bytes after checkpoint payload");
  return ckpt;
}

}  // namespace artigen::numcore
