#pragma once

#include <filesystem>
#include <string>

#include "acarec/io.hpp"
#include "acarec/nn/params.hpp"
#include "json.hpp"

namespace acarec::nn {

// On-disk layout:
//   <dir>/manifest.json   {"format": "acarec-checkpoint-v1", "meta": {...},
//                          "tensors": [{"name", "rows", "cols", "dtype", "file"}]}
//   <dir>/<index>.f32     flat little-endian float32, row-major
template <class P>
void save_checkpoint(const std::filesystem::path& dir, const P& params, const nlohmann::json& meta) {
  static_assert(std::is_same_v<typename P::scalar_type, float>, "checkpoints store float32");
  std::filesystem::create_directories(dir);
  nlohmann::json manifest;
  manifest["format"] = "acarec-checkpoint-v1";
  manifest["meta"] = meta;
  manifest["tensors"] = nlohmann::json::array();
  std::size_t index = 0;
  for (const auto& [name, tensor] : tensor_list(params)) {
    const std::string file = std::to_string(index++) + ".f32";
    io::write_text(dir / file, io::encode_f32_le(tensor->flat()));
    manifest["tensors"].push_back({{"name", name},
                                   {"rows", tensor->rows()},
                                   {"cols", tensor->cols()},
                                   {"dtype", "float32"},
                                   {"file", file}});
  }
  io::write_text(dir / "manifest.json", manifest.dump(2) + "\n");
}

inline nlohmann::json read_checkpoint_meta(const std::filesystem::path& dir) {
  io::require_file(dir / "manifest.json", "checkpoint manifest");
  auto manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  if (manifest.value("format", "") != "acarec-checkpoint-v1")
    fail(ErrorKind::Parse, "unrecognised checkpoint format in " + dir.string());
  return manifest.at("meta");
}

// Fills an already-shaped parameter struct; names and shapes must match.
template <class P>
void load_checkpoint(const std::filesystem::path& dir, P& params) {
  io::require_file(dir / "manifest.json", "checkpoint manifest");
  const auto manifest = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  const auto& entries = manifest.at("tensors");
  auto tensors = tensor_list(params);
  if (entries.size() != tensors.size())
    fail(ErrorKind::Dimension, "checkpoint " + dir.string() + " holds " +
                                   std::to_string(entries.size()) + " tensors, model expects " +
                                   std::to_string(tensors.size()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    const auto& e = entries[i];
    auto& t = *tensors[i].tensor;
    if (e.at("name") != tensors[i].name || e.at("rows") != t.rows() || e.at("cols") != t.cols())
      fail(ErrorKind::Dimension, "checkpoint tensor " + e.at("name").get<std::string>() +
                                     " does not match model tensor " + tensors[i].name + " " +
                                     t.shape_string());
    const auto values = io::decode_f32_le(io::read_text(dir / e.at("file").get<std::string>()));
    if (values.size() != t.size())
      fail(ErrorKind::Parse, "checkpoint tensor " + tensors[i].name + " has wrong payload size");
    std::copy(values.begin(), values.end(), t.flat().begin());
  }
}

}  // namespace acarec::nn
