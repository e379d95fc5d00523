// SPDX-License-Identifier: Apache-2.0
#include "acad/nn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

#include "acad/core/error.hpp"

namespace acad::nn {

namespace {

constexpr char kMagic[8] = {'A', 'C', 'A', 'D', 'C', 'K', 'P', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian doubles");

}  // namespace

ModelCheckpoint snapshot(const CheckpointMeta& meta, const std::vector<ModuleRef>& modules) {
  ModelCheckpoint c;
  c.meta = meta;
  for (const auto& [prefix, module] : modules) {
    c.fingerprints[prefix] = module->fingerprint();
    for (const auto& s : module->state()) c.tensors[prefix + "/" + s.name] = {s.tensor.shape(), s.tensor.data()};
  }
  return c;
}

void save_checkpoint(const ModelCheckpoint& c, const std::filesystem::path& path) {
  nlohmann::ordered_json h;
  h["stage"] = c.meta.stage;
  h["seed"] = c.meta.seed;
  h["variant"] = c.meta.variant;
  h["config_hash"] = c.meta.config_hash;
  h["master_seed"] = c.meta.master_seed;
  h["epoch"] = c.meta.epoch;
  h["fingerprints"] = c.fingerprints;
  auto& list = h["tensors"] = nlohmann::ordered_json::array();
  for (const auto& [name, t] : c.tensors) list.push_back({{"name", name}, {"shape", t.shape}});
  const std::string header = h.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  require(static_cast<bool>(out), ErrorCode::IoFailure, "cannot write checkpoint " + path.string());
  out.write(kMagic, sizeof kMagic);
  const std::uint64_t len = header.size();
  out.write(reinterpret_cast<const char*>(&len), sizeof len);
  out.write(header.data(), static_cast<std::streamsize>(header.size()));
  for (const auto& [name, t] : c.tensors)
    out.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * 8));
  require(static_cast<bool>(out), ErrorCode::IoFailure, "failed writing checkpoint " + path.string());
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointMeta& meta,
                     const std::vector<ModuleRef>& modules) {
  save_checkpoint(snapshot(meta, modules), path);
}

ModelCheckpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::IoFailure, "cannot open checkpoint " + path.string());
  char magic[8];
  std::uint64_t len = 0;
  in.read(magic, sizeof magic);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  require(in && std::memcmp(magic, kMagic, sizeof kMagic) == 0 && len < (1u << 26), ErrorCode::IoFailure,
          path.string() + " is not a checkpoint");
  std::string header(len, '\0');
  in.read(header.data(), static_cast<std::streamsize>(len));
  require(static_cast<bool>(in), ErrorCode::IoFailure, "truncated checkpoint header in " + path.string());

  ModelCheckpoint c;
  try {
    const auto h = nlohmann::json::parse(header);
    c.meta.stage = h.at("stage").get<std::string>();
    c.meta.seed = h.at("seed").get<std::uint64_t>();
    c.meta.variant = h.at("variant").get<std::string>();
    c.meta.config_hash = h.at("config_hash").get<std::string>();
    c.meta.master_seed = h.at("master_seed").get<std::uint64_t>();
    c.meta.epoch = h.at("epoch").get<std::size_t>();
    c.fingerprints = h.at("fingerprints").get<std::map<std::string, std::string>>();
    for (const auto& t : h.at("tensors")) {
      StoredTensor st;
      st.shape = t.at("shape").get<Shape>();
      st.values.resize(numel(st.shape));
      in.read(reinterpret_cast<char*>(st.values.data()), static_cast<std::streamsize>(st.values.size() * 8));
      require(static_cast<bool>(in), ErrorCode::IoFailure, "truncated checkpoint data in " + path.string());
      c.tensors[t.at("name").get<std::string>()] = std::move(st);
    }
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::IoFailure, "corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  return c;
}

void restore(Module& m, const ModelCheckpoint& c, const std::string& prefix) {
  const auto fp = c.fingerprints.find(prefix);
  require(fp != c.fingerprints.end(), ErrorCode::FingerprintMismatch, "checkpoint has no module '" + prefix + "'");
  require(fp->second == m.fingerprint(), ErrorCode::FingerprintMismatch,
          "checkpoint module '" + prefix + "' was saved as " + fp->second + ", not " + m.fingerprint());
  for (const auto& s : m.state()) {
    const auto it = c.tensors.find(prefix + "/" + s.name);
    require(it != c.tensors.end() && it->second.shape == s.tensor.shape(), ErrorCode::FingerprintMismatch,
            "checkpoint tensor " + prefix + "/" + s.name + " missing or misshapen");
    auto dst = s.tensor;
    dst.data() = it->second.values;
  }
}

}  // namespace acad::nn
