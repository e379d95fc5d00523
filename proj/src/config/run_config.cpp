// SPDX-License-Identifier: Apache-2.0
#include "acad/config/run_config.hpp"

#include <yaml-cpp/yaml.h>

#include <functional>
#include <set>

#include "acad/core/csv.hpp"
#include "acad/core/error.hpp"
#include "acad/core/hash.hpp"

namespace acad::config {

namespace {

// Walks one mapping, consuming known keys; anything left over is rejected.
class Section {
 public:
  Section(const YAML::Node& node, std::string path) : node_(node), path_(std::move(path)) {
    require(!node_ || node_.IsNull() || node_.IsMap(), ErrorCode::ConfigInvalid, where() + " must be a mapping");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    if (!node_ || node_.IsNull() || !node_[key]) return;
    try {
      out = node_[key].template as<T>();
    } catch (const YAML::Exception&) {
      fail(ErrorCode::ConfigInvalid, where() + "." + key + " has the wrong type");
    }
  }

  template <typename T>
  void range(const std::string& key, synth::Range<T>& out) {
    std::vector<T> v{out.lo, out.hi};
    get(key, v);
    require(v.size() == 2, ErrorCode::ConfigInvalid, where() + "." + key + " must be [lo, hi]");
    out = {v[0], v[1]};
  }

  Section sub(const std::string& key) {
    seen_.insert(key);
    return Section(node_ && node_.IsMap() ? node_[key] : YAML::Node(), path_.empty() ? key : path_ + "." + key);
  }

  void finish() const {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const auto key = kv.first.as<std::string>();
      require(seen_.count(key) > 0, ErrorCode::ConfigInvalid, "unknown config key '" + where(key) + "'");
    }
  }

 private:
  std::string where(const std::string& key = {}) const {
    if (key.empty()) return path_.empty() ? "config" : path_;
    return path_.empty() ? key : path_ + "." + key;
  }

  YAML::Node node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename T>
YAML::Node seq2(T a, T b) {
  YAML::Node n(YAML::NodeType::Sequence);
  n.push_back(a);
  n.push_back(b);
  n.SetStyle(YAML::EmitterStyle::Flow);
  return n;
}

}  // namespace

RunConfig parse_run_config(const std::string& yaml_text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    fail(ErrorCode::ConfigInvalid, std::string("config is not valid YAML: ") + e.what());
  }
  RunConfig c;
  c.base_dir = base_dir;
  Section top(root, "");
  top.get("seed", c.seed);
  top.get("run_dir", c.run_dir);
  {
    auto s = top.sub("audio");
    s.get("sample_rate", c.sample_rate);
    s.finish();
  }
  {
    auto s = top.sub("stft");
    s.get("window_size", c.stft.window_size);
    s.get("hop", c.stft.hop);
    s.get("center_pad", c.stft.center_pad);
    s.finish();
  }
  {
    auto s = top.sub("mel");
    s.get("n_mels", c.n_mels);
    s.get("fmin", c.fmin);
    s.get("fmax", c.fmax);
    s.finish();
  }
  {
    auto s = top.sub("ontology");
    s.get("ontology", c.ontology.ontology);
    s.get("activity", c.ontology.activity);
    s.get("judgments", c.ontology.judgments);
    s.get("top_k", c.ontology.top_k);
    s.get("frame_seconds", c.ontology.frame_seconds);
    s.finish();
  }
  {
    auto s = top.sub("synthesis");
    auto& y = c.synthesis;
    s.get("catalogs", c.catalogs);
    s.get("clip_seconds", y.clip_seconds);
    s.range("background_lufs", y.background_lufs);
    s.range("event_classes", y.event_classes);
    s.range("instances_per_class", y.instances_per_class);
    s.range("event_seconds", y.event_seconds);
    s.range("snr_db", y.snr_db);
    s.get("fade_seconds", y.fade_seconds);
    s.get("max_redraws", y.max_redraws);
    auto counts = s.sub("counts");
    counts.get("train", y.per_scene.train);
    counts.get("val", y.per_scene.val);
    counts.get("test", y.per_scene.test);
    counts.finish();
    s.finish();
  }
  {
    auto s = top.sub("context_model");
    s.get("conv_blocks", c.context.conv_blocks);
    s.get("first_block_channels", c.context.first_block_channels);
    s.get("kernel", c.context.kernel);
    s.get("rnn_hidden", c.context.rnn_hidden);
    s.get("fc1", c.context.fc1);
    s.get("batch_norm", c.context.batch_norm);
    s.finish();
  }
  {
    auto s = top.sub("denoiser");
    s.get("depth", c.denoiser.depth);
    s.get("first_encoder_channels", c.denoiser.first_encoder_channels);
    s.get("kernel", c.denoiser.kernel);
    s.get("batch_norm", c.denoiser.batch_norm);
    s.finish();
  }
  {
    auto s = top.sub("pretrain");
    s.get("batch_size", c.pretrain.batch_size);
    s.get("max_epochs", c.pretrain.max_epochs);
    s.get("patience", c.pretrain.patience);
    s.finish();
  }
  {
    auto s = top.sub("training");
    auto& t = c.training;
    s.get("batch_size", t.batch_size);
    s.get("lr", t.adam.lr);
    s.get("beta1", t.adam.beta1);
    s.get("beta2", t.adam.beta2);
    s.get("eps", t.adam.eps);
    s.get("lambda_asc", t.lambda_asc);
    s.get("lambda_den", t.lambda_den);
    s.get("max_epochs", t.max_epochs);
    s.get("patience", t.patience);
    s.get("grad_clip", t.grad_clip);
    s.finish();
  }
  {
    auto s = top.sub("evaluation");
    s.get("runs", c.evaluation.runs);
    s.get("batch_size", c.evaluation.batch_size);
    s.get("variants", c.evaluation.variants);
    s.finish();
  }
  top.finish();

  c.synthesis.sample_rate = c.sample_rate;
  c.synthesis.seed = c.seed;
  c.training.seed = c.seed;
  c.context.n_mels = c.n_mels;
  c.validate();
  return c;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::ConfigInvalid, "cannot read config " + path.string() + ": " + e.what());
  }
  return parse_run_config(text, path.parent_path());
}

void RunConfig::validate() const {
  auto check = [](bool ok, const std::string& what) { require(ok, ErrorCode::ConfigInvalid, what); };
  check(sample_rate > 0, "audio.sample_rate must be positive");
  try {
    stft.validate();
  } catch (const Error& e) {
    fail(ErrorCode::ConfigInvalid, std::string("stft: ") + e.what());
  }
  check(n_mels >= 1, "mel.n_mels must be >= 1");
  const double nyq = sample_rate / 2.0;
  check(fmin >= 0.0 && (fmax == 0.0 || (fmax > fmin && fmax <= nyq)), "mel band edges outside [0, Nyquist]");
  check(ontology.top_k >= 1, "ontology.top_k must be >= 1");
  check(ontology.frame_seconds > 0.0, "ontology.frame_seconds must be positive");
  synthesis.validate();
  check(pretrain.batch_size >= 2 && training.batch_size >= 2, "batch sizes must be >= 2");
  check(training.lambda_asc >= 0.0 && training.lambda_den >= 0.0, "loss weights must be >= 0");
  check(training.adam.lr > 0.0, "training.lr must be positive");
  check(evaluation.runs >= 1 && evaluation.batch_size >= 1, "evaluation settings");
  for (const auto& v : evaluation.variants) train::parse_variant(v);
  auto ctx = context;
  ctx.num_classes = std::max<std::size_t>(2, ctx.num_classes);
  ctx.validate();
  denoiser.validate();
}

std::string RunConfig::canonical() const {
  YAML::Emitter out;
  YAML::Node n;
  n["seed"] = seed;
  n["run_dir"] = run_dir;
  n["audio"]["sample_rate"] = sample_rate;
  n["stft"]["window_size"] = stft.window_size;
  n["stft"]["hop"] = stft.hop;
  n["stft"]["center_pad"] = stft.center_pad;
  n["mel"]["n_mels"] = n_mels;
  n["mel"]["fmin"] = fmin;
  n["mel"]["fmax"] = fmax;
  n["ontology"]["ontology"] = ontology.ontology;
  n["ontology"]["activity"] = ontology.activity;
  n["ontology"]["judgments"] = ontology.judgments;
  n["ontology"]["top_k"] = ontology.top_k;
  n["ontology"]["frame_seconds"] = ontology.frame_seconds;
  auto s = n["synthesis"];
  s["catalogs"] = catalogs;
  s["clip_seconds"] = synthesis.clip_seconds;
  s["background_lufs"] = seq2(synthesis.background_lufs.lo, synthesis.background_lufs.hi);
  s["event_classes"] = seq2(synthesis.event_classes.lo, synthesis.event_classes.hi);
  s["instances_per_class"] = seq2(synthesis.instances_per_class.lo, synthesis.instances_per_class.hi);
  s["event_seconds"] = seq2(synthesis.event_seconds.lo, synthesis.event_seconds.hi);
  s["snr_db"] = seq2(synthesis.snr_db.lo, synthesis.snr_db.hi);
  s["fade_seconds"] = synthesis.fade_seconds;
  s["max_redraws"] = synthesis.max_redraws;
  s["counts"]["train"] = synthesis.per_scene.train;
  s["counts"]["val"] = synthesis.per_scene.val;
  s["counts"]["test"] = synthesis.per_scene.test;
  auto cm = n["context_model"];
  cm["conv_blocks"] = context.conv_blocks;
  cm["first_block_channels"] = context.first_block_channels;
  cm["kernel"] = context.kernel;
  cm["rnn_hidden"] = context.rnn_hidden;
  cm["fc1"] = context.fc1;
  cm["batch_norm"] = context.batch_norm;
  auto dn = n["denoiser"];
  dn["depth"] = denoiser.depth;
  dn["first_encoder_channels"] = denoiser.first_encoder_channels;
  dn["kernel"] = denoiser.kernel;
  dn["batch_norm"] = denoiser.batch_norm;
  n["pretrain"]["batch_size"] = pretrain.batch_size;
  n["pretrain"]["max_epochs"] = pretrain.max_epochs;
  n["pretrain"]["patience"] = pretrain.patience;
  auto tr = n["training"];
  tr["batch_size"] = training.batch_size;
  tr["lr"] = training.adam.lr;
  tr["beta1"] = training.adam.beta1;
  tr["beta2"] = training.adam.beta2;
  tr["eps"] = training.adam.eps;
  tr["lambda_asc"] = training.lambda_asc;
  tr["lambda_den"] = training.lambda_den;
  tr["max_epochs"] = training.max_epochs;
  tr["patience"] = training.patience;
  tr["grad_clip"] = training.grad_clip;
  n["evaluation"]["runs"] = evaluation.runs;
  n["evaluation"]["batch_size"] = evaluation.batch_size;
  n["evaluation"]["variants"] = evaluation.variants;
  out << n;
  return std::string(out.c_str()) + "\n";
}

std::string RunConfig::hash() const { return to_hex(fnv1a(canonical())); }

train::FeatureConfig RunConfig::features() const {
  train::FeatureConfig f;
  f.sample_rate = sample_rate;
  f.stft = stft;
  f.n_mels = n_mels;
  f.fmin = fmin;
  f.fmax = fmax > 0.0 ? fmax : sample_rate / 2.0;
  f.pad_multiple = denoiser.size_multiple();
  return f;
}

std::filesystem::path RunConfig::resolve(const std::string& p) const {
  const std::filesystem::path path(p);
  return path.is_absolute() || base_dir.empty() ? path : base_dir / path;
}

}  // namespace acad::config
