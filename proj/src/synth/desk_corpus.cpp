// SPDX-License-Identifier: Apache-2.0
#include "acad/synth/desk_corpus.hpp"

#include <cmath>
#include <cstdio>
#include <functional>
#include <cctype>
#include <json.hpp>
#include <map>
#include <numbers>
#include <sstream>

#include "acad/audio/wav.hpp"
#include "acad/core/csv.hpp"
#include "acad/core/error.hpp"
#include "acad/core/rng.hpp"
#include "acad/synth/mix_spec.hpp"

namespace acad::synth {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct SceneDef {
  std::string name;
  std::vector<std::string> events;
  // Steady low hum that identifies the scene; kept below every event band.
  double hum_hz;
  // Spectral tilt of the background noise, as a one-pole coefficient.
  double tilt;
};

const std::vector<SceneDef>& scene_defs() {
  static const std::vector<SceneDef> defs{
      {"park", {"chirp", "tweet", "cricket"}, 40.0, 0.90},
      {"street", {"horn", "siren", "engine"}, 80.0, 0.96},
      {"harbor", {"gull", "bell"}, 60.0, 0.93},
  };
  return defs;
}

const SceneDef& scene_def(const std::string& name) {
  for (const auto& d : scene_defs())
    if (d.name == name) return d;
  fail(ErrorCode::UnknownScene, "no desk scene '" + name + "'");
}

double rms(const std::vector<double>& x) {
  double acc = 0.0;
  for (double v : x) acc += v * v;
  return std::sqrt(acc / static_cast<double>(std::max<std::size_t>(x.size(), 1)));
}

void normalise_peak(std::vector<double>& x, double peak) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  if (m > 0.0)
    for (double& v : x) v *= peak / m;
}

// Raised-cosine attack and release.
void envelope(std::vector<double>& x, std::size_t ramp) {
  ramp = std::min(ramp, x.size() / 2);
  for (std::size_t i = 0; i < ramp; ++i) {
    const double g = 0.5 - 0.5 * std::cos(std::numbers::pi * static_cast<double>(i) / static_cast<double>(ramp));
    x[i] *= g;
    x[x.size() - 1 - i] *= g;
  }
}

void add_tone(std::vector<double>& out, std::size_t at, std::size_t len, int sr, double amp,
              const std::function<double(double)>& freq_at, std::size_t harmonics = 1, double rolloff = 1.0) {
  double phase = 0.0;
  std::vector<double> seg(len, 0.0);
  for (std::size_t i = 0; i < len; ++i) {
    const double t = static_cast<double>(i) / sr;
    const double f = freq_at(t);
    phase += kTwoPi * f / sr;
    double v = 0.0;
    for (std::size_t h = 1; h <= harmonics; ++h)
      if (f * static_cast<double>(h) < 0.45 * sr) v += std::sin(phase * static_cast<double>(h)) / std::pow(static_cast<double>(h), rolloff);
    seg[i] = v;
  }
  envelope(seg, std::min<std::size_t>(len / 4, static_cast<std::size_t>(0.01 * sr) + 1));
  for (std::size_t i = 0; i < len && at + i < out.size(); ++i) out[at + i] += amp * seg[i];
}

std::vector<double> event_chirp(std::size_t n, int sr, Rng& rng) {
  std::vector<double> x(n, 0.0);
  std::size_t at = 0;
  const double base = rng.uniform(800.0, 1000.0);
  while (at < n) {
    const auto len = static_cast<std::size_t>(rng.uniform(0.05, 0.09) * sr);
    const double f0 = base * rng.uniform(0.95, 1.05), span = rng.uniform(400.0, 600.0);
    const double dur = static_cast<double>(len) / sr;
    add_tone(x, at, len, sr, rng.uniform(0.6, 1.0), [=](double t) { return f0 + span * t / dur; });
    at += len + static_cast<std::size_t>(rng.uniform(0.03, 0.10) * sr);
  }
  return x;
}

std::vector<double> event_tweet(std::size_t n, int sr, Rng& rng) {
  std::vector<double> x(n, 0.0);
  const double f1 = rng.uniform(1300.0, 1500.0), f2 = f1 - rng.uniform(250.0, 350.0);
  const double vib = rng.uniform(15.0, 25.0);
  std::size_t at = 0;
  bool hi = true;
  while (at < n) {
    const auto len = static_cast<std::size_t>(rng.uniform(0.10, 0.15) * sr);
    const double f = hi ? f1 : f2;
    add_tone(x, at, len, sr, 0.8, [=](double t) { return f + 30.0 * std::sin(kTwoPi * vib * t); }, 2, 2.0);
    at += len + static_cast<std::size_t>(0.02 * sr);
    hi = !hi;
  }
  return x;
}

std::vector<double> event_cricket(std::size_t n, int sr, Rng& rng) {
  std::vector<double> x(n, 0.0);
  const double fc = rng.uniform(1650.0, 1800.0), rate = rng.uniform(25.0, 35.0);
  add_tone(x, 0, n, sr, 1.0, [=](double) { return fc; });
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    x[i] *= std::sin(kTwoPi * rate * t) > 0.0 ? 1.0 : 0.05;
  }
  return x;
}

std::vector<double> event_horn(std::size_t n, int sr, Rng& rng) {
  std::vector<double> x(n, 0.0);
  const double f0 = rng.uniform(220.0, 320.0);
  add_tone(x, 0, n, sr, 1.0, [=](double) { return f0; }, 7, 1.0);
  return x;
}

std::vector<double> event_siren(std::size_t n, int sr, Rng& rng) {
  std::vector<double> x(n, 0.0);
  const double fc = rng.uniform(500.0, 650.0), dev = rng.uniform(120.0, 180.0), r = rng.uniform(0.8, 1.5);
  add_tone(x, 0, n, sr, 1.0, [=](double t) { return fc + dev * std::sin(kTwoPi * r * t); }, 2, 1.5);
  return x;
}

std::vector<double> event_engine(std::size_t n, int sr, Rng& rng) {
  std::vector<double> x(n, 0.0);
  const double f0 = rng.uniform(110.0, 150.0), am = rng.uniform(8.0, 14.0);
  add_tone(x, 0, n, sr, 1.0, [=](double) { return f0; }, 5, 0.7);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sr;
    x[i] *= 0.6 + 0.4 * std::sin(kTwoPi * am * t);
  }
  return x;
}

std::vector<double> event_gull(std::size_t n, int sr, Rng& rng) {
  std::vector<double> x(n, 0.0);
  std::size_t at = 0;
  while (at < n) {
    const auto len = static_cast<std::size_t>(rng.uniform(0.2, 0.35) * sr);
    const double f0 = rng.uniform(700.0, 900.0), dur = static_cast<double>(len) / sr;
    add_tone(x, at, len, sr, 1.0, [=](double t) { return f0 * (1.0 - 0.3 * t / dur); }, 3, 1.2);
    at += len + static_cast<std::size_t>(rng.uniform(0.05, 0.2) * sr);
  }
  return x;
}

std::vector<double> event_bell(std::size_t n, int sr, Rng& rng) {
  std::vector<double> x(n, 0.0);
  std::size_t at = 0;
  const double f0 = rng.uniform(350.0, 450.0);
  while (at < n) {
    const auto len = std::min(n - at, static_cast<std::size_t>(0.6 * sr));
    std::vector<double> seg(len, 0.0);
    for (std::size_t i = 0; i < len; ++i) {
      const double t = static_cast<double>(i) / sr;
      seg[i] = std::exp(-5.0 * t) * (std::sin(kTwoPi * f0 * t) + 0.5 * std::sin(kTwoPi * 2.76 * f0 * t));
    }
    for (std::size_t i = 0; i < len; ++i) x[at + i] += seg[i];
    at += static_cast<std::size_t>(rng.uniform(0.4, 0.7) * sr);
  }
  return x;
}

}  // namespace

std::vector<std::string> desk_scene_names(std::size_t scenes) {
  require(scenes >= 2 && scenes <= scene_defs().size(), ErrorCode::InvalidArgument, "desk corpus supports 2 or 3 scenes");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < scenes; ++i) out.push_back(scene_defs()[i].name);
  return out;
}

std::vector<std::string> desk_event_classes(const std::string& scene) { return scene_def(scene).events; }

std::vector<double> synth_desk_event(const std::string& id, double seconds, int sample_rate, std::uint64_t seed) {
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  std::vector<double> x;
  if (id == "chirp") x = event_chirp(n, sample_rate, rng);
  else if (id == "tweet") x = event_tweet(n, sample_rate, rng);
  else if (id == "cricket") x = event_cricket(n, sample_rate, rng);
  else if (id == "horn") x = event_horn(n, sample_rate, rng);
  else if (id == "siren") x = event_siren(n, sample_rate, rng);
  else if (id == "engine") x = event_engine(n, sample_rate, rng);
  else if (id == "gull") x = event_gull(n, sample_rate, rng);
  else if (id == "bell") x = event_bell(n, sample_rate, rng);
  else fail(ErrorCode::UnknownId, "no desk event class '" + id + "'");
  normalise_peak(x, 0.5);
  return x;
}

std::vector<double> synth_desk_background(const std::string& scene, double seconds, int sample_rate,
                                          std::uint64_t seed) {
  const auto& def = scene_def(scene);
  Rng rng(seed);
  const auto n = static_cast<std::size_t>(seconds * sample_rate);
  // Coloured noise: leaky integration of white noise, then mean removal.
  std::vector<double> x(n);
  double state = 0.0;
  for (auto& v : x) {
    state = def.tilt * state + rng.normal();
    v = state;
  }
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(n);
  for (double& v : x) v -= mean;
  const double noise_rms = rms(x);
  for (double& v : x) v *= 0.05 / noise_rms;

  // Scene hum with two harmonics.
  const double hum_phase = rng.uniform(0.0, kTwoPi);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / sample_rate;
    x[i] += 0.04 * std::sin(kTwoPi * def.hum_hz * t + hum_phase) + 0.02 * std::sin(kTwoPi * 2 * def.hum_hz * t);
  }

  // In-context events sprinkled through the clip.
  const auto count = rng.uniform_int(2, 4);
  for (std::int64_t k = 0; k < count; ++k) {
    const auto& id = def.events[static_cast<std::size_t>(rng.uniform_int(0, static_cast<std::int64_t>(def.events.size()) - 1))];
    const double dur = std::min(rng.uniform(0.4, 1.2), seconds * 0.5);
    auto ev = synth_desk_event(id, dur, sample_rate, rng.next_u64());
    envelope(ev, static_cast<std::size_t>(0.01 * sample_rate));
    const double gain = 0.06 * std::pow(10.0, rng.uniform(-6.0, 3.0) / 20.0) / std::max(rms(ev), 1e-12);
    const auto at = static_cast<std::size_t>(rng.uniform(0.0, seconds - dur) * sample_rate);
    for (std::size_t i = 0; i < ev.size() && at + i < n; ++i) x[at + i] += gain * ev[i];
  }
  normalise_peak(x, 0.5);
  return x;
}

void make_desk_corpus(const std::filesystem::path& dir, const DeskCorpusOptions& opt) {
  const auto scenes = desk_scene_names(opt.scenes);
  std::filesystem::create_directories(dir);

  // Ontology over the classes in use: Sound -> {Animal -> {Bird, Insect}, Vehicle, Object} -> leaves.
  const std::vector<std::pair<std::string, std::string>> groups{
      {"bird", "animal"}, {"insect", "animal"}, {"vehicle", "sound"}, {"object", "sound"}};
  const std::map<std::string, std::string> group_of{{"chirp", "bird"}, {"tweet", "bird"},    {"gull", "bird"},
                                                    {"cricket", "insect"}, {"horn", "vehicle"}, {"siren", "vehicle"},
                                                    {"engine", "vehicle"}, {"bell", "object"}};
  std::map<std::string, std::vector<std::string>> children;
  for (const auto& s : scenes)
    for (const auto& e : desk_event_classes(s)) children[group_of.at(e)].push_back(e);
  for (const auto& [g, parent] : groups)
    if (children.contains(g)) children[parent].push_back(g);
  if (children.contains("animal")) children["sound"].insert(children["sound"].begin(), "animal");
  nlohmann::ordered_json ont = nlohmann::ordered_json::array();
  for (const auto& [id, kids] : children) {
    std::string name = id;
    name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
    ont.push_back({{"id", id}, {"name", name}, {"child_ids", kids}});
  }
  for (const auto& s : scenes)
    for (const auto& e : desk_event_classes(s)) {
      std::string name = e;
      name[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(name[0])));
      ont.push_back({{"id", e}, {"name", name}, {"child_ids", nlohmann::json::array()}});
    }
  write_text_file(dir / "ontology.json", ont.dump(2) + "\n");

  std::ostringstream act;
  act << "scene,event_id,active_seconds\n";
  for (const auto& s : scenes) {
    double secs = 900.0;
    for (const auto& e : desk_event_classes(s)) {
      act << s << ',' << e << ',' << secs << '\n';
      secs -= 150.0;
    }
  }
  write_text_file(dir / "activity.csv", act.str());
  write_text_file(dir / "judgments.csv", "scene,ic_id,oc_id,verdict\n");

  // Sources: every split gets its own renditions, so no file is shared.
  Catalogs cat;
  cat.root = dir;
  const double bg_seconds = opt.clip_seconds + 1.0;
  const double ev_seconds = std::max(3.0, opt.clip_seconds);
  for (const auto& split : kSplits) {
    const bool is_train = split == "train";
    const std::size_t n_bg = is_train ? opt.backgrounds_train : opt.backgrounds_eval;
    const std::size_t n_ev = is_train ? opt.events_train : opt.events_eval;
    SplitCatalog sc;
    std::filesystem::create_directories(dir / "sources" / split);
    for (const auto& s : scenes) {
      for (std::size_t i = 0; i < n_bg; ++i) {
        char name[64];
        std::snprintf(name, sizeof name, "sources/%s/bg_%s_%03zu.wav", split.c_str(), s.c_str(), i);
        const auto seed = Rng::derive_seed(opt.seed, name);
        audio::write_wav(audio::AudioClip(synth_desk_background(s, bg_seconds, opt.sample_rate, seed), opt.sample_rate),
                         dir / name);
        sc.scenes[s].push_back({name, bg_seconds});
      }
      for (const auto& e : desk_event_classes(s))
        for (std::size_t i = 0; i < n_ev; ++i) {
          char name[64];
          std::snprintf(name, sizeof name, "sources/%s/ev_%s_%03zu.wav", split.c_str(), e.c_str(), i);
          const auto seed = Rng::derive_seed(opt.seed, name);
          audio::write_wav(audio::AudioClip(synth_desk_event(e, ev_seconds, opt.sample_rate, seed), opt.sample_rate),
                           dir / name);
          sc.events[e].push_back({name, ev_seconds});
        }
    }
    cat.splits[split] = std::move(sc);
  }
  write_text_file(dir / "catalogs.json", catalogs_to_json(cat));

  std::ostringstream cfg;
  cfg << "# Desk-scale run over the synthetic corpus in this directory.\n"
      << "seed: " << opt.seed << "\n"
      << "run_dir: run\n"
      << "audio:\n  sample_rate: " << opt.sample_rate << "\n"
      << "stft:\n  window_size: 256\n  hop: 128\n"
      << "mel:\n  n_mels: 32\n"
      << "ontology:\n  ontology: ontology.json\n  activity: activity.csv\n  judgments: judgments.csv\n"
      << "synthesis:\n  catalogs: catalogs.json\n  clip_seconds: " << opt.clip_seconds << "\n"
      << "  event_seconds: [0.5, " << std::min(3.0, opt.clip_seconds * 0.75) << "]\n"
      << "  counts:\n    train: " << opt.pairs_train << "\n    val: " << opt.pairs_eval
      << "\n    test: " << opt.pairs_eval << "\n"
      << "context_model:\n  first_block_channels: 8\n  rnn_hidden: 64\n  fc1: 64\n"
      << "denoiser:\n  first_encoder_channels: 8\n"
      << "pretrain:\n  batch_size: 16\n  max_epochs: 10\n  patience: 3\n"
      << "training:\n  batch_size: 16\n  max_epochs: 20\n  patience: 5\n"
      << "evaluation:\n  runs: 3\n";
  write_text_file(dir / "config.yaml", cfg.str());
}

}  // namespace acad::synth
