// rnntep/config.cc
//
// Copyright 2026  The rnntep Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "rnntep/config.h"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>
#include <utility>

namespace rnntep {

namespace {

struct Field {
  std::string key;  // "section.name"
  std::function<void(const std::string &)> set;
  std::function<std::string()> get;
};

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> SplitList(const std::string &s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = Trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

[[noreturn]] void BadValue(const std::string &key, const std::string &value,
                           const char *expected) {
  Fail(ErrorKind::kConfig, "config",
       "invalid value '" + value + "' for " + key + " (expected " + expected + ")");
}

template <typename T>
T ParseInteger(const std::string &key, const std::string &v) {
  T out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    BadValue(key, v, "integer");
  return out;
}

double ParseReal(const std::string &key, const std::string &v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos == v.size()) return d;
  } catch (const std::exception &) {
  }
  BadValue(key, v, "real");
}

bool ParseBool(const std::string &key, const std::string &v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  BadValue(key, v, "true/false");
}

std::string FormatReal(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

class Registry {
 public:
  void Int(std::string key, int &ref) {
    Add(key, [&ref, key](const std::string &v) { ref = ParseInteger<int>(key, v); },
        [&ref] { return std::to_string(ref); });
  }
  void U64(std::string key, std::uint64_t &ref) {
    Add(key,
        [&ref, key](const std::string &v) {
          ref = ParseInteger<std::uint64_t>(key, v);
        },
        [&ref] { return std::to_string(ref); });
  }
  void Real(std::string key, double &ref) {
    Add(key, [&ref, key](const std::string &v) { ref = ParseReal(key, v); },
        [&ref] { return FormatReal(ref); });
  }
  void Bool(std::string key, bool &ref) {
    Add(key, [&ref, key](const std::string &v) { ref = ParseBool(key, v); },
        [&ref] { return std::string(ref ? "true" : "false"); });
  }
  void Str(std::string key, std::string &ref) {
    Add(key, [&ref](const std::string &v) { ref = v; }, [&ref] { return ref; });
  }
  void Range(const std::string &key, IntRange &ref) {
    Int(key + "_min", ref.min);
    Int(key + "_max", ref.max);
  }
  void RealList(std::string key, std::vector<double> &ref) {
    Add(key,
        [&ref, key](const std::string &v) {
          ref.clear();
          for (const auto &item : SplitList(v)) ref.push_back(ParseReal(key, item));
        },
        [&ref] {
          std::string s;
          for (std::size_t i = 0; i < ref.size(); ++i)
            s += (i ? ", " : "") + FormatReal(ref[i]);
          return s;
        });
  }
  void StrList(std::string key, std::vector<std::string> &ref) {
    Add(key, [&ref](const std::string &v) { ref = SplitList(v); },
        [&ref] {
          std::string s;
          for (std::size_t i = 0; i < ref.size(); ++i) s += (i ? ", " : "") + ref[i];
          return s;
        });
  }
  void Scope(std::string key, UpdateScope &ref) {
    Add(key, [&ref](const std::string &v) { ref = ParseUpdateScope(v); },
        [&ref] { return std::string(UpdateScopeName(ref)); });
  }

  const Field *Find(const std::string &key) const {
    for (const auto &f : fields_)
      if (f.key == key) return &f;
    return nullptr;
  }
  const std::vector<Field> &fields() const { return fields_; }

 private:
  void Add(std::string key, std::function<void(const std::string &)> set,
           std::function<std::string()> get) {
    fields_.push_back({std::move(key), std::move(set), std::move(get)});
  }
  std::vector<Field> fields_;
};

Registry BuildRegistry(ExperimentConfig &c) {
  Registry r;
  r.U64("experiment.seed", c.seed);
  r.Real("experiment.train_fraction", c.train_fraction);
  r.Str("experiment.output_dir", c.output_dir);
  r.StrList("experiment.stages", c.stages);
  r.Int("experiment.jobs", c.jobs);

  r.Int("corpus.vocab_size", c.corpus.vocab_size);
  r.Int("corpus.feature_dim", c.corpus.feature_dim);
  r.Int("corpus.frames_per_token", c.corpus.frames_per_token);
  r.Range("corpus.tokens_per_utterance", c.corpus.tokens_per_utterance);
  r.Range("corpus.leading_silence_frames", c.corpus.leading_silence_frames);
  r.Range("corpus.trailing_silence_frames", c.corpus.trailing_silence_frames);
  r.Real("corpus.pause_probability", c.corpus.pause_probability);
  r.Range("corpus.pause_frames", c.corpus.pause_frames);
  r.Real("corpus.feature_noise_std", c.corpus.feature_noise_std);
  r.Int("corpus.num_utterances", c.corpus.num_utterances);
  r.Real("corpus.frame_ms", c.corpus.frame_ms);

  r.Int("model.encoder_layers", c.model.encoder_layers);
  r.Int("model.encoder_units", c.model.encoder_units);
  r.Int("model.prediction_layers", c.model.prediction_layers);
  r.Int("model.prediction_units", c.model.prediction_units);
  r.Int("model.joint_units", c.model.joint_units);
  r.Int("model.frame_stride", c.model.frame_stride);

  r.Real("penalty.alpha_early", c.penalty.alpha_early);
  r.Real("penalty.alpha_late", c.penalty.alpha_late);
  r.Int("penalty.t_buffer", c.penalty.t_buffer);

  r.Int("decode.beam_size", c.decode.beam_size);
  r.Int("decode.nbest_k", c.decode.nbest_k);
  r.Real("decode.alpha_eos", c.decode.alpha_eos);
  r.Real("decode.beta", c.decode.beta);
  r.Int("decode.fallback_silence_frames", c.decode.fallback_silence_frames);
  r.Bool("decode.fallback_enabled", c.decode.fallback_enabled);
  r.Bool("decode.eos_enabled", c.decode.eos_enabled);
  r.Int("decode.max_symbols_per_frame", c.decode.max_symbols_per_frame);
  r.Int("decode.token_expansions", c.decode.token_expansions);
  r.Bool("decode.stop_at_endpoint", c.decode.stop_at_endpoint);
  r.Bool("decode.endpoint_on_any", c.decode.endpoint_on_any);

  r.Int("las.encoder_layers", c.las.encoder_layers);
  r.Int("las.encoder_units", c.las.encoder_units);
  r.Int("las.decoder_units", c.las.decoder_units);
  r.Int("las.attention_dim", c.las.attention_dim);
  r.Int("las.heads", c.las.heads);
  r.Int("las.output_units", c.las.output_units);

  r.Real("rescore.lambda_coverage", c.rescore.lambda_coverage);
  r.Real("rescore.tau_coverage", c.rescore.tau_coverage);
  r.Bool("rescore.include_rnnt_eos_score", c.rescore.include_rnnt_eos_score);
  r.Real("rescore.global_eos_offset", c.rescore.global_eos_offset);

  r.Int("train.epochs", c.train.epochs);
  r.Int("train.batch_size", c.train.batch_size);
  r.Real("train.learning_rate", c.train.learning_rate);
  r.Real("train.clip_norm", c.train.clip_norm);
  r.Int("train.eval_every", c.train.eval_every);
  r.Int("train.eval_utterances", c.train.eval_utterances);

  r.Bool("mwer.include_early_penalty", c.mwer.mwer.include_early_penalty);
  r.Bool("mwer.include_late_penalty", c.mwer.mwer.include_late_penalty);
  r.Scope("mwer.update_scope", c.mwer.mwer.scope);
  r.Real("mwer.learning_rate", c.mwer.mwer.learning_rate);
  r.Real("mwer.clip_norm", c.mwer.mwer.clip_norm);
  r.Real("mwer.ce_weight", c.mwer.mwer.ce_weight);
  r.Int("mwer.epochs", c.mwer.epochs);
  r.Int("mwer.batch_size", c.mwer.batch_size);
  r.Int("mwer.max_utterances", c.mwer.max_utterances);

  r.Int("las_train.epochs", c.las_train.epochs);
  r.Int("las_train.batch_size", c.las_train.batch_size);
  r.Real("las_train.learning_rate", c.las_train.learning_rate);
  r.Real("las_train.clip_norm", c.las_train.clip_norm);

  r.RealList("sweep.alpha_grid", c.sweep.alpha_grid);
  r.RealList("sweep.beta_grid", c.sweep.beta_grid);
  r.RealList("sweep.eos_offset_grid", c.sweep.eos_offset_grid);

  r.Real("ladder.early_alpha", c.ladder.early_alpha);
  r.Real("ladder.late_alpha", c.ladder.late_alpha);
  r.Int("ladder.late_buffer", c.ladder.late_buffer);
  return r;
}

}  // namespace

void ApplySeed(ExperimentConfig &cfg, std::uint64_t seed) {
  cfg.seed = seed;
  cfg.corpus.seed = seed;
  cfg.model.seed = seed + 1000;
  cfg.las.seed = seed + 2000;
}

void FinalizeConfig(ExperimentConfig &cfg) {
  ApplySeed(cfg, cfg.seed);
  cfg.model.vocab_size = cfg.corpus.vocab_size;
  cfg.model.input_dim = cfg.corpus.feature_dim;
  cfg.las.vocab_size = cfg.corpus.vocab_size;
  cfg.las.input_dim = cfg.model.encoder_units;

  ValidateCorpusSpec(cfg.corpus);
  ValidateModelConfig(cfg.model);
  ValidatePenaltyConfig(cfg.penalty);
  ValidateDecodeConfig(cfg.decode);
  ValidateLasConfig(cfg.las);
  ValidateRescoreConfig(cfg.rescore);
  ValidateMwerConfig(cfg.mwer.mwer);

  auto positive = [](int v, const char *key) {
    if (v < 1) Fail(ErrorKind::kConfig, "config", std::string(key) + " must be >= 1");
  };
  if (!(cfg.train_fraction > 0 && cfg.train_fraction < 1))
    Fail(ErrorKind::kConfig, "config", "experiment.train_fraction must be in (0, 1)");
  if (cfg.output_dir.empty())
    Fail(ErrorKind::kConfig, "config", "experiment.output_dir must be set");
  positive(cfg.jobs, "experiment.jobs");
  positive(cfg.train.epochs, "train.epochs");
  positive(cfg.train.batch_size, "train.batch_size");
  positive(cfg.train.eval_utterances, "train.eval_utterances");
  if (cfg.train.eval_every < 0)
    Fail(ErrorKind::kConfig, "config", "train.eval_every must be >= 0");
  if (!(cfg.train.learning_rate > 0) || !(cfg.las_train.learning_rate > 0))
    Fail(ErrorKind::kConfig, "config", "learning rates must be > 0");
  positive(cfg.mwer.epochs, "mwer.epochs");
  positive(cfg.mwer.batch_size, "mwer.batch_size");
  if (cfg.mwer.max_utterances < 0)
    Fail(ErrorKind::kConfig, "config", "mwer.max_utterances must be >= 0");
  positive(cfg.las_train.epochs, "las_train.epochs");
  positive(cfg.las_train.batch_size, "las_train.batch_size");
  if (cfg.sweep.alpha_grid.empty() || cfg.sweep.beta_grid.empty())
    Fail(ErrorKind::kConfig, "config", "sweep grids must be non-empty");
  for (double a : cfg.sweep.alpha_grid)
    if (!(a > 0)) Fail(ErrorKind::kConfig, "config", "sweep.alpha_grid entries must be > 0");
  for (double b : cfg.sweep.beta_grid)
    if (!(b >= 0)) Fail(ErrorKind::kConfig, "config", "sweep.beta_grid entries must be >= 0");
  if (!(cfg.ladder.early_alpha >= 0) || !(cfg.ladder.late_alpha >= 0) ||
      cfg.ladder.late_buffer < 0)
    Fail(ErrorKind::kConfig, "config", "ladder penalties must be >= 0");

  // Stages must be known, unique and in ladder order.
  const auto &known = KnownStages();
  std::size_t last = 0;
  bool first = true;
  for (const auto &s : cfg.stages) {
    std::size_t idx = 0;
    while (idx < known.size() && known[idx] != s) ++idx;
    if (idx == known.size())
      Fail(ErrorKind::kConfig, "config", "unknown stage '" + s + "'");
    if (!first && idx <= last)
      Fail(ErrorKind::kConfig, "config",
           "stages must follow rnnt_ce, mwer, las_ce, las_mwer order");
    last = idx;
    first = false;
  }
}

ExperimentConfig ParseConfig(const std::string &text, const std::string &source) {
  ExperimentConfig cfg;
  const Registry reg = BuildRegistry(cfg);
  std::istringstream is(text);
  std::string line, section;
  int lineno = 0;
  auto where = [&] { return source + ":" + std::to_string(lineno) + ": "; };
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        Fail(ErrorKind::kConfig, "config", where() + "malformed section header");
      section = Trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      Fail(ErrorKind::kConfig, "config", where() + "expected key = value");
    const std::string key = section + "." + Trim(line.substr(0, eq));
    const Field *f = reg.Find(key);
    if (f == nullptr)
      Fail(ErrorKind::kConfig, "config", where() + "unknown key '" + key + "'");
    try {
      f->set(Trim(line.substr(eq + 1)));
    } catch (const Error &e) {
      Fail(e.kind(), e.component(), where() + e.message());
    }
  }
  FinalizeConfig(cfg);
  return cfg;
}

ExperimentConfig LoadConfig(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "config", "cannot read " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return ParseConfig(ss.str(), path.string());
}

std::string FormatConfig(const ExperimentConfig &cfg) {
  ExperimentConfig copy = cfg;
  const Registry reg = BuildRegistry(copy);
  std::string out, section;
  for (const Field &f : reg.fields()) {
    const auto dot = f.key.find('.');
    const std::string sec = f.key.substr(0, dot);
    if (sec != section) {
      out += (section.empty() ? "" : "\n") + std::string("[") + sec + "]\n";
      section = sec;
    }
    out += f.key.substr(dot + 1) + " = " + f.get() + "\n";
  }
  return out;
}

}  // namespace rnntep
