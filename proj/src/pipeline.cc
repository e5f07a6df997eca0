// rnntep/pipeline.cc
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

#include "rnntep/pipeline.h"

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "json.hpp"

namespace rnntep {

namespace fs = std::filesystem;

void LogToStderr(const std::string &line) { std::cerr << line << "\n"; }

namespace {

void WriteText(const fs::path &path, const std::string &text) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIo, "pipeline", "cannot write " + path.string());
  os << text;
  if (!os) Fail(ErrorKind::kIo, "pipeline", "write failed for " + path.string());
}

void EnsureDir(const fs::path &dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir))
    Fail(ErrorKind::kIo, "pipeline", "cannot create directory " + dir.string());
}

std::string Fmt(const char *fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string OptMs(const std::optional<double> &v) {
  return v ? Fmt("%.1f", *v) : std::string("n/a");
}

std::span<const Utterance> DevSubset(const CorpusSplit &split, int n) {
  const std::size_t k = std::min<std::size_t>(split.test.size(), n);
  return std::span<const Utterance>(split.test.data(), k);
}

EvalSystem MakeSystem(const ExperimentConfig &cfg, const ParamSet &rnnt,
                      const ParamSet *las, const PrototypeTable &endpointer,
                      int jobs) {
  EvalSystem sys;
  sys.rnnt = &rnnt;
  sys.model = &cfg.model;
  sys.endpointer = &endpointer;
  sys.frame_ms = cfg.corpus.frame_ms;
  sys.las = las;
  sys.las_cfg = las != nullptr ? &cfg.las : nullptr;
  sys.jobs = jobs;
  return sys;
}

std::vector<Utterance> WithoutEos(std::span<const Utterance> corpus,
                                  const Vocabulary &vocab) {
  std::vector<Utterance> out;
  out.reserve(corpus.size());
  for (const auto &u : corpus) out.push_back(StripEos(u, vocab));
  return out;
}

}  // namespace

CorpusSplit GenerateSplit(const ExperimentConfig &cfg) {
  auto [train, test] = SplitCorpus(GenerateCorpus(cfg.corpus), cfg.train_fraction);
  return {std::move(train), std::move(test)};
}

void WriteSplit(const fs::path &dir, const CorpusSplit &split) {
  EnsureDir(dir);
  WriteCorpus(dir / "train.corpus", split.train);
  WriteCorpus(dir / "test.corpus", split.test);
}

CorpusSplit ReadSplit(const fs::path &dir) {
  return {ReadCorpus(dir / "train.corpus"), ReadCorpus(dir / "test.corpus")};
}

CorpusSplit LoadOrGenerateSplit(const ExperimentConfig &cfg, const fs::path &dir) {
  if (fs::exists(dir / "train.corpus") && fs::exists(dir / "test.corpus"))
    return ReadSplit(dir);
  CorpusSplit split = GenerateSplit(cfg);
  WriteSplit(dir, split);
  return split;
}

Checkpoint MakeCheckpoint(const ExperimentConfig &cfg, const std::string &stage,
                          const ModelBundle &bundle) {
  Checkpoint ckpt;
  ckpt.meta["stage"] = stage;
  ckpt.meta["config"] = FormatConfig(cfg);
  ckpt.params = bundle.rnnt;
  if (bundle.las) ckpt.params.Merge(*bundle.las);
  return ckpt;
}

ModelBundle LoadBundle(const ExperimentConfig &cfg, const fs::path &path) {
  if (!fs::exists(path))
    Fail(ErrorKind::kIo, "pipeline", "checkpoint not found: " + path.string());
  const Checkpoint ckpt = LoadCheckpoint(path);
  ModelBundle bundle;
  const ParamSet expected = InitModelParams(cfg.model);
  for (std::size_t i = 0; i < expected.size(); ++i)
    if (!ckpt.params.Has(expected.name(i)))
      Fail(ErrorKind::kShape, "pipeline",
           "checkpoint lacks array " + expected.name(i));
  for (std::size_t i = 0; i < expected.size(); ++i)
    bundle.rnnt.Add(expected.name(i), 0, 0) = ckpt.params[expected.name(i)];
  if (!bundle.rnnt.SameShape(expected))
    Fail(ErrorKind::kShape, "pipeline",
         "checkpoint arrays do not match the model configuration");
  const ParamSet las = ckpt.params.Select("las.");
  if (las.size() > 0) {
    if (!las.SameShape(InitLasParams(cfg.las)))
      Fail(ErrorKind::kShape, "pipeline",
           "checkpoint rescorer arrays do not match the configuration");
    bundle.las = las;
  }
  return bundle;
}

DecodeConfig NoEosDecode(DecodeConfig cfg) {
  cfg.eos_enabled = false;
  cfg.fallback_enabled = true;
  return cfg;
}

// ---------------------------------------------------------------------------

void CmdGenerate(const CommandContext &ctx) {
  const CorpusSplit split = GenerateSplit(ctx.cfg);
  WriteSplit(ctx.out, split);
  ctx.log("generate: " + std::to_string(split.train.size()) + " train, " +
          std::to_string(split.test.size()) + " test utterances -> " +
          ctx.out.string());
}

fs::path CmdTrain(const CommandContext &ctx, const std::string &stage,
                  const std::optional<fs::path> &base) {
  const ExperimentConfig &cfg = ctx.cfg;
  bool known = false;
  for (const auto &s : KnownStages()) known |= s == stage;
  if (!known) Fail(ErrorKind::kUsage, "train", "unknown stage '" + stage + "'");
  if (stage != "rnnt_ce" && !base)
    Fail(ErrorKind::kUsage, "train",
         "stage " + stage + " requires --checkpoint of a trained model");
  EnsureDir(ctx.out);
  const CorpusSplit split = LoadOrGenerateSplit(cfg, ctx.out / "corpus");
  const PrototypeTable endpointer = MakePrototypes(cfg.corpus);
  const RunOptions opts{ctx.jobs, cfg.seed};

  ModelBundle bundle;
  TrainLog log;
  if (stage == "rnnt_ce") {
    bundle.rnnt = InitModelParams(cfg.model);
    DevEval dev{DevSubset(split, cfg.train.eval_utterances), cfg.decode,
                &endpointer, cfg.corpus.frame_ms};
    log = TrainRnnt(bundle.rnnt, cfg.model, split.train, cfg.train, &cfg.penalty,
                    &dev, opts);
  } else {
    bundle = LoadBundle(cfg, *base);
    if (stage == "mwer") {
      MwerStageConfig mc = cfg.mwer;
      mc.mwer.scope = UpdateScope::kRnnt;
      const MwerModel model{&bundle.rnnt, &cfg.model, nullptr, nullptr, &endpointer};
      log = TrainMwer(model, split.train, cfg.decode, cfg.penalty, mc, opts);
    } else if (stage == "las_ce") {
      bundle.las = InitLasParams(cfg.las);
      log = TrainLas(*bundle.las, cfg.las, bundle.rnnt, cfg.model, split.train,
                     cfg.las_train, opts);
    } else {  // las_mwer
      if (!bundle.las)
        Fail(ErrorKind::kUsage, "train",
             "stage las_mwer requires a checkpoint with rescorer arrays");
      MwerStageConfig mc = cfg.mwer;
      if (mc.mwer.scope == UpdateScope::kRnnt) mc.mwer.scope = UpdateScope::kLas;
      const MwerModel model{&bundle.rnnt, &cfg.model, &*bundle.las, &cfg.las,
                            &endpointer};
      log = TrainMwer(model, split.train, cfg.decode, cfg.penalty, mc, opts);
    }
  }
  const fs::path ckpt = ctx.out / (stage + ".ckpt");
  SaveCheckpoint(ckpt, MakeCheckpoint(cfg, stage, bundle));
  WriteTrainLog(ctx.out / (stage + ".metrics.tsv"), log);
  ctx.log("train " + stage + ": " + std::to_string(log.size()) +
          " log entries -> " + ckpt.string());
  return ckpt;
}

CorpusEvaluation CmdDecode(const CommandContext &ctx, const fs::path &checkpoint) {
  const ExperimentConfig &cfg = ctx.cfg;
  const ModelBundle bundle = LoadBundle(cfg, checkpoint);
  EnsureDir(ctx.out);
  const CorpusSplit split = LoadOrGenerateSplit(cfg, ctx.out / "corpus");
  const PrototypeTable endpointer = MakePrototypes(cfg.corpus);
  const ParamSet *las = bundle.las ? &*bundle.las : nullptr;
  const EvalSystem sys = MakeSystem(cfg, bundle.rnnt, las, endpointer, ctx.jobs);
  CorpusEvaluation ev = EvaluateCorpus(sys, split.test, cfg.decode,
                                       las ? &cfg.rescore : nullptr);
  std::vector<DecodeRecord> records;
  const auto &final_results = ev.final_results();
  for (std::size_t i = 0; i < split.test.size(); ++i) {
    DecodeRecord rec;
    rec.id = split.test[i].id;
    rec.tokens = ev.decodes[i].best().tokens;
    rec.log_score = ev.decodes[i].best().log_score;
    if (las) {
      // Reranked top-1; the score column stays the first-pass score.
      for (const auto &h : ev.decodes[i].nbest) {
        std::vector<int> stripped = h.tokens;
        if (!stripped.empty() && stripped.back() == cfg.model.vocab().eos())
          stripped.pop_back();
        if (stripped == final_results[i].hyp) {
          rec.tokens = h.tokens;
          rec.log_score = h.log_score;
          break;
        }
      }
    }
    rec.endpoint_frame = ev.decodes[i].endpoint_frame;
    rec.source = ev.decodes[i].source;
    records.push_back(std::move(rec));
  }
  WriteDecodeOutput(ctx.out / "decode.tsv", records);
  ctx.log("decode: wer=" + Fmt("%.2f", ev.wer) + "% ep50=" +
          OptMs(ev.latency.ep50_ms) + "ms ep90=" + OptMs(ev.latency.ep90_ms) +
          "ms eou=" + Fmt("%.1f", ev.latency.eou_pct) + "%");
  return ev;
}

SweepReport CmdSweep(const CommandContext &ctx, const fs::path &checkpoint) {
  const ExperimentConfig &cfg = ctx.cfg;
  const ModelBundle bundle = LoadBundle(cfg, checkpoint);
  EnsureDir(ctx.out);
  const CorpusSplit split = LoadOrGenerateSplit(cfg, ctx.out / "corpus");
  const PrototypeTable endpointer = MakePrototypes(cfg.corpus);
  const ParamSet *las = bundle.las ? &*bundle.las : nullptr;
  const EvalSystem sys = MakeSystem(cfg, bundle.rnnt, las, endpointer, ctx.jobs);
  SweepReport report = RocSweep(sys, split.test, cfg.sweep.alpha_grid,
                                cfg.sweep.beta_grid, cfg.decode,
                                las ? &cfg.rescore : nullptr);
  WriteSweepCsv(ctx.out / "sweep.csv", report);
  ctx.log("sweep: " + std::to_string(report.rows.size()) + " rows -> " +
          (ctx.out / "sweep.csv").string());
  return report;
}

// ---------------------------------------------------------------------------

const SystemMetrics &LadderReport::system(const std::string &name) const {
  for (const auto &s : systems)
    if (s.name == name) return s;
  Fail(ErrorKind::kUsage, "pipeline", "no system named " + name);
}

bool LadderReport::all_passed() const {
  for (const auto &t : trends)
    if (!t.passed) return false;
  return !trends.empty();
}

namespace {

SystemMetrics Metrics(const std::string &name, const CorpusEvaluation &ev) {
  return {name, ev.wer, ev.first_pass_wer, ev.latency};
}

std::string Describe(const SystemMetrics &m) {
  return m.name + "(wer=" + Fmt("%.2f", m.wer) + " ep50=" + OptMs(m.latency.ep50_ms) +
         " ep90=" + OptMs(m.latency.ep90_ms) + " eou=" +
         Fmt("%.1f", m.latency.eou_pct) + ")";
}

bool Less(const std::optional<double> &a, const std::optional<double> &b) {
  return a && b && *a < *b;
}

bool LessEq(const std::optional<double> &a, const std::optional<double> &b) {
  return a && b && *a <= *b;
}

class Timer {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

}  // namespace

LadderReport CmdRunAll(const CommandContext &ctx) {
  const ExperimentConfig &cfg = ctx.cfg;
  const Vocabulary vocab = cfg.model.vocab();
  EnsureDir(ctx.out);
  WriteText(ctx.out / "config.ini", FormatConfig(cfg));
  const Timer total;
  auto step = [&](const std::string &what) {
    ctx.log("[" + Fmt("%7.1f", total.seconds()) + "s] " + what);
  };

  step("generating corpus");
  const CorpusSplit split = GenerateSplit(cfg);
  WriteSplit(ctx.out / "corpus", split);
  const PrototypeTable endpointer = MakePrototypes(cfg.corpus);
  const RunOptions opts{ctx.jobs, cfg.seed};
  const std::span<const Utterance> test(split.test);
  const DecodeConfig &dec = cfg.decode;

  LadderReport report;
  auto save = [&](const std::string &name, const ModelBundle &b, const TrainLog &log) {
    SaveCheckpoint(ctx.out / (name + ".ckpt"), MakeCheckpoint(cfg, name, b));
    WriteTrainLog(ctx.out / (name + ".metrics.tsv"), log);
  };
  auto evaluate = [&](const std::string &name, const ParamSet &rnnt,
                      const ParamSet *las, const DecodeConfig &d,
                      const RescoreConfig *rescore) {
    CorpusEvaluation ev =
        EvaluateCorpus(MakeSystem(cfg, rnnt, las, endpointer, ctx.jobs), test, d,
                       rescore);
    report.systems.push_back(Metrics(name, ev));
    step("  " + Describe(report.systems.back()));
    return ev;
  };
  auto train_first_pass = [&](const std::string &name,
                              std::span<const Utterance> data,
                              const PenaltyConfig *penalty, const DecodeConfig &d) {
    step("training " + name);
    ModelBundle b{InitModelParams(cfg.model), std::nullopt};
    DevEval dev{DevSubset(split, cfg.train.eval_utterances), d, &endpointer,
                cfg.corpus.frame_ms};
    const TrainLog log =
        TrainRnnt(b.rnnt, cfg.model, data, cfg.train, penalty, &dev, opts);
    save(name, b, log);
    return b;
  };

  // Baselines and penalty variants, all trained from the same initialisation.
  const std::vector<Utterance> train_no_eos = WithoutEos(split.train, vocab);
  const ModelBundle b1 =
      train_first_pass("B1", train_no_eos, nullptr, NoEosDecode(dec));
  evaluate("B1", b1.rnnt, nullptr, NoEosDecode(dec), nullptr);

  const ModelBundle b2 = train_first_pass("B2", split.train, nullptr, dec);
  evaluate("B2", b2.rnnt, nullptr, dec, nullptr);

  const PenaltyConfig early{cfg.ladder.early_alpha, 0.0, 0};
  const ModelBundle e1 = train_first_pass("E1", split.train, &early, dec);
  evaluate("E1", e1.rnnt, nullptr, dec, nullptr);

  const PenaltyConfig both{cfg.ladder.early_alpha, cfg.ladder.late_alpha,
                           cfg.ladder.late_buffer};
  const ModelBundle e2 = train_first_pass("E2", split.train, &both, dec);
  const CorpusEvaluation ev_e2 = evaluate("E2", e2.rnnt, nullptr, dec, nullptr);

  // Expected-error fine-tuning of the first pass.
  step("training E5");
  ModelBundle e5 = e2;
  {
    MwerStageConfig mc = cfg.mwer;
    mc.mwer.scope = UpdateScope::kRnnt;
    const MwerModel model{&e5.rnnt, &cfg.model, nullptr, nullptr, &endpointer};
    save("E5", e5, TrainMwer(model, split.train, dec, both, mc, opts));
  }
  evaluate("E5", e5.rnnt, nullptr, dec, nullptr);

  // Rescorer on the frozen E2 first pass.
  step("training E6");
  ModelBundle e6{e2.rnnt, InitLasParams(cfg.las)};
  const std::uint64_t frozen = e6.rnnt.Fingerprint();
  save("E6", e6,
       TrainLas(*e6.las, cfg.las, e6.rnnt, cfg.model, split.train, cfg.las_train,
                opts));
  if (e6.rnnt.Fingerprint() != frozen)
    Fail(ErrorKind::kTraining, "pipeline", "first-pass weights changed in E6");
  RescoreConfig flag_on = cfg.rescore;
  flag_on.include_rnnt_eos_score = true;
  const CorpusEvaluation ev_e6 =
      evaluate("E6", e6.rnnt, &*e6.las, dec, &flag_on);

  // Ablation: RNN-T EOS score replaced by a swept global offset.
  std::optional<double> best_off_wer;
  double best_offset = 0;
  for (double offset : cfg.sweep.eos_offset_grid) {
    RescoreConfig off = cfg.rescore;
    off.include_rnnt_eos_score = false;
    off.global_eos_offset = offset;
    const CorpusEvaluation ev = EvaluateCorpus(
        MakeSystem(cfg, e6.rnnt, &*e6.las, endpointer, ctx.jobs), test, dec, &off);
    if (!best_off_wer || ev.wer < *best_off_wer) {
      best_off_wer = ev.wer;
      best_offset = offset;
    }
  }
  step("  E6 without RNN-T EOS score: best wer=" +
       (best_off_wer ? Fmt("%.2f", *best_off_wer) : std::string("n/a")) +
       " at offset " + Fmt("%g", best_offset));

  step("training E7");
  ModelBundle e7 = e6;
  {
    MwerStageConfig mc = cfg.mwer;
    mc.mwer.scope = UpdateScope::kLas;
    const MwerModel model{&e7.rnnt, &cfg.model, &*e7.las, &cfg.las, &endpointer};
    save("E7", e7, TrainMwer(model, split.train, dec, both, mc, opts));
  }
  evaluate("E7", e7.rnnt, &*e7.las, dec, &flag_on);

  step("training E8");
  ModelBundle e8 = e6;
  {
    MwerStageConfig mc = cfg.mwer;
    mc.mwer.scope = UpdateScope::kBoth;
    const MwerModel model{&e8.rnnt, &cfg.model, &*e8.las, &cfg.las, &endpointer};
    save("E8", e8, TrainMwer(model, split.train, dec, both, mc, opts));
  }
  evaluate("E8", e8.rnnt, &*e8.las, dec, &flag_on);

  // Operating-point sweeps.
  auto sweep = [&](const std::string &name, const ParamSet &rnnt,
                   const ParamSet *las, const RescoreConfig *rescore) {
    step("sweeping " + name);
    const SweepReport r =
        RocSweep(MakeSystem(cfg, rnnt, las, endpointer, ctx.jobs), test,
                 cfg.sweep.alpha_grid, cfg.sweep.beta_grid, dec, rescore);
    const std::string file = "sweep_" + name + ".csv";
    WriteSweepCsv(ctx.out / file, r);
    report.sweep_files.push_back(file);
  };
  sweep("B2", b2.rnnt, nullptr, nullptr);
  sweep("E1", e1.rnnt, nullptr, nullptr);
  sweep("E2", e2.rnnt, nullptr, nullptr);
  sweep("E5", e5.rnnt, nullptr, nullptr);
  sweep("E6", e6.rnnt, &*e6.las, &flag_on);

  // Trends.
  const SystemMetrics &m_b1 = report.system("B1"), &m_b2 = report.system("B2"),
                      &m_e1 = report.system("E1"), &m_e2 = report.system("E2"),
                      &m_e5 = report.system("E5"), &m_e6 = report.system("E6");
  auto trend = [&](std::string id, std::string description, bool passed,
                   std::string detail) {
    report.trends.push_back({std::move(id), std::move(description), passed,
                             std::move(detail)});
  };
  trend("8a", "EOS model has lower EP50 and EP90 than fallback-only, EOU >= fallback-only",
        Less(m_b2.latency.ep50_ms, m_b1.latency.ep50_ms) &&
            Less(m_b2.latency.ep90_ms, m_b1.latency.ep90_ms) &&
            m_b2.latency.eou_pct >= m_b1.latency.eou_pct,
        Describe(m_b2) + " vs " + Describe(m_b1));
  trend("8b", "early penalty does not increase WER", m_e1.wer <= m_b2.wer,
        Describe(m_e1) + " vs " + Describe(m_b2));
  trend("8c", "late penalty reduces EP50 relative to early-only",
        Less(m_e2.latency.ep50_ms, m_e1.latency.ep50_ms),
        Describe(m_e2) + " vs " + Describe(m_e1));
  trend("8d", "expected-error fine-tuning does not increase WER or EP90",
        m_e5.wer <= m_e2.wer && LessEq(m_e5.latency.ep90_ms, m_e2.latency.ep90_ms),
        Describe(m_e5) + " vs " + Describe(m_e2));
  bool endpoints_same = ev_e6.decodes.size() == ev_e2.decodes.size();
  for (std::size_t i = 0; endpoints_same && i < ev_e6.decodes.size(); ++i)
    endpoints_same = ev_e6.rescored[i].endpoint_frame == ev_e2.first_pass[i].endpoint_frame;
  trend("8e", "rescoring lowers top-1 WER and keeps every endpoint frame",
        m_e6.wer < m_e6.first_pass_wer && endpoints_same,
        "rescored wer=" + Fmt("%.2f", m_e6.wer) + " first-pass wer=" +
            Fmt("%.2f", m_e6.first_pass_wer) +
            (endpoints_same ? " endpoints unchanged" : " endpoints CHANGED"));
  trend("8f", "dropping the RNN-T EOS score does not lower WER",
        best_off_wer && *best_off_wer >= m_e6.wer,
        "flag off best wer=" +
            (best_off_wer ? Fmt("%.2f", *best_off_wer) : std::string("n/a")) +
            " (offset " + Fmt("%g", best_offset) + ") vs flag on wer=" +
            Fmt("%.2f", m_e6.wer));

  WriteText(ctx.out / "summary.csv", FormatSummaryCsv(report.systems));
  WriteText(ctx.out / "trends.json", TrendsJson(report));
  for (const auto &t : report.trends)
    step(std::string(t.passed ? "PASS " : "FAIL ") + t.id + " " + t.detail);
  return report;
}

std::string FormatSummaryCsv(const std::vector<SystemMetrics> &systems) {
  std::string out = "system,wer_pct,first_pass_wer_pct,ep50_ms,ep90_ms,eou_pct\n";
  for (const auto &s : systems) {
    auto opt = [](const std::optional<double> &v) {
      return v ? Fmt("%.4f", *v) : std::string();
    };
    out += s.name + "," + Fmt("%.4f", s.wer) + "," + Fmt("%.4f", s.first_pass_wer) +
           "," + opt(s.latency.ep50_ms) + "," + opt(s.latency.ep90_ms) + "," +
           Fmt("%.4f", s.latency.eou_pct) + "\n";
  }
  return out;
}

std::string TrendsJson(const LadderReport &report) {
  using nlohmann::json;
  json j;
  j["all_passed"] = report.all_passed();
  json trends = json::array();
  json failed = json::array();
  for (const auto &t : report.trends) {
    trends.push_back({{"id", t.id},
                      {"description", t.description},
                      {"passed", t.passed},
                      {"detail", t.detail}});
    if (!t.passed) failed.push_back(t.id);
  }
  j["trends"] = trends;
  j["failed"] = failed;
  json systems = json::array();
  for (const auto &s : report.systems) {
    auto opt = [](const std::optional<double> &v) { return v ? json(*v) : json(nullptr); };
    systems.push_back({{"name", s.name},
                       {"wer_pct", s.wer},
                       {"first_pass_wer_pct", s.first_pass_wer},
                       {"ep50_ms", opt(s.latency.ep50_ms)},
                       {"ep90_ms", opt(s.latency.ep90_ms)},
                       {"eou_pct", s.latency.eou_pct}});
  }
  j["systems"] = systems;
  return j.dump(2) + "\n";
}

}  // namespace rnntep
