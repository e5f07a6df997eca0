// rnntep/eval.cc
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

#include "rnntep/eval.h"

#include <algorithm>
#include <cstdio>
#include <fstream>

#include "rnntep/parallel.h"

namespace rnntep {

EditCounts EditDistance(std::span<const int> ref, std::span<const int> hyp) {
  const std::size_t n = ref.size(), m = hyp.size();
  std::vector<std::vector<int>> d(n + 1, std::vector<int>(m + 1));
  for (std::size_t i = 0; i <= n; ++i) d[i][0] = static_cast<int>(i);
  for (std::size_t j = 0; j <= m; ++j) d[0][j] = static_cast<int>(j);
  for (std::size_t i = 1; i <= n; ++i)
    for (std::size_t j = 1; j <= m; ++j)
      d[i][j] = std::min({d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1]),
                          d[i - 1][j] + 1, d[i][j - 1] + 1});

  EditCounts counts;
  std::size_t i = n, j = m;
  while (i > 0 || j > 0) {
    if (i > 0 && j > 0 &&
        d[i][j] == d[i - 1][j - 1] + (ref[i - 1] != hyp[j - 1])) {
      counts.sub += ref[i - 1] != hyp[j - 1];
      --i, --j;
    } else if (i > 0 && d[i][j] == d[i - 1][j] + 1) {
      ++counts.del;
      --i;
    } else {
      ++counts.ins;
      --j;
    }
  }
  return counts;
}

double CorpusWer(std::span<const UtteranceResult> results) {
  if (results.empty()) Fail(ErrorKind::kUsage, "eval", "empty result list");
  long errors = 0, words = 0;
  for (const auto &r : results) {
    errors += r.errors.total();
    words += static_cast<long>(r.ref.size());
  }
  if (words == 0) Fail(ErrorKind::kUsage, "eval", "zero total reference length");
  return 100.0 * static_cast<double>(errors) / static_cast<double>(words);
}

double NearestRankPercentile(std::vector<double> values, int pct) {
  if (values.empty()) Fail(ErrorKind::kUsage, "eval", "percentile of empty list");
  if (pct < 1 || pct > 100)
    Fail(ErrorKind::kUsage, "eval", "percentile must be in [1, 100]");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  const std::size_t rank = (static_cast<std::size_t>(pct) * n + 99) / 100;
  return values[rank - 1];
}

LatencySummary SummarizeLatency(std::span<const std::optional<double>> latencies,
                                int total) {
  if (total < 1) Fail(ErrorKind::kUsage, "eval", "total must be >= 1");
  std::vector<double> defined;
  for (const auto &l : latencies)
    if (l) defined.push_back(*l);
  LatencySummary s;
  s.eou_pct = 100.0 * static_cast<double>(defined.size()) / total;
  if (!defined.empty()) {
    s.ep50_ms = NearestRankPercentile(defined, 50);
    s.ep90_ms = NearestRankPercentile(defined, 90);
  }
  return s;
}

LatencySummary SummarizeLatency(std::span<const UtteranceResult> results) {
  std::vector<std::optional<double>> latencies;
  for (const auto &r : results) latencies.push_back(r.latency_ms);
  return SummarizeLatency(latencies, static_cast<int>(results.size()));
}

namespace {

std::vector<int> StripTrailingEos(std::vector<int> tokens, int eos) {
  if (!tokens.empty() && tokens.back() == eos) tokens.pop_back();
  return tokens;
}

}  // namespace

UtteranceResult MakeResult(const Utterance &utt, const std::vector<int> &tokens,
                           const DecodeResult &decode, int eos, double frame_ms) {
  UtteranceResult r;
  r.id = utt.id;
  r.ref = StripTrailingEos(utt.labels, eos);
  r.hyp = StripTrailingEos(tokens, eos);
  r.errors = EditDistance(r.ref, r.hyp);
  r.endpoint_frame = decode.endpoint_frame;
  r.source = decode.source;
  if (decode.endpoint_frame)
    r.latency_ms = LatencyMs(*decode.endpoint_frame, utt.t_eos, frame_ms);
  return r;
}

CorpusEvaluation EvaluateCorpus(const EvalSystem &system,
                                std::span<const Utterance> corpus,
                                const DecodeConfig &dcfg,
                                const RescoreConfig *rescore) {
  if (system.rnnt == nullptr || system.model == nullptr)
    Fail(ErrorKind::kUsage, "eval", "evaluation needs an RNN-T model");
  if (corpus.empty()) Fail(ErrorKind::kUsage, "eval", "empty corpus");
  const bool rescoring = rescore != nullptr;
  if (rescoring && (system.las == nullptr || system.las_cfg == nullptr))
    Fail(ErrorKind::kUsage, "eval", "rescoring needs LAS parameters");
  const int eos = system.model->vocab().eos();
  const int n = static_cast<int>(corpus.size());

  CorpusEvaluation out;
  out.first_pass.resize(n);
  out.decodes.resize(n);
  if (rescoring) out.rescored.resize(n);
  ParallelFor(n, system.jobs, [&](int i) {
    const Utterance &utt = corpus[i];
    DecodeResult dec = BeamSearch(*system.rnnt, *system.model, utt.features,
                                  dcfg, system.endpointer);
    out.first_pass[i] =
        MakeResult(utt, dec.best().tokens, dec, eos, system.frame_ms);
    if (rescoring) {
      const EncoderStates enc = Encode(*system.rnnt, *system.model, utt.features);
      const auto ranked = RescoreNBest(*system.las, *system.las_cfg,
                                       enc.states(), dec.nbest, *rescore);
      out.rescored[i] =
          MakeResult(utt, ranked.front().hyp.tokens, dec, eos, system.frame_ms);
    }
    out.decodes[i] = std::move(dec);
  });
  out.first_pass_wer = CorpusWer(out.first_pass);
  out.wer = rescoring ? CorpusWer(out.rescored) : out.first_pass_wer;
  out.latency = SummarizeLatency(out.first_pass);
  return out;
}

SweepReport RocSweep(const EvalSystem &system, std::span<const Utterance> corpus,
                     std::span<const double> alpha_grid,
                     std::span<const double> beta_grid,
                     const DecodeConfig &dcfg, const RescoreConfig *rescore) {
  if (alpha_grid.empty() || beta_grid.empty())
    Fail(ErrorKind::kUsage, "eval", "sweep grids must be non-empty");
  SweepReport report;
  for (double alpha : alpha_grid) {
    for (double beta : beta_grid) {
      for (const SweepRow &row : report.rows)
        if (row.alpha_eos == alpha && row.beta == beta)
          Fail(ErrorKind::kUsage, "eval", "duplicate sweep grid point");
      SweepRow row;
      row.alpha_eos = alpha;
      row.beta = beta;
      try {
        DecodeConfig cfg = dcfg;
        cfg.alpha_eos = alpha;
        cfg.beta = beta;
        const CorpusEvaluation ev = EvaluateCorpus(system, corpus, cfg, rescore);
        row.wer_pct = ev.wer;
        row.latency = ev.latency;
      } catch (const Error &e) {
        row.error = e.what();
      }
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

namespace {

std::string Num(double v, const char *fmt) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), fmt, v);
  return buf;
}

std::string Opt(const std::optional<double> &v) {
  return v ? Num(*v, "%.4f") : std::string();
}

}  // namespace

std::string FormatSweepCsv(const SweepReport &report) {
  std::string out = "alpha_eos,beta,wer_pct,ep50_ms,ep90_ms,eou_pct\n";
  for (const SweepRow &r : report.rows) {
    out += Num(r.alpha_eos, "%g") + "," + Num(r.beta, "%g") + "," +
           Opt(r.wer_pct) + "," + Opt(r.latency.ep50_ms) + "," +
           Opt(r.latency.ep90_ms) + "," +
           (r.error.empty() ? Num(r.latency.eou_pct, "%.4f") : std::string()) +
           "\n";
  }
  return out;
}

void WriteSweepCsv(const std::filesystem::path &path, const SweepReport &report) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIo, "eval", "cannot write " + path.string());
  os << FormatSweepCsv(report);
  if (!os) Fail(ErrorKind::kIo, "eval", "write failed for " + path.string());
}

}  // namespace rnntep
