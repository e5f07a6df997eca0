// rnntep/decoder.cc
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

#include "rnntep/decoder.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace rnntep {

namespace {

struct BeamEntry {
  Hypothesis hyp;
  PredictorState state;
  bool eos_terminated = false;
};

// Entries keyed by token sequence; identical sequences reached through
// different alignments are merged by summing their probabilities.
class HypothesisSet {
 public:
  void Merge(BeamEntry entry) {
    auto it = index_.find(entry.hyp.tokens);
    if (it == index_.end()) {
      index_.emplace(entry.hyp.tokens, entries_.size());
      entries_.push_back(std::move(entry));
      return;
    }
    BeamEntry &existing = entries_[it->second];
    const double merged = LogAdd(existing.hyp.log_score, entry.hyp.log_score);
    // Keep the metadata (alignment, endpoint) of the stronger alignment.
    if (entry.hyp.log_score > existing.hyp.log_score) existing = std::move(entry);
    existing.hyp.log_score = merged;
  }

  bool empty() const { return entries_.empty(); }

  // Top `limit` entries, best first; ties broken by token sequence.
  std::vector<BeamEntry> Take(int limit) {
    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      const auto &ha = entries_[a].hyp, &hb = entries_[b].hyp;
      if (ha.log_score != hb.log_score) return ha.log_score > hb.log_score;
      return ha.tokens < hb.tokens;
    });
    std::vector<BeamEntry> out;
    for (std::size_t i = 0; i < order.size() && static_cast<int>(i) < limit; ++i)
      out.push_back(std::move(entries_[order[i]]));
    entries_.clear();
    index_.clear();
    return out;
  }

 private:
  std::vector<BeamEntry> entries_;
  std::map<std::vector<int>, std::size_t> index_;
};

}  // namespace

void ValidateDecodeConfig(const DecodeConfig &cfg) {
  if (cfg.nbest_k < 1 || cfg.beam_size < cfg.nbest_k)
    Fail(ErrorKind::kConfig, "decoder", "need beam_size >= nbest_k >= 1");
  if (!(cfg.alpha_eos > 0))
    Fail(ErrorKind::kConfig, "decoder", "alpha_eos must be > 0");
  if (!(cfg.beta >= 0))
    Fail(ErrorKind::kConfig, "decoder", "beta must be >= 0");
  if (cfg.fallback_enabled && cfg.fallback_silence_frames < 1)
    Fail(ErrorKind::kConfig, "decoder", "fallback_silence_frames must be >= 1");
  if (cfg.max_symbols_per_frame < 1)
    Fail(ErrorKind::kConfig, "decoder", "max_symbols_per_frame must be >= 1");
  if (cfg.token_expansions < 1)
    Fail(ErrorKind::kConfig, "decoder", "token_expansions must be >= 1");
}

std::string_view EndpointSourceName(EndpointSource source) {
  switch (source) {
    case EndpointSource::kEos: return "eos";
    case EndpointSource::kFallback: return "fallback";
    case EndpointSource::kNone: break;
  }
  return "none";
}

bool EosAllowed(double p_eos, double alpha_eos, double beta) {
  return std::pow(p_eos, alpha_eos) >= beta;
}

std::optional<int> FirstAllowedEosFrame(std::span<const double> p_eos,
                                        double alpha_eos, double beta) {
  for (std::size_t t = 0; t < p_eos.size(); ++t)
    if (EosAllowed(p_eos[t], alpha_eos, beta)) return static_cast<int>(t);
  return std::nullopt;
}

std::optional<int> FallbackEoq(const FrameMatrix &features,
                               const PrototypeTable &prototypes,
                               int silence_frames) {
  if (silence_frames < 1)
    Fail(ErrorKind::kUsage, "decoder", "silence_frames must be >= 1");
  int run = 0;
  for (Eigen::Index t = 0; t < features.rows(); ++t) {
    run = prototypes.IsSilence(features.row(t).transpose()) ? run + 1 : 0;
    if (run >= silence_frames) return static_cast<int>(t) + 1;
  }
  return std::nullopt;
}

double LatencyMs(int endpoint_frame, int t_eos, double frame_ms) {
  return static_cast<double>(endpoint_frame - t_eos) * frame_ms;
}

ModelScorer::ModelScorer(const ParamSet &params, const ModelConfig &cfg,
                         const EncoderStates &encoder)
    : params_(params), cfg_(cfg) {
  enc_proj_ = (params["joint.We"] * encoder.states()).colwise() +
              params["joint.b"].col(0);
}

PredictorState ModelScorer::Initial() const {
  PredictorState state;
  const Vocabulary vocab = cfg_.vocab();
  VectorXd start = VectorXd::Zero(vocab.num_symbols());
  start(vocab.blank()) = 1.0;
  state.rnn = RnnStep(params_, "pred", cfg_.prediction_layers,
                      RnnZeroState(params_, "pred", cfg_.prediction_layers),
                      start);
  state.joint_proj = params_["joint.Wp"] * state.rnn.back();
  return state;
}

PredictorState ModelScorer::Advance(const PredictorState &state, int token) const {
  PredictorState next;
  next.num_tokens = state.num_tokens + 1;
  VectorXd input = VectorXd::Zero(cfg_.vocab().num_symbols());
  input(token) = 1.0;
  next.rnn = RnnStep(params_, "pred", cfg_.prediction_layers, state.rnn, input);
  next.joint_proj = params_["joint.Wp"] * next.rnn.back();
  return next;
}

VectorXd ModelScorer::LogProbs(int frame, const PredictorState &state) const {
  const VectorXd z = (enc_proj_.col(frame) + state.joint_proj).array().tanh();
  return LogSoftmax(VectorXd(params_["joint.Wo"] * z + params_["joint.bo"].col(0)));
}

VectorXd LatticeScorer::LogProbs(int frame, const PredictorState &state) const {
  return lattice_.node(frame, std::min(state.num_tokens, lattice_.labels()));
}

DecodeResult BeamSearch(const StepScorer &scorer, const DecodeConfig &cfg,
                        std::optional<int> fallback_frame, int stride,
                        int input_frames) {
  ValidateDecodeConfig(cfg);
  const int T = scorer.frames();
  if (T < 1) Fail(ErrorKind::kUsage, "decoder", "empty feature sequence");
  if (input_frames < 0) input_frames = T * stride;
  const int blank = scorer.symbols() - 1;
  const int eos = scorer.symbols() - 2;
  auto to_input = [&](int model_frame) {
    return LastInputFrameOf(model_frame, stride, input_frames);
  };

  std::vector<BeamEntry> beam(1);
  beam[0].state = scorer.Initial();

  DecodeResult result;
  auto close_actives = [&](std::optional<int> endpoint) {
    for (auto &e : beam) {
      if (e.hyp.terminated) continue;
      e.hyp.terminated = true;
      if (endpoint) e.hyp.endpoint_frame = endpoint;
    }
  };

  for (int t = 0; t < T; ++t) {
    if (cfg.fallback_enabled && fallback_frame && *fallback_frame <= t * stride &&
        cfg.stop_at_endpoint) {
      result.endpoint_frame = *fallback_frame;
      result.source = EndpointSource::kFallback;
      close_actives(result.endpoint_frame);
      break;
    }

    HypothesisSet next;
    std::vector<BeamEntry> frontier;
    for (auto &e : beam) {
      if (e.hyp.terminated)
        next.Merge(std::move(e));
      else
        frontier.push_back(std::move(e));
    }

    for (int step = 0; step <= cfg.max_symbols_per_frame && !frontier.empty();
         ++step) {
      const bool may_emit = step < cfg.max_symbols_per_frame;
      HypothesisSet expanded;
      for (const BeamEntry &e : frontier) {
        const VectorXd lp = scorer.LogProbs(t, e.state);

        BeamEntry stay = e;
        stay.hyp.log_score += lp(blank);
        next.Merge(std::move(stay));
        if (!may_emit) continue;

        std::vector<int> candidates;
        for (int k = 0; k < blank; ++k) {
          if (k == eos && (!cfg.eos_enabled ||
                           !EosAllowed(std::exp(lp(eos)), cfg.alpha_eos, cfg.beta)))
            continue;
          if (lp(k) == kLogZero<double>) continue;
          candidates.push_back(k);
        }
        std::stable_sort(candidates.begin(), candidates.end(),
                         [&](int a, int b) { return lp(a) > lp(b); });
        if (static_cast<int>(candidates.size()) > cfg.token_expansions)
          candidates.resize(cfg.token_expansions);

        for (int k : candidates) {
          BeamEntry ext;
          ext.hyp = e.hyp;
          ext.hyp.tokens.push_back(k);
          ext.hyp.token_frames.push_back(to_input(t));
          if (k == eos) {
            ext.hyp.eos_score = cfg.alpha_eos * lp(eos);
            ext.hyp.log_score += ext.hyp.eos_score;
            ext.hyp.terminated = true;
            ext.hyp.endpoint_frame = to_input(t);
            ext.eos_terminated = true;
            next.Merge(std::move(ext));
          } else {
            ext.hyp.log_score += lp(k);
            ext.state = scorer.Advance(e.state, k);
            expanded.Merge(std::move(ext));
          }
        }
      }
      frontier = expanded.Take(cfg.beam_size);
    }

    beam = next.Take(cfg.beam_size);
    result.frames_consumed = t + 1;
    if (beam.empty() || beam.front().hyp.log_score == kLogZero<double>)
      Fail(ErrorKind::kDecode, "decoder",
           "beam collapsed at frame " + std::to_string(t));

    bool endpoint = beam.front().eos_terminated;
    if (cfg.endpoint_on_any)
      for (const auto &e : beam) endpoint = endpoint || e.eos_terminated;
    if (endpoint && !result.endpoint_frame) {
      result.endpoint_frame = to_input(t);
      result.source = EndpointSource::kEos;
      if (cfg.stop_at_endpoint) {
        close_actives(std::nullopt);
        break;
      }
    }
  }

  // Combined endpoint is the earlier of the two detectors.
  if (cfg.fallback_enabled && fallback_frame &&
      *fallback_frame <= input_frames &&
      (!result.endpoint_frame || *fallback_frame < *result.endpoint_frame)) {
    result.endpoint_frame = *fallback_frame;
    result.source = EndpointSource::kFallback;
    close_actives(result.endpoint_frame);
  }
  close_actives(std::nullopt);

  for (int i = 0; i < static_cast<int>(beam.size()) && i < cfg.nbest_k; ++i)
    result.nbest.push_back(std::move(beam[i].hyp));
  return result;
}

DecodeResult BeamSearch(const ParamSet &params, const ModelConfig &mcfg,
                        const FrameMatrix &features, const DecodeConfig &cfg,
                        const PrototypeTable *endpointer) {
  const EncoderStates enc = Encode(params, mcfg, features);
  const ModelScorer scorer(params, mcfg, enc);
  std::optional<int> fallback;
  if (cfg.fallback_enabled && endpointer != nullptr)
    fallback = FallbackEoq(features, *endpointer, cfg.fallback_silence_frames);
  return BeamSearch(scorer, cfg, fallback, mcfg.frame_stride,
                    static_cast<int>(features.rows()));
}

std::string FormatDecodeRecord(const DecodeRecord &rec) {
  std::string line = rec.id + "\t";
  for (std::size_t i = 0; i < rec.tokens.size(); ++i) {
    if (i) line += ' ';
    line += std::to_string(rec.tokens[i]);
  }
  char buf[64];
  std::snprintf(buf, sizeof(buf), "\t%.6f\t%d\t", rec.log_score,
                rec.endpoint_frame ? *rec.endpoint_frame : -1);
  line += buf;
  line += EndpointSourceName(rec.source);
  return line;
}

DecodeRecord ParseDecodeRecord(const std::string &line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, '\t')) fields.push_back(field);
  if (fields.size() != 5)
    Fail(ErrorKind::kIo, "decoder", "malformed decode line: " + line);
  DecodeRecord rec;
  rec.id = fields[0];
  std::stringstream toks(fields[1]);
  int y;
  while (toks >> y) rec.tokens.push_back(y);
  rec.log_score = std::stod(fields[2]);
  const int ep = std::stoi(fields[3]);
  if (ep >= 0) rec.endpoint_frame = ep;
  if (fields[4] == "eos")
    rec.source = EndpointSource::kEos;
  else if (fields[4] == "fallback")
    rec.source = EndpointSource::kFallback;
  else if (fields[4] == "none")
    rec.source = EndpointSource::kNone;
  else
    Fail(ErrorKind::kIo, "decoder", "unknown endpoint source " + fields[4]);
  return rec;
}

void WriteDecodeOutput(const std::filesystem::path &path,
                       const std::vector<DecodeRecord> &records) {
  std::ofstream os(path, std::ios::trunc);
  if (!os) Fail(ErrorKind::kIo, "decoder", "cannot write " + path.string());
  for (const auto &rec : records) os << FormatDecodeRecord(rec) << '\n';
}

std::vector<DecodeRecord> ReadDecodeOutput(const std::filesystem::path &path) {
  std::ifstream is(path);
  if (!is) Fail(ErrorKind::kIo, "decoder", "cannot open " + path.string());
  std::vector<DecodeRecord> out;
  std::string line;
  while (std::getline(is, line))
    if (!line.empty()) out.push_back(ParseDecodeRecord(line));
  return out;
}

}  // namespace rnntep
