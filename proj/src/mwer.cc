// rnntep/mwer.cc
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

#include "rnntep/mwer.h"

#include <algorithm>
#include <cmath>
#include <set>

#include "rnntep/eval.h"

namespace rnntep {

namespace {

VectorXd Posteriors(std::span<const NBestItem> items) {
  if (items.empty()) Fail(ErrorKind::kUsage, "mwer", "empty N-best list");
  VectorXd s(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) s(i) = items[i].seq_log_prob;
  if (std::isnan(s.sum()) || s.maxCoeff() == kLogZero<double>)
    Fail(ErrorKind::kLoss, "mwer", "all N-best scores are -inf or NaN");
  const double z = LogSumExp(s);
  return (s.array() - z).exp().matrix();
}

}  // namespace

double MwerLoss(std::span<const NBestItem> items) {
  const VectorXd p = Posteriors(items);
  double mean = 0;
  for (const auto &it : items) mean += it.word_errors;
  mean /= static_cast<double>(items.size());
  double loss = 0;
  for (std::size_t i = 0; i < items.size(); ++i)
    loss += p(i) * (items[i].word_errors - mean);
  return loss;
}

VectorXd MwerGrad(std::span<const NBestItem> items) {
  const VectorXd p = Posteriors(items);
  double expected = 0;
  for (std::size_t i = 0; i < items.size(); ++i)
    expected += p(i) * items[i].word_errors;
  VectorXd g(items.size());
  for (std::size_t i = 0; i < items.size(); ++i)
    g(i) = p(i) * (items[i].word_errors - expected);
  return g;
}

std::vector<NBestItem> DeduplicateNBest(std::span<const NBestItem> items) {
  std::set<std::vector<int>> seen;
  std::vector<NBestItem> out;
  for (const auto &it : items)
    if (seen.insert(it.tokens).second) out.push_back(it);
  return out;
}

std::string_view UpdateScopeName(UpdateScope scope) {
  switch (scope) {
    case UpdateScope::kRnnt: return "rnnt";
    case UpdateScope::kLas: return "las";
    case UpdateScope::kBoth: return "both";
  }
  return "?";
}

UpdateScope ParseUpdateScope(std::string_view name) {
  if (name == "rnnt") return UpdateScope::kRnnt;
  if (name == "las") return UpdateScope::kLas;
  if (name == "both") return UpdateScope::kBoth;
  Fail(ErrorKind::kConfig, "mwer",
       "update_scope must be rnnt, las or both, got '" + std::string(name) + "'");
}

void ValidateMwerConfig(const MwerConfig &cfg) {
  if (!(cfg.learning_rate > 0))
    Fail(ErrorKind::kConfig, "mwer", "learning_rate must be > 0");
  if (!(cfg.clip_norm >= 0))
    Fail(ErrorKind::kConfig, "mwer", "clip_norm must be >= 0");
  if (!(cfg.ce_weight >= 0))
    Fail(ErrorKind::kConfig, "mwer", "ce_weight must be >= 0");
}

PenaltyConfig MwerPenalty(const PenaltyConfig &base, const MwerConfig &cfg) {
  PenaltyConfig p = base;
  if (!cfg.include_early_penalty) p.alpha_early = 0;
  if (!cfg.include_late_penalty) p.alpha_late = 0;
  return p;
}

LogitLattice MwerHypothesisLattice(const ParamSet &params, const ModelConfig &cfg,
                                   const EncoderStates &encoder,
                                   std::span<const int> tokens, int t_eos,
                                   const PenaltyConfig &penalty) {
  LogitLattice lat = ForwardLattice(params, cfg, encoder, tokens).log_probs;
  if (!tokens.empty() && tokens.back() == cfg.vocab().eos())
    ApplyEndpointPenaltyInPlace(lat, std::min(t_eos, lat.frames()), penalty);
  return lat;
}

MwerDiagnostics MwerObjective(const MwerModel &model, const Utterance &utt,
                              std::vector<NBestItem> &items,
                              const PenaltyConfig &base, const MwerConfig &cfg,
                              ParamSet *rnnt_grads, ParamSet *las_grads) {
  ValidateMwerConfig(cfg);
  const bool use_las = UsesLas(cfg.scope);
  if (use_las && (model.las == nullptr || model.las_cfg == nullptr))
    Fail(ErrorKind::kUsage, "mwer", "scope '" +
         std::string(UpdateScopeName(cfg.scope)) + "' needs LAS parameters");
  const ParamSet &params = *model.rnnt;
  const ModelConfig &mcfg = *model.model;
  const int eos = mcfg.vocab().eos();
  const PenaltyConfig penalty = MwerPenalty(base, cfg);
  const int t_eos = ModelFrameOf(utt.t_eos, mcfg.frame_stride);
  const EncoderStates encoder = Encode(params, mcfg, utt.features);

  MwerDiagnostics diag;
  diag.nbest_size = static_cast<int>(items.size());
  std::vector<LatticeForward> fwds;
  std::vector<RnntLossAndGrad<double>> rnnt;
  std::vector<LasForward> las;
  for (NBestItem &it : items) {
    LatticeForward fwd = ForwardLattice(params, mcfg, encoder, it.tokens);
    LogitLattice lat = fwd.log_probs;
    if (!it.tokens.empty() && it.tokens.back() == eos)
      ApplyEndpointPenaltyInPlace(lat, std::min(t_eos, lat.frames()), penalty);
    rnnt.push_back(RnntGrad(lat, it.tokens));
    it.seq_log_prob = -rnnt.back().loss;
    if (use_las) {
      las.push_back(LasForwardPass(*model.las, *model.las_cfg, encoder.states(),
                                   RescoringTokens(std::span<const int>(it.tokens), eos)));
      it.seq_log_prob += las.back().log_prob;
    }
    fwds.push_back(std::move(fwd));
  }
  diag.mwer_loss = MwerLoss(items);
  const VectorXd w = MwerGrad(items);
  {
    const VectorXd p = Posteriors(items);
    for (std::size_t i = 0; i < items.size(); ++i)
      diag.expected_errors += p(i) * items[i].word_errors;
  }

  const bool want_rnnt = UpdatesRnnt(cfg.scope) && rnnt_grads != nullptr;
  const bool want_las = use_las && las_grads != nullptr;
  MatrixXd d_enc;
  if (want_rnnt) {
    d_enc = MatrixXd::Zero(encoder.states().rows(), encoder.frames());
    for (std::size_t i = 0; i < items.size(); ++i) {
      // ds_i = -dloss_i.
      LogitLattice g = rnnt[i].grad;
      g.values() *= -w(i);
      d_enc += BackwardLattice(params, mcfg, fwds[i], g, *rnnt_grads, false);
    }
  }
  // The rescorer reads the first-pass encoder outputs, so with scope `both`
  // its scores also backpropagate into the first-pass encoder.
  auto las_backward = [&](const LasForward &fwd, double weight) {
    ParamSet scratch;
    ParamSet *target = las_grads;
    if (target == nullptr) {
      scratch = model.las->ZerosLike();
      target = &scratch;
    }
    const MatrixXd d = LasBackward(*model.las, *model.las_cfg, fwd, weight, *target);
    if (want_rnnt) d_enc += d;
  };
  if (use_las && (want_las || want_rnnt))
    for (std::size_t i = 0; i < items.size(); ++i) las_backward(las[i], w(i));

  if (cfg.ce_weight > 0) {
    // Reference-sequence cross-entropy of every model inside the scope.
    if (UpdatesRnnt(cfg.scope)) {
      LatticeForward fwd = ForwardLattice(params, mcfg, encoder, utt.labels);
      LogitLattice lat = fwd.log_probs;
      if (utt.labels.back() == eos)
        ApplyEndpointPenaltyInPlace(lat, std::min(t_eos, lat.frames()), penalty);
      auto ce = RnntGrad(lat, utt.labels);
      diag.ce_loss += ce.loss;
      if (want_rnnt) {
        ce.grad.values() *= cfg.ce_weight;
        d_enc += BackwardLattice(params, mcfg, fwd, ce.grad, *rnnt_grads, false);
      }
    }
    if (use_las) {
      const LasForward ref_fwd = LasForwardPass(
          *model.las, *model.las_cfg, encoder.states(), utt.labels);
      diag.ce_loss += -ref_fwd.log_prob;
      if (want_las || want_rnnt) las_backward(ref_fwd, -cfg.ce_weight);
    }
  }
  if (want_rnnt) BackwardEncoder(params, mcfg, encoder, d_enc, *rnnt_grads);
  return diag;
}

std::vector<NBestItem> MwerCandidates(const MwerModel &model,
                                      const Utterance &utt,
                                      const DecodeConfig &dcfg, int *dropped) {
  const ModelConfig &mcfg = *model.model;
  const int eos = mcfg.vocab().eos();
  const int frames = NumModelFrames(static_cast<int>(utt.features.rows()),
                                    mcfg.frame_stride);
  const DecodeResult dec = BeamSearch(*model.rnnt, mcfg, utt.features, dcfg,
                                      model.endpointer);
  std::vector<int> ref = utt.labels;
  // For an endpointer the label space always ends in EOS; an open hypothesis
  // scored without it would be the probability of never endpointing, which
  // MWER would learn to favour.
  const bool complete = !ref.empty() && ref.back() == eos;
  if (complete) ref.pop_back();
  std::vector<NBestItem> items;
  int skipped = 0;
  for (const Hypothesis &hyp : dec.nbest) {
    NBestItem it;
    it.tokens = complete ? RescoringTokens(hyp, eos) : hyp.tokens;
    if (static_cast<int>(it.tokens.size()) > frames) {
      ++skipped;
      continue;
    }
    std::vector<int> h = hyp.tokens;
    if (!h.empty() && h.back() == eos) h.pop_back();
    it.word_errors = EditDistance(ref, h).total();
    items.push_back(std::move(it));
  }
  if (dropped != nullptr) *dropped = skipped;
  return DeduplicateNBest(items);
}

MwerDiagnostics MwerGradient(const MwerModel &model, const Utterance &utt,
                             const DecodeConfig &dcfg, const PenaltyConfig &penalty,
                             const MwerConfig &cfg, ParamSet *rnnt_grads,
                             ParamSet *las_grads) {
  int dropped = 0;
  std::vector<NBestItem> items = MwerCandidates(model, utt, dcfg, &dropped);
  MwerDiagnostics diag;
  if (items.size() < 2) {
    diag.skipped = true;
    diag.nbest_size = static_cast<int>(items.size());
  } else {
    diag = MwerObjective(model, utt, items, penalty, cfg, rnnt_grads, las_grads);
  }
  diag.dropped = dropped;
  return diag;
}

MwerDiagnostics MwerTrainStep(const MwerModel &model, const Utterance &utt,
                              const DecodeConfig &dcfg,
                              const PenaltyConfig &penalty, const MwerConfig &cfg) {
  const bool update_rnnt = UpdatesRnnt(cfg.scope);
  const bool update_las = cfg.scope != UpdateScope::kRnnt;
  ParamSet rnnt_grads, las_grads;
  if (update_rnnt) rnnt_grads = model.rnnt->ZerosLike();
  if (update_las) las_grads = model.las->ZerosLike();
  MwerDiagnostics diag =
      MwerGradient(model, utt, dcfg, penalty, cfg,
                   update_rnnt ? &rnnt_grads : nullptr,
                   update_las ? &las_grads : nullptr);
  if (diag.skipped) return diag;
  double sq = 0;
  if (update_rnnt) sq += rnnt_grads.SquaredNorm();
  if (update_las) sq += las_grads.SquaredNorm();
  diag.grad_norm = std::sqrt(sq);
  // One clip factor across both sets so `both` behaves like a single vector.
  const double scale = cfg.clip_norm > 0 && diag.grad_norm > cfg.clip_norm
                           ? cfg.clip_norm / diag.grad_norm
                           : 1.0;
  if (update_rnnt) SgdStep(*model.rnnt, rnnt_grads, cfg.learning_rate * scale, 0);
  if (update_las) SgdStep(*model.las, las_grads, cfg.learning_rate * scale, 0);
  return diag;
}

}  // namespace rnntep
