// rnntep/mwer.h
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

// Expected-error sequence training over a renormalised N-best list.
//
//   p_i  = exp(s_i) / sum_j exp(s_j)
//   loss = sum_i p_i (W_i - mean(W))
//   dloss/ds_i = p_i (W_i - sum_j p_j W_j)

#ifndef RNNTEP_MWER_H_
#define RNNTEP_MWER_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnntep/decoder.h"
#include "rnntep/rescorer.h"

namespace rnntep {

struct NBestItem {
  std::vector<int> tokens;
  int word_errors = 0;
  double seq_log_prob = 0;
};

double MwerLoss(std::span<const NBestItem> items);
VectorXd MwerGrad(std::span<const NBestItem> items);

// Keeps the first occurrence of every token sequence.
std::vector<NBestItem> DeduplicateNBest(std::span<const NBestItem> items);

enum class UpdateScope { kRnnt, kLas, kBoth };
std::string_view UpdateScopeName(UpdateScope scope);
UpdateScope ParseUpdateScope(std::string_view name);

inline bool UpdatesRnnt(UpdateScope s) { return s != UpdateScope::kLas; }
inline bool UsesLas(UpdateScope s) { return s != UpdateScope::kRnnt; }

struct MwerConfig {
  bool include_early_penalty = false;
  bool include_late_penalty = true;
  UpdateScope scope = UpdateScope::kRnnt;
  double learning_rate = 0.005;
  double clip_norm = 5.0;
  // Weight of the reference-sequence cross-entropy added to the MWER loss.
  double ce_weight = 0.0;
};

void ValidateMwerConfig(const MwerConfig &cfg);

// The penalty actually applied to hypothesis lattices in this stage.
PenaltyConfig MwerPenalty(const PenaltyConfig &base, const MwerConfig &cfg);

struct MwerModel {
  ParamSet *rnnt = nullptr;
  const ModelConfig *model = nullptr;
  ParamSet *las = nullptr;  // required when the scope uses LAS
  const LasConfig *las_cfg = nullptr;
  const PrototypeTable *endpointer = nullptr;
};

struct MwerDiagnostics {
  bool skipped = false;
  int nbest_size = 0;  // after deduplication and shape filtering
  int dropped = 0;     // hypotheses longer than the frame count
  double mwer_loss = 0;
  double ce_loss = 0;
  double expected_errors = 0;
  double grad_norm = 0;
};

// Penalised lattice scored for one hypothesis (token sequence as labels).
LogitLattice MwerHypothesisLattice(const ParamSet &params, const ModelConfig &cfg,
                                   const EncoderStates &encoder,
                                   std::span<const int> tokens, int t_eos,
                                   const PenaltyConfig &penalty);

// Distinct N-best from decoding with the current parameters, with token
// errors against the reference. When the reference ends with EOS, open
// hypotheses are completed with EOS. Hypotheses with more tokens than model
// frames cannot be scored and are counted in *dropped.
std::vector<NBestItem> MwerCandidates(const MwerModel &model,
                                      const Utterance &utt,
                                      const DecodeConfig &dcfg, int *dropped);

// Stage loss (MWER plus ce_weight times the reference cross-entropy) for a
// fixed list of distinct hypotheses; fills in seq_log_prob.
MwerDiagnostics MwerObjective(const MwerModel &model, const Utterance &utt,
                              std::vector<NBestItem> &items,
                              const PenaltyConfig &penalty, const MwerConfig &cfg,
                              ParamSet *rnnt_grads, ParamSet *las_grads);

// Gradients of the stage loss for one utterance, accumulated into the
// non-null grad sets (rnnt_grads for scope rnnt/both, las_grads for las/both).
MwerDiagnostics MwerGradient(const MwerModel &model, const Utterance &utt,
                             const DecodeConfig &dcfg, const PenaltyConfig &penalty,
                             const MwerConfig &cfg, ParamSet *rnnt_grads,
                             ParamSet *las_grads);

// Decode, compute the loss, backpropagate into the selected scope and apply
// one SGD step. Arrays outside the scope are never written.
MwerDiagnostics MwerTrainStep(const MwerModel &model, const Utterance &utt,
                              const DecodeConfig &dcfg,
                              const PenaltyConfig &penalty, const MwerConfig &cfg);

}  // namespace rnntep

#endif  // RNNTEP_MWER_H_
