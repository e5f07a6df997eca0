// rnntep/rescorer.h
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

// Second-pass attention rescorer. It reads the full sequence of first-pass
// encoder outputs, runs its own recurrent encoder over them, and scores a
// token sequence with a recurrent decoder that attends over every frame.
//
//   h_t  = RNN(e_1..e_t)                      (las.enc)
//   s_u  = RNN(y_0..y_{u-1})                  (las.dec, y_0 = start)
//   a_u  = softmax_t((Wq s_u) . (Wk h_t) / sqrt(A))   per head
//   c_u  = sum_t a_{u,t} h_t                  (heads concatenated)
//   o_u  = tanh(Ws s_u + Wc c_u + b)
//   log P(y_u | y_<u, e) = log_softmax(Wo o_u + bo)[y_u]

#ifndef RNNTEP_RESCORER_H_
#define RNNTEP_RESCORER_H_

#include <cstdint>
#include <span>
#include <vector>

#include "rnntep/decoder.h"
#include "rnntep/params.h"

namespace rnntep {

struct LasConfig {
  int input_dim = 24;  // first-pass encoder units
  int encoder_layers = 1;
  int encoder_units = 24;
  int decoder_units = 24;
  int attention_dim = 16;  // per head
  int heads = 1;
  int output_units = 24;
  int vocab_size = 8;  // V including EOS; no blank
  std::uint64_t seed = 11;
};

void ValidateLasConfig(const LasConfig &cfg);
ParamSet InitLasParams(const LasConfig &cfg);

struct RescoreConfig {
  double lambda_coverage = 0.01;
  double tau_coverage = 0.5;
  bool include_rnnt_eos_score = true;
  double global_eos_offset = 0.0;  // used only when the flag is off
};

void ValidateRescoreConfig(const RescoreConfig &cfg);

struct LasForward {
  MatrixXd enc_inputs;
  RnnCache encoder;           // top: H x T
  MatrixXd dec_inputs;        // one-hot (V+1) x U
  RnnCache decoder;           // top: S x U
  MatrixXd queries;           // heads*A x U
  MatrixXd keys;              // heads*A x T
  std::vector<MatrixXd> attention;  // per head, U x T, rows sum to 1
  MatrixXd context;           // heads*H x U
  MatrixXd output_hidden;     // O x U
  MatrixXd log_probs;         // V x U
  std::vector<int> tokens;
  double log_prob = 0;        // sum_u log P(y_u | ...)

  // Head-averaged attention, U x T.
  MatrixXd MeanAttention() const;
};

LasForward LasForwardPass(const ParamSet &params, const LasConfig &cfg,
                          const MatrixXd &encoder_outputs,
                          std::span<const int> tokens);

// Accumulates weight * d(log_prob)/d(params) into grads and returns
// weight * d(log_prob)/d(encoder_outputs).
MatrixXd LasBackward(const ParamSet &params, const LasConfig &cfg,
                 const LasForward &fwd, double weight, ParamSet &grads);

// Teacher-forced log-probability plus lambda * #{t : sum_u a_{u,t} > tau}.
double LasScore(const ParamSet &params, const LasConfig &cfg,
                const MatrixXd &encoder_outputs, std::span<const int> tokens,
                const RescoreConfig &rcfg);

int CoverageCount(const LasForward &fwd, double tau);

// -log P(tokens); gradients accumulated when grads is non-null.
double LasCrossEntropy(const ParamSet &params, const LasConfig &cfg,
                       const MatrixXd &encoder_outputs,
                       std::span<const int> tokens, ParamSet *grads);

// Tokens scored by the rescorer: the hypothesis with EOS appended when the
// first pass closed it without one.
std::vector<int> RescoringTokens(std::span<const int> tokens, int eos);
inline std::vector<int> RescoringTokens(const Hypothesis &hyp, int eos) {
  return RescoringTokens(hyp.tokens, eos);
}

struct RescoredHypothesis {
  Hypothesis hyp;
  double las_score = 0;
  double combined_score = 0;
};

// Combined score = las_score + (flag ? hypothesis' alpha-scaled EOS term
// : global offset for EOS-terminated hypotheses). Stable sort, best first.
std::vector<RescoredHypothesis> RescoreNBest(const ParamSet &las_params,
                                             const LasConfig &cfg,
                                             const MatrixXd &encoder_outputs,
                                             const std::vector<Hypothesis> &nbest,
                                             const RescoreConfig &rcfg);

}  // namespace rnntep

#endif  // RNNTEP_RESCORER_H_
