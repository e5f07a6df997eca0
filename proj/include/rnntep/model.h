// rnntep/model.h
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

// Scaled-down transducer: causal tanh-RNN encoder, tanh-RNN prediction
// network over the label history and a one-hidden-layer joint network.
// All gradients are derived by hand; see the *Backward functions.

#ifndef RNNTEP_MODEL_H_
#define RNNTEP_MODEL_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "rnntep/datagen.h"
#include "rnntep/params.h"
#include "rnntep/transducer.h"

namespace rnntep {

struct ModelConfig {
  int input_dim = 8;
  int encoder_layers = 1;
  int encoder_units = 24;
  int prediction_layers = 1;
  int prediction_units = 16;
  int joint_units = 24;
  int vocab_size = 8;  // V, incl. EOS, excl. blank
  int frame_stride = 1;
  std::uint64_t seed = 7;

  Vocabulary vocab() const { return Vocabulary{vocab_size}; }
};

void ValidateModelConfig(const ModelConfig &cfg);

// Arrays under "enc.*", "pred.*" and "joint.*", uniform in [-0.1, 0.1].
ParamSet InitModelParams(const ModelConfig &cfg);

// ---------------------------------------------------------------------------
// Stacked tanh RNN: h_t = tanh(W x_t + U h_{t-1} + b), h_{-1} = 0. Arrays are
// named "<prefix>.<layer>.{W,U,b}". Shared with the rescorer.

void AddRnnParams(ParamSet &params, const std::string &prefix, int layers,
                  int input_dim, int units);

struct RnnCache {
  std::vector<MatrixXd> outputs;  // per layer, units x steps
  const MatrixXd &top() const { return outputs.back(); }
};

RnnCache RnnForward(const ParamSet &params, const std::string &prefix,
                    int layers, const MatrixXd &inputs);

// Accumulates parameter gradients into grads and returns dL/d(inputs).
MatrixXd RnnBackward(const ParamSet &params, const std::string &prefix,
                     int layers, const MatrixXd &inputs, const RnnCache &cache,
                     const MatrixXd &d_top, ParamSet &grads);

using RnnState = std::vector<VectorXd>;  // one hidden vector per layer

RnnState RnnZeroState(const ParamSet &params, const std::string &prefix,
                      int layers);
RnnState RnnStep(const ParamSet &params, const std::string &prefix, int layers,
                 const RnnState &state, const VectorXd &input);

MatrixXd OneHotColumns(std::span<const int> ids, int num_classes);

// ---------------------------------------------------------------------------

// Model frame k consumes input frames [k*stride, (k+1)*stride).
int NumModelFrames(int input_frames, int stride);
int ModelFrameOf(int input_frame, int stride);
int LastInputFrameOf(int model_frame, int stride, int input_frames);

struct EncoderStates {
  MatrixXd inputs;  // (d * stride) x T'
  RnnCache cache;
  const MatrixXd &states() const { return cache.top(); }  // units x T'
  int frames() const { return static_cast<int>(cache.top().cols()); }
};

EncoderStates Encode(const ParamSet &params, const ModelConfig &cfg,
                     const FrameMatrix &features);

struct PredictionStates {
  MatrixXd inputs;  // one-hot (V+1) x (U+1); column 0 is the start symbol
  RnnCache cache;
  const MatrixXd &states() const { return cache.top(); }  // units x (U+1)
};

// p_0 .. p_U for the given label prefix y_1..y_U.
PredictionStates PredictStates(const ParamSet &params, const ModelConfig &cfg,
                               std::span<const int> labels);

VectorXd JointLogits(const ParamSet &params, const VectorXd &encoder_state,
                     const VectorXd &prediction_state);

// Forward pass over the whole lattice, with everything kept for backprop.
struct LatticeForward {
  EncoderStates encoder;
  PredictionStates prediction;
  MatrixXd enc_proj;            // joint_units x T   (We e_t + b)
  MatrixXd pred_proj;           // joint_units x (U+1)
  std::vector<MatrixXd> hidden; // per u: joint_units x T
  LogitLattice log_probs;
};

LatticeForward ForwardLattice(const ParamSet &params, const ModelConfig &cfg,
                              const EncoderStates &encoder,
                              std::span<const int> labels);

LatticeForward ForwardLattice(const ParamSet &params, const ModelConfig &cfg,
                              const FrameMatrix &features,
                              std::span<const int> labels);

LogitLattice BuildLattice(const ParamSet &params, const ModelConfig &cfg,
                          const Utterance &utt);

// Backprop dL/d(lattice log-probs) into the joint, prediction network and
// optionally the encoder (skipped when backprop_encoder is false, which lets
// callers share one encoder backward across several lattices).
// Returns dL/d(encoder states).
MatrixXd BackwardLattice(const ParamSet &params, const ModelConfig &cfg,
                         const LatticeForward &fwd, const LogitLattice &grad,
                         ParamSet &grads, bool backprop_encoder = true);

void BackwardEncoder(const ParamSet &params, const ModelConfig &cfg,
                     const EncoderStates &encoder, const MatrixXd &d_states,
                     ParamSet &grads);

// Transducer negative log-likelihood of utt.labels with the endpoint penalty
// (when given) applied to the lattice, plus gradients accumulated into grads
// (when non-null).
double TransducerLoss(const ParamSet &params, const ModelConfig &cfg,
                      const Utterance &utt, const PenaltyConfig *penalty,
                      ParamSet *grads);

// Global-norm clipping, then params -= lr * grads. Returns the pre-clip norm.
double SgdStep(ParamSet &params, const ParamSet &grads, double learning_rate,
               double clip_norm);

}  // namespace rnntep

#endif  // RNNTEP_MODEL_H_
