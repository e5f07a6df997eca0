// rnntep/model.cc
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

#include "rnntep/model.h"

#include <cmath>

namespace rnntep {

namespace {

std::string LayerName(const std::string &prefix, int layer, const char *what) {
  return prefix + "." + std::to_string(layer) + "." + what;
}

}  // namespace

void ValidateModelConfig(const ModelConfig &cfg) {
  auto positive = [](int v, const char *field) {
    if (v < 1)
      Fail(ErrorKind::kConfig, "model", std::string(field) + " must be >= 1");
  };
  positive(cfg.input_dim, "input_dim");
  positive(cfg.encoder_layers, "encoder_layers");
  positive(cfg.encoder_units, "encoder_units");
  positive(cfg.prediction_layers, "prediction_layers");
  positive(cfg.prediction_units, "prediction_units");
  positive(cfg.joint_units, "joint_units");
  positive(cfg.frame_stride, "frame_stride");
  if (cfg.vocab_size < 2)
    Fail(ErrorKind::kConfig, "model", "vocab_size must be >= 2");
}

void AddRnnParams(ParamSet &params, const std::string &prefix, int layers,
                  int input_dim, int units) {
  for (int l = 0; l < layers; ++l) {
    params.Add(LayerName(prefix, l, "W"), units, l == 0 ? input_dim : units);
    params.Add(LayerName(prefix, l, "U"), units, units);
    params.Add(LayerName(prefix, l, "b"), units, 1);
  }
}

ParamSet InitModelParams(const ModelConfig &cfg) {
  ValidateModelConfig(cfg);
  const Vocabulary vocab = cfg.vocab();
  ParamSet params;
  AddRnnParams(params, "enc", cfg.encoder_layers,
               cfg.input_dim * cfg.frame_stride, cfg.encoder_units);
  // Prediction input is one-hot over V tokens plus the start symbol (index V).
  AddRnnParams(params, "pred", cfg.prediction_layers, vocab.num_symbols(),
               cfg.prediction_units);
  params.Add("joint.We", cfg.joint_units, cfg.encoder_units);
  params.Add("joint.Wp", cfg.joint_units, cfg.prediction_units);
  params.Add("joint.b", cfg.joint_units, 1);
  params.Add("joint.Wo", vocab.num_symbols(), cfg.joint_units);
  params.Add("joint.bo", vocab.num_symbols(), 1);
  params.FillUniform(-0.1, 0.1, cfg.seed);
  return params;
}

RnnCache RnnForward(const ParamSet &params, const std::string &prefix,
                    int layers, const MatrixXd &inputs) {
  RnnCache cache;
  const MatrixXd *x = &inputs;
  for (int l = 0; l < layers; ++l) {
    const MatrixXd &W = params[LayerName(prefix, l, "W")];
    const MatrixXd &U = params[LayerName(prefix, l, "U")];
    const MatrixXd &b = params[LayerName(prefix, l, "b")];
    if (W.cols() != x->rows())
      Fail(ErrorKind::kShape, "model", prefix + ": input dimension mismatch");
    MatrixXd h = (W * *x).colwise() + b.col(0);
    for (Eigen::Index t = 0; t < h.cols(); ++t) {
      if (t > 0) h.col(t) += U * h.col(t - 1);
      h.col(t) = h.col(t).array().tanh();
    }
    cache.outputs.push_back(std::move(h));
    x = &cache.outputs.back();
  }
  return cache;
}

MatrixXd RnnBackward(const ParamSet &params, const std::string &prefix,
                     int layers, const MatrixXd &inputs, const RnnCache &cache,
                     const MatrixXd &d_top, ParamSet &grads) {
  MatrixXd d_out = d_top;
  for (int l = layers - 1; l >= 0; --l) {
    const MatrixXd &W = params[LayerName(prefix, l, "W")];
    const MatrixXd &U = params[LayerName(prefix, l, "U")];
    const MatrixXd &h = cache.outputs[l];
    const MatrixXd &x = l == 0 ? inputs : cache.outputs[l - 1];
    const Eigen::Index steps = h.cols();

    MatrixXd delta(h.rows(), steps);
    VectorXd carry = VectorXd::Zero(h.rows());
    for (Eigen::Index t = steps - 1; t >= 0; --t) {
      VectorXd d = d_out.col(t) + carry;
      delta.col(t) = d.array() * (1.0 - h.col(t).array().square());
      carry = U.transpose() * delta.col(t);
    }
    grads[LayerName(prefix, l, "W")] += delta * x.transpose();
    if (steps > 1)
      grads[LayerName(prefix, l, "U")] +=
          delta.rightCols(steps - 1) * h.leftCols(steps - 1).transpose();
    grads[LayerName(prefix, l, "b")] += delta.rowwise().sum();
    d_out = W.transpose() * delta;
  }
  return d_out;
}

RnnState RnnZeroState(const ParamSet &params, const std::string &prefix,
                      int layers) {
  RnnState state;
  for (int l = 0; l < layers; ++l)
    state.push_back(VectorXd::Zero(params[LayerName(prefix, l, "U")].rows()));
  return state;
}

RnnState RnnStep(const ParamSet &params, const std::string &prefix, int layers,
                 const RnnState &state, const VectorXd &input) {
  RnnState next(layers);
  const VectorXd *x = &input;
  for (int l = 0; l < layers; ++l) {
    const MatrixXd &W = params[LayerName(prefix, l, "W")];
    const MatrixXd &U = params[LayerName(prefix, l, "U")];
    const MatrixXd &b = params[LayerName(prefix, l, "b")];
    next[l] = (W * *x + U * state[l] + b.col(0)).array().tanh();
    x = &next[l];
  }
  return next;
}

MatrixXd OneHotColumns(std::span<const int> ids, int num_classes) {
  MatrixXd out = MatrixXd::Zero(num_classes, static_cast<Eigen::Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (ids[i] < 0 || ids[i] >= num_classes)
      Fail(ErrorKind::kUsage, "model", "token id out of range");
    out(ids[i], static_cast<Eigen::Index>(i)) = 1.0;
  }
  return out;
}

int NumModelFrames(int input_frames, int stride) {
  return (input_frames + stride - 1) / stride;
}

int ModelFrameOf(int input_frame, int stride) { return input_frame / stride; }

int LastInputFrameOf(int model_frame, int stride, int input_frames) {
  return std::min(input_frames - 1, (model_frame + 1) * stride - 1);
}

EncoderStates Encode(const ParamSet &params, const ModelConfig &cfg,
                     const FrameMatrix &features) {
  if (features.cols() != cfg.input_dim)
    Fail(ErrorKind::kShape, "model",
         "feature dimension " + std::to_string(features.cols()) +
             " != input_dim " + std::to_string(cfg.input_dim));
  if (features.rows() < 1)
    Fail(ErrorKind::kUsage, "model", "empty feature sequence");
  const int s = cfg.frame_stride;
  const int frames = static_cast<int>(features.rows());
  EncoderStates enc;
  if (s == 1) {
    enc.inputs = features.transpose();
  } else {
    // Time reduction by stacking s consecutive frames (zero padded).
    enc.inputs = MatrixXd::Zero(cfg.input_dim * s, NumModelFrames(frames, s));
    for (int t = 0; t < frames; ++t)
      enc.inputs.block(cfg.input_dim * (t % s), t / s, cfg.input_dim, 1) =
          features.row(t).transpose();
  }
  enc.cache = RnnForward(params, "enc", cfg.encoder_layers, enc.inputs);
  return enc;
}

PredictionStates PredictStates(const ParamSet &params, const ModelConfig &cfg,
                               std::span<const int> labels) {
  const Vocabulary vocab = cfg.vocab();
  std::vector<int> ids;
  ids.reserve(labels.size() + 1);
  ids.push_back(vocab.blank());  // start symbol shares the blank index
  for (int y : labels) {
    if (y < 0 || y >= vocab.size)
      Fail(ErrorKind::kUsage, "model", "label id out of range");
    ids.push_back(y);
  }
  PredictionStates pred;
  pred.inputs = OneHotColumns(ids, vocab.num_symbols());
  pred.cache = RnnForward(params, "pred", cfg.prediction_layers, pred.inputs);
  return pred;
}

VectorXd JointLogits(const ParamSet &params, const VectorXd &encoder_state,
                     const VectorXd &prediction_state) {
  const MatrixXd &We = params["joint.We"];
  const MatrixXd &Wp = params["joint.Wp"];
  if (encoder_state.size() != We.cols() || prediction_state.size() != Wp.cols())
    Fail(ErrorKind::kShape, "model", "joint input dimension mismatch");
  const VectorXd z =
      (We * encoder_state + Wp * prediction_state + params["joint.b"].col(0))
          .array()
          .tanh();
  return params["joint.Wo"] * z + params["joint.bo"].col(0);
}

LatticeForward ForwardLattice(const ParamSet &params, const ModelConfig &cfg,
                              const EncoderStates &encoder,
                              std::span<const int> labels) {
  LatticeForward fwd;
  fwd.encoder = encoder;
  fwd.prediction = PredictStates(params, cfg, labels);
  const int T = encoder.frames();
  const int U = static_cast<int>(labels.size());
  const int symbols = cfg.vocab().num_symbols();

  fwd.enc_proj = (params["joint.We"] * encoder.states()).colwise() +
                 params["joint.b"].col(0);
  fwd.pred_proj = params["joint.Wp"] * fwd.prediction.states();
  fwd.log_probs = LogitLattice(T, U, symbols);
  const MatrixXd &Wo = params["joint.Wo"];
  const MatrixXd &bo = params["joint.bo"];
  fwd.hidden.resize(U + 1);
  for (int u = 0; u <= U; ++u) {
    fwd.hidden[u] =
        (fwd.enc_proj.colwise() + fwd.pred_proj.col(u)).array().tanh();
    const MatrixXd lp =
        LogSoftmaxColumns(MatrixXd((Wo * fwd.hidden[u]).colwise() + bo.col(0)));
    for (int t = 0; t < T; ++t) fwd.log_probs.node(t, u) = lp.col(t);
  }
  return fwd;
}

LatticeForward ForwardLattice(const ParamSet &params, const ModelConfig &cfg,
                              const FrameMatrix &features,
                              std::span<const int> labels) {
  return ForwardLattice(params, cfg, Encode(params, cfg, features), labels);
}

LogitLattice BuildLattice(const ParamSet &params, const ModelConfig &cfg,
                          const Utterance &utt) {
  return ForwardLattice(params, cfg, utt.features, utt.labels).log_probs;
}

MatrixXd BackwardLattice(const ParamSet &params, const ModelConfig &cfg,
                         const LatticeForward &fwd, const LogitLattice &grad,
                         ParamSet &grads, bool backprop_encoder) {
  const int T = fwd.log_probs.frames();
  const int U = fwd.log_probs.labels();
  const int symbols = fwd.log_probs.symbols();
  const MatrixXd &Wo = params["joint.Wo"];

  MatrixXd d_enc_proj = MatrixXd::Zero(fwd.enc_proj.rows(), T);
  MatrixXd d_pred_proj = MatrixXd::Zero(fwd.pred_proj.rows(), U + 1);
  MatrixXd &dWo = grads["joint.Wo"];
  MatrixXd &dbo = grads["joint.bo"];
  MatrixXd g(symbols, T), lp(symbols, T);
  for (int u = 0; u <= U; ++u) {
    for (int t = 0; t < T; ++t) {
      g.col(t) = grad.node(t, u);
      lp.col(t) = fwd.log_probs.node(t, u);
    }
    const MatrixXd d_logits = LogSoftmaxColumnsBackward(g, lp);
    const MatrixXd &z = fwd.hidden[u];
    dWo += d_logits * z.transpose();
    dbo += d_logits.rowwise().sum();
    const MatrixXd dz =
        ((Wo.transpose() * d_logits).array() * (1.0 - z.array().square()))
            .matrix();
    d_enc_proj += dz;
    d_pred_proj.col(u) += dz.rowwise().sum();
  }

  grads["joint.b"] += d_enc_proj.rowwise().sum();
  grads["joint.We"] += d_enc_proj * fwd.encoder.states().transpose();
  grads["joint.Wp"] += d_pred_proj * fwd.prediction.states().transpose();
  const MatrixXd d_pred = params["joint.Wp"].transpose() * d_pred_proj;
  RnnBackward(params, "pred", cfg.prediction_layers, fwd.prediction.inputs,
              fwd.prediction.cache, d_pred, grads);

  MatrixXd d_enc = params["joint.We"].transpose() * d_enc_proj;
  if (backprop_encoder) BackwardEncoder(params, cfg, fwd.encoder, d_enc, grads);
  return d_enc;
}

void BackwardEncoder(const ParamSet &params, const ModelConfig &cfg,
                     const EncoderStates &encoder, const MatrixXd &d_states,
                     ParamSet &grads) {
  RnnBackward(params, "enc", cfg.encoder_layers, encoder.inputs, encoder.cache,
              d_states, grads);
}

double TransducerLoss(const ParamSet &params, const ModelConfig &cfg,
                      const Utterance &utt, const PenaltyConfig *penalty,
                      ParamSet *grads) {
  LatticeForward fwd = ForwardLattice(params, cfg, utt.features, utt.labels);
  LogitLattice lattice = fwd.log_probs;
  const bool ends_with_eos =
      !utt.labels.empty() && utt.labels.back() == cfg.vocab().eos();
  if (penalty != nullptr && ends_with_eos) {
    const int t_eos = std::min(ModelFrameOf(utt.t_eos, cfg.frame_stride),
                               lattice.frames());
    ApplyEndpointPenaltyInPlace(lattice, t_eos, *penalty);
  }
  if (grads == nullptr) return RnntLoss(lattice, utt.labels);
  // The penalty is additive, so d(loss)/d(raw entry) == d(loss)/d(penalised).
  const auto result = RnntGrad(lattice, utt.labels);
  BackwardLattice(params, cfg, fwd, result.grad, *grads);
  return result.loss;
}

double SgdStep(ParamSet &params, const ParamSet &grads, double learning_rate,
               double clip_norm) {
  if (!(learning_rate > 0))
    Fail(ErrorKind::kUsage, "model", "learning rate must be > 0");
  for (std::size_t i = 0; i < grads.size(); ++i)
    if (!grads.array(i).allFinite())
      Fail(ErrorKind::kTraining, "model",
           "non-finite gradient in " + grads.name(i));
  const double norm = std::sqrt(grads.SquaredNorm());
  double scale = 1.0;
  if (clip_norm > 0 && norm > clip_norm) scale = clip_norm / norm;
  params.AddScaled(grads, -learning_rate * scale);
  return norm;
}

}  // namespace rnntep
