// rnntep/rescorer.cc
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

#include "rnntep/rescorer.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace rnntep {

namespace {

MatrixXd RowSoftmax(const MatrixXd &scores) {
  MatrixXd out(scores.rows(), scores.cols());
  for (Eigen::Index r = 0; r < scores.rows(); ++r) {
    const double max = scores.row(r).maxCoeff();
    out.row(r) = (scores.row(r).array() - max).exp();
    out.row(r) /= out.row(r).sum();
  }
  return out;
}

}  // namespace

void ValidateLasConfig(const LasConfig &cfg) {
  auto positive = [](int v, const char *field) {
    if (v < 1)
      Fail(ErrorKind::kConfig, "rescorer", std::string(field) + " must be >= 1");
  };
  positive(cfg.input_dim, "input_dim");
  positive(cfg.encoder_layers, "encoder_layers");
  positive(cfg.encoder_units, "encoder_units");
  positive(cfg.decoder_units, "decoder_units");
  positive(cfg.attention_dim, "attention_dim");
  positive(cfg.heads, "heads");
  positive(cfg.output_units, "output_units");
  if (cfg.vocab_size < 2)
    Fail(ErrorKind::kConfig, "rescorer", "vocab_size must be >= 2");
}

void ValidateRescoreConfig(const RescoreConfig &cfg) {
  if (!(cfg.lambda_coverage >= 0))
    Fail(ErrorKind::kConfig, "rescorer", "lambda_coverage must be >= 0");
  if (!(cfg.tau_coverage > 0 && cfg.tau_coverage <= 1))
    Fail(ErrorKind::kConfig, "rescorer", "tau_coverage must be in (0, 1]");
}

ParamSet InitLasParams(const LasConfig &cfg) {
  ValidateLasConfig(cfg);
  const int qk = cfg.heads * cfg.attention_dim;
  ParamSet params;
  AddRnnParams(params, "las.enc", cfg.encoder_layers, cfg.input_dim,
               cfg.encoder_units);
  // Decoder input: previous token one-hot over V plus the start symbol (V).
  AddRnnParams(params, "las.dec", 1, cfg.vocab_size + 1, cfg.decoder_units);
  params.Add("las.att.Wq", qk, cfg.decoder_units);
  params.Add("las.att.Wk", qk, cfg.encoder_units);
  params.Add("las.out.Ws", cfg.output_units, cfg.decoder_units);
  params.Add("las.out.Wc", cfg.output_units, cfg.heads * cfg.encoder_units);
  params.Add("las.out.b", cfg.output_units, 1);
  params.Add("las.out.Wo", cfg.vocab_size, cfg.output_units);
  params.Add("las.out.bo", cfg.vocab_size, 1);
  params.FillUniform(-0.1, 0.1, cfg.seed);
  return params;
}

MatrixXd LasForward::MeanAttention() const {
  MatrixXd mean = attention.front();
  for (std::size_t h = 1; h < attention.size(); ++h) mean += attention[h];
  return mean / static_cast<double>(attention.size());
}

LasForward LasForwardPass(const ParamSet &params, const LasConfig &cfg,
                          const MatrixXd &encoder_outputs,
                          std::span<const int> tokens) {
  if (encoder_outputs.rows() != cfg.input_dim)
    Fail(ErrorKind::kShape, "rescorer", "encoder output dimension mismatch");
  if (encoder_outputs.cols() < 1)
    Fail(ErrorKind::kUsage, "rescorer", "empty encoder output sequence");
  if (tokens.empty() || tokens.back() != cfg.vocab_size - 1)
    Fail(ErrorKind::kUsage, "rescorer", "token sequence must end with EOS");
  for (int y : tokens)
    if (y < 0 || y >= cfg.vocab_size)
      Fail(ErrorKind::kUsage, "rescorer", "token id out of range");

  const int U = static_cast<int>(tokens.size());
  const int A = cfg.attention_dim;
  const int H = cfg.encoder_units;
  LasForward fwd;
  fwd.tokens.assign(tokens.begin(), tokens.end());
  fwd.enc_inputs = encoder_outputs;
  fwd.encoder = RnnForward(params, "las.enc", cfg.encoder_layers, fwd.enc_inputs);
  const MatrixXd &hh = fwd.encoder.top();

  std::vector<int> prev(U);
  prev[0] = cfg.vocab_size;  // start symbol
  for (int u = 1; u < U; ++u) prev[u] = tokens[u - 1];
  fwd.dec_inputs = OneHotColumns(prev, cfg.vocab_size + 1);
  fwd.decoder = RnnForward(params, "las.dec", 1, fwd.dec_inputs);
  const MatrixXd &s = fwd.decoder.top();

  fwd.queries = params["las.att.Wq"] * s;
  fwd.keys = params["las.att.Wk"] * hh;
  const double scale = 1.0 / std::sqrt(static_cast<double>(A));
  fwd.context.resize(cfg.heads * H, U);
  for (int h = 0; h < cfg.heads; ++h) {
    const MatrixXd scores = scale * fwd.queries.middleRows(h * A, A).transpose() *
                            fwd.keys.middleRows(h * A, A);
    fwd.attention.push_back(RowSoftmax(scores));
    fwd.context.middleRows(h * H, H) = hh * fwd.attention.back().transpose();
  }

  fwd.output_hidden = ((params["las.out.Ws"] * s + params["las.out.Wc"] * fwd.context)
                           .colwise() +
                       params["las.out.b"].col(0))
                          .array()
                          .tanh();
  fwd.log_probs = LogSoftmaxColumns(MatrixXd(
      (params["las.out.Wo"] * fwd.output_hidden).colwise() +
      params["las.out.bo"].col(0)));
  fwd.log_prob = 0;
  for (int u = 0; u < U; ++u) fwd.log_prob += fwd.log_probs(tokens[u], u);
  return fwd;
}

MatrixXd LasBackward(const ParamSet &params, const LasConfig &cfg,
                 const LasForward &fwd, double weight, ParamSet &grads) {
  const int U = static_cast<int>(fwd.tokens.size());
  const int A = cfg.attention_dim;
  const int H = cfg.encoder_units;
  const MatrixXd &hh = fwd.encoder.top();
  const MatrixXd &s = fwd.decoder.top();

  // d(weight * sum_u lp[y_u]) / d(logits) = weight * (onehot - softmax).
  MatrixXd d_logits = -weight * fwd.log_probs.array().exp().matrix();
  for (int u = 0; u < U; ++u) d_logits(fwd.tokens[u], u) += weight;

  const MatrixXd &o = fwd.output_hidden;
  grads["las.out.Wo"] += d_logits * o.transpose();
  grads["las.out.bo"] += d_logits.rowwise().sum();
  const MatrixXd d_o_pre =
      ((params["las.out.Wo"].transpose() * d_logits).array() *
       (1.0 - o.array().square()))
          .matrix();
  grads["las.out.Ws"] += d_o_pre * s.transpose();
  grads["las.out.Wc"] += d_o_pre * fwd.context.transpose();
  grads["las.out.b"] += d_o_pre.rowwise().sum();
  MatrixXd d_s = params["las.out.Ws"].transpose() * d_o_pre;
  const MatrixXd d_ctx = params["las.out.Wc"].transpose() * d_o_pre;

  MatrixXd d_hh = MatrixXd::Zero(hh.rows(), hh.cols());
  MatrixXd d_queries = MatrixXd::Zero(fwd.queries.rows(), U);
  MatrixXd d_keys = MatrixXd::Zero(fwd.keys.rows(), hh.cols());
  const double scale = 1.0 / std::sqrt(static_cast<double>(A));
  for (int h = 0; h < cfg.heads; ++h) {
    const MatrixXd &att = fwd.attention[h];
    const auto d_ctx_h = d_ctx.middleRows(h * H, H);  // H x U
    d_hh += d_ctx_h * att;
    const MatrixXd d_att = d_ctx_h.transpose() * hh;  // U x T
    const VectorXd row_dot = (d_att.array() * att.array()).rowwise().sum();
    const MatrixXd d_scores =
        scale * (att.array() * (d_att.colwise() - row_dot).array()).matrix();
    d_queries.middleRows(h * A, A) +=
        fwd.keys.middleRows(h * A, A) * d_scores.transpose();
    d_keys.middleRows(h * A, A) += fwd.queries.middleRows(h * A, A) * d_scores;
  }
  grads["las.att.Wq"] += d_queries * s.transpose();
  d_s += params["las.att.Wq"].transpose() * d_queries;
  grads["las.att.Wk"] += d_keys * hh.transpose();
  d_hh += params["las.att.Wk"].transpose() * d_keys;

  RnnBackward(params, "las.dec", 1, fwd.dec_inputs, fwd.decoder, d_s, grads);
  return RnnBackward(params, "las.enc", cfg.encoder_layers, fwd.enc_inputs,
                     fwd.encoder, d_hh, grads);
}

int CoverageCount(const LasForward &fwd, double tau) {
  const VectorXd coverage = fwd.MeanAttention().colwise().sum().transpose();
  return static_cast<int>((coverage.array() > tau).count());
}

double LasScore(const ParamSet &params, const LasConfig &cfg,
                const MatrixXd &encoder_outputs, std::span<const int> tokens,
                const RescoreConfig &rcfg) {
  const LasForward fwd = LasForwardPass(params, cfg, encoder_outputs, tokens);
  double score = fwd.log_prob;
  if (rcfg.lambda_coverage != 0)
    score += rcfg.lambda_coverage * CoverageCount(fwd, rcfg.tau_coverage);
  return score;
}

double LasCrossEntropy(const ParamSet &params, const LasConfig &cfg,
                       const MatrixXd &encoder_outputs,
                       std::span<const int> tokens, ParamSet *grads) {
  const LasForward fwd = LasForwardPass(params, cfg, encoder_outputs, tokens);
  if (grads != nullptr) LasBackward(params, cfg, fwd, -1.0, *grads);
  return -fwd.log_prob;
}

std::vector<int> RescoringTokens(std::span<const int> tokens, int eos) {
  std::vector<int> out(tokens.begin(), tokens.end());
  if (out.empty() || out.back() != eos) out.push_back(eos);
  return out;
}

std::vector<RescoredHypothesis> RescoreNBest(const ParamSet &las_params,
                                             const LasConfig &cfg,
                                             const MatrixXd &encoder_outputs,
                                             const std::vector<Hypothesis> &nbest,
                                             const RescoreConfig &rcfg) {
  ValidateRescoreConfig(rcfg);
  if (nbest.empty())
    Fail(ErrorKind::kUsage, "rescorer", "empty N-best list");
  const int eos = cfg.vocab_size - 1;
  std::vector<RescoredHypothesis> out;
  out.reserve(nbest.size());
  for (const Hypothesis &hyp : nbest) {
    RescoredHypothesis r;
    r.hyp = hyp;
    r.las_score = LasScore(las_params, cfg, encoder_outputs,
                           RescoringTokens(hyp, eos), rcfg);
    double eos_term = 0;
    if (hyp.ends_with_eos(eos))
      eos_term = rcfg.include_rnnt_eos_score ? hyp.eos_score
                                             : rcfg.global_eos_offset;
    r.combined_score = r.las_score + eos_term;
    out.push_back(std::move(r));
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const RescoredHypothesis &a, const RescoredHypothesis &b) {
                     return a.combined_score > b.combined_score;
                   });
  return out;
}

}  // namespace rnntep
