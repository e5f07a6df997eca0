// rnntep/gradcheck.cc
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

#include "rnntep/gradcheck.h"

#include <cstdio>
#include <random>

#include "rnntep/model.h"
#include "rnntep/mwer.h"
#include "rnntep/rescorer.h"

namespace rnntep {

namespace {

ModelConfig TinyModel() {
  ModelConfig cfg;
  cfg.input_dim = 3;
  cfg.encoder_layers = 2;
  cfg.encoder_units = 4;
  cfg.prediction_layers = 1;
  cfg.prediction_units = 3;
  cfg.joint_units = 4;
  cfg.vocab_size = 3;
  cfg.frame_stride = 2;
  return cfg;
}

LasConfig TinyLas(const ModelConfig &m) {
  LasConfig cfg;
  cfg.input_dim = m.encoder_units;
  cfg.encoder_layers = 1;
  cfg.encoder_units = 4;
  cfg.decoder_units = 4;
  cfg.attention_dim = 2;
  cfg.heads = 2;
  cfg.output_units = 4;
  cfg.vocab_size = m.vocab_size;
  return cfg;
}

Utterance TinyUtterance(std::mt19937_64 &rng, int frames, int dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Utterance utt;
  utt.id = "gradcheck";
  utt.features.resize(frames, dim);
  for (int t = 0; t < frames; ++t)
    for (int k = 0; k < dim; ++k) utt.features(t, k) = normal(rng);
  utt.labels = {0, 1, 2};
  utt.t_eos = 3;
  return utt;
}

// Larger weights so the tanh units operate away from the linear regime.
void Randomize(ParamSet &params, std::uint64_t seed) {
  params.FillUniform(-0.6, 0.6, seed);
}

GradCheckResult Compare(const std::string &name, VectorXd analytic,
                        const VectorXd &numeric, const GradCheckOptions &opts,
                        double tolerance) {
  if (opts.break_suite == name && analytic.size() > 0) {
    Eigen::Index k = 0;
    analytic.cwiseAbs().maxCoeff(&k);
    analytic(k) = 1.5 * analytic(k) + 0.01;
  }
  GradCheckResult r;
  r.name = name;
  r.num_params = static_cast<int>(analytic.size());
  r.max_rel_error = MaxRelativeError(analytic, numeric);
  r.tolerance = tolerance;
  r.passed = r.max_rel_error < tolerance;
  return r;
}

GradCheckResult CheckLattice(const GradCheckOptions &opts) {
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int T = 4, U = 3, S = 4;
  LogitLattice lat(T, U, S);
  for (Eigen::Index c = 0; c < lat.values().cols(); ++c) {
    VectorXd x(S);
    for (int k = 0; k < S; ++k) x(k) = normal(rng);
    lat.values().col(c) = LogSoftmax(x);
  }
  const std::vector<int> labels{0, 1, 2};
  const auto res = RnntGrad(lat, labels);
  const VectorXd analytic = res.grad.values().reshaped();
  auto fn = [&](const VectorXd &v) {
    LogitLattice l = lat;
    l.values() = v.reshaped(S, lat.values().cols());
    return RnntLoss(l, labels);
  };
  const VectorXd numeric =
      FiniteDifferenceGradient(fn, lat.values().reshaped(), opts.epsilon);
  return Compare("rnnt_lattice", analytic, numeric, opts, opts.tolerance);
}

GradCheckResult CheckPenaltyScale(const GradCheckOptions &opts) {
  std::mt19937_64 rng(opts.seed + 1);
  std::normal_distribution<double> normal(0.0, 1.0);
  const int T = 8, U = 2, S = 4;
  LogitLattice lat(T, U, S);
  for (Eigen::Index c = 0; c < lat.values().cols(); ++c) {
    VectorXd x(S);
    for (int k = 0; k < S; ++k) x(k) = normal(rng);
    lat.values().col(c) = LogSoftmax(x);
  }
  const std::vector<int> labels{0, 2};
  const int t_eos = 2;
  PenaltyConfig cfg{0.2, 0.7, 1};
  auto loss_at = [&](double alpha_late) {
    PenaltyConfig c = cfg;
    c.alpha_late = alpha_late;
    return RnntLoss(ApplyEndpointPenalty(lat, t_eos, c), labels);
  };
  const auto res = RnntGrad(ApplyEndpointPenalty(lat, t_eos, cfg), labels);
  VectorXd analytic(1);
  analytic(0) = LatePenaltyScaleGradient(res, t_eos, cfg.t_buffer);
  VectorXd x0(1);
  x0(0) = cfg.alpha_late;
  const VectorXd numeric = FiniteDifferenceGradient(
      [&](const VectorXd &v) { return loss_at(v(0)); }, x0, opts.epsilon);
  return Compare("penalty_scale", analytic, numeric, opts, opts.tolerance);
}

GradCheckResult CheckRnntCe(const GradCheckOptions &opts) {
  const ModelConfig mcfg = TinyModel();
  ParamSet params = InitModelParams(mcfg);
  Randomize(params, opts.seed + 2);
  std::mt19937_64 rng(opts.seed + 3);
  const Utterance utt = TinyUtterance(rng, 9, mcfg.input_dim);
  const PenaltyConfig penalty{0.3, 0.5, 1};
  ParamSet grads = params.ZerosLike();
  TransducerLoss(params, mcfg, utt, &penalty, &grads);
  auto fn = [&](const VectorXd &v) {
    ParamSet p = params;
    p.Unflatten(v);
    return TransducerLoss(p, mcfg, utt, &penalty, nullptr);
  };
  const VectorXd numeric =
      FiniteDifferenceGradient(fn, params.Flatten(), opts.epsilon);
  return Compare("rnnt_ce", grads.Flatten(), numeric, opts, opts.tolerance);
}

GradCheckResult CheckMwerScores(const GradCheckOptions &opts) {
  std::mt19937_64 rng(opts.seed + 4);
  std::normal_distribution<double> normal(0.0, 2.0);
  std::vector<NBestItem> items(5);
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].tokens = {static_cast<int>(i)};
    items[i].word_errors = static_cast<int>(rng() % 4);
    items[i].seq_log_prob = normal(rng);
  }
  items[0].word_errors = 0;
  items[1].word_errors = 3;
  VectorXd s(items.size());
  for (std::size_t i = 0; i < items.size(); ++i) s(i) = items[i].seq_log_prob;
  auto fn = [&](const VectorXd &v) {
    std::vector<NBestItem> copy = items;
    for (std::size_t i = 0; i < copy.size(); ++i) copy[i].seq_log_prob = v(i);
    return MwerLoss(copy);
  };
  const VectorXd numeric = FiniteDifferenceGradient(fn, s, opts.epsilon);
  return Compare("mwer_scores", MwerGrad(items), numeric, opts,
                 std::min(opts.tolerance, 1e-6));
}

GradCheckResult CheckMwerModel(const GradCheckOptions &opts) {
  const ModelConfig mcfg = TinyModel();
  const LasConfig lcfg = TinyLas(mcfg);
  ParamSet rnnt = InitModelParams(mcfg);
  Randomize(rnnt, opts.seed + 5);
  ParamSet las = InitLasParams(lcfg);
  Randomize(las, opts.seed + 6);
  std::mt19937_64 rng(opts.seed + 7);
  const Utterance utt = TinyUtterance(rng, 9, mcfg.input_dim);
  const PenaltyConfig penalty{0.3, 0.5, 1};
  MwerConfig cfg;
  cfg.scope = UpdateScope::kBoth;
  cfg.include_early_penalty = true;
  cfg.ce_weight = 0.3;
  std::vector<NBestItem> items(3);
  items[0].tokens = {0, 1, 2};
  items[0].word_errors = 0;
  items[1].tokens = {1, 2};
  items[1].word_errors = 1;
  items[2].tokens = {0};
  items[2].word_errors = 1;

  const std::size_t n_rnnt = rnnt.NumScalars();
  auto objective = [&](ParamSet &r, ParamSet &l, ParamSet *rg, ParamSet *lg) {
    MwerModel model{&r, &mcfg, &l, &lcfg, nullptr};
    std::vector<NBestItem> copy = items;
    const auto d = MwerObjective(model, utt, copy, penalty, cfg, rg, lg);
    return d.mwer_loss + cfg.ce_weight * d.ce_loss;
  };
  ParamSet rg = rnnt.ZerosLike(), lg = las.ZerosLike();
  objective(rnnt, las, &rg, &lg);
  VectorXd analytic(n_rnnt + las.NumScalars());
  analytic << rg.Flatten(), lg.Flatten();
  VectorXd x0(analytic.size());
  x0 << rnnt.Flatten(), las.Flatten();
  auto fn = [&](const VectorXd &v) {
    ParamSet r = rnnt, l = las;
    r.Unflatten(v.head(n_rnnt));
    l.Unflatten(v.tail(v.size() - n_rnnt));
    return objective(r, l, nullptr, nullptr);
  };
  const VectorXd numeric = FiniteDifferenceGradient(fn, x0, opts.epsilon);
  return Compare("mwer_model", analytic, numeric, opts, opts.tolerance);
}

GradCheckResult CheckLasCe(const GradCheckOptions &opts) {
  const ModelConfig mcfg = TinyModel();
  const LasConfig lcfg = TinyLas(mcfg);
  ParamSet las = InitLasParams(lcfg);
  Randomize(las, opts.seed + 8);
  std::mt19937_64 rng(opts.seed + 9);
  std::normal_distribution<double> normal(0.0, 0.7);
  MatrixXd enc(lcfg.input_dim, 5);
  for (Eigen::Index i = 0; i < enc.size(); ++i) enc.data()[i] = normal(rng);
  const std::vector<int> tokens{1, 0, 2};
  ParamSet grads = las.ZerosLike();
  LasCrossEntropy(las, lcfg, enc, tokens, &grads);
  auto fn = [&](const VectorXd &v) {
    ParamSet p = las;
    p.Unflatten(v);
    return LasCrossEntropy(p, lcfg, enc, tokens, nullptr);
  };
  const VectorXd numeric = FiniteDifferenceGradient(fn, las.Flatten(), opts.epsilon);
  return Compare("las_ce", grads.Flatten(), numeric, opts, opts.tolerance);
}

}  // namespace

std::vector<std::string> GradCheckSuites() {
  return {"rnnt_lattice", "penalty_scale", "rnnt_ce",
          "mwer_scores",  "mwer_model",    "las_ce"};
}

std::vector<GradCheckResult> RunGradChecks(const GradCheckOptions &opts) {
  if (!opts.break_suite.empty()) {
    bool known = false;
    for (const auto &s : GradCheckSuites()) known |= s == opts.break_suite;
    if (!known)
      Fail(ErrorKind::kUsage, "gradcheck", "unknown suite '" + opts.break_suite + "'");
  }
  return {CheckLattice(opts),    CheckPenaltyScale(opts), CheckRnntCe(opts),
          CheckMwerScores(opts), CheckMwerModel(opts),    CheckLasCe(opts)};
}

std::string FormatGradCheckReport(const std::vector<GradCheckResult> &results) {
  std::string out;
  char buf[160];
  for (const auto &r : results) {
    std::snprintf(buf, sizeof(buf), "%-14s %s params=%-4d max_rel_err=%.3e tol=%.0e\n",
                  r.name.c_str(), r.passed ? "PASS" : "FAIL", r.num_params,
                  r.max_rel_error, r.tolerance);
    out += buf;
  }
  return out;
}

}  // namespace rnntep
