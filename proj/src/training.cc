// rnntep/training.cc
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

#include "rnntep/training.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "rnntep/parallel.h"

namespace rnntep {

namespace {

std::vector<int> ShuffledOrder(int n, std::uint64_t seed, int epoch) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 rng(seed * 0x9E3779B97F4A7C15ULL + static_cast<std::uint64_t>(epoch));
  // Fisher-Yates with an explicit draw so the permutation does not depend on
  // the standard library's shuffle.
  for (int i = n - 1; i > 0; --i) {
    const int j = static_cast<int>(rng() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }
  return order;
}

// Sums per-item gradients (and losses) of one batch in batch order.
template <typename Fn>
double BatchGradient(std::span<const int> batch, int jobs, const ParamSet &like,
                     ParamSet &total, Fn &&fn) {
  const int n = static_cast<int>(batch.size());
  std::vector<ParamSet> grads(n);
  std::vector<double> losses(n, 0.0);
  ParallelFor(n, jobs, [&](int i) {
    grads[i] = like.ZerosLike();
    losses[i] = fn(batch[i], grads[i]);
  });
  total.SetZero();
  double loss = 0;
  for (int i = 0; i < n; ++i) {
    total.AddScaled(grads[i], 1.0);
    loss += losses[i];
  }
  return loss;
}

void CheckFinite(double loss, const char *stage, int step) {
  if (!std::isfinite(loss))
    Fail(ErrorKind::kTraining, stage,
         "non-finite loss at step " + std::to_string(step));
}

std::optional<double> DevWer(const ParamSet &params, const ModelConfig &mcfg,
                             const DevEval *dev, int jobs) {
  if (dev == nullptr || dev->utterances.empty()) return std::nullopt;
  EvalSystem sys;
  sys.rnnt = &params;
  sys.model = &mcfg;
  sys.endpointer = dev->endpointer;
  sys.frame_ms = dev->frame_ms;
  sys.jobs = jobs;
  return EvaluateCorpus(sys, dev->utterances, dev->decode, nullptr).wer;
}

}  // namespace

TrainLog TrainRnnt(ParamSet &params, const ModelConfig &mcfg,
                   std::span<const Utterance> train, const TrainConfig &cfg,
                   const PenaltyConfig *penalty, const DevEval *dev,
                   const RunOptions &opts) {
  if (train.empty()) Fail(ErrorKind::kUsage, "training", "empty training set");
  const int n = static_cast<int>(train.size());
  const int batches_per_epoch = (n + cfg.batch_size - 1) / cfg.batch_size;
  const int eval_every = cfg.eval_every > 0 ? cfg.eval_every : batches_per_epoch;
  TrainLog log;
  ParamSet grads = params.ZerosLike();
  double window_loss = 0;
  int window_items = 0, step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = ShuffledOrder(n, opts.seed, epoch);
    for (int b = 0; b < n; b += cfg.batch_size) {
      const std::span<const int> batch(order.data() + b,
                                       std::min(cfg.batch_size, n - b));
      const double loss = BatchGradient(
          batch, opts.jobs, params, grads, [&](int idx, ParamSet &g) {
            return TransducerLoss(params, mcfg, train[idx], penalty, &g);
          });
      ++step;
      CheckFinite(loss, "training", step);
      grads.Scale(1.0 / batch.size());
      SgdStep(params, grads, cfg.learning_rate, cfg.clip_norm);
      window_loss += loss;
      window_items += static_cast<int>(batch.size());
      if (step % eval_every == 0) {
        log.push_back({step, window_loss / window_items,
                       DevWer(params, mcfg, dev, opts.jobs)});
        window_loss = 0;
        window_items = 0;
      }
    }
  }
  return log;
}

TrainLog TrainLas(ParamSet &las, const LasConfig &lcfg, const ParamSet &rnnt,
                  const ModelConfig &mcfg, std::span<const Utterance> train,
                  const LasTrainConfig &cfg, const RunOptions &opts) {
  if (train.empty()) Fail(ErrorKind::kUsage, "training", "empty training set");
  const int n = static_cast<int>(train.size());
  // The first pass is frozen, so its encoder outputs are computed once.
  std::vector<MatrixXd> enc(n);
  ParallelFor(n, opts.jobs, [&](int i) {
    enc[i] = Encode(rnnt, mcfg, train[i].features).states();
  });
  TrainLog log;
  ParamSet grads = las.ZerosLike();
  int step = 0;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = ShuffledOrder(n, opts.seed + 17, epoch);
    double epoch_loss = 0;
    for (int b = 0; b < n; b += cfg.batch_size) {
      const std::span<const int> batch(order.data() + b,
                                       std::min(cfg.batch_size, n - b));
      const double loss = BatchGradient(
          batch, opts.jobs, las, grads, [&](int idx, ParamSet &g) {
            return LasCrossEntropy(las, lcfg, enc[idx], train[idx].labels, &g);
          });
      ++step;
      CheckFinite(loss, "rescorer", step);
      grads.Scale(1.0 / batch.size());
      SgdStep(las, grads, cfg.learning_rate, cfg.clip_norm);
      epoch_loss += loss;
    }
    log.push_back({step, epoch_loss / n, std::nullopt});
  }
  return log;
}

TrainLog TrainMwer(const MwerModel &model, std::span<const Utterance> train,
                   const DecodeConfig &dcfg, const PenaltyConfig &penalty,
                   const MwerStageConfig &cfg, const RunOptions &opts,
                   MwerStageStats *stats) {
  if (train.empty()) Fail(ErrorKind::kUsage, "training", "empty training set");
  const MwerConfig &mc = cfg.mwer;
  ValidateMwerConfig(mc);
  const bool update_rnnt = UpdatesRnnt(mc.scope);
  const bool update_las = mc.scope != UpdateScope::kRnnt;
  if (update_las && model.las == nullptr)
    Fail(ErrorKind::kUsage, "mwer", "LAS parameters required for this scope");
  int n = static_cast<int>(train.size());
  if (cfg.max_utterances > 0) n = std::min(n, cfg.max_utterances);

  MwerStageStats local;
  TrainLog log;
  ParamSet rg, lg;
  if (update_rnnt) rg = model.rnnt->ZerosLike();
  if (update_las) lg = model.las->ZerosLike();
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    const std::vector<int> order = ShuffledOrder(n, opts.seed + 29, epoch);
    double epoch_loss = 0;
    int used = 0;
    for (int b = 0; b < n; b += cfg.batch_size) {
      const int m = std::min(cfg.batch_size, n - b);
      std::vector<MwerDiagnostics> diags(m);
      std::vector<ParamSet> rgs(m), lgs(m);
      ParallelFor(m, opts.jobs, [&](int i) {
        if (update_rnnt) rgs[i] = rg.ZerosLike();
        if (update_las) lgs[i] = lg.ZerosLike();
        diags[i] = MwerGradient(model, train[order[b + i]], dcfg, penalty, mc,
                                update_rnnt ? &rgs[i] : nullptr,
                                update_las ? &lgs[i] : nullptr);
      });
      int count = 0;
      double loss = 0;
      if (update_rnnt) rg.SetZero();
      if (update_las) lg.SetZero();
      for (int i = 0; i < m; ++i) {
        ++local.utterances;
        if (diags[i].skipped) {
          ++local.skipped;
          continue;
        }
        ++count;
        loss += diags[i].mwer_loss + mc.ce_weight * diags[i].ce_loss;
        if (update_rnnt) rg.AddScaled(rgs[i], 1.0);
        if (update_las) lg.AddScaled(lgs[i], 1.0);
      }
      if (count == 0) continue;
      ++local.steps;
      CheckFinite(loss, "mwer", local.steps);
      double sq = 0;
      if (update_rnnt) sq += rg.SquaredNorm();
      if (update_las) sq += lg.SquaredNorm();
      const double norm = std::sqrt(sq) / count;
      double lr = mc.learning_rate / count;
      if (mc.clip_norm > 0 && norm > mc.clip_norm) lr *= mc.clip_norm / norm;
      if (update_rnnt) SgdStep(*model.rnnt, rg, lr, 0);
      if (update_las) SgdStep(*model.las, lg, lr, 0);
      epoch_loss += loss;
      used += count;
    }
    log.push_back({local.steps, used > 0 ? epoch_loss / used : 0.0, std::nullopt});
  }
  if (stats != nullptr) *stats = local;
  return log;
}

void WriteTrainLog(const std::filesystem::path &path, const TrainLog &log) {
  std::ofstream os(path, std::ios::binary);
  if (!os) Fail(ErrorKind::kIo, "training", "cannot write " + path.string());
  os << "step\tloss\tdev_wer\n";
  char buf[64];
  for (const auto &e : log) {
    std::snprintf(buf, sizeof(buf), "%d\t%.6f\t", e.step, e.loss);
    os << buf;
    if (e.dev_wer) {
      std::snprintf(buf, sizeof(buf), "%.4f", *e.dev_wer);
      os << buf;
    }
    os << "\n";
  }
}

}  // namespace rnntep
