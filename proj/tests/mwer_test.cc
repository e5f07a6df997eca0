// rnntep/mwer_test.cc
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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "rnntep/mwer.h"
#include "test_util.h"

using namespace rnntep;
using rnntep::testing::KindOf;

namespace {

std::vector<NBestItem> Items(const std::vector<double> &s, const std::vector<int> &w) {
  std::vector<NBestItem> items(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    items[i].tokens = {static_cast<int>(i)};
    items[i].seq_log_prob = s[i];
    items[i].word_errors = w[i];
  }
  return items;
}

double LossAt(std::vector<NBestItem> items, const VectorXd &s) {
  for (std::size_t i = 0; i < items.size(); ++i) items[i].seq_log_prob = s(i);
  return MwerLoss(items);
}

struct Fixture {
  ModelConfig mcfg;
  LasConfig lcfg;
  ParamSet rnnt;
  ParamSet las;
  Utterance utt;
  DecodeConfig dcfg;

  Fixture() {
    mcfg.vocab_size = 4;
    mcfg.input_dim = 3;
    mcfg.encoder_units = 6;
    mcfg.prediction_units = 4;
    mcfg.joint_units = 6;
    lcfg.vocab_size = 4;
    lcfg.input_dim = 6;
    lcfg.encoder_units = 5;
    lcfg.decoder_units = 4;
    lcfg.attention_dim = 3;
    lcfg.output_units = 5;
    rnnt = InitModelParams(mcfg);
    rnnt.Scale(8.0);
    las = InitLasParams(lcfg);
    std::mt19937_64 rng(40);
    std::normal_distribution<double> normal(0.0, 1.0);
    utt.features.resize(12, 3);
    for (int t = 0; t < 12; ++t)
      for (int j = 0; j < 3; ++j) utt.features(t, j) = normal(rng);
    utt.labels = {0, 2, 1, 3};
    utt.t_eos = 8;
    dcfg.fallback_enabled = false;
    dcfg.beta = 0.0;
  }

  MwerModel Model() { return {&rnnt, &mcfg, &las, &lcfg, nullptr}; }
};

}  // namespace

TEST_CASE("loss examples") {
  CHECK(MwerLoss(Items({std::log(0.75), std::log(0.25)}, {0, 2})) ==
        doctest::Approx(-0.5).epsilon(1e-14));
  CHECK(MwerLoss(Items({-1.0, 3.0, 0.5}, {2, 2, 2})) == 0.0);
  CHECK(MwerGrad(Items({-1.0, 3.0, 0.5}, {2, 2, 2})).isZero());
  CHECK(KindOf([] { MwerLoss(std::vector<NBestItem>{}); }) == ErrorKind::kUsage);
  CHECK(KindOf([] {
          MwerLoss(Items({kLogZero<double>, kLogZero<double>}, {0, 1}));
        }) == ErrorKind::kLoss);
}

TEST_CASE("loss is permutation and shift invariant and bounded") {
  std::mt19937_64 rng(41);
  std::normal_distribution<double> normal(0.0, 3.0);
  for (int n = 0; n < 50; ++n) {
    const int N = 2 + static_cast<int>(rng() % 4);
    std::vector<double> s(N);
    std::vector<int> w(N);
    for (int i = 0; i < N; ++i) {
      s[i] = normal(rng);
      w[i] = static_cast<int>(rng() % 6);
    }
    auto items = Items(s, w);
    const double loss = MwerLoss(items);
    auto shuffled = items;
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    CHECK(MwerLoss(shuffled) == doctest::Approx(loss).epsilon(1e-12));
    auto shifted = items;
    for (auto &it : shifted) it.seq_log_prob += 17.25;
    CHECK(MwerLoss(shifted) == doctest::Approx(loss).epsilon(1e-12));
    const double mean = std::accumulate(w.begin(), w.end(), 0.0) / N;
    double bound = 0;
    for (int x : w) bound = std::max(bound, std::abs(x - mean));
    CHECK(std::abs(loss) <= bound + 1e-12);
  }
}

TEST_CASE("gradient matches finite differences") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> normal(0.0, 2.0);
  for (int n = 0; n < 30; ++n) {
    const int N = 2 + static_cast<int>(rng() % 4);
    std::vector<double> s(N);
    std::vector<int> w(N);
    for (int i = 0; i < N; ++i) {
      s[i] = normal(rng);
      w[i] = static_cast<int>(rng() % 5);
    }
    const auto items = Items(s, w);
    const VectorXd x = Eigen::Map<const VectorXd>(s.data(), N);
    const VectorXd fd = FiniteDifferenceGradient(
        [&](const VectorXd &v) { return LossAt(items, v); }, x, 1e-5);
    CHECK(MaxRelativeError(MwerGrad(items), fd, 1e-6) < 1e-6);
  }
}

TEST_CASE("raising the worst hypothesis raises the loss") {
  const auto items = Items({0.2, -0.4, 0.1}, {0, 1, 4});
  VectorXd s(3);
  s << 0.2, -0.4, 0.1;
  VectorXd up = s, down = s;
  up(2) += 1e-3;
  down(2) -= 1e-3;
  CHECK(LossAt(items, up) > LossAt(items, s));
  CHECK(LossAt(items, down) < LossAt(items, s));
  CHECK(MwerGrad(items)(2) > 0);
  CHECK(MwerGrad(items)(0) < 0);
}

TEST_CASE("deduplication keeps the first occurrence") {
  std::vector<NBestItem> items = Items({1, 2, 3}, {0, 1, 2});
  items[2].tokens = items[0].tokens;
  const auto out = DeduplicateNBest(items);
  REQUIRE(out.size() == 2);
  CHECK(out[0].seq_log_prob == 1);
  CHECK(out[1].seq_log_prob == 2);
}

TEST_CASE("update scope names") {
  CHECK(ParseUpdateScope("rnnt") == UpdateScope::kRnnt);
  CHECK(ParseUpdateScope("las") == UpdateScope::kLas);
  CHECK(ParseUpdateScope("both") == UpdateScope::kBoth);
  CHECK(UpdateScopeName(UpdateScope::kBoth) == "both");
  CHECK(KindOf([] { ParseUpdateScope("all"); }) == ErrorKind::kConfig);
}

TEST_CASE("stage penalty drops the early term by default") {
  const PenaltyConfig base{0.1, 1.0, 3};
  MwerConfig cfg;
  PenaltyConfig p = MwerPenalty(base, cfg);
  CHECK(p.alpha_early == 0);
  CHECK(p.alpha_late == 1.0);
  CHECK(p.t_buffer == 3);
  cfg.include_late_penalty = false;
  cfg.include_early_penalty = true;
  p = MwerPenalty(base, cfg);
  CHECK(p.alpha_early == 0.1);
  CHECK(p.alpha_late == 0);
}

TEST_CASE("late penalty only changes EOS entries of hypothesis lattices") {
  Fixture fx;
  const EncoderStates enc = Encode(fx.rnnt, fx.mcfg, fx.utt.features);
  const PenaltyConfig base{0.1, 1.0, 2};
  MwerConfig on, off;
  off.include_late_penalty = false;
  const std::vector<int> hyp{0, 2, 3};
  const LogitLattice a =
      MwerHypothesisLattice(fx.rnnt, fx.mcfg, enc, hyp, 5, MwerPenalty(base, on));
  const LogitLattice b =
      MwerHypothesisLattice(fx.rnnt, fx.mcfg, enc, hyp, 5, MwerPenalty(base, off));
  int differing = 0;
  for (int t = 0; t < a.frames(); ++t)
    for (int u = 0; u <= a.labels(); ++u)
      for (int k = 0; k < a.symbols(); ++k) {
        if (a(t, u, k) == b(t, u, k)) continue;
        ++differing;
        CHECK(k == 3);
        CHECK(u == a.labels() - 1);
        CHECK(t > 5 + 2);
      }
  CHECK(differing == a.frames() - 8);
  // Hypotheses without EOS are untouched.
  const std::vector<int> open{0, 2};
  CHECK(MwerHypothesisLattice(fx.rnnt, fx.mcfg, enc, open, 5, MwerPenalty(base, on))
            .values() ==
        MwerHypothesisLattice(fx.rnnt, fx.mcfg, enc, open, 5, MwerPenalty(base, off))
            .values());
}

TEST_CASE("open hypotheses are completed with EOS when the reference has one") {
  Fixture fx;
  fx.dcfg.beta = 1.5;  // EOS never passes the gate: every hypothesis is open
  const int eos = fx.mcfg.vocab().eos();
  const DecodeResult dec =
      BeamSearch(fx.rnnt, fx.mcfg, fx.utt.features, fx.dcfg, nullptr);
  for (const Hypothesis &h : dec.nbest) REQUIRE_FALSE(h.ends_with_eos(eos));

  int dropped = 0;
  const std::vector<NBestItem> with_eos =
      MwerCandidates(fx.Model(), fx.utt, fx.dcfg, &dropped);
  Utterance plain = fx.utt;
  plain.labels.pop_back();
  const std::vector<NBestItem> without_eos =
      MwerCandidates(fx.Model(), plain, fx.dcfg, &dropped);
  REQUIRE(with_eos.size() == without_eos.size());
  for (std::size_t i = 0; i < with_eos.size(); ++i) {
    std::vector<int> completed = without_eos[i].tokens;
    completed.push_back(eos);
    CHECK(with_eos[i].tokens == completed);
    CHECK(with_eos[i].word_errors == without_eos[i].word_errors);
  }
}

TEST_CASE("repeated steps on a fixed N-best reduce the loss") {
  Fixture fx;
  int dropped = 0;
  std::vector<NBestItem> items =
      MwerCandidates(fx.Model(), fx.utt, fx.dcfg, &dropped);
  REQUIRE(items.size() >= 2);
  MwerConfig cfg;
  cfg.learning_rate = 0.05;
  const PenaltyConfig penalty{0.0, 1.0, 2};
  std::vector<double> losses;
  for (int step = 0; step < 6; ++step) {
    ParamSet grads = fx.rnnt.ZerosLike();
    const MwerDiagnostics d =
        MwerObjective(fx.Model(), fx.utt, items, penalty, cfg, &grads, nullptr);
    losses.push_back(d.mwer_loss);
    SgdStep(fx.rnnt, grads, cfg.learning_rate, cfg.clip_norm);
  }
  for (std::size_t i = 1; i < losses.size(); ++i) CHECK(losses[i] < losses[i - 1]);
}

TEST_CASE("scope las leaves the first pass bit-identical") {
  Fixture fx;
  const auto rnnt_before = fx.rnnt.Fingerprint();
  const auto las_before = fx.las.Fingerprint();
  MwerConfig cfg;
  cfg.scope = UpdateScope::kLas;
  const MwerDiagnostics d =
      MwerTrainStep(fx.Model(), fx.utt, fx.dcfg, PenaltyConfig{0, 1, 2}, cfg);
  REQUIRE(!d.skipped);
  CHECK(fx.rnnt.Fingerprint() == rnnt_before);
  CHECK(fx.las.Fingerprint() != las_before);
}

TEST_CASE("scope rnnt leaves the rescorer bit-identical") {
  Fixture fx;
  const auto rnnt_before = fx.rnnt.Fingerprint();
  const auto las_before = fx.las.Fingerprint();
  MwerConfig cfg;
  const MwerDiagnostics d =
      MwerTrainStep(fx.Model(), fx.utt, fx.dcfg, PenaltyConfig{0, 1, 2}, cfg);
  REQUIRE(!d.skipped);
  CHECK(fx.rnnt.Fingerprint() != rnnt_before);
  CHECK(fx.las.Fingerprint() == las_before);
}

TEST_CASE("scope both updates both models") {
  Fixture fx;
  const auto rnnt_before = fx.rnnt.Fingerprint();
  const auto las_before = fx.las.Fingerprint();
  MwerConfig cfg;
  cfg.scope = UpdateScope::kBoth;
  const MwerDiagnostics d =
      MwerTrainStep(fx.Model(), fx.utt, fx.dcfg, PenaltyConfig{0, 1, 2}, cfg);
  REQUIRE(!d.skipped);
  CHECK(fx.rnnt.Fingerprint() != rnnt_before);
  CHECK(fx.las.Fingerprint() != las_before);
  CHECK(d.grad_norm > 0);
}

TEST_CASE("single-hypothesis N-best is skipped") {
  Fixture fx;
  fx.dcfg.beam_size = 1;
  fx.dcfg.nbest_k = 1;
  const auto before = fx.rnnt.Fingerprint();
  const MwerDiagnostics d =
      MwerTrainStep(fx.Model(), fx.utt, fx.dcfg, PenaltyConfig{0, 1, 2}, MwerConfig{});
  CHECK(d.skipped);
  CHECK(d.nbest_size == 1);
  CHECK(fx.rnnt.Fingerprint() == before);
}

TEST_CASE("las scope without rescorer parameters is a usage error") {
  Fixture fx;
  MwerModel model = fx.Model();
  model.las = nullptr;
  MwerConfig cfg;
  cfg.scope = UpdateScope::kLas;
  std::vector<NBestItem> items = Items({0, 0}, {0, 1});
  items[0].tokens = {0, 3};
  items[1].tokens = {1, 3};
  CHECK(KindOf([&] {
          MwerObjective(model, fx.utt, items, PenaltyConfig{}, cfg, nullptr, nullptr);
        }) == ErrorKind::kUsage);
}
