// rnntep/decoder_test.cc
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

#include <cmath>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <vector>

#include "rnntep/decoder.h"
#include "test_util.h"

using namespace rnntep;
using rnntep::testing::ExhaustiveBest;
using rnntep::testing::ExhaustiveConfig;
using rnntep::testing::KindOf;
using rnntep::testing::RandomLattice;

namespace {

constexpr int kNoEndpoint = std::numeric_limits<int>::max();

int EndpointOrMax(const std::optional<int> &f) { return f ? *f : kNoEndpoint; }

// Peaked lattice for the planted alignment: emissions[t] lists the labels
// emitted at frame t; every other node prefers blank.
LogitLattice PlantedLattice(int T, int symbols,
                            const std::vector<std::vector<int>> &emissions) {
  int U = 0;
  for (const auto &e : emissions) U += static_cast<int>(e.size());
  LogitLattice lat(T, U, symbols);
  const double hi = std::log(0.97), lo = std::log(0.03 / (symbols - 1));
  lat.values().setConstant(lo);
  for (int t = 0; t < T; ++t)
    for (int u = 0; u <= U; ++u) lat(t, u, symbols - 1) = hi;
  int u = 0;
  for (int t = 0; t < T; ++t)
    for (int k : emissions[t]) {
      lat(t, u, symbols - 1) = lo;
      lat(t, u, k) = hi;
      ++u;
    }
  return lat;
}

FrameMatrix SilenceThenSpeech(const PrototypeTable &p, const std::vector<int> &plan) {
  FrameMatrix f(static_cast<Eigen::Index>(plan.size()), p.silence.size());
  for (std::size_t t = 0; t < plan.size(); ++t)
    f.row(static_cast<Eigen::Index>(t)) =
        (plan[t] < 0 ? p.silence : VectorXd(p.tokens.col(plan[t]))).transpose();
  return f;
}

}  // namespace

TEST_CASE("EOS gate examples") {
  CHECK(EosAllowed(0.9, 1.0, 0.8));
  CHECK(EosAllowed(0.9, 2.0, 0.8));
  CHECK(!EosAllowed(0.5, 1.0, 0.8));
  CHECK(EosAllowed(0.3, 1.0, 0.0));
  CHECK(!EosAllowed(1.0, 1.0, 1.01));
}

TEST_CASE("gated endpoint frame is monotone in beta and alpha") {
  std::mt19937_64 rng(20);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<double> betas{0.0, 0.1, 0.3, 0.5, 0.7, 0.9, 1.0};
  const std::vector<double> alphas{0.25, 0.5, 1.0, 2.0, 4.0};
  for (int n = 0; n < 50; ++n) {
    std::vector<double> p(30);
    for (auto &x : p) x = unit(rng);
    for (double a : alphas) {
      int prev = -1;
      for (double b : betas) {
        const int f = EndpointOrMax(FirstAllowedEosFrame(p, a, b));
        CHECK(f >= prev);
        prev = f;
      }
    }
    for (double b : betas) {
      int prev = -1;
      for (double a : alphas) {
        const int f = EndpointOrMax(FirstAllowedEosFrame(p, a, b));
        CHECK(f >= prev);
        prev = f;
      }
    }
  }
}

TEST_CASE("beta above one blocks EOS") {
  std::mt19937_64 rng(21);
  DecodeConfig cfg;
  cfg.beta = 1.5;
  cfg.fallback_enabled = false;
  for (int n = 0; n < 20; ++n) {
    const LogitLattice lat = RandomLattice(rng, 8, 3, 5);
    const DecodeResult r = BeamSearch(LatticeScorer(lat), cfg);
    CHECK(!r.endpoint_frame);
    CHECK(r.source == EndpointSource::kNone);
    for (const auto &h : r.nbest) {
      CHECK(!h.ends_with_eos(3));
      CHECK(h.terminated);
      CHECK(!h.endpoint_frame);
    }
  }
  // With the fallback the endpoint can only come from it.
  const LogitLattice lat = RandomLattice(rng, 8, 3, 5);
  cfg.fallback_enabled = true;
  const DecodeResult r = BeamSearch(LatticeScorer(lat), cfg, 5);
  CHECK(r.endpoint_frame == 5);
  CHECK(r.source == EndpointSource::kFallback);
}

TEST_CASE("peaked lattice yields the planted sequence and endpoint") {
  // V = 4: tokens 0..2, EOS 3, blank 4.
  const LogitLattice lat =
      PlantedLattice(9, 5, {{}, {2}, {}, {0, 1}, {}, {}, {3}, {}, {}});
  DecodeConfig cfg;
  cfg.fallback_enabled = false;
  const DecodeResult r = BeamSearch(LatticeScorer(lat), cfg);
  CHECK(r.best().tokens == std::vector<int>{2, 0, 1, 3});
  CHECK(r.best().token_frames == std::vector<int>{1, 3, 3, 6});
  CHECK(r.endpoint_frame == 6);
  CHECK(r.best().endpoint_frame == 6);
  CHECK(r.source == EndpointSource::kEos);
  CHECK(r.frames_consumed == 7);
  CHECK(r.best().eos_score == doctest::Approx(std::log(0.97)));

  cfg.stop_at_endpoint = false;
  const DecodeResult full = BeamSearch(LatticeScorer(lat), cfg);
  CHECK(full.frames_consumed == 9);
  CHECK(full.endpoint_frame == 6);
  CHECK(full.best().tokens == r.best().tokens);
}

TEST_CASE("combined endpoint is the earlier detector") {
  const LogitLattice lat =
      PlantedLattice(9, 5, {{}, {2}, {}, {0, 1}, {}, {}, {3}, {}, {}});
  DecodeConfig cfg;
  DecodeResult r = BeamSearch(LatticeScorer(lat), cfg, 4);
  CHECK(r.endpoint_frame == 4);
  CHECK(r.source == EndpointSource::kFallback);
  for (const auto &h : r.nbest) CHECK(h.terminated);
  r = BeamSearch(LatticeScorer(lat), cfg, 8);
  CHECK(r.endpoint_frame == 6);
  CHECK(r.source == EndpointSource::kEos);
  cfg.stop_at_endpoint = false;
  r = BeamSearch(LatticeScorer(lat), cfg, 4);
  CHECK(r.endpoint_frame == 4);
  CHECK(r.source == EndpointSource::kFallback);
}

TEST_CASE("covering beam matches the exhaustive best on lattices") {
  std::mt19937_64 rng(22);
  for (int n = 0; n < 40; ++n) {
    const int T = 1 + static_cast<int>(rng() % 5);
    const int U = static_cast<int>(rng() % 4);
    const LogitLattice lat = RandomLattice(rng, T, U, 4, 1.5);
    // Keep every sequence inside the beam.
    DecodeConfig cfg = ExhaustiveConfig(T <= 3 ? 1 + static_cast<int>(rng() % 2) : 1);
    cfg.alpha_eos = (n % 3 == 0) ? 2.0 : 1.0;
    cfg.beta = (n % 4 == 0) ? 0.3 : 0.0;
    const auto expected = ExhaustiveBest(
        [&](int t, const std::vector<int> &y) {
          return VectorXd(lat.node(t, std::min<int>(y.size(), U)));
        },
        T, 4, cfg);
    const DecodeResult r = BeamSearch(LatticeScorer(lat), cfg);
    CHECK(r.best().tokens == expected);
  }
}

TEST_CASE("covering beam matches the exhaustive best on a tiny model") {
  ModelConfig mcfg;
  mcfg.vocab_size = 3;
  mcfg.input_dim = 2;
  mcfg.encoder_units = 3;
  mcfg.prediction_units = 3;
  mcfg.joint_units = 4;
  std::mt19937_64 rng(23);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int n = 0; n < 10; ++n) {
    mcfg.seed = 100 + n;
    ParamSet params = InitModelParams(mcfg);
    params.Scale(20.0);  // sharpen the distributions
    const int T = 2 + n % 4;
    FrameMatrix f(T, mcfg.input_dim);
    for (int t = 0; t < T; ++t)
      for (int j = 0; j < mcfg.input_dim; ++j) f(t, j) = normal(rng);
    const EncoderStates enc = Encode(params, mcfg, f);
    DecodeConfig cfg = ExhaustiveConfig(1);
    const auto expected = ExhaustiveBest(
        [&](int t, const std::vector<int> &y) {
          const auto fwd = ForwardLattice(params, mcfg, enc, y);
          return VectorXd(fwd.log_probs.node(t, static_cast<int>(y.size())));
        },
        T, 4, cfg);
    const DecodeResult r = BeamSearch(ModelScorer(params, mcfg, enc), cfg);
    CHECK(r.best().tokens == expected);
  }
}

TEST_CASE("N-best is sorted, distinct and bounded") {
  std::mt19937_64 rng(24);
  DecodeConfig cfg;
  cfg.fallback_enabled = false;
  cfg.beam_size = 6;
  cfg.nbest_k = 4;
  for (int n = 0; n < 20; ++n) {
    const LogitLattice lat = RandomLattice(rng, 10, 3, 5, 1.0);
    const DecodeResult r = BeamSearch(LatticeScorer(lat), cfg);
    REQUIRE(!r.nbest.empty());
    CHECK(r.nbest.size() <= 4);
    std::set<std::vector<int>> seen;
    for (std::size_t i = 0; i < r.nbest.size(); ++i) {
      CHECK(seen.insert(r.nbest[i].tokens).second);
      CHECK(r.nbest[i].token_frames.size() == r.nbest[i].tokens.size());
      if (i) CHECK(r.nbest[i - 1].log_score >= r.nbest[i].log_score);
    }
  }
}

TEST_CASE("decoding a prefix up to the endpoint is unchanged") {
  ModelConfig mcfg;
  mcfg.vocab_size = 4;
  mcfg.input_dim = 3;
  std::mt19937_64 rng(25);
  std::normal_distribution<double> normal(0.0, 1.0);
  DecodeConfig cfg;
  cfg.fallback_enabled = false;
  cfg.beta = 0.0;
  int checked = 0;
  for (int n = 0; n < 10; ++n) {
    mcfg.seed = 200 + n;
    ParamSet params = InitModelParams(mcfg);
    params.Scale(10.0);
    FrameMatrix f(20, mcfg.input_dim);
    for (int t = 0; t < 20; ++t)
      for (int j = 0; j < mcfg.input_dim; ++j) f(t, j) = normal(rng);
    const DecodeResult full = BeamSearch(params, mcfg, f, cfg, nullptr);
    if (!full.endpoint_frame) continue;
    ++checked;
    const FrameMatrix prefix = f.topRows(*full.endpoint_frame + 1);
    const DecodeResult part = BeamSearch(params, mcfg, prefix, cfg, nullptr);
    CHECK(part.endpoint_frame == full.endpoint_frame);
    CHECK(part.best().tokens == full.best().tokens);
    CHECK(part.best().log_score == full.best().log_score);
  }
  CHECK(checked > 0);
}

TEST_CASE("beam collapse is a decode error") {
  LogitLattice lat(3, 1, 4);
  lat.values().setConstant(kLogZero<double>);
  DecodeConfig cfg;
  CHECK(KindOf([&] { BeamSearch(LatticeScorer(lat), cfg); }) == ErrorKind::kDecode);
}

TEST_CASE("fallback end-of-query detector") {
  CorpusSpec spec;
  const PrototypeTable p = MakePrototypes(spec);
  CHECK(FallbackEoq(SilenceThenSpeech(p, {-1, -1, -1, -1, -1, -1}), p, 3) == 3);
  CHECK(!FallbackEoq(SilenceThenSpeech(p, {0, -1, -1, 1, -1, -1, 2}), p, 3));
  // Five trailing silence frames after the last token.
  const FrameMatrix f = SilenceThenSpeech(p, {1, 1, 1, 4, 4, 4, -1, -1, -1, -1, -1});
  CHECK(FallbackEoq(f, p, 3) == 6 + 3);
  CHECK(KindOf([&] { FallbackEoq(f, p, 0); }) == ErrorKind::kUsage);

  spec.num_utterances = 30;
  spec.trailing_silence_frames = {5, 5};
  spec.feature_noise_std = 0.0;
  for (const auto &utt : GenerateCorpus(spec))
    CHECK(FallbackEoq(utt.features, p, 5) >= utt.t_eos);
}

TEST_CASE("latency examples") {
  CHECK(LatencyMs(12, 10, 60.0) == 120.0);
  CHECK(LatencyMs(10, 10, 60.0) == 0.0);
  CHECK(LatencyMs(9, 10, 60.0) == -60.0);
}

TEST_CASE("invalid decode settings are config errors") {
  DecodeConfig cfg;
  cfg.nbest_k = 5;
  cfg.beam_size = 4;
  CHECK(KindOf([&] { ValidateDecodeConfig(cfg); }) == ErrorKind::kConfig);
  cfg = DecodeConfig{};
  cfg.alpha_eos = 0;
  CHECK(KindOf([&] { ValidateDecodeConfig(cfg); }) == ErrorKind::kConfig);
  cfg = DecodeConfig{};
  cfg.beta = -0.1;
  CHECK(KindOf([&] { ValidateDecodeConfig(cfg); }) == ErrorKind::kConfig);
}

TEST_CASE("decode records roundtrip") {
  std::vector<DecodeRecord> recs(3);
  recs[0] = {"utt-000001", {1, 2, 7}, -3.25, 14, EndpointSource::kEos};
  recs[1] = {"utt-000002", {}, -1.5, std::nullopt, EndpointSource::kNone};
  recs[2] = {"utt-000003", {4}, -0.125, 9, EndpointSource::kFallback};
  const auto path = std::filesystem::temp_directory_path() / "rnntep_decode_test.tsv";
  WriteDecodeOutput(path, recs);
  const auto back = ReadDecodeOutput(path);
  REQUIRE(back.size() == 3);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(back[i].id == recs[i].id);
    CHECK(back[i].tokens == recs[i].tokens);
    CHECK(back[i].log_score == recs[i].log_score);
    CHECK(back[i].endpoint_frame == recs[i].endpoint_frame);
    CHECK(back[i].source == recs[i].source);
  }
  std::filesystem::remove(path);
  CHECK(KindOf([] { ParseDecodeRecord("a\tb"); }) == ErrorKind::kIo);
}
