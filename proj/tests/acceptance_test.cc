// rnntep/acceptance_test.cc
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

// Acceptance harness. Prints one PASS/FAIL line per criterion; trend
// failures additionally print "TREND_FAIL <id> <detail>". Exit status is
// non-zero when any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "rnntep/decoder.h"
#include "rnntep/eval.h"
#include "rnntep/gradcheck.h"
#include "rnntep/pipeline.h"
#include "rnntep/transducer.h"
#include "test_util.h"

namespace fs = std::filesystem;
using namespace rnntep;
using rnntep::testing::ExhaustiveBest;
using rnntep::testing::ExhaustiveConfig;
using rnntep::testing::RandomLabels;
using rnntep::testing::RandomLattice;

namespace {

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

struct Outcome {
  bool passed = false;
  std::string detail;
};

std::string Fmt(const char *fmt, double a, double b = 0) {
  char buf[160];
  std::snprintf(buf, sizeof(buf), fmt, a, b);
  return buf;
}

// 1. Dynamic programme against path enumeration.
Outcome LossOracle() {
  const auto start = Clock::now();
  std::mt19937_64 rng(101);
  double worst = 0;
  int n = 0;
  for (int T = 1; T <= 4; ++T)
    for (int U = 0; U <= 3 && U <= T; ++U)
      for (int V = 2; V <= 3; ++V)
        for (int rep = 0; rep < 6 && n < 100; ++rep, ++n) {
          const LogitLattice lat = RandomLattice(rng, T, U, V + 1);
          const std::vector<int> y = RandomLabels(rng, U, V);
          worst = std::max(worst, std::abs(RnntLoss(lat, y) - BruteForceLoss(lat, y)));
        }
  while (n < 100) {
    const int T = 1 + static_cast<int>(rng() % 4);
    const int U = static_cast<int>(rng() % (std::min(T, 3) + 1));
    const int V = 2 + static_cast<int>(rng() % 2);
    const LogitLattice lat = RandomLattice(rng, T, U, V + 1);
    const std::vector<int> y = RandomLabels(rng, U, V);
    worst = std::max(worst, std::abs(RnntLoss(lat, y) - BruteForceLoss(lat, y)));
    ++n;
  }
  const double secs = Seconds(start);
  return {worst <= 1e-10 && secs < 10.0,
          Fmt("100 lattices, max |diff| = %.3g, %.2f s", worst, secs)};
}

// 2. Uniform lattice closed form.
Outcome ClosedForm() {
  double worst = 0;
  int shapes = 0;
  for (int T = 1; T <= 5 && shapes < 20; ++T)
    for (int U = 0; U <= T && shapes < 20; ++U)
      for (int V : {2, 5}) {
        if (shapes == 20) break;
        LogitLattice lat(T, U, V + 1);
        lat.values().setConstant(-std::log(V + 1.0));
        const std::vector<int> y(U, 0);
        const double expected = -(std::lgamma(T + U + 0.0) - std::lgamma(U + 1.0) -
                                  std::lgamma(T + 0.0)) +
                                (T + U) * std::log(V + 1.0);
        worst = std::max(worst, std::abs(RnntLoss(lat, y) - expected));
        ++shapes;
      }
  return {shapes == 20 && worst <= 1e-10,
          Fmt("%g shapes, max |diff| = %.3g", shapes, worst)};
}

// 3. Finite-difference gradient suites.
Outcome Gradients() {
  const auto start = Clock::now();
  const auto results = RunGradChecks(GradCheckOptions{});
  const double secs = Seconds(start);
  bool ok = secs < 60.0;
  std::string detail;
  for (const auto &r : results) {
    ok = ok && r.passed && r.num_params <= 500 && r.max_rel_error < 1e-4;
    detail += r.name + "=" + Fmt("%.2g", r.max_rel_error) + " ";
  }
  return {ok, detail + Fmt("(%.2f s)", secs)};
}

// 4. Endpoint penalty.
Outcome Penalty() {
  const PenaltyConfig cfg{0.1, 1.0, 3};
  bool ok = EndpointPenalty(8, 10, cfg) == 0.1 * 2 && EndpointPenalty(12, 10, cfg) == 0.0 &&
            EndpointPenalty(14, 10, cfg) == 1.0;
  for (int t = 10; t <= 13; ++t) ok = ok && EndpointPenalty(t, 10, cfg) == 0.0;
  std::mt19937_64 rng(104);
  for (int n = 0; n < 20; ++n) {
    const LogitLattice lat = RandomLattice(rng, 12, 3, 5);
    ok = ok && ApplyEndpointPenalty(lat, 6, PenaltyConfig{}).values() == lat.values();
  }
  return {ok, "examples 0.2/0/1.0, grace window, zero-scale identity"};
}

// 5. End-of-query gate.
Outcome Gating() {
  bool ok = EosAllowed(0.9, 1.0, 0.8) && EosAllowed(0.9, 2.0, 0.8) &&
            !EosAllowed(0.5, 1.0, 0.8);
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<double> betas{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
  const std::vector<double> alphas{0.5, 1.0, 2.0, 4.0};
  auto frame = [](const std::vector<double> &p, double a, double b) {
    const auto f = FirstAllowedEosFrame(p, a, b);
    return f ? *f : static_cast<int>(p.size());
  };
  for (int n = 0; n < 50; ++n) {
    std::vector<double> p(40);
    for (auto &x : p) x = unit(rng);
    for (double a : alphas)
      for (std::size_t i = 1; i < betas.size(); ++i)
        ok = ok && frame(p, a, betas[i]) >= frame(p, a, betas[i - 1]);
    for (double b : betas)
      for (std::size_t i = 1; i < alphas.size(); ++i)
        ok = ok && frame(p, alphas[i], b) >= frame(p, alphas[i - 1], b);
  }
  return {ok, "examples and 50 monotone streams"};
}

// 6. Beam search against exhaustive search.
Outcome BeamOracle() {
  std::mt19937_64 rng(106);
  int agree = 0;
  for (int n = 0; n < 50; ++n) {
    const int T = 1 + static_cast<int>(rng() % 5);
    const int U = static_cast<int>(rng() % 4);
    const LogitLattice lat = RandomLattice(rng, T, U, 4);
    DecodeConfig cfg = ExhaustiveConfig(T <= 3 ? 2 : 1);
    cfg.beta = n % 2 ? 0.25 : 0.0;
    const auto expected = ExhaustiveBest(
        [&](int t, const std::vector<int> &y) {
          return VectorXd(lat.node(t, std::min<int>(static_cast<int>(y.size()), U)));
        },
        T, 4, cfg);
    agree += BeamSearch(LatticeScorer(lat), cfg).best().tokens == expected;
  }
  return {agree == 50, Fmt("%g/50 instances agree", agree)};
}

// 7. Metrics and the forward-backward identity.
Outcome Metrics() {
  using V = std::vector<int>;
  bool ok = EditDistance(V{1, 2, 3}, V{1, 2, 3}) == EditCounts{0, 0, 0} &&
            EditDistance(V{1, 2, 3}, V{1, 9, 3}) == EditCounts{1, 0, 0} &&
            EditDistance(V{1, 2, 3, 4}, V{2, 3}) == EditCounts{0, 0, 2};
  std::vector<std::optional<double>> lat;
  for (int i = 1; i <= 10; ++i) lat.push_back(100.0 * i);
  LatencySummary s = SummarizeLatency(lat, 10);
  ok = ok && s.ep50_ms == 500.0 && s.ep90_ms == 900.0;
  s = SummarizeLatency(std::vector<std::optional<double>>{300.0}, 1);
  ok = ok && s.ep50_ms == 300.0 && s.ep90_ms == 300.0;
  lat[0].reset();
  lat[1].reset();
  ok = ok && SummarizeLatency(lat, 10).eou_pct == 80.0;

  std::mt19937_64 rng(107);
  double worst = 0;
  for (int n = 0; n < 30; ++n) {
    const int T = 1 + static_cast<int>(rng() % 8);
    const int U = static_cast<int>(rng() % (T + 1));
    const LogitLattice l = RandomLattice(rng, T, U, 4);
    const std::vector<int> y = RandomLabels(rng, U, 3);
    const MatrixXd a = ForwardVariables(l, y), b = BackwardVariables(l, y);
    const double log_p = -RnntLoss(l, y);
    // Every complete path visits exactly one node on each diagonal t + u = n.
    for (int d = 0; d <= T - 1 + U; ++d) {
      double acc = kLogZero<double>;
      for (int t = 0; t < T; ++t) {
        const int u = d - t;
        if (u >= 0 && u <= U) acc = LogAdd(acc, a(t, u) + b(t, u));
      }
      worst = std::max(worst, std::abs(acc - log_p));
    }
  }
  ok = ok && worst <= 1e-8;
  return {ok, Fmt("metric examples exact, identity max |diff| = %.3g", worst)};
}

std::string Slurp(const fs::path &path) {
  std::ifstream is(path, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

void Print(int id, const Outcome &o) {
  std::printf("CRITERION %d %s %s\n", id, o.passed ? "PASS" : "FAIL", o.detail.c_str());
  std::fflush(stdout);
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Acceptance criteria"};
  std::string out = "acceptance_run", config;
  int jobs = 0;
  app.add_option("--out", out, "Scratch directory");
  app.add_option("--config", config, "Reference experiment config")->required();
  app.add_option("--jobs", jobs, "Worker threads");
  CLI11_PARSE(app, argc, argv);

  bool all = true;
  auto run = [&](int id, const std::function<Outcome()> &fn) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception &e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    all = all && o.passed;
    Print(id, o);
  };
  run(1, LossOracle);
  run(2, ClosedForm);
  run(3, Gradients);
  run(4, Penalty);
  run(5, Gating);
  run(6, BeamOracle);
  run(7, Metrics);

  LadderReport first;
  std::vector<std::string> first_files;
  run(8, [&] {
    CommandContext ctx;
    ctx.cfg = LoadConfig(config);
    if (jobs > 0) ctx.cfg.jobs = jobs;
    FinalizeConfig(ctx.cfg);
    ctx.jobs = ctx.cfg.jobs;
    ctx.out = fs::path(out) / "run1";
    fs::remove_all(ctx.out);
    const auto start = Clock::now();
    first = CmdRunAll(ctx);
    const double secs = Seconds(start);
    int failed = 0;
    for (const auto &t : first.trends) {
      std::printf("  TREND %s %s %s\n", t.id.c_str(), t.passed ? "PASS" : "FAIL",
                  t.detail.c_str());
      if (!t.passed) {
        std::printf("TREND_FAIL %s %s\n", t.id.c_str(), t.description.c_str());
        ++failed;
      }
    }
    const bool ok = failed == 0 && first.trends.size() == 6 && secs < 900;
    return Outcome{ok, Fmt("%g trend(s) failed, ladder %.1f s", failed, secs)};
  });

  run(9, [&] {
    CommandContext ctx;
    ctx.cfg = LoadConfig(config);
    if (jobs > 0) ctx.cfg.jobs = jobs;
    FinalizeConfig(ctx.cfg);
    ctx.jobs = ctx.cfg.jobs;
    ctx.out = fs::path(out) / "run2";
    fs::remove_all(ctx.out);
    const LadderReport second = CmdRunAll(ctx);
    bool same = !first.sweep_files.empty() && second.sweep_files == first.sweep_files;
    for (const auto &f : first.sweep_files) {
      const std::string a = Slurp(fs::path(out) / "run1" / f);
      same = same && !a.empty() && a == Slurp(ctx.out / f);
    }
    return Outcome{same, Fmt("%g sweep reports compared byte for byte",
                             static_cast<double>(first.sweep_files.size()))};
  });

  std::printf("ACCEPTANCE %s\n", all ? "PASS" : "FAIL");
  return all ? 0 : 1;
}
