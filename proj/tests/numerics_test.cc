// rnntep/numerics_test.cc
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
#include <random>
#include <vector>

#include "rnntep/numerics.h"
#include "rnntep/transducer.h"
#include "test_util.h"

using namespace rnntep;
using rnntep::testing::KindOf;

TEST_CASE("log_sum_exp of two halves is zero") {
  const std::vector<double> v{std::log(0.5), std::log(0.5)};
  CHECK(LogSumExp(v) == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("log_sum_exp of log-zeros is log-zero") {
  const std::vector<double> v{kLogZero<>, kLogZero<>};
  CHECK(LogSumExp(v) == kLogZero<>);
}

TEST_CASE("log_sum_exp with a tiny term matches extended precision") {
  const std::vector<double> v{0.0, -1000.0};
  const long double oracle = std::log1p(std::exp(-1000.0L));
  const double got = LogSumExp(v);
  CHECK(std::isfinite(got));
  CHECK(std::fabs(got - static_cast<double>(oracle)) < 1e-15);
}

TEST_CASE("log_sum_exp rejects an empty list") {
  CHECK(KindOf([] { LogSumExp(std::span<const double>{}); }) == ErrorKind::kUsage);
}

TEST_CASE("log_sum_exp is permutation invariant and ignores log-zero") {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> normal(0.0, 10.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> v(1 + trial % 7);
    for (double &x : v) x = normal(rng);
    const double base = LogSumExp(v);
    std::shuffle(v.begin(), v.end(), rng);
    CHECK(LogSumExp(v) == doctest::Approx(base).epsilon(1e-14));
    v.push_back(kLogZero<>);
    CHECK(LogSumExp(v) == doctest::Approx(base).epsilon(1e-14));
  }
}

TEST_CASE("LogAdd never produces NaN from log-zero operands") {
  CHECK(LogAdd(kLogZero<>, kLogZero<>) == kLogZero<>);
  CHECK(LogAdd(kLogZero<>, -3.0) == -3.0);
  CHECK(LogAdd(-3.0, kLogZero<>) == -3.0);
}

TEST_CASE("log_softmax of equal logits") {
  VectorXd x(2);
  x << 0, 0;
  const VectorXd y = LogSoftmax(x);
  CHECK(y(0) == doctest::Approx(std::log(0.5)));
  CHECK(y(1) == doctest::Approx(std::log(0.5)));
  for (double c : {-300.0, -1.0, 0.0, 7.5, 1e4}) {
    const VectorXd z = LogSoftmax(VectorXd::Constant(4, c));
    for (int i = 0; i < 4; ++i) CHECK(z(i) == doctest::Approx(std::log(0.25)));
  }
}

TEST_CASE("log_softmax matches extended precision") {
  VectorXd x(3);
  x << 1, 2, 3;
  const VectorXd y = LogSoftmax(x);
  const long double norm = std::log(std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L));
  for (int i = 0; i < 3; ++i)
    CHECK(std::fabs(y(i) - static_cast<double>(x(i) - norm)) < 1e-12);
}

TEST_CASE("log_softmax rejects non-finite logits") {
  VectorXd x(2);
  x << 0, std::nan("");
  CHECK(KindOf([&] { LogSoftmax(x); }) == ErrorKind::kUsage);
  x << 0, INFINITY;
  CHECK(KindOf([&] { LogSoftmax(x); }) == ErrorKind::kUsage);
}

TEST_CASE("exp of log_softmax sums to one for bounded random logits") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> unif(-50.0, 50.0);
  for (int trial = 0; trial < 200; ++trial) {
    VectorXd x(1 + trial % 12);
    for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = unif(rng);
    CHECK(std::fabs(LogSoftmax(x).array().exp().sum() - 1.0) < 1e-12);
    // shift invariance
    const VectorXd a = LogSoftmax(x), b = LogSoftmax(VectorXd(x.array() + 3.25));
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-12);
  }
}

TEST_CASE("finite differences of a quadratic") {
  VectorXd theta(1);
  theta << 3.0;
  const VectorXd g = FiniteDifferenceGradient(
      [](const VectorXd &v) { return v.dot(v); }, theta, 1e-5);
  CHECK(std::fabs(g(0) - 6.0) < 1e-6);
}

TEST_CASE("finite differences of a constant vanish") {
  const VectorXd g = FiniteDifferenceGradient([](const VectorXd &) { return 4.0; },
                                              VectorXd::Ones(5), 1e-4);
  CHECK(g.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("finite differences reject a non-positive step") {
  auto f = [](const VectorXd &v) { return v.sum(); };
  CHECK(KindOf([&] { FiniteDifferenceGradient(f, VectorXd::Ones(2), 0.0); }) ==
        ErrorKind::kUsage);
}

TEST_CASE("finite differences match the transducer gradient on a 2-frame lattice") {
  std::mt19937_64 rng(21);
  const LogitLattice lat = rnntep::testing::RandomLattice(rng, 2, 1, 3);
  const std::vector<int> labels{0};
  const auto analytic = RnntGrad(lat, labels);
  const VectorXd numeric = FiniteDifferenceGradient(
      [&](const VectorXd &v) {
        LogitLattice l = lat;
        l.values() = v.reshaped(lat.symbols(), lat.values().cols());
        return RnntLoss(l, labels);
      },
      lat.values().reshaped(), 1e-5);
  CHECK(MaxRelativeError(analytic.grad.values().reshaped(), numeric) < 1e-4);
}

TEST_CASE("max relative error uses the floor for tiny coordinates") {
  VectorXd a(2), b(2);
  a << 1.0, 0.0;
  b << 1.0, 1e-9;
  CHECK(MaxRelativeError(a, b) == doctest::Approx(1e-4));
}
