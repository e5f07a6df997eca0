// rnntep/test_util.h
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

// Shared helpers for the unit tests.

#ifndef RNNTEP_TESTS_TEST_UTIL_H_
#define RNNTEP_TESTS_TEST_UTIL_H_

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <stdexcept>
#include <vector>

#include "rnntep/decoder.h"
#include "rnntep/transducer.h"

namespace rnntep::testing {

// Lattice with every node a random normalised distribution.
template <typename Scalar = double>
BasicLattice<Scalar> RandomLattice(std::mt19937_64 &rng, int T, int U,
                                   int symbols, double scale = 1.5) {
  std::normal_distribution<double> normal(0.0, scale);
  BasicLattice<Scalar> lat(T, U, symbols);
  for (Eigen::Index c = 0; c < lat.values().cols(); ++c) {
    Vector<Scalar> x(symbols);
    for (int k = 0; k < symbols; ++k) x(k) = static_cast<Scalar>(normal(rng));
    lat.values().col(c) = LogSoftmax(x);
  }
  return lat;
}

inline std::vector<int> RandomLabels(std::mt19937_64 &rng, int U, int vocab) {
  std::vector<int> labels(U);
  for (auto &y : labels) y = static_cast<int>(rng() % vocab);
  return labels;
}

template <typename Fn>
ErrorKind KindOf(Fn &&fn) {
  try {
    fn();
  } catch (const Error &e) {
    return e.kind();
  }
  throw std::runtime_error("no error raised");
}

// Log-distribution at node (t, u) of the label history y[0..u).
using NodeFn = std::function<VectorXd(int t, const std::vector<int> &prefix)>;

// Sums every frame-synchronous alignment of every sequence separately and
// returns the best sequence. Each frame emits at most max_symbols labels
// before its closing blank; EOS ends the alignment without a blank.
inline std::vector<int> ExhaustiveBest(const NodeFn &node, int T, int symbols,
                                const DecodeConfig &cfg) {
  const int blank = symbols - 1, eos = symbols - 2;
  std::map<std::vector<int>, double> total;
  std::function<void(int, int, std::vector<int> &, double)> walk =
      [&](int t, int emitted, std::vector<int> &y, double score) {
        if (t == T) {
          auto [it, fresh] = total.emplace(y, score);
          if (!fresh) it->second = LogAdd(it->second, score);
          return;
        }
        const VectorXd lp = node(t, y);
        walk(t + 1, 0, y, score + lp(blank));
        if (emitted >= cfg.max_symbols_per_frame) return;
        for (int k = 0; k < blank; ++k) {
          if (k == eos) {
            if (!EosAllowed(std::exp(lp(eos)), cfg.alpha_eos, cfg.beta)) continue;
            y.push_back(eos);
            auto [it, fresh] = total.emplace(y, score + cfg.alpha_eos * lp(eos));
            if (!fresh) it->second = LogAdd(it->second, score + cfg.alpha_eos * lp(eos));
            y.pop_back();
            continue;
          }
          y.push_back(k);
          walk(t, emitted + 1, y, score + lp(k));
          y.pop_back();
        }
      };
  std::vector<int> y;
  walk(0, 0, y, 0.0);
  auto best = total.begin();
  for (auto it = total.begin(); it != total.end(); ++it)
    if (it->second > best->second) best = it;
  return best->first;
}

inline DecodeConfig ExhaustiveConfig(int max_symbols) {
  DecodeConfig cfg;
  cfg.beam_size = 512;
  cfg.nbest_k = 4;
  cfg.fallback_enabled = false;
  cfg.stop_at_endpoint = false;
  cfg.max_symbols_per_frame = max_symbols;
  cfg.token_expansions = 8;
  cfg.alpha_eos = 1.0;
  cfg.beta = 0.0;
  return cfg;
}

}  // namespace rnntep::testing

#endif  // RNNTEP_TESTS_TEST_UTIL_H_
