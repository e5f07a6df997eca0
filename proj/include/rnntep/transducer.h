// rnntep/transducer.h
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

// Transducer likelihood over a (T x (U+1)) lattice of log-distributions.
//
// Node (t, u) means "u labels emitted, frame t being consumed". From a node a
// path either emits blank and moves to (t+1, u) or emits y_{u+1} and moves to
// (t, u+1). Every path starts at (0, 0) and ends with a blank emitted at
// (T-1, U).

#ifndef RNNTEP_TRANSDUCER_H_
#define RNNTEP_TRANSDUCER_H_

#include <algorithm>
#include <bit>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "rnntep/numerics.h"

namespace rnntep {

template <typename Scalar>
class BasicLattice {
 public:
  BasicLattice() = default;
  BasicLattice(int num_frames, int num_labels, int num_symbols)
      : frames_(num_frames),
        labels_(num_labels),
        values_(Matrix<Scalar>::Zero(num_symbols,
                                     num_frames * (num_labels + 1))) {
    if (num_frames < 1 || num_labels < 0 || num_symbols < 2)
      Fail(ErrorKind::kShape, "transducer", "invalid lattice shape");
  }

  int frames() const { return frames_; }        // T
  int labels() const { return labels_; }        // U
  int symbols() const { return static_cast<int>(values_.rows()); }  // V + 1
  int blank() const { return symbols() - 1; }
  int eos() const { return symbols() - 2; }

  Eigen::Index NodeIndex(int t, int u) const { return t * (labels_ + 1) + u; }

  Scalar &operator()(int t, int u, int k) { return values_(k, NodeIndex(t, u)); }
  Scalar operator()(int t, int u, int k) const {
    return values_(k, NodeIndex(t, u));
  }

  auto node(int t, int u) { return values_.col(NodeIndex(t, u)); }
  auto node(int t, int u) const { return values_.col(NodeIndex(t, u)); }

  // symbols x (T * (U+1)); column NodeIndex(t, u) holds node (t, u).
  Matrix<Scalar> &values() { return values_; }
  const Matrix<Scalar> &values() const { return values_; }

 private:
  int frames_ = 0;
  int labels_ = 0;
  Matrix<Scalar> values_;
};

using LogitLattice = BasicLattice<double>;

struct PenaltyConfig {
  double alpha_early = 0.0;
  double alpha_late = 0.0;
  int t_buffer = 0;  // frames
};

// max(0, a_early (t_eos - t)) + max(0, a_late (t - t_eos - t_buffer)).
inline double EndpointPenalty(int t, int t_eos, const PenaltyConfig &cfg) {
  return std::max(0.0, cfg.alpha_early * (t_eos - t)) +
         std::max(0.0, cfg.alpha_late * (t - t_eos - cfg.t_buffer));
}

inline void ValidatePenaltyConfig(const PenaltyConfig &cfg) {
  if (!(cfg.alpha_early >= 0) || !(cfg.alpha_late >= 0))
    Fail(ErrorKind::kConfig, "transducer", "penalty scales must be >= 0");
  if (cfg.t_buffer < 0)
    Fail(ErrorKind::kConfig, "transducer", "t_buffer must be >= 0");
}

// Subtracts the early/late penalty from the EOS emission entry of the final
// label row (u = U-1, the transition that produces y_U) at every frame. The
// slice is not renormalised.
template <typename Scalar>
void ApplyEndpointPenaltyInPlace(BasicLattice<Scalar> &lattice, int t_eos,
                                 const PenaltyConfig &cfg) {
  ValidatePenaltyConfig(cfg);
  if (lattice.labels() < 1)
    Fail(ErrorKind::kUsage, "transducer", "penalty needs a final label row");
  if (t_eos < 0 || t_eos > lattice.frames())
    Fail(ErrorKind::kUsage, "transducer", "t_eos outside [0, T]");
  const int u = lattice.labels() - 1;
  const int eos = lattice.eos();
  for (int t = 0; t < lattice.frames(); ++t)
    lattice(t, u, eos) -= static_cast<Scalar>(EndpointPenalty(t, t_eos, cfg));
}

template <typename Scalar>
BasicLattice<Scalar> ApplyEndpointPenalty(BasicLattice<Scalar> lattice,
                                          int t_eos, const PenaltyConfig &cfg) {
  ApplyEndpointPenaltyInPlace(lattice, t_eos, cfg);
  return lattice;
}

namespace detail {

template <typename Scalar>
void CheckLabels(const BasicLattice<Scalar> &lattice,
                 std::span<const int> labels) {
  if (static_cast<int>(labels.size()) != lattice.labels())
    Fail(ErrorKind::kShape, "transducer", "label count does not match lattice");
  for (int y : labels)
    if (y < 0 || y >= lattice.blank())
      Fail(ErrorKind::kUsage, "transducer", "label id out of range");
  if (lattice.labels() > lattice.frames())
    Fail(ErrorKind::kLoss, "transducer",
         "U > T: sequence has zero likelihood (infinite loss)");
}

}  // namespace detail

// alpha(t, u): log-probability of reaching node (t, u).
template <typename Scalar>
Matrix<Scalar> ForwardVariables(const BasicLattice<Scalar> &lat,
                                std::span<const int> labels) {
  detail::CheckLabels(lat, labels);
  const int T = lat.frames(), U = lat.labels(), blank = lat.blank();
  Matrix<Scalar> alpha(T, U + 1);
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      if (t == 0 && u == 0) {
        alpha(0, 0) = 0;
        continue;
      }
      Scalar a = kLogZero<Scalar>;
      if (t > 0) a = alpha(t - 1, u) + lat(t - 1, u, blank);
      if (u > 0) a = LogAdd(a, alpha(t, u - 1) + lat(t, u - 1, labels[u - 1]));
      alpha(t, u) = a;
    }
  }
  return alpha;
}

// beta(t, u): log-probability of finishing from node (t, u), including the
// terminal blank.
template <typename Scalar>
Matrix<Scalar> BackwardVariables(const BasicLattice<Scalar> &lat,
                                 std::span<const int> labels) {
  detail::CheckLabels(lat, labels);
  const int T = lat.frames(), U = lat.labels(), blank = lat.blank();
  Matrix<Scalar> beta(T, U + 1);
  for (int t = T - 1; t >= 0; --t) {
    for (int u = U; u >= 0; --u) {
      if (t == T - 1 && u == U) {
        beta(t, u) = lat(t, u, blank);
        continue;
      }
      Scalar b = kLogZero<Scalar>;
      if (t < T - 1) b = beta(t + 1, u) + lat(t, u, blank);
      if (u < U) b = LogAdd(b, beta(t, u + 1) + lat(t, u, labels[u]));
      beta(t, u) = b;
    }
  }
  return beta;
}

// -log P(y | x), summed over all monotone alignments.
template <typename Scalar>
Scalar RnntLoss(const BasicLattice<Scalar> &lat, std::span<const int> labels) {
  const Matrix<Scalar> alpha = ForwardVariables(lat, labels);
  const int T = lat.frames(), U = lat.labels();
  const Scalar log_p = alpha(T - 1, U) + lat(T - 1, U, lat.blank());
  if (log_p == kLogZero<Scalar>)
    Fail(ErrorKind::kLoss, "transducer", "all alignments have zero probability");
  return -log_p;
}

template <typename Scalar>
struct RnntLossAndGrad {
  Scalar loss = 0;
  BasicLattice<Scalar> grad;  // d(loss) / d(lattice entry)
};

template <typename Scalar>
RnntLossAndGrad<Scalar> RnntGrad(const BasicLattice<Scalar> &lat,
                                 std::span<const int> labels) {
  const Matrix<Scalar> alpha = ForwardVariables(lat, labels);
  const Matrix<Scalar> beta = BackwardVariables(lat, labels);
  const int T = lat.frames(), U = lat.labels(), blank = lat.blank();
  const Scalar log_p = beta(0, 0);
  if (log_p == kLogZero<Scalar>)
    Fail(ErrorKind::kLoss, "transducer", "all alignments have zero probability");

  RnntLossAndGrad<Scalar> out{-log_p,
                              BasicLattice<Scalar>(T, U, lat.symbols())};
  for (int t = 0; t < T; ++t) {
    for (int u = 0; u <= U; ++u) {
      const Scalar a = alpha(t, u);
      if (a == kLogZero<Scalar>) continue;
      if (t < T - 1) {
        out.grad(t, u, blank) =
            -std::exp(a + lat(t, u, blank) + beta(t + 1, u) - log_p);
      } else if (u == U) {
        out.grad(t, u, blank) = -std::exp(a + lat(t, u, blank) - log_p);
      }
      if (u < U)
        out.grad(t, u, labels[u]) =
            -std::exp(a + lat(t, u, labels[u]) + beta(t, u + 1) - log_p);
    }
  }
  return out;
}

// Posterior probability that y_U (EOS) is emitted while consuming frame t.
template <typename Scalar>
Vector<Scalar> FinalLabelOccupancy(const RnntLossAndGrad<Scalar> &result) {
  const int U = result.grad.labels();
  Vector<Scalar> occ(result.grad.frames());
  for (int t = 0; t < result.grad.frames(); ++t)
    occ(t) = -result.grad(t, U - 1, result.grad.eos());
  return occ;
}

// d(loss)/d(alpha_late) of a penalised lattice: the EOS entry at frame t is
// shifted by -alpha_late * max(0, t - t_eos - t_buffer).
template <typename Scalar>
Scalar LatePenaltyScaleGradient(const RnntLossAndGrad<Scalar> &result,
                                int t_eos, int t_buffer) {
  const Vector<Scalar> occ = FinalLabelOccupancy(result);
  Scalar g = 0;
  for (int t = 0; t < occ.size(); ++t)
    g += occ(t) * static_cast<Scalar>(std::max(0, t - t_eos - t_buffer));
  return g;
}

// Explicit path enumeration. Exponential; only for verification.
inline constexpr int kBruteForceMaxSteps = 14;

template <typename Scalar>
Scalar BruteForceLoss(const BasicLattice<Scalar> &lat,
                      std::span<const int> labels) {
  const int T = lat.frames(), U = lat.labels(), blank = lat.blank();
  if (T + U > kBruteForceMaxSteps)
    Fail(ErrorKind::kUsage, "transducer",
         "brute-force enumeration bound T + U <= 14 exceeded");
  if (static_cast<int>(labels.size()) != U)
    Fail(ErrorKind::kShape, "transducer", "label count does not match lattice");

  std::vector<Scalar> path_scores;
  // Each path is T-1 blank moves and U emissions (in some order), then the
  // terminal blank at (T-1, U).
  const int steps = T - 1 + U;
  for (unsigned mask = 0; mask < (1u << steps); ++mask) {
    if (std::popcount(mask) != U) continue;
    int t = 0, u = 0;
    Scalar score = 0;
    for (int s = 0; s < steps; ++s) {
      if (mask & (1u << s)) {
        score += lat(t, u, labels[u]);
        ++u;
      } else {
        score += lat(t, u, blank);
        ++t;
      }
    }
    score += lat(T - 1, U, blank);
    path_scores.push_back(score);
  }
  const Scalar log_p = LogSumExp(Eigen::Map<const Vector<Scalar>>(
      path_scores.data(), static_cast<Eigen::Index>(path_scores.size())));
  return -log_p;
}

}  // namespace rnntep

#endif  // RNNTEP_TRANSDUCER_H_
