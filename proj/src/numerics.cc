// rnntep/numerics.cc
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

#include "rnntep/numerics.h"

#include <string>

namespace rnntep {

std::string_view ErrorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kUsage: return "usage";
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kShape: return "shape";
    case ErrorKind::kLoss: return "loss";
    case ErrorKind::kTraining: return "training";
    case ErrorKind::kDecode: return "decode";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

Error::Error(ErrorKind kind, std::string component, const std::string &message)
    : std::runtime_error("error[" + std::string(ErrorKindName(kind)) + "] " +
                         component + ": " + message),
      kind_(kind),
      component_(std::move(component)),
      message_(message) {}

void Fail(ErrorKind kind, std::string component, const std::string &message) {
  throw Error(kind, std::move(component), message);
}

VectorXd FiniteDifferenceGradient(
    const std::function<double(const VectorXd &)> &loss_fn,
    const VectorXd &params, double epsilon) {
  if (!(epsilon > 0))
    Fail(ErrorKind::kUsage, "numerics", "finite-difference epsilon must be > 0");
  VectorXd grad(params.size());
  VectorXd probe = params;
  for (Eigen::Index i = 0; i < params.size(); ++i) {
    probe(i) = params(i) + epsilon;
    const double up = loss_fn(probe);
    probe(i) = params(i) - epsilon;
    const double down = loss_fn(probe);
    probe(i) = params(i);
    grad(i) = (up - down) / (2 * epsilon);
  }
  return grad;
}

double MaxRelativeError(const VectorXd &a, const VectorXd &b, double floor) {
  if (a.size() != b.size())
    Fail(ErrorKind::kShape, "numerics", "relative error of unequal sizes");
  double worst = 0;
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    const double scale = std::max({std::abs(a(i)), std::abs(b(i)), floor});
    worst = std::max(worst, std::abs(a(i) - b(i)) / scale);
  }
  return worst;
}

}  // namespace rnntep
