// rnntep/params.h
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

#ifndef RNNTEP_PARAMS_H_
#define RNNTEP_PARAMS_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "rnntep/numerics.h"

namespace rnntep {

// Ordered collection of named dense parameter arrays. The insertion order
// defines the flat-vector layout used by the optimiser, the gradient checks
// and the checkpoint writer.
class ParamSet {
 public:
  ParamSet() = default;

  // Adds a zero-initialised array; names must be unique.
  MatrixXd &Add(const std::string &name, Eigen::Index rows, Eigen::Index cols);

  bool Has(std::string_view name) const;
  MatrixXd &operator[](std::string_view name);
  const MatrixXd &operator[](std::string_view name) const;

  std::size_t size() const { return arrays_.size(); }
  const std::string &name(std::size_t i) const { return names_[i]; }
  MatrixXd &array(std::size_t i) { return arrays_[i]; }
  const MatrixXd &array(std::size_t i) const { return arrays_[i]; }

  Eigen::Index NumScalars() const;
  VectorXd Flatten() const;
  void Unflatten(const VectorXd &flat);

  // Same names and shapes, all zeros.
  ParamSet ZerosLike() const;
  void SetZero();
  void FillUniform(double low, double high, std::uint64_t seed);

  // this += scale * other (shapes must match).
  void AddScaled(const ParamSet &other, double scale);
  void Scale(double scale);
  double SquaredNorm() const;
  bool AllFinite() const;
  bool SameShape(const ParamSet &other) const;

  // Subset of arrays whose name starts with prefix.
  ParamSet Select(std::string_view prefix) const;
  // Copies every array of other into this, adding missing names.
  void Merge(const ParamSet &other);

  // 64-bit FNV-1a over names, shapes and raw values. Used to prove that
  // frozen parameter groups were not touched.
  std::uint64_t Fingerprint() const;

  bool operator==(const ParamSet &other) const;

 private:
  std::size_t IndexOf(std::string_view name) const;

  std::vector<std::string> names_;
  std::vector<MatrixXd> arrays_;
  std::map<std::string, std::size_t, std::less<>> index_;
};

}  // namespace rnntep

#endif  // RNNTEP_PARAMS_H_
