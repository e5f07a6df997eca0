// rnntep/params.cc
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

#include "rnntep/params.h"

#include <cstring>
#include <random>

namespace rnntep {

namespace {

void FnvMix(std::uint64_t &h, const void *data, std::size_t n) {
  const auto *bytes = static_cast<const unsigned char *>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ull;
  }
}

}  // namespace

MatrixXd &ParamSet::Add(const std::string &name, Eigen::Index rows,
                        Eigen::Index cols) {
  if (index_.count(name))
    Fail(ErrorKind::kUsage, "params", "duplicate parameter name " + name);
  index_.emplace(name, arrays_.size());
  names_.push_back(name);
  arrays_.push_back(MatrixXd::Zero(rows, cols));
  return arrays_.back();
}

bool ParamSet::Has(std::string_view name) const {
  return index_.find(name) != index_.end();
}

std::size_t ParamSet::IndexOf(std::string_view name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    Fail(ErrorKind::kUsage, "params",
         "unknown parameter " + std::string(name));
  return it->second;
}

MatrixXd &ParamSet::operator[](std::string_view name) {
  return arrays_[IndexOf(name)];
}

const MatrixXd &ParamSet::operator[](std::string_view name) const {
  return arrays_[IndexOf(name)];
}

Eigen::Index ParamSet::NumScalars() const {
  Eigen::Index n = 0;
  for (const auto &a : arrays_) n += a.size();
  return n;
}

VectorXd ParamSet::Flatten() const {
  VectorXd flat(NumScalars());
  Eigen::Index offset = 0;
  for (const auto &a : arrays_) {
    flat.segment(offset, a.size()) =
        Eigen::Map<const VectorXd>(a.data(), a.size());
    offset += a.size();
  }
  return flat;
}

void ParamSet::Unflatten(const VectorXd &flat) {
  if (flat.size() != NumScalars())
    Fail(ErrorKind::kShape, "params", "flat vector size mismatch");
  Eigen::Index offset = 0;
  for (auto &a : arrays_) {
    Eigen::Map<VectorXd>(a.data(), a.size()) = flat.segment(offset, a.size());
    offset += a.size();
  }
}

ParamSet ParamSet::ZerosLike() const {
  ParamSet out;
  for (std::size_t i = 0; i < arrays_.size(); ++i)
    out.Add(names_[i], arrays_[i].rows(), arrays_[i].cols());
  return out;
}

void ParamSet::SetZero() {
  for (auto &a : arrays_) a.setZero();
}

void ParamSet::FillUniform(double low, double high, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(low, high);
  for (auto &a : arrays_)
    for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = dist(rng);
}

void ParamSet::AddScaled(const ParamSet &other, double scale) {
  if (!SameShape(other))
    Fail(ErrorKind::kShape, "params", "AddScaled on mismatched sets");
  for (std::size_t i = 0; i < arrays_.size(); ++i)
    arrays_[i] += scale * other.arrays_[i];
}

void ParamSet::Scale(double scale) {
  for (auto &a : arrays_) a *= scale;
}

double ParamSet::SquaredNorm() const {
  double s = 0;
  for (const auto &a : arrays_) s += a.squaredNorm();
  return s;
}

bool ParamSet::AllFinite() const {
  for (const auto &a : arrays_)
    if (!a.allFinite()) return false;
  return true;
}

bool ParamSet::SameShape(const ParamSet &other) const {
  if (names_ != other.names_) return false;
  for (std::size_t i = 0; i < arrays_.size(); ++i)
    if (arrays_[i].rows() != other.arrays_[i].rows() ||
        arrays_[i].cols() != other.arrays_[i].cols())
      return false;
  return true;
}

ParamSet ParamSet::Select(std::string_view prefix) const {
  ParamSet out;
  for (std::size_t i = 0; i < arrays_.size(); ++i)
    if (std::string_view(names_[i]).starts_with(prefix))
      out.Add(names_[i], 0, 0) = arrays_[i];
  return out;
}

void ParamSet::Merge(const ParamSet &other) {
  for (std::size_t i = 0; i < other.size(); ++i) {
    if (Has(other.names_[i]))
      (*this)[other.names_[i]] = other.arrays_[i];
    else
      Add(other.names_[i], 0, 0) = other.arrays_[i];
  }
}

std::uint64_t ParamSet::Fingerprint() const {
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = 0; i < arrays_.size(); ++i) {
    FnvMix(h, names_[i].data(), names_[i].size());
    const std::int64_t shape[2] = {arrays_[i].rows(), arrays_[i].cols()};
    FnvMix(h, shape, sizeof(shape));
    FnvMix(h, arrays_[i].data(), sizeof(double) * arrays_[i].size());
  }
  return h;
}

bool ParamSet::operator==(const ParamSet &other) const {
  if (!SameShape(other)) return false;
  for (std::size_t i = 0; i < arrays_.size(); ++i)
    if (std::memcmp(arrays_[i].data(), other.arrays_[i].data(),
                    sizeof(double) * arrays_[i].size()) != 0)
      return false;
  return true;
}

}  // namespace rnntep
