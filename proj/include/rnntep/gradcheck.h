// rnntep/gradcheck.h
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

// Central finite-difference checks of every hand-derived gradient on tiny
// models.

#ifndef RNNTEP_GRADCHECK_H_
#define RNNTEP_GRADCHECK_H_

#include <cstdint>
#include <string>
#include <vector>

namespace rnntep {

struct GradCheckResult {
  std::string name;
  int num_params = 0;
  double max_rel_error = 0;
  double tolerance = 0;
  bool passed = false;
};

struct GradCheckOptions {
  std::uint64_t seed = 3;
  double epsilon = 1e-5;
  double tolerance = 1e-4;
  // Test hook: the analytic gradient of the named suite is corrupted, which
  // must make that suite (and only that suite) fail.
  std::string break_suite;
};

// Suite names: rnnt_lattice, penalty_scale, rnnt_ce, mwer_scores, mwer_model,
// las_ce.
std::vector<std::string> GradCheckSuites();

std::vector<GradCheckResult> RunGradChecks(const GradCheckOptions &opts);

std::string FormatGradCheckReport(const std::vector<GradCheckResult> &results);

}  // namespace rnntep

#endif  // RNNTEP_GRADCHECK_H_
