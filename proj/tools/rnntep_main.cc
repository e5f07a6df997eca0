// rnntep/rnntep_main.cc
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

#include <cstdint>
#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "rnntep/gradcheck.h"
#include "rnntep/pipeline.h"

using namespace rnntep;

namespace {

struct Flags {
  std::string config;
  std::string stage;
  std::string checkpoint;
  std::string out;
  int jobs = 0;
  std::optional<std::uint64_t> seed;
  std::string break_suite;
};

CommandContext MakeContext(const Flags &f) {
  CommandContext ctx;
  ctx.cfg = f.config.empty() ? ExperimentConfig{} : LoadConfig(f.config);
  if (f.seed) {
    ctx.cfg.seed = *f.seed;
  }
  if (f.jobs > 0) ctx.cfg.jobs = f.jobs;
  FinalizeConfig(ctx.cfg);
  ctx.jobs = ctx.cfg.jobs;
  ctx.out = f.out.empty() ? std::filesystem::path(ctx.cfg.output_dir)
                          : std::filesystem::path(f.out);
  return ctx;
}

std::filesystem::path RequireCheckpoint(const Flags &f, const char *cmd) {
  if (f.checkpoint.empty())
    Fail(ErrorKind::kUsage, "cli", std::string(cmd) + " requires --checkpoint");
  return f.checkpoint;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Streaming transducer with joint endpointing: data, training, "
               "decoding and evaluation."};
  app.require_subcommand(1);
  Flags f;
  auto common = [&f](CLI::App *cmd) {
    cmd->add_option("--config", f.config, "Experiment config file");
    cmd->add_option("--out", f.out, "Output directory (default: experiment.output_dir)");
    cmd->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
    cmd->add_option("--seed", f.seed, "Master seed (overrides the config)");
  };
  auto *generate = app.add_subcommand("generate", "Write the train/test corpus");
  common(generate);
  auto *train = app.add_subcommand("train", "Run one training stage");
  common(train);
  train->add_option("--stage", f.stage, "rnnt_ce, mwer, las_ce or las_mwer")->required();
  train->add_option("--checkpoint", f.checkpoint, "Base checkpoint");
  auto *decode = app.add_subcommand("decode", "Decode the test split");
  common(decode);
  decode->add_option("--checkpoint", f.checkpoint, "Model checkpoint");
  auto *sweep = app.add_subcommand("sweep", "Sweep alpha_eos x beta on the test split");
  common(sweep);
  sweep->add_option("--checkpoint", f.checkpoint, "Model checkpoint");
  auto *gradcheck = app.add_subcommand("gradcheck", "Finite-difference gradient checks");
  common(gradcheck);
  gradcheck->add_option("--break", f.break_suite,
                        "Corrupt one suite's analytic gradient (test hook)");
  auto *run_all = app.add_subcommand("run-all", "Full ladder, sweeps and trend table");
  common(run_all);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    return app.exit(e);
  }

  try {
    if (*gradcheck) {
      GradCheckOptions opts;
      if (f.seed) opts.seed = *f.seed;
      opts.break_suite = f.break_suite;
      const auto results = RunGradChecks(opts);
      std::cout << FormatGradCheckReport(results);
      for (const auto &r : results)
        if (!r.passed) {
          std::cerr << "error[training] gradcheck: gradient mismatch in " << r.name
                    << "\n";
          return 1;
        }
      return 0;
    }
    const CommandContext ctx = MakeContext(f);
    if (*generate) {
      CmdGenerate(ctx);
    } else if (*train) {
      std::optional<std::filesystem::path> base;
      if (!f.checkpoint.empty()) base = f.checkpoint;
      CmdTrain(ctx, f.stage, base);
    } else if (*decode) {
      CmdDecode(ctx, RequireCheckpoint(f, "decode"));
    } else if (*sweep) {
      CmdSweep(ctx, RequireCheckpoint(f, "sweep"));
    } else if (*run_all) {
      const LadderReport report = CmdRunAll(ctx);
      std::cout << TrendsJson(report);
      return report.all_passed() ? 0 : 2;
    }
  } catch (const Error &e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception &e) {
    std::cerr << "error[io] cli: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
