// rnntep/decoder.h
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

#ifndef RNNTEP_DECODER_H_
#define RNNTEP_DECODER_H_

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rnntep/datagen.h"
#include "rnntep/model.h"

namespace rnntep {

struct DecodeConfig {
  int beam_size = 4;
  int nbest_k = 4;
  double alpha_eos = 1.0;
  double beta = 0.5;
  int fallback_silence_frames = 4;
  bool fallback_enabled = true;
  // Off for models trained without the end-of-query token.
  bool eos_enabled = true;
  int max_symbols_per_frame = 2;
  int token_expansions = 4;
  // Stop consuming frames once the endpoint is declared.
  bool stop_at_endpoint = true;
  // Declare the endpoint when any beam entry (instead of the best one) is
  // EOS-terminated.
  bool endpoint_on_any = false;
};

void ValidateDecodeConfig(const DecodeConfig &cfg);

enum class EndpointSource { kNone, kEos, kFallback };
std::string_view EndpointSourceName(EndpointSource source);

struct Hypothesis {
  std::vector<int> tokens;
  std::vector<int> token_frames;  // input frame at which each token was emitted
  double log_score = 0;
  bool terminated = false;
  std::optional<int> endpoint_frame;
  // alpha_eos * log p(EOS) included in log_score; 0 without EOS.
  double eos_score = 0;

  bool ends_with_eos(int eos) const {
    return !tokens.empty() && tokens.back() == eos;
  }
};

struct DecodeResult {
  std::vector<Hypothesis> nbest;  // sorted by log_score, distinct sequences
  std::optional<int> endpoint_frame;
  EndpointSource source = EndpointSource::kNone;
  int frames_consumed = 0;  // model frames

  const Hypothesis &best() const { return nbest.front(); }
};

// p_eos^alpha_eos >= beta.
bool EosAllowed(double p_eos, double alpha_eos, double beta);

// First frame of a posterior stream at which EOS passes the gate.
std::optional<int> FirstAllowedEosFrame(std::span<const double> p_eos,
                                        double alpha_eos, double beta);

// First f such that frames f-silence_frames .. f-1 are all classified as
// silence.
std::optional<int> FallbackEoq(const FrameMatrix &features,
                               const PrototypeTable &prototypes,
                               int silence_frames);

// (endpoint - t_eos) * frame_ms; negative for premature endpoints.
double LatencyMs(int endpoint_frame, int t_eos, double frame_ms);

// Per-frame output distributions for a label history.
struct PredictorState {
  int num_tokens = 0;
  RnnState rnn;
  VectorXd joint_proj;
};

class StepScorer {
 public:
  virtual ~StepScorer() = default;
  virtual int frames() const = 0;
  virtual int symbols() const = 0;  // V + 1, blank last
  virtual PredictorState Initial() const = 0;
  virtual PredictorState Advance(const PredictorState &state, int token) const = 0;
  virtual VectorXd LogProbs(int frame, const PredictorState &state) const = 0;
};

class ModelScorer : public StepScorer {
 public:
  ModelScorer(const ParamSet &params, const ModelConfig &cfg,
              const EncoderStates &encoder);
  int frames() const override { return static_cast<int>(enc_proj_.cols()); }
  int symbols() const override { return cfg_.vocab().num_symbols(); }
  PredictorState Initial() const override;
  PredictorState Advance(const PredictorState &state, int token) const override;
  VectorXd LogProbs(int frame, const PredictorState &state) const override;

 private:
  const ParamSet &params_;
  const ModelConfig &cfg_;
  MatrixXd enc_proj_;
};

// Reads node (t, number of emitted tokens) of a fixed lattice; histories
// longer than U reuse the final row.
class LatticeScorer : public StepScorer {
 public:
  explicit LatticeScorer(const LogitLattice &lattice) : lattice_(lattice) {}
  int frames() const override { return lattice_.frames(); }
  int symbols() const override { return lattice_.symbols(); }
  PredictorState Initial() const override { return {}; }
  PredictorState Advance(const PredictorState &state, int) const override {
    PredictorState next;
    next.num_tokens = state.num_tokens + 1;
    return next;
  }
  VectorXd LogProbs(int frame, const PredictorState &state) const override;

 private:
  const LogitLattice &lattice_;
};

// Frame-synchronous search. fallback_frame (input frames) is where an
// external end-of-query detector fires; stride maps model to input frames.
DecodeResult BeamSearch(const StepScorer &scorer, const DecodeConfig &cfg,
                        std::optional<int> fallback_frame = std::nullopt,
                        int stride = 1, int input_frames = -1);

DecodeResult BeamSearch(const ParamSet &params, const ModelConfig &mcfg,
                        const FrameMatrix &features, const DecodeConfig &cfg,
                        const PrototypeTable *endpointer);

// One line per utterance: id, top-1 ids, log_score, endpoint (-1 if none),
// endpoint source; tab separated.
struct DecodeRecord {
  std::string id;
  std::vector<int> tokens;
  double log_score = 0;
  std::optional<int> endpoint_frame;
  EndpointSource source = EndpointSource::kNone;
};

std::string FormatDecodeRecord(const DecodeRecord &rec);
DecodeRecord ParseDecodeRecord(const std::string &line);
void WriteDecodeOutput(const std::filesystem::path &path,
                       const std::vector<DecodeRecord> &records);
std::vector<DecodeRecord> ReadDecodeOutput(const std::filesystem::path &path);

}  // namespace rnntep

#endif  // RNNTEP_DECODER_H_
