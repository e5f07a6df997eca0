// rnntep/datagen.h
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

#ifndef RNNTEP_DATAGEN_H_
#define RNNTEP_DATAGEN_H_

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "rnntep/numerics.h"

namespace rnntep {

// Token ids 0..V-2 are speech tokens, V-1 is the end-of-query token and V
// (one past the vocabulary) is blank.
struct Vocabulary {
  int size = 0;  // V, including EOS, excluding blank

  int eos() const { return size - 1; }
  int blank() const { return size; }
  int num_symbols() const { return size + 1; }
  int num_speech_tokens() const { return size - 1; }
};

struct Utterance {
  std::string id;
  FrameMatrix features;     // T x d
  std::vector<int> labels;  // y_1..y_U, y_U == EOS
  int t_eos = 0;            // first frame after the last token's frames

  int num_frames() const { return static_cast<int>(features.rows()); }
  int feature_dim() const { return static_cast<int>(features.cols()); }
};

struct IntRange {
  int min = 0;
  int max = 0;
};

struct CorpusSpec {
  int vocab_size = 8;
  int feature_dim = 8;
  int frames_per_token = 3;
  IntRange tokens_per_utterance{2, 6};
  IntRange leading_silence_frames{0, 2};
  IntRange trailing_silence_frames{2, 10};
  // Short silences between tokens. They look like the end of speech for a
  // few frames, which is what makes premature end-of-query emission possible.
  double pause_probability = 0.0;
  IntRange pause_frames{1, 2};
  double feature_noise_std = 0.3;
  int num_utterances = 100;
  std::uint64_t seed = 1;
  double frame_ms = 60.0;
};

inline constexpr int kMaxVocabSize = 64;

void ValidateCorpusSpec(const CorpusSpec &spec);

// Unit-norm prototype per speech token plus one silence prototype, all drawn
// from the corpus seed.
struct PrototypeTable {
  MatrixXd tokens;  // d x (V-1)
  VectorXd silence;

  // Nearest-prototype classification of one frame.
  bool IsSilence(const Eigen::Ref<const VectorXd> &frame) const;
};

PrototypeTable MakePrototypes(const CorpusSpec &spec);

std::vector<Utterance> GenerateCorpus(const CorpusSpec &spec);

// Deterministic split by hash of the utterance id; the train side receives
// round(fraction * n) utterances. Both sides keep corpus order.
std::pair<std::vector<Utterance>, std::vector<Utterance>> SplitCorpus(
    const std::vector<Utterance> &corpus, double train_fraction);

std::uint64_t HashId(const std::string &id);

// Binary record file, layout documented in docs/formats.md.
void WriteCorpus(const std::filesystem::path &path,
                 const std::vector<Utterance> &corpus);
std::vector<Utterance> ReadCorpus(const std::filesystem::path &path);

// Copy of the utterance with the trailing EOS label removed (the no-EOS
// baseline trains on these).
Utterance StripEos(const Utterance &utt, const Vocabulary &vocab);

}  // namespace rnntep

#endif  // RNNTEP_DATAGEN_H_
