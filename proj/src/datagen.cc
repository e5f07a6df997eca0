// rnntep/datagen.cc
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

#include "rnntep/datagen.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>

#include "binary_io.h"

namespace rnntep {

namespace {

constexpr char kCorpusMagic[8] = {'R', 'N', 'T', 'P', 'C', 'O', 'R', 'P'};
constexpr std::uint32_t kCorpusVersion = 1;

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

void CheckRange(const IntRange &r, int lowest, const char *field) {
  if (r.min < lowest || r.max < r.min)
    Fail(ErrorKind::kConfig, "datagen",
         std::string("invalid range for ") + field);
}

VectorXd RandomUnitVector(int dim, std::mt19937_64 &rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  VectorXd v(dim);
  do {
    for (int i = 0; i < dim; ++i) v(i) = normal(rng);
  } while (v.norm() < 1e-6);
  return v.normalized();
}

int Uniform(const IntRange &r, std::mt19937_64 &rng) {
  return std::uniform_int_distribution<int>(r.min, r.max)(rng);
}

}  // namespace

void ValidateCorpusSpec(const CorpusSpec &spec) {
  if (spec.vocab_size < 3)
    Fail(ErrorKind::kConfig, "datagen", "vocab_size must be >= 3");
  if (spec.vocab_size > kMaxVocabSize)
    Fail(ErrorKind::kConfig, "datagen",
         "vocab_size exceeds prototype table capacity (" +
             std::to_string(kMaxVocabSize) + ")");
  if (spec.feature_dim < 1)
    Fail(ErrorKind::kConfig, "datagen", "feature_dim must be >= 1");
  if (spec.frames_per_token < 1)
    Fail(ErrorKind::kConfig, "datagen", "frames_per_token must be >= 1");
  CheckRange(spec.tokens_per_utterance, 1, "tokens_per_utterance");
  CheckRange(spec.leading_silence_frames, 0, "leading_silence_frames");
  CheckRange(spec.trailing_silence_frames, 0, "trailing_silence_frames");
  CheckRange(spec.pause_frames, 0, "pause_frames");
  if (!(spec.pause_probability >= 0 && spec.pause_probability <= 1))
    Fail(ErrorKind::kConfig, "datagen", "pause_probability must be in [0,1]");
  if (!(spec.feature_noise_std >= 0))
    Fail(ErrorKind::kConfig, "datagen", "feature_noise_std must be >= 0");
  if (spec.num_utterances < 0)
    Fail(ErrorKind::kConfig, "datagen", "num_utterances must be >= 0");
  if (!(spec.frame_ms > 0))
    Fail(ErrorKind::kConfig, "datagen", "frame_ms must be > 0");
}

bool PrototypeTable::IsSilence(const Eigen::Ref<const VectorXd> &frame) const {
  const double silence_dist = (frame - silence).squaredNorm();
  for (Eigen::Index k = 0; k < tokens.cols(); ++k)
    if ((frame - tokens.col(k)).squaredNorm() < silence_dist) return false;
  return true;
}

PrototypeTable MakePrototypes(const CorpusSpec &spec) {
  ValidateCorpusSpec(spec);
  std::mt19937_64 rng(SplitMix64(spec.seed ^ 0x70726f746full));
  PrototypeTable table;
  table.tokens.resize(spec.feature_dim, spec.vocab_size - 1);
  for (int k = 0; k < spec.vocab_size - 1; ++k)
    table.tokens.col(k) = RandomUnitVector(spec.feature_dim, rng);
  table.silence = RandomUnitVector(spec.feature_dim, rng);
  return table;
}

std::vector<Utterance> GenerateCorpus(const CorpusSpec &spec) {
  const PrototypeTable protos = MakePrototypes(spec);
  const Vocabulary vocab{spec.vocab_size};
  std::vector<Utterance> corpus;
  corpus.reserve(spec.num_utterances);

  for (int n = 0; n < spec.num_utterances; ++n) {
    std::mt19937_64 rng(SplitMix64(spec.seed * 1000003ull + n));
    std::uniform_int_distribution<int> token_dist(0,
                                                  vocab.num_speech_tokens() - 1);
    std::bernoulli_distribution pause_dist(spec.pause_probability);

    const int num_tokens = Uniform(spec.tokens_per_utterance, rng);
    std::vector<int> tokens(num_tokens);
    for (auto &t : tokens) t = token_dist(rng);

    // Frame plan: -1 is silence, otherwise the token whose frame this is.
    std::vector<int> plan(Uniform(spec.leading_silence_frames, rng), -1);
    for (int i = 0; i < num_tokens; ++i) {
      if (i > 0 && pause_dist(rng))
        plan.insert(plan.end(), Uniform(spec.pause_frames, rng), -1);
      plan.insert(plan.end(), spec.frames_per_token, tokens[i]);
    }
    const int t_eos = static_cast<int>(plan.size());
    plan.insert(plan.end(), Uniform(spec.trailing_silence_frames, rng), -1);

    Utterance utt;
    char id[32];
    std::snprintf(id, sizeof(id), "utt-%06d", n);
    utt.id = id;
    utt.t_eos = t_eos;
    utt.labels = tokens;
    utt.labels.push_back(vocab.eos());
    utt.features.resize(static_cast<Eigen::Index>(plan.size()),
                        spec.feature_dim);
    std::normal_distribution<double> noise(0.0, 1.0);
    for (std::size_t t = 0; t < plan.size(); ++t) {
      const VectorXd &proto =
          plan[t] < 0 ? protos.silence : VectorXd(protos.tokens.col(plan[t]));
      for (int j = 0; j < spec.feature_dim; ++j)
        utt.features(static_cast<Eigen::Index>(t), j) =
            proto(j) + spec.feature_noise_std * noise(rng);
    }
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

std::uint64_t HashId(const std::string &id) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : id) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::pair<std::vector<Utterance>, std::vector<Utterance>> SplitCorpus(
    const std::vector<Utterance> &corpus, double train_fraction) {
  if (!(train_fraction > 0 && train_fraction < 1))
    Fail(ErrorKind::kUsage, "datagen", "train_fraction must be in (0,1)");
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return HashId(corpus[a].id) < HashId(corpus[b].id);
  });
  const auto num_train = static_cast<std::size_t>(
      std::llround(train_fraction * static_cast<double>(corpus.size())));
  std::vector<bool> is_train(corpus.size(), false);
  for (std::size_t i = 0; i < num_train; ++i) is_train[order[i]] = true;

  std::pair<std::vector<Utterance>, std::vector<Utterance>> out;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    (is_train[i] ? out.first : out.second).push_back(corpus[i]);
  return out;
}

void WriteCorpus(const std::filesystem::path &path,
                 const std::vector<Utterance> &corpus) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) Fail(ErrorKind::kIo, "datagen", "cannot write " + path.string());
  os.write(kCorpusMagic, sizeof(kCorpusMagic));
  binio::Put<std::uint32_t>(os, kCorpusVersion);
  binio::Put<std::uint32_t>(os, 0);
  binio::Put<std::uint64_t>(os, corpus.size());
  for (const auto &utt : corpus) {
    binio::PutString(os, utt.id);
    binio::Put<std::uint32_t>(os, static_cast<std::uint32_t>(utt.num_frames()));
    binio::Put<std::uint32_t>(os, static_cast<std::uint32_t>(utt.feature_dim()));
    binio::Put<std::int32_t>(os, utt.t_eos);
    binio::Put<std::uint32_t>(os, static_cast<std::uint32_t>(utt.labels.size()));
    for (int y : utt.labels) binio::Put<std::int32_t>(os, y);
    binio::PutDoubles(os, utt.features.data(),
                      static_cast<std::size_t>(utt.features.size()));
  }
  if (!os) Fail(ErrorKind::kIo, "datagen", "write failed for " + path.string());
}

std::vector<Utterance> ReadCorpus(const std::filesystem::path &path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) Fail(ErrorKind::kIo, "datagen", "cannot open " + path.string());
  char magic[8];
  is.read(magic, sizeof(magic));
  if (!is || !std::equal(magic, magic + 8, kCorpusMagic))
    Fail(ErrorKind::kIo, "datagen", "not a corpus file: " + path.string());
  const auto version = binio::Get<std::uint32_t>(is, "version");
  if (version != kCorpusVersion)
    Fail(ErrorKind::kIo, "datagen",
         "unsupported corpus version " + std::to_string(version));
  binio::Get<std::uint32_t>(is, "reserved");
  const auto count = binio::Get<std::uint64_t>(is, "count");

  std::vector<Utterance> corpus;
  corpus.reserve(count);
  for (std::uint64_t n = 0; n < count; ++n) {
    Utterance utt;
    utt.id = binio::GetString(is, "id");
    const auto frames = binio::Get<std::uint32_t>(is, "T");
    const auto dim = binio::Get<std::uint32_t>(is, "d");
    utt.t_eos = binio::Get<std::int32_t>(is, "t_eos");
    const auto num_labels = binio::Get<std::uint32_t>(is, "U");
    if (frames > (1u << 20) || dim > (1u << 16) || num_labels > (1u << 20))
      Fail(ErrorKind::kIo, "datagen", "implausible record header");
    utt.labels.resize(num_labels);
    for (auto &y : utt.labels) y = binio::Get<std::int32_t>(is, "label");
    utt.features.resize(frames, dim);
    binio::GetDoubles(is, utt.features.data(),
                      static_cast<std::size_t>(frames) * dim, "features");
    corpus.push_back(std::move(utt));
  }
  return corpus;
}

Utterance StripEos(const Utterance &utt, const Vocabulary &vocab) {
  Utterance out = utt;
  if (!out.labels.empty() && out.labels.back() == vocab.eos())
    out.labels.pop_back();
  return out;
}

}  // namespace rnntep
