// rnntep/binary_io.h
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

// Little-endian fixed-width readers/writers shared by the corpus and
// checkpoint formats.

#ifndef RNNTEP_BINARY_IO_H_
#define RNNTEP_BINARY_IO_H_

#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <type_traits>

#include "rnntep/error.h"

namespace rnntep::binio {

static_assert(std::endian::native == std::endian::little,
              "record formats assume a little-endian host");

template <typename T>
void Put(std::ostream &os, T value) {
  static_assert(std::is_arithmetic_v<T>);
  os.write(reinterpret_cast<const char *>(&value), sizeof(T));
}

template <typename T>
T Get(std::istream &is, const char *what) {
  static_assert(std::is_arithmetic_v<T>);
  T value{};
  is.read(reinterpret_cast<char *>(&value), sizeof(T));
  if (!is) Fail(ErrorKind::kIo, "binio", std::string("truncated ") + what);
  return value;
}

inline void PutString(std::ostream &os, const std::string &s) {
  Put<std::uint32_t>(os, static_cast<std::uint32_t>(s.size()));
  os.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string GetString(std::istream &is, const char *what) {
  const auto n = Get<std::uint32_t>(is, what);
  if (n > (1u << 20)) Fail(ErrorKind::kIo, "binio", "oversized string field");
  std::string s(n, '\0');
  is.read(s.data(), n);
  if (!is) Fail(ErrorKind::kIo, "binio", std::string("truncated ") + what);
  return s;
}

inline void PutDoubles(std::ostream &os, const double *data, std::size_t n) {
  os.write(reinterpret_cast<const char *>(data),
           static_cast<std::streamsize>(n * sizeof(double)));
}

inline void GetDoubles(std::istream &is, double *data, std::size_t n,
                       const char *what) {
  is.read(reinterpret_cast<char *>(data),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!is) Fail(ErrorKind::kIo, "binio", std::string("truncated ") + what);
}

}  // namespace rnntep::binio

#endif  // RNNTEP_BINARY_IO_H_
