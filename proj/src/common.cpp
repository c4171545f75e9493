/* Copyright 2026 The actdiag Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#include "actdiag/common.hpp"

#include <charconv>

namespace actdiag {

namespace {

std::string parse_message(std::string_view source, std::size_t line,
                          std::string_view what) {
  std::string msg(source);
  msg += ":";
  msg += std::to_string(line);
  msg += ": ";
  msg += what;
  return msg;
}

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

ParseError::ParseError(std::string_view source, std::size_t line,
                       std::string_view what)
    : Error(parse_message(source, line, what)), line_(line) {}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  return splitmix(splitmix(splitmix(seed) ^ a) ^ (b * 0xd6e8feb86659fd93ULL));
}

std::string format_double(double v) {
  if (std::isnan(v)) return "";
  if (v == 0.0) return "0";  // folds -0
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace actdiag
