// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wfst/semiring.h"

#include <algorithm>
#include <charconv>
#include <cstdlib>

#include "wfst/errors.h"

namespace wfst {

std::string_view KindName(SemiringKind kind) {
  switch (kind) {
    case SemiringKind::kBoolean:
      return "boolean";
    case SemiringKind::kTropical:
      return "tropical";
    case SemiringKind::kReal:
      return "real";
  }
  return "?";
}

std::optional<SemiringKind> ParseKind(std::string_view name) {
  if (name == "boolean") return SemiringKind::kBoolean;
  if (name == "tropical") return SemiringKind::kTropical;
  if (name == "real") return SemiringKind::kReal;
  return std::nullopt;
}

bool InCarrier(SemiringKind kind, Weight w) {
  if (std::isnan(w)) return false;
  switch (kind) {
    case SemiringKind::kBoolean:
      return w == 0.0 || w == 1.0;
    case SemiringKind::kTropical:
      return w != -kInfinity;
    case SemiringKind::kReal:
      return std::isfinite(w) && w >= 0.0;
  }
  return false;
}

void CheckWeight(SemiringKind kind, Weight w) {
  if (!InCarrier(kind, w)) {
    throw DomainError("weight " + FormatWeight(w) + " outside the " +
                      std::string(KindName(kind)) + " carrier");
  }
}

Weight Combine(SemiringKind kind, Weight a, Weight b) {
  CheckWeight(kind, a);
  CheckWeight(kind, b);
  return PlusFast(kind, a, b);
}

Weight Extend(SemiringKind kind, Weight a, Weight b) {
  CheckWeight(kind, a);
  CheckWeight(kind, b);
  return TimesFast(kind, a, b);
}

Ordering Compare(SemiringKind kind, Weight a, Weight b) {
  if (a == b) return Ordering::kEqual;
  bool a_better = false;
  switch (kind) {
    case SemiringKind::kBoolean:
      a_better = a != 0.0;
      break;
    case SemiringKind::kTropical:
      a_better = a < b;
      break;
    case SemiringKind::kReal:
      a_better = a > b;
      break;
  }
  return a_better ? Ordering::kABetter : Ordering::kBBetter;
}

Weight Divide(SemiringKind kind, Weight b, Weight a) {
  switch (kind) {
    case SemiringKind::kBoolean:
      if (a == 0.0) throw DomainError("division by boolean zero");
      return b;
    case SemiringKind::kTropical:
      if (a == kInfinity) throw DomainError("division by tropical zero");
      if (b == kInfinity) return kInfinity;
      return b - a;
    case SemiringKind::kReal:
      if (a == 0.0) throw DomainError("division by real zero");
      return b / a;
  }
  return b;
}

bool ApproxEqual(Weight a, Weight b, double rel_tol) {
  if (a == b) return true;
  if (!std::isfinite(a) || !std::isfinite(b)) return false;
  const double scale = std::max({1.0, std::fabs(a), std::fabs(b)});
  return std::fabs(a - b) <= rel_tol * scale;
}

std::string FormatWeight(Weight w) {
  if (w == kInfinity) return "inf";
  if (w == -kInfinity) return "-inf";
  if (std::isnan(w)) return "nan";
  if (w == 0.0) return "0";
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), w);
  return std::string(buf, res.ptr);
}

std::optional<Weight> ParseWeight(std::string_view text) {
  if (text == "inf" || text == "Infinity" || text == "+inf") return kInfinity;
  if (text == "-inf") return -kInfinity;
  if (text.empty()) return std::nullopt;
  double value = 0.0;
  const char *begin = text.data();
  if (*begin == '+') ++begin;
  auto res = std::from_chars(begin, text.data() + text.size(), value);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size()) {
    return std::nullopt;
  }
  return value;
}

}  // namespace wfst
