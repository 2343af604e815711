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
//
// Weight algebras. A weight is a plain double interpreted under a
// SemiringKind:
//
//   kBoolean   {0,1}        or    and   0   1
//   kTropical  R u {inf}    min   +     inf 0
//   kReal      R>=0         +     *     0   1
//
// Tropical weights may be negative (needed by Bellman-Ford and by
// intermediate potentials); everything else is checked against the carrier.

#ifndef WFST_SEMIRING_H_
#define WFST_SEMIRING_H_

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

namespace wfst {

using Weight = double;

enum class SemiringKind { kBoolean, kTropical, kReal };

enum class Ordering { kABetter, kEqual, kBBetter };

inline constexpr Weight kInfinity = std::numeric_limits<double>::infinity();

std::string_view KindName(SemiringKind kind);
std::optional<SemiringKind> ParseKind(std::string_view name);

// Throws DomainError if w is not in the carrier of kind.
void CheckWeight(SemiringKind kind, Weight w);
bool InCarrier(SemiringKind kind, Weight w);

inline Weight Zero(SemiringKind kind) {
  return kind == SemiringKind::kTropical ? kInfinity : 0.0;
}

inline Weight One(SemiringKind kind) {
  return kind == SemiringKind::kTropical ? 0.0 : 1.0;
}

inline bool IsZero(SemiringKind kind, Weight w) { return w == Zero(kind); }
inline bool IsOne(SemiringKind kind, Weight w) { return w == One(kind); }

// Unchecked operations for inner loops.
inline Weight PlusFast(SemiringKind kind, Weight a, Weight b) {
  switch (kind) {
    case SemiringKind::kBoolean:
      return (a != 0.0 || b != 0.0) ? 1.0 : 0.0;
    case SemiringKind::kTropical:
      return a < b ? a : b;
    case SemiringKind::kReal:
      return a + b;
  }
  return a;
}

inline Weight TimesFast(SemiringKind kind, Weight a, Weight b) {
  switch (kind) {
    case SemiringKind::kBoolean:
      return (a != 0.0 && b != 0.0) ? 1.0 : 0.0;
    case SemiringKind::kTropical:
      if (a == kInfinity || b == kInfinity) return kInfinity;
      return a + b;
    case SemiringKind::kReal:
      return a * b;
  }
  return a;
}

// a (+) b with carrier checks.
Weight Combine(SemiringKind kind, Weight a, Weight b);
// a (x) b with carrier checks.
Weight Extend(SemiringKind kind, Weight a, Weight b);
// Total order in "better path" sense: tropical ascending, real descending,
// boolean true before false.
Ordering Compare(SemiringKind kind, Weight a, Weight b);

// Left division a^-1 (x) b; defined for tropical (subtraction) and boolean.
Weight Divide(SemiringKind kind, Weight b, Weight a);

// True when (+) is idempotent and selects one operand (boolean, tropical).
inline bool IsPathSemiring(SemiringKind kind) {
  return kind != SemiringKind::kReal;
}

// Approximate equality: exact for boolean/tropical infinities, relative
// tolerance otherwise.
bool ApproxEqual(Weight a, Weight b, double rel_tol = 1e-9);

// Decimal rendering used by every text format: shortest round-trip digits,
// "inf" for infinity.
std::string FormatWeight(Weight w);
// Parses a decimal literal or "inf"/"Infinity". Returns nullopt on failure.
std::optional<Weight> ParseWeight(std::string_view text);

}  // namespace wfst

#endif  // WFST_SEMIRING_H_
