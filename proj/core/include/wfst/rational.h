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
// Rational operations on machines. All of them return new machines and leave
// their arguments untouched.

#ifndef WFST_RATIONAL_H_
#define WFST_RATIONAL_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "wfst/machine.h"

namespace wfst {

// Epsilon-synchronization filter state carried by composition pair states.
//   0: initial; any move allowed.
//   1: last move advanced only the left machine on an epsilon output.
//   2: last move advanced only the right machine on an epsilon input.
// A matched symbol always returns to 0; a simultaneous epsilon move is only
// allowed from 0. Each interleaving of epsilon moves between two matched
// symbols is therefore produced exactly once.
enum class FilterState : uint8_t { kStart = 0, kLeftOnly = 1, kRightOnly = 2 };

enum class EpsilonMove { kMatch, kBoth, kLeftOnly, kRightOnly };

// Next filter state for a move, or nullopt when the filter blocks it.
std::optional<FilterState> FilterTransition(FilterState f, EpsilonMove move);

struct ComposeOptions {
  // Test-only: disable the filter so that every epsilon interleaving becomes
  // its own path.
  bool unfiltered = false;
  // Trim the result.
  bool connect = true;
};

// (u, w) -> (+)_v a(u, v) (x) b(v, w).
Machine Compose(const Machine &a, const Machine &b, const ComposeOptions &opts = {});

// Acceptor intersection; both operands must be acceptors.
Machine Intersect(const Machine &a, const Machine &b);

Machine Union(const Machine &a, const Machine &b);
Machine Concat(const Machine &a, const Machine &b);
// Kleene star. Not defined over REAL.
Machine Closure(const Machine &a);
Machine Reverse(const Machine &a);

enum class ProjectSide { kInput, kOutput };
Machine Project(const Machine &a, ProjectSide side);

// Complement of a boolean acceptor relative to alphabet* (the machine's
// input symbol table, or its arc labels, when alphabet is empty).
Machine Complement(const Machine &a, std::span<const Label> alphabet = {});
Machine Difference(const Machine &a, const Machine &b,
                   std::span<const Label> alphabet = {});

// Throws KindError if the two machines use different semirings and
// ResolutionError if a.osyms and b.isyms disagree.
void CheckComposable(const Machine &a, const Machine &b);

}  // namespace wfst

#endif  // WFST_RATIONAL_H_
