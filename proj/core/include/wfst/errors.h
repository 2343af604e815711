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
// Exception hierarchy shared by every module. The CLI maps Error to exit
// status 1 and UsageError to exit status 2.

#ifndef WFST_ERRORS_H_
#define WFST_ERRORS_H_

#include <stdexcept>
#include <string>

namespace wfst {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Weight outside the carrier of its semiring.
class DomainError : public Error {
 public:
  using Error::Error;
};

// Operands built over different semirings.
class KindError : public Error {
 public:
  using Error::Error;
};

// Operation not defined for the given semiring (e.g. closure over REAL).
class UnsupportedError : public Error {
 public:
  using Error::Error;
};

// A documented precondition does not hold (nondeterministic input, cycles
// given to the acyclic shortest-distance algorithm, ...).
class ContractError : public Error {
 public:
  using Error::Error;
};

// Symbol could not be resolved in a symbol table, or two tables disagree.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(const std::string &msg, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + msg : msg),
        line_(line),
        detail_(msg) {}
  int line() const { return line_; }
  // The message without the line prefix.
  const std::string &detail() const { return detail_; }

 private:
  int line_;
  std::string detail_;
};

// Subset construction grew past its state cap; the input most likely lacks
// the twins property.
class CapExceededError : public Error {
 public:
  using Error::Error;
};

// Numerical degeneracy in model estimation.
class DegeneracyError : public Error {
 public:
  using Error::Error;
};

// Enumeration of paths did not converge within the requested length bound.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

}  // namespace wfst

#endif  // WFST_ERRORS_H_
