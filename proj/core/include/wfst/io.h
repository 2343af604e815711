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
// Self-describing machine files: a header naming the semiring, the
// embedded symbol tables, then the canonical text with integer labels.
//
//   wfst-machine tropical
//   isymbols 3
//   <eps>	0
//   ...
//   osymbols 0
//   0	1	1	2	0.5
//   ...

#ifndef WFST_IO_H_
#define WFST_IO_H_

#include <iosfwd>
#include <string>

#include "wfst/machine.h"

namespace wfst {

void WriteMachine(const Machine &m, std::ostream &out);
std::string WriteMachine(const Machine &m);

// Throws ParseError on a malformed header or body.
Machine ReadMachine(std::istream &in);

}  // namespace wfst

#endif  // WFST_IO_H_
