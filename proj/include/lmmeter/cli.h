// Copyright 2026 The lmmeter Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef LMMETER_CLI_H_
#define LMMETER_CLI_H_

#include <iosfwd>

namespace lmmeter {

// Entry point of the `lmmeter` tool. Machine-readable results go to `out`,
// diagnostics to `err`. Returns 0 on success, 1 on a runtime or data error
// and 2 on a usage error.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace lmmeter

#endif  // LMMETER_CLI_H_
