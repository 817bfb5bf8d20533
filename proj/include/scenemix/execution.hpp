// Copyright 2026 The scenemix Authors
//
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

#ifndef SCENEMIX__EXECUTION_HPP_
#define SCENEMIX__EXECUTION_HPP_

namespace scenemix
{

/// Kernel selector. `serial` is the reference path kept for testing; `parallel`
/// uses OpenMP and must produce bit-identical results.
enum class Execution { serial, parallel };

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

/// Sets the OpenMP thread count for subsequent parallel regions; no-op without OpenMP.
void set_threads(int n);

}  // namespace scenemix

#endif  // SCENEMIX__EXECUTION_HPP_
