// Copyright 2026 The drlqr Authors
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

#pragma once

#include <cstddef>
#include <functional>

namespace drlqr {

// Number of hardware threads, at least 1.
int DefaultThreadCount();

// Calls fn(i) for every i in [0, count) on up to `threads` workers. Work is
// handed out by index, so results written to slot i do not depend on the
// schedule. If any call throws, the exception from the lowest index is
// rethrown after all workers have joined.
void ParallelFor(std::size_t count, int threads,
                 const std::function<void(std::size_t)>& fn);

}  // namespace drlqr
