/*
 * Copyright 2026 The DriftScope Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <functional>

namespace driftscope {

// Worker count: DRIFTSCOPE_THREADS when set to a positive integer, otherwise
// the hardware concurrency (at least 1).
std::size_t ThreadCount();

// Runs body(i) for i in [0, n) over ThreadCount() workers using static
// contiguous chunks. Callers write results into slot i, so output never
// depends on the schedule. The first exception thrown by any worker is
// rethrown on the calling thread.
void ParallelFor(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace driftscope
