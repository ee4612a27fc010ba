// Copyright 2026 contactcal contributors
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

#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <thread>
#include <vector>

namespace ccal {

/// splitmix64 step; the standard way to stretch one seed into many
/// decorrelated ones.
inline uint64_t splitmix64(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ull;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d4a2ca9469de6dull;
  return z ^ (z >> 31);
}

/// Seed for stream `stream_id` derived from a master seed. Independent of
/// how many other streams exist, so per-element randomness does not depend
/// on iteration order or thread count.
inline uint64_t derive_seed(uint64_t master_seed, uint64_t stream_id) {
  uint64_t state = master_seed ^ (0xd1b54a32d192ed03ull * (stream_id + 1));
  return splitmix64(state);
}

inline std::mt19937_64 make_engine(uint64_t master_seed, uint64_t stream_id) {
  return std::mt19937_64(derive_seed(master_seed, stream_id));
}

/// Runs body(i) for i in [0, count). With threads <= 1 this is a plain
/// loop; otherwise the range is cut into contiguous blocks. Each index must
/// write only its own output slot, which keeps results byte-identical for
/// any thread count. Exceptions from workers are rethrown on the caller.
inline void parallel_for(size_t count, int threads,
                         const std::function<void(size_t)>& body) {
  if (count == 0) return;
  size_t workers = threads <= 1 ? 1 : static_cast<size_t>(threads);
  if (workers > count) workers = count;
  if (workers == 1) {
    for (size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  size_t chunk = (count + workers - 1) / workers;
  for (size_t w = 0; w < workers; ++w) {
    size_t begin = w * chunk;
    size_t end = begin + chunk < count ? begin + chunk : count;
    if (begin >= end) break;
    pool.emplace_back([&, w, begin, end]() {
      try {
        for (size_t i = begin; i < end; ++i) body(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace ccal
