// Copyright 2026 The wsmom Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef WSMOM_PARALLEL_HPP
#define WSMOM_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace wsmom {

/// Runs fn(index) for index in [0, count) on up to `jobs` threads. Work is
/// handed out by an atomic counter; callers store results by index so the
/// outcome does not depend on scheduling. The first exception is rethrown.
class ParallelMap {
 public:
  explicit ParallelMap(unsigned jobs = 1) : jobs_(std::max(1U, jobs)) {}

  unsigned jobs() const { return jobs_; }

  void run(std::size_t count, const std::function<void(std::size_t)>& fn) const {
    const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(jobs_, count));
    if (workers <= 1) {
      for (std::size_t i = 0; i < count; ++i) fn(i);
      return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
        }
      }
    };
    std::vector<std::thread> threads;
    threads.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
  }

 private:
  unsigned jobs_;
};

}  // namespace wsmom

#endif  // WSMOM_PARALLEL_HPP
