#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace tailrisk {

/// Worker count used by the OpenMP kernels. 1 forces every kernel onto its
/// serial path (strict mode).
int worker_count();
void set_worker_count(int workers);

class ScopedWorkers {
 public:
  explicit ScopedWorkers(int workers) : previous_(worker_count()) { set_worker_count(workers); }
  ~ScopedWorkers() { set_worker_count(previous_); }
  ScopedWorkers(const ScopedWorkers&) = delete;
  ScopedWorkers& operator=(const ScopedWorkers&) = delete;

 private:
  int previous_;
};

/// Splits [0, n) into fixed-size chunks. The partition depends only on n and
/// chunk, never on the thread count, so per-chunk reductions are reproducible.
inline std::vector<std::pair<std::size_t, std::size_t>> fixed_chunks(std::size_t n, std::size_t chunk) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  if (chunk == 0) chunk = 1;
  for (std::size_t b = 0; b < n; b += chunk) out.emplace_back(b, b + chunk < n ? b + chunk : n);
  return out;
}

}  // namespace tailrisk
