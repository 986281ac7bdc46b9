#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace iup {

// Resolves a requested worker count; 0 means one per hardware thread.
inline unsigned resolve_workers(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Splits [0, rows) into contiguous blocks and calls fn(begin, end) for each
// block on its own thread. Every row is processed by exactly one call, so a
// row-local fn yields results independent of the worker count.
template <typename Fn>
void parallel_rows(std::size_t rows, unsigned workers, Fn&& fn) {
  workers = resolve_workers(workers);
  const std::size_t blocks = std::min<std::size_t>(workers, rows);
  if (blocks <= 1) {
    if (rows > 0) fn(std::size_t{0}, rows);
    return;
  }

  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(blocks);
  pool.reserve(blocks - 1);
  const std::size_t base = rows / blocks;
  const std::size_t extra = rows % blocks;
  std::size_t begin = 0;
  std::size_t first_end = 0;
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t end = begin + base + (b < extra ? 1 : 0);
    if (b == 0) {
      first_end = end;
    } else {
      pool.emplace_back([&fn, &errors, b, begin, end] {
        try {
          fn(begin, end);
        } catch (...) {
          errors[b] = std::current_exception();
        }
      });
    }
    begin = end;
  }
  try {
    fn(std::size_t{0}, first_end);
  } catch (...) {
    errors[0] = std::current_exception();
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace iup
