#pragma once

#include <cstddef>
#include <functional>

namespace roughlab {

/// Worker count for data-parallel maps; 0 selects hardware concurrency.
void set_thread_count(std::size_t n);
std::size_t thread_count();

/// Calls fn(i) for i in [begin, end) split into contiguous blocks, one per
/// worker. Results must not depend on the split (each i is independent).
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& fn);

}  // namespace roughlab
