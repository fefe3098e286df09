#pragma once

#include <cstddef>
#include <functional>

namespace modekit {

/// threads <= 0 means all hardware threads.
int resolve_threads(int threads) noexcept;

/// Runs fn(0) ... fn(count - 1) on up to `threads` workers. Work items must
/// be independent; callers reduce results in index order. If any call
/// throws, the exception of the lowest failing index is rethrown after all
/// workers finish.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace modekit
