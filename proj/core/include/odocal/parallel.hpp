#pragma once

#include <cstddef>
#include <functional>

namespace odocal {

/// 0 resolves to the hardware concurrency (at least 1).
std::size_t resolve_threads(std::size_t requested);

/// Run fn(0..count-1) across up to `threads` workers. Order of execution is
/// unspecified; the first exception thrown by fn is rethrown after all
/// workers join.
void parallel_for(std::size_t count, std::size_t threads,
                  const std::function<void(std::size_t)>& fn);

}  // namespace odocal
