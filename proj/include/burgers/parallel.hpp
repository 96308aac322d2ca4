#pragma once

#include <cstddef>
#include <functional>

namespace burgers {

/// Process-wide worker count used by parallel_for. Defaults to 1.
int execution_threads() noexcept;
void set_execution_threads(int threads);

/// Runs body(i) for i in [0, count). Work items are claimed dynamically, so
/// body must only write to state owned by item i; under that contract the
/// result does not depend on the thread count.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace burgers
