#pragma once

#include <cstddef>
#include <functional>

namespace finitype {

// Process-wide worker count used by parallel_for. Defaults to 1.
void set_threads(int n);
int threads();

// Runs body(i) for i in [0, count) on up to threads() workers using a static
// block partition. Each index is visited exactly once; bodies must write only
// to slots owned by their index, so results never depend on the worker count.
// The first exception thrown by any body is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace finitype
