// Execution selection for the data-parallel kernels. Every kernel has a plain
// serial loop kept as the reference; the OpenMP path must produce identical
// results regardless of scheduling.
#pragma once

#include <cstddef>
#include <functional>

namespace lithium {

enum class Execution { serial, parallel };

// Calls body(i) for i in [0, n). Iterations must write only to slot i of
// their output.
void for_each_index(std::size_t n, Execution exec, const std::function<void(std::size_t)>& body);

// Smallest i in [0, n) with pred(i), or n. The parallel path may evaluate
// extra indices but always returns the least one.
std::size_t find_first_index(std::size_t n, Execution exec,
                             const std::function<bool(std::size_t)>& pred);

int max_threads();

}  // namespace lithium
