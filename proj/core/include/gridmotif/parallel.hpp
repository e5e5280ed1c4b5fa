#pragma once

#include <cstddef>
#include <exception>
#include <functional>

namespace gridmotif {

/// Worker count used by parallel_for. 0 means hardware concurrency.
void set_thread_count(unsigned threads);
unsigned thread_count();

/// Runs body(i) for i in [0, n). Items are claimed dynamically, so body must
/// write only to slot i of its output. If any item throws, the exception of
/// the lowest failing index is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace gridmotif
