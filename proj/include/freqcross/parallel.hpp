#pragma once

#include <algorithm>
#include <functional>
#include <thread>
#include <vector>

namespace freqcross {

// Worker cap for parallel_for. 0 means hardware concurrency. Every index is
// processed wholly by one worker with a fixed inner order, so results are
// bitwise independent of the cap.
void set_max_threads(int n);
int max_threads();

// fn(i) for i in [0, n), statically partitioned.
void parallel_for(int64_t n, const std::function<void(int64_t)>& fn);

}  // namespace freqcross
