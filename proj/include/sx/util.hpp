#pragma once

#include <chrono>
#include <span>

namespace sx {

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;
};

// Sample statistics (n-1 divisor); stddev is 0 for fewer than two values.
MeanStd mean_std(std::span<const double> values);

// Wall-clock stage timer on the monotonic clock.
class Stopwatch {
public:
    Stopwatch() : start_(Clock::now()) {}
    void restart() { start_ = Clock::now(); }
    double seconds() const {
        return std::chrono::duration<double>(Clock::now() - start_).count();
    }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point start_;
};

// Worker cap shared by every parallel kernel. Defaults to the OpenMP limit;
// SHAPE_EXTRAP_THREADS overrides it when set to a positive integer.
int max_threads();

}  // namespace sx
