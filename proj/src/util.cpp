#include "sx/util.hpp"

#include <cmath>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace sx {

MeanStd mean_std(std::span<const double> values) {
    MeanStd out;
    if (values.empty()) return out;
    double sum = 0.0;
    for (double v : values) sum += v;
    out.mean = sum / static_cast<double>(values.size());
    if (values.size() < 2) return out;
    double ss = 0.0;
    for (double v : values) ss += (v - out.mean) * (v - out.mean);
    out.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    return out;
}

static int read_thread_cap() {
#ifdef _OPENMP
    int cap = omp_get_max_threads();
#else
    int cap = 1;
#endif
    if (const char* s = std::getenv("SHAPE_EXTRAP_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(s, &end, 10);
        if (end != s && *end == '\0' && v > 0) cap = static_cast<int>(v);
    }
    return cap;
}

int max_threads() {
    static const int cap = read_thread_cap();
    return cap;
}

}  // namespace sx
