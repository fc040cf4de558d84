#include "railyard/scenario/random.hpp"

#include <cmath>

namespace railyard::scenario {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

RandomStream RandomStream::derive(std::uint64_t master_seed, std::uint64_t scenario, StreamTag tag) {
    const std::uint64_t a = splitmix64(master_seed);
    const std::uint64_t b = splitmix64(a ^ (scenario * 0xD1B54A32D192ED03ULL));
    return RandomStream(splitmix64(b ^ static_cast<std::uint64_t>(tag)));
}

double RandomStream::uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

double RandomStream::exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

double RandomStream::triangular(double lo, double hi, double mode) {
    const double u = uniform01();
    const double width = hi - lo;
    if (width <= 0.0) return lo;
    const double split = (mode - lo) / width;
    if (u < split) return lo + std::sqrt(u * width * (mode - lo));
    return hi - std::sqrt((1.0 - u) * width * (hi - mode));
}

}  // namespace railyard::scenario
