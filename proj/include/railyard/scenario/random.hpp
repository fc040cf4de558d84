#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace railyard::scenario {

// Named sub-streams so one scenario's draws never depend on how many
// scenarios precede it, or on how many draws another stream consumed.
enum class StreamTag : std::uint64_t {
    Demand = 1,
    Rbe = 2,
    Radiation = 3,
    Prices = 4,
    Cars = 5,
    Buses = 6,
};

std::uint64_t splitmix64(std::uint64_t x);

// Variates are produced from the raw 64-bit engine output by explicit
// transforms so sequences are identical across standard libraries.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}
    static RandomStream derive(std::uint64_t master_seed, std::uint64_t scenario, StreamTag tag);

    double uniform01();  // [0, 1)
    double uniform(double lo, double hi);
    double exponential(double rate);
    double triangular(double lo, double hi, double mode);

private:
    std::mt19937_64 engine_;
};

}  // namespace railyard::scenario
