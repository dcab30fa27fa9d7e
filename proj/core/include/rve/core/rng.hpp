#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace rve::core {

using Rng = std::mt19937_64;

std::uint64_t splitmix64(std::uint64_t& state);

// Child stream derived from a root seed and a fixed label, so that
// adding a consumer in one component never shifts another's draws.
Rng child_stream(std::uint64_t root, std::string_view label);

struct RunStreams {
    Rng agent;   // learning noise, prior samples, minibatches
    Rng env;     // transitions, reward noise, start states
    Rng ties;    // action selection
    Rng build;   // environment instance construction (maps, features)

    static RunStreams from_root(std::uint64_t seed);
};

double std_normal(Rng& rng);
double uniform01(Rng& rng);
// uniform integer in [0, n)
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

std::string serialize_rng(const Rng& rng);
Rng deserialize_rng(const std::string& text);

}  // namespace rve::core
