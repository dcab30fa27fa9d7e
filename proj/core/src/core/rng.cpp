#include "rve/core/rng.hpp"

#include <sstream>
#include <stdexcept>

namespace rve::core {

std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Rng child_stream(std::uint64_t root, std::string_view label) {
    // FNV-1a over the label, mixed with the root through splitmix
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::uint64_t s = root ^ h;
    std::seed_seq seq{static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s)),
                      static_cast<std::uint32_t>(splitmix64(s)), static_cast<std::uint32_t>(splitmix64(s))};
    return Rng(seq);
}

RunStreams RunStreams::from_root(std::uint64_t seed) {
    return RunStreams{child_stream(seed, "agent"), child_stream(seed, "env"), child_stream(seed, "ties"),
                      child_stream(seed, "build")};
}

double std_normal(Rng& rng) {
    std::normal_distribution<double> d(0.0, 1.0);
    return d(rng);
}

double uniform01(Rng& rng) {
    // 53 random mantissa bits
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
    std::uniform_int_distribution<std::uint64_t> d(0, n - 1);
    return d(rng);
}

std::string serialize_rng(const Rng& rng) {
    std::ostringstream os;
    os << rng;
    return os.str();
}

Rng deserialize_rng(const std::string& text) {
    std::istringstream is(text);
    Rng rng;
    is >> rng;
    if (is.fail()) throw std::runtime_error("malformed rng state");
    return rng;
}

}  // namespace rve::core
