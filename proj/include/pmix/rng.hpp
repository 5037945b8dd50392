#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace pmix {

// Counter-based splittable generator. Every random choice in a run derives
// from one master seed; independent consumers split off labeled streams so
// results do not depend on evaluation order or thread scheduling.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(mix(seed, 0x9e3779b97f4a7c15ull)) {}

    Rng split(std::string_view label, std::uint64_t index = 0) const {
        return Rng(mix(mix(state_, hash_label(label)), index + 1));
    }

    std::uint64_t next_u64() {
        state_ += 0x9e3779b97f4a7c15ull;
        return finalize(state_);
    }

    // uniform on [0,1)
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    int uniform_int(int lo, int hi) {  // inclusive bounds
        return lo + static_cast<int>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
    }

    double normal() {
        double u1 = uniform();
        while (u1 <= 1e-300) u1 = uniform();
        const double u2 = uniform();
        return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
    }

    static std::uint64_t hash_label(std::string_view label) {
        std::uint64_t h = 1469598103934665603ull;
        for (char c : label) {
            h ^= static_cast<unsigned char>(c);
            h *= 1099511628211ull;
        }
        return h;
    }

private:
    static std::uint64_t finalize(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
        return z ^ (z >> 31);
    }
    static std::uint64_t mix(std::uint64_t a, std::uint64_t b) { return finalize(a + 0x9e3779b97f4a7c15ull * (b + 1)); }

    std::uint64_t state_;
};

}  // namespace pmix
