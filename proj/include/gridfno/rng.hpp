#pragma once

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

namespace gridfno {

/// Deterministic draws that do not depend on the standard library's
/// distribution implementations.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next();
    double uniform();                                 // [0, 1)
    double uniform(double lo, double hi);             // [lo, hi)
    std::int64_t integer(std::int64_t lo, std::int64_t hi); // inclusive
    std::size_t weighted(const std::vector<double>& w);
    double normal();

private:
    std::uint64_t s_[4];
};

std::uint64_t splitmix64(std::uint64_t x);

/// Fisher-Yates shuffle driven by rng.
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(i) - 1));
        std::swap(v[i - 1], v[j]);
    }
}

} // namespace gridfno
