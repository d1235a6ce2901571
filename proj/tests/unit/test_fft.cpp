#include "support/oracles.hpp"

#include <catch_amalgamated.hpp>

using gridfno::numcore::FftPlan;

namespace {

std::vector<std::complex<double>> naive_1d(const std::vector<std::complex<double>>& x, int sign) {
    const std::size_t n = x.size();
    std::vector<std::complex<double>> out(n);
    for (std::size_t k = 0; k < n; ++k) {
        std::complex<long double> acc = 0;
        for (std::size_t j = 0; j < n; ++j) {
            const long double phase = 2.0L * std::numbers::pi_v<long double> * ((k * j) % n) / n;
            acc += std::complex<long double>(x[j]) * std::polar(1.0L, sign * phase);
        }
        out[k] = std::complex<double>(acc);
    }
    return out;
}

} // namespace

TEST_CASE("fft plan matches naive sum for many lengths", "[fft]") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Eigen::Index> lengths;
    for (Eigen::Index n = 1; n <= 40; ++n) lengths.push_back(n);
    for (Eigen::Index n : {47, 64, 97, 100, 121, 128, 150, 169, 210, 257}) lengths.push_back(n);

    for (Eigen::Index n : lengths) {
        FftPlan<double> plan(n);
        std::vector<std::complex<double>> x(static_cast<std::size_t>(n));
        for (auto& v : x) v = {u(rng), u(rng)};
        for (int sign : {-1, 1}) {
            auto fast = x;
            plan.transform(fast, sign);
            const auto ref = naive_1d(x, sign);
            double err = 0;
            for (std::size_t i = 0; i < x.size(); ++i) err = std::max(err, std::abs(fast[i] - ref[i]));
            INFO("n = " << n << " sign = " << sign);
            CHECK(err < 1e-10 * std::max<double>(1.0, static_cast<double>(n)));
        }
    }
}

TEST_CASE("bluestein path is taken for large primes", "[fft]") {
    CHECK(FftPlan<double>(17).uses_bluestein());
    CHECK(FftPlan<double>(97).uses_bluestein());
    CHECK_FALSE(FftPlan<double>(13).uses_bluestein());
    CHECK_FALSE(FftPlan<double>(150).uses_bluestein());
}

TEST_CASE("fft rejects empty length and mismatched buffers", "[fft]") {
    CHECK_THROWS_AS(FftPlan<double>(0), gridfno::Error);
    FftPlan<double> plan(8);
    std::vector<std::complex<double>> wrong(5);
    CHECK_THROWS_AS(plan.forward(wrong), gridfno::Error);
}
