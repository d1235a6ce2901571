#pragma once

#include "gridfno/error.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <numbers>
#include <span>
#include <vector>

namespace gridfno::numcore {

/// One-dimensional complex FFT plan of fixed length.
///
/// Composite lengths use a recursive mixed-radix Cooley-Tukey decomposition.
/// Lengths whose largest prime factor exceeds kMaxDirectRadix go through
/// Bluestein's chirp-z algorithm on a power-of-two inner plan. Neither direction
/// scales the result.
template <typename Scalar>
class FftPlan {
public:
    using Complex = std::complex<Scalar>;

    static constexpr Eigen::Index kMaxDirectRadix = 13;

    explicit FftPlan(Eigen::Index n) : n_(n) {
        require(n > 0, Errc::invalid_argument, "FFT length must be positive");
        factors_ = factorize(n);
        if (factors_.back() > kMaxDirectRadix) {
            init_bluestein();
        } else {
            init_twiddles();
        }
    }

    Eigen::Index size() const { return n_; }
    bool uses_bluestein() const { return inner_ != nullptr; }

    /// In-place transform. sign = -1 computes sum x_j exp(-2 pi i jk/n), +1 the conjugate kernel.
    void transform(std::span<Complex> data, int sign) const {
        require(static_cast<Eigen::Index>(data.size()) == n_, Errc::shape_mismatch,
                "FFT buffer length does not match plan");
        if (n_ == 1) {
            return;
        }
        if (inner_) {
            bluestein(data, sign);
            return;
        }
        std::vector<Complex> out(static_cast<std::size_t>(n_));
        recurse(data.data(), out.data(), n_, 1, 0, sign);
        std::copy(out.begin(), out.end(), data.begin());
    }

    void forward(std::span<Complex> data) const { transform(data, -1); }
    void backward(std::span<Complex> data) const { transform(data, +1); }

private:
    static std::vector<Eigen::Index> factorize(Eigen::Index n) {
        std::vector<Eigen::Index> f;
        while (n % 4 == 0) {
            f.push_back(4);
            n /= 4;
        }
        for (Eigen::Index p = 2; p * p <= n; ++p) {
            while (n % p == 0) {
                f.push_back(p);
                n /= p;
            }
        }
        if (n > 1 || f.empty()) {
            f.push_back(n);
        }
        // Largest factor last so the Bluestein decision is a single check.
        std::sort(f.begin(), f.end());
        return f;
    }

    static Complex unit_root(std::int64_t num, std::int64_t den) {
        // exp(-2 pi i num/den) with the angle reduced in integers first.
        num %= den;
        if (num < 0) {
            num += den;
        }
        const Scalar angle = -2 * std::numbers::pi_v<Scalar> * static_cast<Scalar>(num) /
                             static_cast<Scalar>(den);
        return {std::cos(angle), std::sin(angle)};
    }

    void init_twiddles() {
        twiddles_.resize(static_cast<std::size_t>(n_));
        for (Eigen::Index j = 0; j < n_; ++j) {
            twiddles_[static_cast<std::size_t>(j)] = unit_root(j, n_);
        }
    }

    Complex twiddle(Eigen::Index j, Eigen::Index len, int sign) const {
        // exp(sign * 2 pi i j/len) from the length-n table.
        const Complex w = twiddles_[static_cast<std::size_t>((j % len) * (n_ / len))];
        return sign < 0 ? w : std::conj(w);
    }

    void recurse(const Complex* in, Complex* out, Eigen::Index n, Eigen::Index stride,
                 std::size_t level, int sign) const {
        const Eigen::Index p = factors_[factors_.size() - 1 - level];
        const Eigen::Index m = n / p;
        if (m == 1) {
            for (Eigen::Index q = 0; q < p; ++q) {
                out[q] = in[q * stride];
            }
        } else {
            for (Eigen::Index q = 0; q < p; ++q) {
                recurse(in + q * stride, out + q * m, m, stride * p, level + 1, sign);
            }
        }

        std::vector<Complex> tmp(static_cast<std::size_t>(p));
        for (Eigen::Index k = 0; k < m; ++k) {
            for (Eigen::Index q = 0; q < p; ++q) {
                tmp[static_cast<std::size_t>(q)] = out[q * m + k] * twiddle(q * k, n, sign);
            }
            if (p == 2) {
                out[k] = tmp[0] + tmp[1];
                out[m + k] = tmp[0] - tmp[1];
                continue;
            }
            for (Eigen::Index s = 0; s < p; ++s) {
                Complex acc = tmp[0];
                for (Eigen::Index q = 1; q < p; ++q) {
                    acc += tmp[static_cast<std::size_t>(q)] * twiddle(q * s * m, n, sign);
                }
                out[s * m + k] = acc;
            }
        }
    }

    void init_bluestein() {
        Eigen::Index m = 1;
        while (m < 2 * n_ - 1) {
            m *= 2;
        }
        inner_ = std::make_unique<FftPlan>(m);
        chirp_.resize(static_cast<std::size_t>(n_));
        for (Eigen::Index j = 0; j < n_; ++j) {
            // exp(-pi i j^2/n) == exp(-2 pi i (j^2 mod 2n) / 2n)
            const std::int64_t jj = (static_cast<std::int64_t>(j) * j) % (2 * n_);
            chirp_[static_cast<std::size_t>(j)] = unit_root(jj, 2 * n_);
        }
        kernel_fwd_.assign(static_cast<std::size_t>(m), Complex{});
        kernel_bwd_.assign(static_cast<std::size_t>(m), Complex{});
        for (Eigen::Index j = 0; j < n_; ++j) {
            const Complex c = chirp_[static_cast<std::size_t>(j)];
            kernel_fwd_[static_cast<std::size_t>(j)] = std::conj(c);
            kernel_bwd_[static_cast<std::size_t>(j)] = c;
            if (j > 0) {
                kernel_fwd_[static_cast<std::size_t>(m - j)] = std::conj(c);
                kernel_bwd_[static_cast<std::size_t>(m - j)] = c;
            }
        }
        inner_->forward(kernel_fwd_);
        inner_->forward(kernel_bwd_);
    }

    void bluestein(std::span<Complex> data, int sign) const {
        const Eigen::Index m = inner_->size();
        std::vector<Complex> a(static_cast<std::size_t>(m), Complex{});
        for (Eigen::Index j = 0; j < n_; ++j) {
            const Complex c = chirp_[static_cast<std::size_t>(j)];
            a[static_cast<std::size_t>(j)] = data[static_cast<std::size_t>(j)] *
                                             (sign < 0 ? c : std::conj(c));
        }
        inner_->forward(a);
        const auto& kernel = sign < 0 ? kernel_fwd_ : kernel_bwd_;
        for (Eigen::Index j = 0; j < m; ++j) {
            a[static_cast<std::size_t>(j)] *= kernel[static_cast<std::size_t>(j)];
        }
        inner_->backward(a);
        const Scalar inv_m = Scalar(1) / static_cast<Scalar>(m);
        for (Eigen::Index k = 0; k < n_; ++k) {
            const Complex c = chirp_[static_cast<std::size_t>(k)];
            data[static_cast<std::size_t>(k)] =
                a[static_cast<std::size_t>(k)] * inv_m * (sign < 0 ? c : std::conj(c));
        }
    }

    Eigen::Index n_;
    std::vector<Eigen::Index> factors_;
    std::vector<Complex> twiddles_;

    std::unique_ptr<FftPlan> inner_;
    std::vector<Complex> chirp_;
    std::vector<Complex> kernel_fwd_;
    std::vector<Complex> kernel_bwd_;
};

} // namespace gridfno::numcore
