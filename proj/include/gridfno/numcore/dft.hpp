#pragma once

#include "gridfno/numcore/fft.hpp"
#include "gridfno/numcore/tensor.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <vector>

namespace gridfno::numcore {

using Extents3 = std::array<Index, 3>;

/// Retained Fourier modes of a 3-axis transform. Per axis of length n with
/// cut-off k, the k lowest non-negative frequencies {0..k-1} and the k highest
/// indices {n-k..n-1} (frequencies -k..-1) are kept, so 2k indices per axis.
class ModeSet {
public:
    ModeSet() = default;
    ModeSet(Extents3 extents, Extents3 kmax);

    const Extents3& extents() const { return extents_; }
    const Extents3& kmax() const { return kmax_; }

    /// Kept indices along one axis, ascending.
    const std::vector<Index>& kept(std::size_t axis) const { return kept_[axis]; }
    Index kept_count(std::size_t axis) const { return static_cast<Index>(kept_[axis].size()); }
    Index total_kept() const { return kept_count(0) * kept_count(1) * kept_count(2); }

    bool contains(Index i0, Index i1, Index i2) const;

    /// Position of an index in the kept list of an axis, or -1.
    Index slot(std::size_t axis, Index index) const;

private:
    Extents3 extents_{};
    Extents3 kmax_{};
    std::array<std::vector<Index>, 3> kept_;
    std::array<std::vector<Index>, 3> slot_;
};

namespace detail {

inline Index inner_count(const Shape& shape, std::size_t axis) {
    Index inner = 1;
    for (std::size_t a = axis + 1; a < shape.size(); ++a) {
        inner *= shape[a];
    }
    return inner;
}

inline void check_transform_shape(const Shape& shape) {
    require(shape.size() >= 3, Errc::shape_mismatch,
            "3D transform needs at least three axes, got " + shape_string(shape));
    for (std::size_t a = 0; a < 3; ++a) {
        require(shape[a] > 0, Errc::invalid_argument, "zero-length transform axis");
    }
}

// In-place complex FFT along one of the leading axes of interleaved complex data.
template <typename Scalar>
void transform_axis(std::vector<std::complex<Scalar>>& data, const Shape& shape,
                    std::size_t axis, int sign) {
    const Index n = shape[axis];
    if (n == 1) {
        return;
    }
    const Index inner = inner_count(shape, axis);
    Index outer = 1;
    for (std::size_t a = 0; a < axis; ++a) {
        outer *= shape[a];
    }
    const FftPlan<Scalar> plan(n);
    std::vector<std::complex<Scalar>> line(static_cast<std::size_t>(n));
    for (Index o = 0; o < outer; ++o) {
        for (Index i = 0; i < inner; ++i) {
            const Index base = o * n * inner + i;
            for (Index j = 0; j < n; ++j) {
                line[static_cast<std::size_t>(j)] = data[static_cast<std::size_t>(base + j * inner)];
            }
            plan.transform(line, sign);
            for (Index j = 0; j < n; ++j) {
                data[static_cast<std::size_t>(base + j * inner)] = line[static_cast<std::size_t>(j)];
            }
        }
    }
}

template <typename Scalar>
std::vector<std::complex<Scalar>> interleave(const BasicComplexTensor<Scalar>& x) {
    std::vector<std::complex<Scalar>> out(static_cast<std::size_t>(x.size()));
    for (Index i = 0; i < x.size(); ++i) {
        out[static_cast<std::size_t>(i)] = {x.re[i], x.im[i]};
    }
    return out;
}

template <typename Scalar>
BasicComplexTensor<Scalar> split(const std::vector<std::complex<Scalar>>& data, const Shape& shape) {
    BasicComplexTensor<Scalar> out(shape);
    for (Index i = 0; i < out.size(); ++i) {
        out.re[i] = data[static_cast<std::size_t>(i)].real();
        out.im[i] = data[static_cast<std::size_t>(i)].imag();
    }
    return out;
}

template <typename Scalar>
BasicComplexTensor<Scalar> transform3(const BasicComplexTensor<Scalar>& x, int sign) {
    check_transform_shape(x.shape);
    auto buf = interleave(x);
    for (std::size_t axis = 0; axis < 3; ++axis) {
        transform_axis(buf, x.shape, axis, sign);
    }
    return split(buf, x.shape);
}

} // namespace detail

/// Forward 3D DFT over the first three axes, unnormalized, kernel exp(-2 pi i (.)).
/// Trailing axes are treated as independent batch/channel entries.
template <typename Scalar>
BasicComplexTensor<Scalar> dft3(const BasicComplexTensor<Scalar>& x) {
    return detail::transform3(x, -1);
}

template <typename Scalar>
BasicComplexTensor<Scalar> dft3(const BasicTensor<Scalar>& x) {
    BasicComplexTensor<Scalar> c(x.shape, x.data,
                                 BasicTensor<Scalar>::Array::Zero(x.size()));
    return detail::transform3(c, -1);
}

/// Inverse 3D DFT with 1/(n0 n1 n2) normalization, complex result.
template <typename Scalar>
BasicComplexTensor<Scalar> idft3_complex(const BasicComplexTensor<Scalar>& spectrum) {
    auto out = detail::transform3(spectrum, +1);
    const Scalar scale = Scalar(1) / static_cast<Scalar>(spectrum.shape[0] * spectrum.shape[1] *
                                                         spectrum.shape[2]);
    out.re *= scale;
    out.im *= scale;
    return out;
}

/// Inverse 3D DFT of a Hermitian spectrum. Throws Errc::non_real_inverse when the
/// imaginary residue of the result exceeds `tolerance`.
template <typename Scalar>
BasicTensor<Scalar> idft3(const BasicComplexTensor<Scalar>& spectrum, Scalar tolerance = Scalar(1e-8)) {
    auto out = idft3_complex(spectrum);
    const Scalar residue = out.size() > 0 ? out.im.abs().maxCoeff() : Scalar(0);
    require(residue <= tolerance, Errc::non_real_inverse,
            "non-real inverse: imaginary residue " + std::to_string(static_cast<double>(residue)));
    return BasicTensor<Scalar>(out.shape, std::move(out.re));
}

/// Index of the frequency -k along each transform axis.
inline Index negate_index(Index i, Index n) { return i == 0 ? 0 : n - i; }

/// Projects a spectrum onto the spectra of real signals: X[m] <- (X[m] + conj(X[-m]))/2.
/// Self-adjoint under the real inner product Re<X, Y>.
template <typename Scalar>
BasicComplexTensor<Scalar> enforce_hermitian(const BasicComplexTensor<Scalar>& x) {
    detail::check_transform_shape(x.shape);
    const Index n0 = x.shape[0], n1 = x.shape[1], n2 = x.shape[2];
    const Index inner = detail::inner_count(x.shape, 2);
    BasicComplexTensor<Scalar> out(x.shape);
    for (Index a = 0; a < n0; ++a) {
        for (Index b = 0; b < n1; ++b) {
            for (Index c = 0; c < n2; ++c) {
                const Index p = ((a * n1 + b) * n2 + c) * inner;
                const Index q = ((negate_index(a, n0) * n1 + negate_index(b, n1)) * n2 +
                                 negate_index(c, n2)) * inner;
                out.re.segment(p, inner) = (x.re.segment(p, inner) + x.re.segment(q, inner)) / 2;
                out.im.segment(p, inner) = (x.im.segment(p, inner) - x.im.segment(q, inner)) / 2;
            }
        }
    }
    return out;
}

/// Zeroes every mode outside `modes`; trailing axes are carried along.
template <typename Scalar>
BasicComplexTensor<Scalar> mode_filter(const BasicComplexTensor<Scalar>& x, const ModeSet& modes) {
    detail::check_transform_shape(x.shape);
    require(modes.extents() == Extents3{x.shape[0], x.shape[1], x.shape[2]}, Errc::shape_mismatch,
            "mode set extents do not match spectrum " + shape_string(x.shape));
    const Index inner = detail::inner_count(x.shape, 2);
    BasicComplexTensor<Scalar> out(x.shape);
    for (Index a : modes.kept(0)) {
        for (Index b : modes.kept(1)) {
            for (Index c : modes.kept(2)) {
                const Index p = ((a * x.shape[1] + b) * x.shape[2] + c) * inner;
                out.re.segment(p, inner) = x.re.segment(p, inner);
                out.im.segment(p, inner) = x.im.segment(p, inner);
            }
        }
    }
    return out;
}

template <typename Scalar>
BasicComplexTensor<Scalar> mode_filter(const BasicComplexTensor<Scalar>& x, Extents3 kmax) {
    detail::check_transform_shape(x.shape);
    return mode_filter(x, ModeSet({x.shape[0], x.shape[1], x.shape[2]}, kmax));
}

} // namespace gridfno::numcore
