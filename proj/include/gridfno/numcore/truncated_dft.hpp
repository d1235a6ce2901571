#pragma once

#include "gridfno/numcore/dft.hpp"

#include <Eigen/Core>

#include <array>

namespace gridfno::numcore {

/// Separable DFT restricted to the retained modes of a ModeSet.
///
/// analyze(x) equals gather(mode_filter(dft3(x))) for real x, i.e. the spectrum
/// at the kept indices only, laid out as [K0, K1, K2, rest...]. synthesize_real
/// is its adjoint: Re(F^H Z) with Z zero outside the kept set, unnormalized.
/// Both run as a chain of dense matrix products, one per axis.
class TruncatedDft {
public:
    using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

    TruncatedDft() = default;
    explicit TruncatedDft(const ModeSet& modes);

    const ModeSet& modes() const { return modes_; }

    /// Real [n0, n1, n2, rest...] -> complex [K0, K1, K2, rest...].
    ComplexTensor analyze(const Tensor& x) const;

    /// Complex [K0, K1, K2, rest...] -> real [n0, n1, n2, rest...], Re(F^H z).
    Tensor synthesize_real(const ComplexTensor& z) const;

    /// Shape of analyze() output for an input of the given shape.
    Shape spectrum_shape(const Shape& signal_shape) const;
    Shape signal_shape(const Shape& spectrum_shape) const;

private:
    ModeSet modes_;
    // Rows = kept frequencies, columns = positions: cos(2 pi k x/n) and -sin(2 pi k x/n).
    std::array<Matrix, 3> cos_;
    std::array<Matrix, 3> msin_;
};

} // namespace gridfno::numcore
