#include "gridfno/numcore/truncated_dft.hpp"

#include <cmath>
#include <numbers>

namespace gridfno::numcore {
namespace {

using Matrix = TruncatedDft::Matrix;
using MatMap = Eigen::Map<Matrix>;
using ConstMatMap = Eigen::Map<const Matrix>;

Index rest_count(const Shape& shape) {
    Index r = 1;
    for (std::size_t a = 3; a < shape.size(); ++a) {
        r *= shape[a];
    }
    return r;
}

// (out_re, out_im) = (fr + i fi)(a_re + i a_im)
void complex_product(const Matrix& fr, const Matrix& fi, const ConstMatMap& are,
                     const ConstMatMap& aim, MatMap ore, MatMap oim) {
    ore.noalias() = fr * are;
    ore.noalias() -= fi * aim;
    oim.noalias() = fr * aim;
    oim.noalias() += fi * are;
}

// (out_re, out_im) = (fr + i fi)^H (a_re + i a_im)
void adjoint_product(const Matrix& fr, const Matrix& fi, const ConstMatMap& are,
                     const ConstMatMap& aim, MatMap ore, MatMap oim) {
    ore.noalias() = fr.transpose() * are;
    ore.noalias() += fi.transpose() * aim;
    oim.noalias() = fr.transpose() * aim;
    oim.noalias() -= fi.transpose() * are;
}

} // namespace

TruncatedDft::TruncatedDft(const ModeSet& modes) : modes_(modes) {
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const Index n = modes.extents()[axis];
        const auto& kept = modes.kept(axis);
        cos_[axis].resize(static_cast<Index>(kept.size()), n);
        msin_[axis].resize(static_cast<Index>(kept.size()), n);
        for (std::size_t r = 0; r < kept.size(); ++r) {
            for (Index x = 0; x < n; ++x) {
                const Index phase = (kept[r] * x) % n;
                const double angle = 2.0 * std::numbers::pi * static_cast<double>(phase) /
                                     static_cast<double>(n);
                cos_[axis](static_cast<Index>(r), x) = std::cos(angle);
                msin_[axis](static_cast<Index>(r), x) = -std::sin(angle);
            }
        }
    }
}

Shape TruncatedDft::spectrum_shape(const Shape& signal_shape) const {
    detail::check_transform_shape(signal_shape);
    if (Extents3{signal_shape[0], signal_shape[1], signal_shape[2]} != modes_.extents())
        fail(Errc::shape_mismatch, "signal " + shape_string(signal_shape) + " does not match mode set");
    Shape out = signal_shape;
    for (std::size_t a = 0; a < 3; ++a) {
        out[a] = modes_.kept_count(a);
    }
    return out;
}

Shape TruncatedDft::signal_shape(const Shape& spectrum_shape) const {
    require(spectrum_shape.size() >= 3, Errc::shape_mismatch, "spectrum needs three leading axes");
    Shape out = spectrum_shape;
    for (std::size_t a = 0; a < 3; ++a) {
        if (spectrum_shape[a] != modes_.kept_count(a))
            fail(Errc::shape_mismatch, "spectrum " + shape_string(spectrum_shape) + " does not match mode set");
        out[a] = modes_.extents()[a];
    }
    return out;
}

ComplexTensor TruncatedDft::analyze(const Tensor& x) const {
    const Shape out_shape = spectrum_shape(x.shape);
    const Index n0 = x.shape[0], n1 = x.shape[1], n2 = x.shape[2];
    const Index k0 = out_shape[0], k1 = out_shape[1], k2 = out_shape[2];
    const Index r = rest_count(x.shape);

    // Axis 0, real input.
    Eigen::ArrayXd s0_re(k0 * n1 * n2 * r), s0_im(k0 * n1 * n2 * r);
    {
        ConstMatMap in(x.data.data(), n0, n1 * n2 * r);
        MatMap(s0_re.data(), k0, n1 * n2 * r).noalias() = cos_[0] * in;
        MatMap(s0_im.data(), k0, n1 * n2 * r).noalias() = msin_[0] * in;
    }

    // Axis 1.
    Eigen::ArrayXd s1_re(k0 * k1 * n2 * r), s1_im(k0 * k1 * n2 * r);
    for (Index a = 0; a < k0; ++a) {
        complex_product(cos_[1], msin_[1],
                        ConstMatMap(s0_re.data() + a * n1 * n2 * r, n1, n2 * r),
                        ConstMatMap(s0_im.data() + a * n1 * n2 * r, n1, n2 * r),
                        MatMap(s1_re.data() + a * k1 * n2 * r, k1, n2 * r),
                        MatMap(s1_im.data() + a * k1 * n2 * r, k1, n2 * r));
    }

    // Axis 2.
    ComplexTensor out(out_shape);
    for (Index ab = 0; ab < k0 * k1; ++ab) {
        complex_product(cos_[2], msin_[2],
                        ConstMatMap(s1_re.data() + ab * n2 * r, n2, r),
                        ConstMatMap(s1_im.data() + ab * n2 * r, n2, r),
                        MatMap(out.re.data() + ab * k2 * r, k2, r),
                        MatMap(out.im.data() + ab * k2 * r, k2, r));
    }
    return out;
}

Tensor TruncatedDft::synthesize_real(const ComplexTensor& z) const {
    const Shape out_shape = signal_shape(z.shape);
    const Index n0 = out_shape[0], n1 = out_shape[1], n2 = out_shape[2];
    const Index k0 = z.shape[0], k1 = z.shape[1], k2 = z.shape[2];
    const Index r = rest_count(z.shape);

    // Axis 2.
    Eigen::ArrayXd s2_re(k0 * k1 * n2 * r), s2_im(k0 * k1 * n2 * r);
    for (Index ab = 0; ab < k0 * k1; ++ab) {
        adjoint_product(cos_[2], msin_[2],
                        ConstMatMap(z.re.data() + ab * k2 * r, k2, r),
                        ConstMatMap(z.im.data() + ab * k2 * r, k2, r),
                        MatMap(s2_re.data() + ab * n2 * r, n2, r),
                        MatMap(s2_im.data() + ab * n2 * r, n2, r));
    }

    // Axis 1.
    Eigen::ArrayXd s1_re(k0 * n1 * n2 * r), s1_im(k0 * n1 * n2 * r);
    for (Index a = 0; a < k0; ++a) {
        adjoint_product(cos_[1], msin_[1],
                        ConstMatMap(s2_re.data() + a * k1 * n2 * r, k1, n2 * r),
                        ConstMatMap(s2_im.data() + a * k1 * n2 * r, k1, n2 * r),
                        MatMap(s1_re.data() + a * n1 * n2 * r, n1, n2 * r),
                        MatMap(s1_im.data() + a * n1 * n2 * r, n1, n2 * r));
    }

    // Axis 0, real part only.
    Tensor out(out_shape);
    MatMap o(out.data.data(), n0, n1 * n2 * r);
    o.noalias() = cos_[0].transpose() * ConstMatMap(s1_re.data(), k0, n1 * n2 * r);
    o.noalias() += msin_[0].transpose() * ConstMatMap(s1_im.data(), k0, n1 * n2 * r);
    return out;
}

} // namespace gridfno::numcore
