#include "gridfno/fno/layers.hpp"

namespace gridfno::fno {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstRowMap = Eigen::Map<const RowMatrix>;
using RowMap = Eigen::Map<RowMatrix>;

double volume(const Shape& s) { return static_cast<double>(s[0] * s[1] * s[2]); }

} // namespace

Var spectral_conv(Tape& tape, Var g, Var weights, const TruncatedDft& dft) {
    const Var z = numcore::truncated_dft3(tape, g, dft);
    const Var mixed = numcore::kept_mix(tape, z, weights);
    return numcore::truncated_idft3_real(tape, mixed, dft);
}

Var fourier_layer(Tape& tape, Var g, const LayerVars& p, const TruncatedDft& dft, BatchNormState* bn,
                  const BatchNormOptions& options) {
    Var a = numcore::add(tape, numcore::linear(tape, g, p.W), spectral_conv(tape, g, p.weights, dft));
    if (bn) {
        a = numcore::batch_norm(tape, a, p.gamma, p.beta, *bn, options);
    }
    return numcore::relu(tape, a);
}

Tensor apply_linear(const Tensor& x, const Tensor& w) {
    require(w.rank() == 2 && x.rank() >= 1 && x.shape.back() == w.dim(0), Errc::shape_mismatch,
            "linear: " + shape_string(x.shape) + " x " + shape_string(w.shape));
    Shape out_shape = x.shape;
    out_shape.back() = w.dim(1);
    Tensor out(out_shape);
    const Index rows = x.size() / w.dim(0);
    RowMap(out.data.data(), rows, w.dim(1)).noalias() =
        ConstRowMap(x.data.data(), rows, w.dim(0)) * ConstRowMap(w.data.data(), w.dim(0), w.dim(1));
    return out;
}

Tensor spectral_conv(const Tensor& g, const Tensor& w_re, const Tensor& w_im, const TruncatedDft& dft) {
    const ComplexTensor z = dft.analyze(g);
    const Index c = z.shape.back();
    const Index modes = z.shape[0] * z.shape[1] * z.shape[2];
    require(w_re.shape == Shape({z.shape[0], z.shape[1], z.shape[2], c, c}) && w_im.shape == w_re.shape,
            Errc::shape_mismatch, "spectral weights " + shape_string(w_re.shape) + " vs block " + shape_string(z.shape));
    const Index rows = z.size() / (modes * c);
    ComplexTensor out(z.shape);
    for (Index m = 0; m < modes; ++m) {
        ConstRowMap zr(z.re.data() + m * rows * c, rows, c), zi(z.im.data() + m * rows * c, rows, c);
        ConstRowMap rr(w_re.data.data() + m * c * c, c, c), ri(w_im.data.data() + m * c * c, c, c);
        RowMap orr(out.re.data() + m * rows * c, rows, c), oi(out.im.data() + m * rows * c, rows, c);
        orr.noalias() = zr * rr.transpose();
        orr.noalias() -= zi * ri.transpose();
        oi.noalias() = zr * ri.transpose();
        oi.noalias() += zi * rr.transpose();
    }
    Tensor y = dft.synthesize_real(out);
    y.data *= 1.0 / volume(y.shape);
    return y;
}

} // namespace gridfno::fno
