#pragma once

#include "gridfno/numcore/ops.hpp"

namespace gridfno::fno {

using numcore::BatchNormOptions;
using numcore::BatchNormState;
using numcore::Tape;
using numcore::TruncatedDft;
using numcore::Var;

/// Real part of the retained-mode inverse after a per-mode channel mix:
/// g [n0, n1, n2, ..., C], weights complex [2k0, 2k1, 2k2, C, C]. Taking the
/// real part pairs the weight at -k with the conjugate of the weight at +k.
/// `dft` must outlive the tape.
Var spectral_conv(Tape& tape, Var g, Var weights, const TruncatedDft& dft);

struct LayerVars {
    Var weights; // complex spectral weights
    Var W;       // [C, C] pointwise
    Var gamma;
    Var beta;
};

/// relu(bn(g W + spectral_conv(g))). A null `bn` skips the normalization.
Var fourier_layer(Tape& tape, Var g, const LayerVars& p, const TruncatedDft& dft, BatchNormState* bn,
                  const BatchNormOptions& options);

/// Tape-free versions for inference.
Tensor spectral_conv(const Tensor& g, const Tensor& w_re, const Tensor& w_im, const TruncatedDft& dft);

/// Rows of x [..., Cin] times w [Cin, Cout].
Tensor apply_linear(const Tensor& x, const Tensor& w);

} // namespace gridfno::fno
