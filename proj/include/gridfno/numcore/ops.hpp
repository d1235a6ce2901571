#pragma once

#include "gridfno/numcore/dft.hpp"
#include "gridfno/numcore/tape.hpp"
#include "gridfno/numcore/truncated_dft.hpp"

namespace gridfno::numcore {

// Elementwise and shape primitives (real nodes).
Var add(Tape& tape, Var a, Var b);
Var scale(Tape& tape, Var a, double factor);
Var sum(Tape& tape, Var a);
Var relu(Tape& tape, Var a);
Var reshape(Tape& tape, Var a, Shape shape);
Var slice(Tape& tape, Var a, std::size_t axis, Index begin, Index count);

/// x[..., Cin] * w[Cin, Cout] -> [..., Cout].
Var linear(Tape& tape, Var x, Var w);

/// x[..., C] + b[C].
Var add_bias(Tape& tape, Var x, Var b);

struct BatchNormState {
    Eigen::ArrayXd running_mean;
    Eigen::ArrayXd running_var;
};

struct BatchNormOptions {
    bool training = true;
    double momentum = 0.1;
    double epsilon = 1e-5;
};

/// Normalizes each channel (last axis) over every other axis. In training mode the
/// batch statistics are used and the running statistics updated; otherwise the
/// running statistics are used.
Var batch_norm(Tape& tape, Var x, Var gamma, Var beta, BatchNormState& state,
               const BatchNormOptions& options);

// Complex-valued primitives.
Var complex_from(Tape& tape, Var re, Var im);
Var squared_magnitude_sum(Tape& tape, Var z);

/// Full forward transform over the first three axes of a real node.
Var dft3(Tape& tape, Var x);

/// Inverse transform of a Hermitian spectrum to a real node (throws on residue).
Var idft3(Tape& tape, Var spectrum, double tolerance = 1e-8);

Var mode_filter(Tape& tape, Var spectrum, const ModeSet& modes);
Var enforce_hermitian(Tape& tape, Var spectrum);

/// Full spectrum [n0,n1,n2,...] <-> retained-mode block [K0,K1,K2,...].
Var mode_gather(Tape& tape, Var spectrum, const ModeSet& modes);
Var mode_scatter(Tape& tape, Var kept, const ModeSet& modes);

/// Per-mode channel contraction: out[m, ..., i] = sum_v weights[m, i, v] * kept[m, ..., v]
/// with kept [K0,K1,K2, ..., C] and weights [K0,K1,K2, C, C].
Var kept_mix(Tape& tape, Var kept, Var weights);

/// Retained-mode analysis of a real node (pruned dft3 + gather).
Var truncated_dft3(Tape& tape, Var x, const TruncatedDft& dft);

/// Real inverse from retained modes: Re(idft3(scatter(z))), normalized by 1/(n0 n1 n2).
Var truncated_idft3_real(Tape& tape, Var kept, const TruncatedDft& dft);

/// Mean absolute percentage error: (1/H) sum_h |pred_h - target_h|_1 / |target_h|_1,
/// where h indexes `batch_axis`. Throws Errc::degenerate_target on a zero-norm sample.
Var mape(Tape& tape, Var pred, const Tensor& target, std::size_t batch_axis);

} // namespace gridfno::numcore
