#include "gridfno/numcore/ops.hpp"

#include <cmath>

namespace gridfno::numcore {
namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowMap = Eigen::Map<RowMat>;
using ConstRowMap = Eigen::Map<const RowMat>;

Index last_dim(const Shape& shape) {
    require(!shape.empty(), Errc::shape_mismatch, "operation needs at least one axis");
    return shape.back();
}

// Shape [K0,K1,K2, ...] of the kept block of a full spectrum shape.
Shape kept_shape(const Shape& full, const ModeSet& modes) {
    detail::check_transform_shape(full);
    require(Extents3{full[0], full[1], full[2]} == modes.extents(), Errc::shape_mismatch,
            "spectrum " + shape_string(full) + " does not match mode set");
    Shape out = full;
    for (std::size_t a = 0; a < 3; ++a) {
        out[a] = modes.kept_count(a);
    }
    return out;
}

// Calls f(full_offset, kept_offset) for every retained mode; offsets are in units of `inner`.
template <typename F>
void for_each_kept(const ModeSet& modes, F&& f) {
    const auto& e = modes.extents();
    const Index k1 = modes.kept_count(1), k2 = modes.kept_count(2);
    for (std::size_t a = 0; a < modes.kept(0).size(); ++a) {
        for (std::size_t b = 0; b < modes.kept(1).size(); ++b) {
            for (std::size_t c = 0; c < modes.kept(2).size(); ++c) {
                const Index full = (modes.kept(0)[a] * e[1] + modes.kept(1)[b]) * e[2] + modes.kept(2)[c];
                const Index kept = (static_cast<Index>(a) * k1 + static_cast<Index>(b)) * k2 +
                                   static_cast<Index>(c);
                f(full, kept);
            }
        }
    }
}

ComplexTensor gather_modes(const ComplexTensor& x, const ModeSet& modes) {
    ComplexTensor out(kept_shape(x.shape, modes));
    const Index inner = detail::inner_count(x.shape, 2);
    for_each_kept(modes, [&](Index full, Index kept) {
        out.re.segment(kept * inner, inner) = x.re.segment(full * inner, inner);
        out.im.segment(kept * inner, inner) = x.im.segment(full * inner, inner);
    });
    return out;
}

ComplexTensor scatter_modes(const Eigen::ArrayXd& re, const Eigen::ArrayXd& im, const Shape& full_shape,
                            const ModeSet& modes) {
    ComplexTensor out(full_shape);
    const Index inner = detail::inner_count(full_shape, 2);
    for_each_kept(modes, [&](Index full, Index kept) {
        out.re.segment(full * inner, inner) = re.segment(kept * inner, inner);
        out.im.segment(full * inner, inner) = im.segment(kept * inner, inner);
    });
    return out;
}

double transform_volume(const Shape& shape) {
    return static_cast<double>(shape[0] * shape[1] * shape[2]);
}

} // namespace

Var add(Tape& tape, Var a, Var b) {
    const Tensor& x = tape.value(a);
    const Tensor& y = tape.value(b);
    require_same_shape(x.shape, y.shape, "add");
    return tape.record(Tensor(x.shape, x.data + y.data), {a, b}, [a, b](Tape& t, Var self) {
        t.accumulate(a, t.upstream(self));
        t.accumulate(b, t.upstream(self));
    });
}

Var scale(Tape& tape, Var a, double factor) {
    const Tensor& x = tape.value(a);
    return tape.record(Tensor(x.shape, x.data * factor), {a}, [a, factor](Tape& t, Var self) {
        t.accumulate(a, t.upstream(self) * factor);
    });
}

Var sum(Tape& tape, Var a) {
    const Tensor& x = tape.value(a);
    Tensor out(Shape{1});
    out[0] = x.data.sum();
    return tape.record(std::move(out), {a}, [a](Tape& t, Var self) {
        const Index n = t.value(a).size();
        t.accumulate(a, Eigen::ArrayXd::Constant(n, t.upstream(self)[0]));
    });
}

Var relu(Tape& tape, Var a) {
    const Tensor& x = tape.value(a);
    return tape.record(Tensor(x.shape, x.data.max(0.0)), {a}, [a](Tape& t, Var self) {
        const auto& xv = t.value(a).data;
        t.accumulate(a, (xv > 0.0).select(t.upstream(self), 0.0));
    });
}

Var reshape(Tape& tape, Var a, Shape shape) {
    const Tensor& x = tape.value(a);
    require(shape_size(shape) == x.size(), Errc::shape_mismatch,
            "reshape " + shape_string(x.shape) + " -> " + shape_string(shape));
    return tape.record(Tensor(std::move(shape), x.data), {a}, [a](Tape& t, Var self) {
        t.accumulate(a, t.upstream(self));
    });
}

Var slice(Tape& tape, Var a, std::size_t axis, Index begin, Index count) {
    const Tensor& x = tape.value(a);
    require(axis < x.shape.size() && begin >= 0 && count >= 0 && begin + count <= x.shape[axis],
            Errc::shape_mismatch, "slice out of range for " + shape_string(x.shape));
    Index outer = 1;
    for (std::size_t i = 0; i < axis; ++i) {
        outer *= x.shape[i];
    }
    const Index n = x.shape[axis];
    const Index inner = detail::inner_count(x.shape, axis);
    Shape out_shape = x.shape;
    out_shape[axis] = count;
    Tensor out(out_shape);
    for (Index o = 0; o < outer; ++o) {
        out.data.segment(o * count * inner, count * inner) =
            x.data.segment((o * n + begin) * inner, count * inner);
    }
    return tape.record(std::move(out), {a}, [a, outer, n, inner, begin, count](Tape& t, Var self) {
        Eigen::ArrayXd g = Eigen::ArrayXd::Zero(outer * n * inner);
        const auto& up = t.upstream(self);
        for (Index o = 0; o < outer; ++o) {
            g.segment((o * n + begin) * inner, count * inner) = up.segment(o * count * inner, count * inner);
        }
        t.accumulate(a, g);
    });
}

Var linear(Tape& tape, Var x, Var w) {
    const Tensor& xv = tape.value(x);
    const Tensor& wv = tape.value(w);
    require(wv.rank() == 2, Errc::shape_mismatch, "linear weight must be a matrix");
    const Index cin = last_dim(xv.shape);
    const Index cout = wv.shape[1];
    require(wv.shape[0] == cin, Errc::shape_mismatch,
            "linear: input " + shape_string(xv.shape) + " vs weight " + shape_string(wv.shape));
    const Index rows = xv.size() / std::max<Index>(cin, 1);
    Shape out_shape = xv.shape;
    out_shape.back() = cout;
    Tensor out(out_shape);
    RowMap(out.data.data(), rows, cout).noalias() =
        ConstRowMap(xv.data.data(), rows, cin) * ConstRowMap(wv.data.data(), cin, cout);
    return tape.record(std::move(out), {x, w}, [x, w, rows, cin, cout](Tape& t, Var self) {
        ConstRowMap gy(t.upstream(self).data(), rows, cout);
        if (t.requires_grad(x)) {
            Eigen::ArrayXd gx(rows * cin);
            RowMap(gx.data(), rows, cin).noalias() =
                gy * ConstRowMap(t.value(w).data.data(), cin, cout).transpose();
            t.accumulate(x, gx);
        }
        if (t.requires_grad(w)) {
            Eigen::ArrayXd gw(cin * cout);
            RowMap(gw.data(), cin, cout).noalias() =
                ConstRowMap(t.value(x).data.data(), rows, cin).transpose() * gy;
            t.accumulate(w, gw);
        }
    });
}

Var add_bias(Tape& tape, Var x, Var b) {
    const Tensor& xv = tape.value(x);
    const Tensor& bv = tape.value(b);
    const Index c = last_dim(xv.shape);
    require(bv.size() == c, Errc::shape_mismatch, "bias length does not match channel count");
    const Index rows = xv.size() / std::max<Index>(c, 1);
    Tensor out(xv.shape, xv.data);
    RowMap(out.data.data(), rows, c).rowwise() += ConstRowMap(bv.data.data(), 1, c).row(0);
    return tape.record(std::move(out), {x, b}, [x, b, rows, c](Tape& t, Var self) {
        t.accumulate(x, t.upstream(self));
        if (t.requires_grad(b)) {
            Eigen::ArrayXd gb = ConstRowMap(t.upstream(self).data(), rows, c).colwise().sum().transpose();
            t.accumulate(b, gb);
        }
    });
}

Var batch_norm(Tape& tape, Var x, Var gamma, Var beta, BatchNormState& state,
               const BatchNormOptions& options) {
    const Tensor& xv = tape.value(x);
    const Index c = last_dim(xv.shape);
    const Index rows = xv.size() / std::max<Index>(c, 1);
    require(tape.value(gamma).size() == c && tape.value(beta).size() == c, Errc::shape_mismatch,
            "batch-norm affine parameters do not match channel count");
    if (state.running_mean.size() != c) {
        state.running_mean = Eigen::ArrayXd::Zero(c);
        state.running_var = Eigen::ArrayXd::Ones(c);
    }

    ConstRowMap xm(xv.data.data(), rows, c);
    Eigen::ArrayXd mean, var;
    if (options.training) {
        require(rows > 1, Errc::invalid_argument, "batch-norm training needs more than one value per channel");
        mean = xm.colwise().mean().transpose();
        var = (xm.rowwise() - mean.transpose().matrix()).array().square().colwise().mean().transpose();
        const double unbias = static_cast<double>(rows) / static_cast<double>(rows - 1);
        state.running_mean = (1.0 - options.momentum) * state.running_mean + options.momentum * mean;
        state.running_var = (1.0 - options.momentum) * state.running_var + options.momentum * var * unbias;
    } else {
        mean = state.running_mean;
        var = state.running_var;
    }
    const Eigen::ArrayXd inv_std = (var + options.epsilon).rsqrt();

    // normalized = (x - mean) * inv_std, kept for the adjoint.
    auto normalized = std::make_shared<Eigen::ArrayXd>(xv.size());
    RowMap nm(normalized->data(), rows, c);
    nm = ((xm.rowwise() - mean.transpose().matrix()).array().rowwise() * inv_std.transpose()).matrix();

    Tensor out(xv.shape);
    RowMap om(out.data.data(), rows, c);
    const auto& g = tape.value(gamma).data;
    const auto& bt = tape.value(beta).data;
    om = ((nm.array().rowwise() * g.transpose()).rowwise() + bt.transpose()).matrix();

    const bool training = options.training;
    return tape.record(std::move(out), {x, gamma, beta},
                       [x, gamma, beta, rows, c, normalized, inv_std, training](Tape& t, Var self) {
        ConstRowMap gy(t.upstream(self).data(), rows, c);
        ConstRowMap nm(normalized->data(), rows, c);
        if (t.requires_grad(gamma)) {
            Eigen::ArrayXd gg = (gy.array() * nm.array()).colwise().sum().transpose();
            t.accumulate(gamma, gg);
        }
        if (t.requires_grad(beta)) {
            Eigen::ArrayXd gb = gy.colwise().sum().transpose();
            t.accumulate(beta, gb);
        }
        if (t.requires_grad(x)) {
            const Eigen::ArrayXd scale_c = t.value(gamma).data * inv_std;
            Eigen::ArrayXd gx(rows * c);
            RowMap gxm(gx.data(), rows, c);
            if (training) {
                const Eigen::ArrayXd mean_gy = gy.colwise().mean().transpose();
                const Eigen::ArrayXd mean_gy_n = (gy.array() * nm.array()).colwise().mean().transpose();
                gxm = (((gy.array().rowwise() - mean_gy.transpose()) -
                        nm.array().rowwise() * mean_gy_n.transpose())
                           .rowwise() *
                       scale_c.transpose())
                          .matrix();
            } else {
                gxm = (gy.array().rowwise() * scale_c.transpose()).matrix();
            }
            t.accumulate(x, gx);
        }
    });
}

Var complex_from(Tape& tape, Var re, Var im) {
    const Tensor& r = tape.value(re);
    const Tensor& i = tape.value(im);
    require_same_shape(r.shape, i.shape, "complex_from");
    return tape.record(ComplexTensor(r.shape, r.data, i.data), {re, im}, [re, im](Tape& t, Var self) {
        t.accumulate(re, t.upstream(self));
        t.accumulate(im, t.upstream_im(self));
    });
}

Var squared_magnitude_sum(Tape& tape, Var z) {
    const ComplexTensor& v = tape.cvalue(z);
    Tensor out(Shape{1});
    out[0] = v.re.square().sum() + v.im.square().sum();
    return tape.record(std::move(out), {z}, [z](Tape& t, Var self) {
        const double g = t.upstream(self)[0];
        const auto& v = t.cvalue(z);
        t.accumulate(z, 2.0 * g * v.re, 2.0 * g * v.im);
    });
}

Var dft3(Tape& tape, Var x) {
    return tape.record(numcore::dft3(tape.value(x)), {x}, [x](Tape& t, Var self) {
        const Shape& shape = t.cvalue(self).shape;
        // Adjoint of the unnormalized forward DFT: Re(F^H g) = n Re(idft3(g)).
        const auto back = idft3_complex(ComplexTensor(shape, t.upstream(self), t.upstream_im(self)));
        t.accumulate(x, back.re * transform_volume(shape));
    });
}

Var idft3(Tape& tape, Var spectrum, double tolerance) {
    return tape.record(numcore::idft3(tape.cvalue(spectrum), tolerance), {spectrum},
                       [spectrum](Tape& t, Var self) {
        const Tensor& y = t.value(self);
        const auto fwd = numcore::dft3(Tensor(y.shape, t.upstream(self)));
        const double inv = 1.0 / transform_volume(y.shape);
        t.accumulate(spectrum, fwd.re * inv, fwd.im * inv);
    });
}

Var mode_filter(Tape& tape, Var spectrum, const ModeSet& modes) {
    return tape.record(numcore::mode_filter(tape.cvalue(spectrum), modes), {spectrum},
                       [spectrum, modes](Tape& t, Var self) {
        const Shape& shape = t.cvalue(self).shape;
        const auto g = numcore::mode_filter(ComplexTensor(shape, t.upstream(self), t.upstream_im(self)), modes);
        t.accumulate(spectrum, g.re, g.im);
    });
}

Var enforce_hermitian(Tape& tape, Var spectrum) {
    return tape.record(numcore::enforce_hermitian(tape.cvalue(spectrum)), {spectrum},
                       [spectrum](Tape& t, Var self) {
        const Shape& shape = t.cvalue(self).shape;
        const auto g = numcore::enforce_hermitian(ComplexTensor(shape, t.upstream(self), t.upstream_im(self)));
        t.accumulate(spectrum, g.re, g.im);
    });
}

Var mode_gather(Tape& tape, Var spectrum, const ModeSet& modes) {
    const Shape full = tape.cvalue(spectrum).shape;
    return tape.record(gather_modes(tape.cvalue(spectrum), modes), {spectrum},
                       [spectrum, modes, full](Tape& t, Var self) {
        const auto g = scatter_modes(t.upstream(self), t.upstream_im(self), full, modes);
        t.accumulate(spectrum, g.re, g.im);
    });
}

Var mode_scatter(Tape& tape, Var kept, const ModeSet& modes) {
    const ComplexTensor& k = tape.cvalue(kept);
    Shape full = k.shape;
    for (std::size_t a = 0; a < 3; ++a) {
        require(k.shape.size() >= 3 && k.shape[a] == modes.kept_count(a), Errc::shape_mismatch,
                "kept block " + shape_string(k.shape) + " does not match mode set");
        full[a] = modes.extents()[a];
    }
    return tape.record(scatter_modes(k.re, k.im, full, modes), {kept}, [kept, modes](Tape& t, Var self) {
        const Shape& shape = t.cvalue(self).shape;
        const auto g = gather_modes(ComplexTensor(shape, t.upstream(self), t.upstream_im(self)), modes);
        t.accumulate(kept, g.re, g.im);
    });
}

Var kept_mix(Tape& tape, Var kept, Var weights) {
    const ComplexTensor& z = tape.cvalue(kept);
    const ComplexTensor& r = tape.cvalue(weights);
    require(z.shape.size() >= 4 && r.shape.size() == 5, Errc::shape_mismatch,
            "kept_mix expects [K0,K1,K2,...,C] and [K0,K1,K2,C,C]");
    const Index c = z.shape.back();
    require(r.shape[0] == z.shape[0] && r.shape[1] == z.shape[1] && r.shape[2] == z.shape[2] &&
                r.shape[3] == c && r.shape[4] == c,
            Errc::shape_mismatch, "kept_mix: block " + shape_string(z.shape) + " vs weights " +
                                      shape_string(r.shape));
    const Index modes = z.shape[0] * z.shape[1] * z.shape[2];
    const Index rows = z.size() / (modes * c);
    const Index zblock = rows * c;
    const Index rblock = c * c;

    ComplexTensor out(z.shape);
    for (Index m = 0; m < modes; ++m) {
        ConstRowMap zr(z.re.data() + m * zblock, rows, c), zi(z.im.data() + m * zblock, rows, c);
        ConstRowMap rr(r.re.data() + m * rblock, c, c), ri(r.im.data() + m * rblock, c, c);
        RowMap orr(out.re.data() + m * zblock, rows, c), oi(out.im.data() + m * zblock, rows, c);
        orr.noalias() = zr * rr.transpose();
        orr.noalias() -= zi * ri.transpose();
        oi.noalias() = zr * ri.transpose();
        oi.noalias() += zi * rr.transpose();
    }
    return tape.record(std::move(out), {kept, weights},
                       [kept, weights, modes, rows, c, zblock, rblock](Tape& t, Var self) {
        const auto& gre = t.upstream(self);
        const auto& gim = t.upstream_im(self);
        const ComplexTensor& z = t.cvalue(kept);
        const ComplexTensor& r = t.cvalue(weights);
        const bool want_z = t.requires_grad(kept);
        const bool want_r = t.requires_grad(weights);
        Eigen::ArrayXd gz_re, gz_im, gr_re, gr_im;
        if (want_z) {
            gz_re.resize(z.size());
            gz_im.resize(z.size());
        }
        if (want_r) {
            gr_re.resize(r.size());
            gr_im.resize(r.size());
        }
        for (Index m = 0; m < modes; ++m) {
            ConstRowMap gr(gre.data() + m * zblock, rows, c), gi(gim.data() + m * zblock, rows, c);
            ConstRowMap rr(r.re.data() + m * rblock, c, c), ri(r.im.data() + m * rblock, c, c);
            if (want_z) {
                // gz = g conj(R)
                RowMap zr(gz_re.data() + m * zblock, rows, c), zi(gz_im.data() + m * zblock, rows, c);
                zr.noalias() = gr * rr;
                zr.noalias() += gi * ri;
                zi.noalias() = gi * rr;
                zi.noalias() -= gr * ri;
            }
            if (want_r) {
                // gR = g^T conj(z)
                ConstRowMap zr(z.re.data() + m * zblock, rows, c), zi(z.im.data() + m * zblock, rows, c);
                RowMap wr(gr_re.data() + m * rblock, c, c), wi(gr_im.data() + m * rblock, c, c);
                wr.noalias() = gr.transpose() * zr;
                wr.noalias() += gi.transpose() * zi;
                wi.noalias() = gi.transpose() * zr;
                wi.noalias() -= gr.transpose() * zi;
            }
        }
        if (want_z) {
            t.accumulate(kept, gz_re, gz_im);
        }
        if (want_r) {
            t.accumulate(weights, gr_re, gr_im);
        }
    });
}

Var truncated_dft3(Tape& tape, Var x, const TruncatedDft& dft) {
    const TruncatedDft* plan = &dft;
    return tape.record(dft.analyze(tape.value(x)), {x}, [x, plan](Tape& t, Var self) {
        const Shape& shape = t.cvalue(self).shape;
        const Tensor g = plan->synthesize_real(ComplexTensor(shape, t.upstream(self), t.upstream_im(self)));
        t.accumulate(x, g.data);
    });
}

Var truncated_idft3_real(Tape& tape, Var kept, const TruncatedDft& dft) {
    const TruncatedDft* plan = &dft;
    Tensor y = dft.synthesize_real(tape.cvalue(kept));
    const double inv = 1.0 / transform_volume(y.shape);
    y.data *= inv;
    return tape.record(std::move(y), {kept}, [kept, plan, inv](Tape& t, Var self) {
        const Shape& shape = t.value(self).shape;
        const ComplexTensor g = plan->analyze(Tensor(shape, t.upstream(self)));
        t.accumulate(kept, g.re * inv, g.im * inv);
    });
}

Var mape(Tape& tape, Var pred, const Tensor& target, std::size_t batch_axis) {
    const Tensor& p = tape.value(pred);
    require_same_shape(p.shape, target.shape, "mape");
    require(batch_axis < p.shape.size(), Errc::shape_mismatch, "mape batch axis out of range");
    Index outer = 1;
    for (std::size_t a = 0; a < batch_axis; ++a) {
        outer *= p.shape[a];
    }
    const Index h = p.shape[batch_axis];
    const Index inner = detail::inner_count(p.shape, batch_axis);
    require(h > 0, Errc::invalid_argument, "mape over an empty batch");

    Eigen::ArrayXd num = Eigen::ArrayXd::Zero(h);
    Eigen::ArrayXd den = Eigen::ArrayXd::Zero(h);
    for (Index o = 0; o < outer; ++o) {
        for (Index b = 0; b < h; ++b) {
            const Index off = (o * h + b) * inner;
            num[b] += (p.data.segment(off, inner) - target.data.segment(off, inner)).abs().sum();
            den[b] += target.data.segment(off, inner).abs().sum();
        }
    }
    for (Index b = 0; b < h; ++b) {
        require(den[b] > 0.0, Errc::degenerate_target,
                "degenerate target: sample " + std::to_string(b) + " has zero L1 norm");
    }
    Tensor out(Shape{1});
    out[0] = (num / den).sum() / static_cast<double>(h);

    auto tgt = std::make_shared<Eigen::ArrayXd>(target.data);
    return tape.record(std::move(out), {pred}, [pred, tgt, den, outer, h, inner](Tape& t, Var self) {
        const double up = t.upstream(self)[0] / static_cast<double>(h);
        const auto& pv = t.value(pred).data;
        Eigen::ArrayXd g(pv.size());
        for (Index o = 0; o < outer; ++o) {
            for (Index b = 0; b < h; ++b) {
                const Index off = (o * h + b) * inner;
                g.segment(off, inner) = (pv.segment(off, inner) - tgt->segment(off, inner)).sign() * (up / den[b]);
            }
        }
        t.accumulate(pred, g);
    });
}

} // namespace gridfno::numcore
