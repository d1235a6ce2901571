#pragma once

#include "gridfno/powerdyn/network.hpp"
#include "gridfno/powerdyn/state.hpp"

#include <cmath>

namespace gridfno::powerdyn {

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Full model on a packed state x = [delta; omega; V]. omega in rad/s.
/// Uses sin(d_i - d_j) = s_i c_j - c_i s_j so the couplings reduce to four
/// matrix-vector products. Fixed (infinite) buses get zero derivatives.
template <typename Scalar>
VectorX<Scalar> swing_rhs(const VectorX<Scalar>& x, const DenseNetwork& net) {
    using std::cos;
    using std::sin;
    const Index n = net.size();
    const auto delta = x.segment(0, n);
    const auto omega = x.segment(n, n);
    const auto V = x.segment(2 * n, n);

    VectorX<Scalar> s(n), c(n);
    for (Index i = 0; i < n; ++i) {
        s[i] = sin(delta[i]);
        c[i] = cos(delta[i]);
    }
    const VectorX<Scalar> a = V.cwiseProduct(c);
    const VectorX<Scalar> b = V.cwiseProduct(s);
    const VectorX<Scalar> Ba = net.B.cast<Scalar>() * a;
    const VectorX<Scalar> Bb = net.B.cast<Scalar>() * b;
    const VectorX<Scalar> Ga = net.G.cast<Scalar>() * a;
    const VectorX<Scalar> Gb = net.G.cast<Scalar>() * b;

    VectorX<Scalar> dx(3 * n);
    for (Index i = 0; i < n; ++i) {
        if (net.fixed[static_cast<std::size_t>(i)]) {
            dx[i] = Scalar(0);
            dx[n + i] = Scalar(0);
            dx[2 * n + i] = Scalar(0);
            continue;
        }
        const Scalar b_sin = s[i] * Ba[i] - c[i] * Bb[i];
        const Scalar g_cos = c[i] * Ga[i] + s[i] * Gb[i];
        const Scalar b_cos = c[i] * Ba[i] + s[i] * Bb[i];
        const Scalar g_sin = s[i] * Ga[i] - c[i] * Gb[i];
        dx[i] = omega[i];
        dx[n + i] = (net.P[i] - net.D[i] * omega[i] - V[i] * (b_sin + g_cos)) / net.M[i];
        dx[2 * n + i] = (net.Efd[i] - (1.0 - net.xd_gap[i] * net.B_self[i]) * V[i] +
                         net.xd_gap[i] * (b_cos + g_sin)) /
                        net.Tdo[i];
    }
    return dx;
}

/// Linearized (DC) model: M_i w'_i = P_i - D_i w_i - sum_j B_ij (d_i - d_j); V is held.
/// M_i is kept on the left so the DC and full models share units.
template <typename Scalar>
VectorX<Scalar> dc_swing_rhs(const VectorX<Scalar>& x, const DenseNetwork& net) {
    const Index n = net.size();
    const auto delta = x.segment(0, n);
    const auto omega = x.segment(n, n);
    const VectorX<Scalar> Bd = net.B.cast<Scalar>() * delta;
    const Eigen::VectorXd row = net.B.rowwise().sum();

    VectorX<Scalar> dx = VectorX<Scalar>::Zero(3 * n);
    for (Index i = 0; i < n; ++i) {
        if (net.fixed[static_cast<std::size_t>(i)]) {
            continue;
        }
        dx[i] = omega[i];
        dx[n + i] = (net.P[i] - net.D[i] * omega[i] - (row[i] * delta[i] - Bd[i])) / net.M[i];
    }
    return dx;
}

enum class Model { Full, Dc };

/// Checked wrappers on SystemState; throw Errc::numerical_blowup naming the bus
/// of the first non-finite entry.
SystemState swing_rhs(const SystemState& state, const NetworkModel& net);
SystemState dc_swing_rhs(const SystemState& state, const NetworkModel& net);

} // namespace gridfno::powerdyn
