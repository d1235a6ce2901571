#include "gridfno/powerdyn/equilibrium.hpp"

#include "gridfno/powerdyn/dynamics.hpp"

#include <Eigen/Dense>

#include <cmath>

namespace gridfno::powerdyn {
namespace {

struct Layout {
    std::vector<Index> free;       // non-fixed buses
    std::vector<Index> angle_vars; // buses whose angle is unknown
    Index n = 0;
};

Layout make_layout(const DenseNetwork& d) {
    Layout L;
    L.n = d.size();
    for (Index i = 0; i < L.n; ++i) {
        if (!d.fixed[static_cast<std::size_t>(i)]) {
            L.free.push_back(i);
        }
    }
    const bool any_fixed = L.free.size() < static_cast<std::size_t>(L.n);
    for (std::size_t k = 0; k < L.free.size(); ++k) {
        if (any_fixed || k > 0) {
            L.angle_vars.push_back(L.free[k]);
        }
    }
    return L;
}

template <typename Scalar>
VectorX<Scalar> residual(const VectorX<Scalar>& z, const Eigen::VectorXd& base, const Layout& L,
                         const DenseNetwork& d) {
    VectorX<Scalar> x(3 * L.n);
    for (Index i = 0; i < 3 * L.n; ++i) {
        x[i] = Scalar(base[i]);
    }
    Index p = 0;
    for (Index b : L.angle_vars) x[b] = z[p++];
    for (Index b : L.free) x[2 * L.n + b] = z[p++];
    for (Index i = 0; i < L.n; ++i) x[L.n + i] = Scalar(0.0);
    const VectorX<Scalar> dx = swing_rhs<Scalar>(x, d);
    VectorX<Scalar> r(2 * static_cast<Index>(L.free.size()));
    Index q = 0;
    for (Index b : L.free) r[q++] = dx[L.n + b];
    for (Index b : L.free) r[q++] = dx[2 * L.n + b];
    return r;
}

} // namespace

SystemState find_equilibrium(const NetworkModel& net, const EquilibriumOptions& options) {
    net.validate();
    const DenseNetwork d = densify(net);
    const Layout L = make_layout(d);
    const Index n = L.n;

    SystemState guess(n);
    if (options.initial_guess) {
        require(options.initial_guess->size() == n, Errc::shape_mismatch, "initial guess does not match network");
        guess = *options.initial_guess;
        guess.omega.setZero();
    } else if (!L.angle_vars.empty()) {
        // DC power-flow angles as the starting point.
        Eigen::MatrixXd lap = -d.B;
        lap.diagonal() = d.B.rowwise().sum();
        const auto m = static_cast<Index>(L.angle_vars.size());
        Eigen::MatrixXd A(m, m);
        Eigen::VectorXd rhs(m);
        for (Index r = 0; r < m; ++r) {
            rhs[r] = d.P[L.angle_vars[static_cast<std::size_t>(r)]];
            for (Index c = 0; c < m; ++c) {
                A(r, c) = lap(L.angle_vars[static_cast<std::size_t>(r)], L.angle_vars[static_cast<std::size_t>(c)]);
            }
        }
        const Eigen::VectorXd theta = A.completeOrthogonalDecomposition().solve(rhs);
        for (Index r = 0; r < m; ++r) {
            guess.delta[L.angle_vars[static_cast<std::size_t>(r)]] = theta[r];
        }
    }
    if (L.free.empty()) {
        return guess;
    }

    const Eigen::VectorXd base = guess.stacked();
    const auto nz = static_cast<Index>(L.angle_vars.size() + L.free.size());
    Eigen::VectorXd z(nz);
    {
        Index p = 0;
        for (Index b : L.angle_vars) z[p++] = guess.delta[b];
        for (Index b : L.free) z[p++] = guess.V[b];
    }

    // Central-difference Jacobian; the residual is smooth and cheap.
    auto eval = [&](const Eigen::VectorXd& zz, Eigen::MatrixXd* jac) {
        const Eigen::VectorXd r = residual<double>(zz, base, L, d);
        if (jac) {
            jac->resize(r.size(), nz);
            Eigen::VectorXd zp = zz;
            for (Index i = 0; i < nz; ++i) {
                const double h = 1e-6 * std::max(1.0, std::abs(zz[i]));
                zp[i] = zz[i] + h;
                const Eigen::VectorXd up = residual<double>(zp, base, L, d);
                zp[i] = zz[i] - h;
                const Eigen::VectorXd down = residual<double>(zp, base, L, d);
                zp[i] = zz[i];
                jac->col(i) = (up - down) / (2.0 * h);
            }
        }
        return r;
    };

    double lambda = 1e-6;
    Eigen::MatrixXd J;
    Eigen::VectorXd r = eval(z, &J);
    double cost = r.squaredNorm();
    for (int it = 0; it < options.max_iterations && r.lpNorm<Eigen::Infinity>() > options.tolerance; ++it) {
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd g = J.transpose() * r;
        bool improved = false;
        for (int tries = 0; tries < 30; ++tries) {
            Eigen::MatrixXd A = JtJ;
            A.diagonal().array() += lambda * (1.0 + JtJ.diagonal().array());
            const Eigen::VectorXd step = A.ldlt().solve(-g);
            const Eigen::VectorXd trial = z + step;
            const Eigen::VectorXd rt = eval(trial, nullptr);
            if (rt.allFinite() && rt.squaredNorm() < cost) {
                z = trial;
                lambda = std::max(lambda * 0.1, 1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if (!improved) {
            break;
        }
        r = eval(z, &J);
        cost = r.squaredNorm();
    }
    require(r.allFinite() && r.lpNorm<Eigen::Infinity>() <= std::max(options.tolerance, 1e-9), Errc::no_equilibrium,
            "no equilibrium found (residual " + std::to_string(r.lpNorm<Eigen::Infinity>()) + ")");

    SystemState out = guess;
    Index p = 0;
    for (Index b : L.angle_vars) out.delta[b] = z[p++];
    for (Index b : L.free) out.V[b] = z[p++];
    out.omega.setZero();
    return out;
}

void balance_injections(NetworkModel& net, const SystemState& op) {
    const Index n = net.n_buses();
    require(op.size() == n, Errc::shape_mismatch, "operating point does not match network");
    const DenseNetwork d = densify(net);
    for (Index i = 0; i < n; ++i) {
        BusParams& p = net.buses[static_cast<std::size_t>(i)];
        double b_sin = 0, g_cos = 0, b_cos = 0, g_sin = 0;
        for (Index j = 0; j < n; ++j) {
            const double dij = op.delta[i] - op.delta[j];
            b_sin += op.V[j] * d.B(i, j) * std::sin(dij);
            g_cos += op.V[j] * d.G(i, j) * std::cos(dij);
            b_cos += op.V[j] * d.B(i, j) * std::cos(dij);
            g_sin += op.V[j] * d.G(i, j) * std::sin(dij);
        }
        p.Q = op.V[i] * (g_sin - b_cos) - d.B_self[i] * op.V[i] * op.V[i];
        if (p.kind == BusKind::Infinite) {
            p.P = op.V[i] * (b_sin + g_cos);
            continue;
        }
        p.P = op.V[i] * (b_sin + g_cos);
        const double gap = p.xd - p.xd_prime;
        p.Efd = (1.0 - gap * d.B_self[i]) * op.V[i] - gap * (b_cos + g_sin);
    }
}

} // namespace gridfno::powerdyn
