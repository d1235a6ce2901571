#pragma once

#include <Eigen/Core>

namespace gridfno::powerdyn {

/// (delta [rad], omega [rad/s], V [p.u.]) per bus.
struct SystemState {
    Eigen::VectorXd delta;
    Eigen::VectorXd omega;
    Eigen::VectorXd V;

    SystemState() = default;
    explicit SystemState(Eigen::Index n)
        : delta(Eigen::VectorXd::Zero(n)), omega(Eigen::VectorXd::Zero(n)), V(Eigen::VectorXd::Ones(n)) {}

    Eigen::Index size() const { return delta.size(); }

    /// Packed as [delta; omega; V].
    Eigen::VectorXd stacked() const {
        Eigen::VectorXd x(3 * size());
        x << delta, omega, V;
        return x;
    }

    static SystemState unstack(const Eigen::Ref<const Eigen::VectorXd>& x) {
        const Eigen::Index n = x.size() / 3;
        SystemState s;
        s.delta = x.segment(0, n);
        s.omega = x.segment(n, n);
        s.V = x.segment(2 * n, n);
        return s;
    }
};

} // namespace gridfno::powerdyn
