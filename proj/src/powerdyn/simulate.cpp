#include "gridfno/powerdyn/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>

namespace gridfno::powerdyn {
namespace {

struct Segment {
    double t0;
    double t1;
    int stage;
};

std::vector<Segment> segments(const FaultScenario& scenario, double t_end) {
    std::vector<Segment> out;
    double t0 = 0.0;
    int stage = 0;
    for (double b : scenario.boundaries()) {
        if (b >= t_end) {
            break;
        }
        if (b > t0) {
            out.push_back({t0, b, stage});
        }
        t0 = b;
        ++stage;
    }
    out.push_back({t0, t_end, stage});
    return out;
}

} // namespace

SystemState Trajectory::state(Index k) const {
    SystemState s;
    s.delta = delta.row(k).transpose();
    s.omega = omega.row(k).transpose();
    s.V = V.row(k).transpose();
    return s;
}

Index Trajectory::find_time(double t) const {
    auto it = std::lower_bound(times.begin(), times.end(), t - 1e-9);
    if (it != times.end() && std::abs(*it - t) <= 1e-9) {
        return static_cast<Index>(it - times.begin());
    }
    return -1;
}

SystemState Trajectory::sample(double t) const {
    require(!times.empty() && t >= times.front() - 1e-9 && t <= times.back() + 1e-9, Errc::insufficient_horizon,
            "insufficient horizon: t = " + std::to_string(t) + " outside trajectory");
    const Index k = find_time(t);
    if (k >= 0) {
        return state(k);
    }
    const auto hi = static_cast<Index>(std::upper_bound(times.begin(), times.end(), t) - times.begin());
    const Index lo = hi - 1;
    const double w = (t - times[static_cast<std::size_t>(lo)]) /
                     (times[static_cast<std::size_t>(hi)] - times[static_cast<std::size_t>(lo)]);
    SystemState s;
    s.delta = ((1 - w) * delta.row(lo) + w * delta.row(hi)).transpose();
    s.omega = ((1 - w) * omega.row(lo) + w * omega.row(hi)).transpose();
    s.V = ((1 - w) * V.row(lo) + w * V.row(hi)).transpose();
    return s;
}

std::string SimulationResult::status() const {
    if (!diverged) {
        return "ok";
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "diverged at t=%.6f", diverged_at);
    return buf;
}

SimulationResult simulate(const NetworkModel& net, const FaultScenario& scenario, const SystemState& s0,
                          const SimulationOptions& options) {
    require(options.dt > 0 && options.t_end > 0, Errc::invalid_argument, "need dt > 0 and t_end > 0");
    net.validate();
    scenario.validate(net);
    const Index n = net.n_buses();
    require(s0.size() == n, Errc::shape_mismatch, "initial state does not match network");

    const auto segs = segments(scenario, options.t_end);
    std::vector<DenseNetwork> stage_nets;
    for (int u = 0; u < scenario.stage_count(); ++u) {
        stage_nets.push_back(densify(apply_stage(net, scenario, u, options.kappa), net));
    }
    auto rhs = [&](const Eigen::VectorXd& x, const DenseNetwork& d) -> Eigen::VectorXd {
        return options.model == Model::Full ? swing_rhs<double>(x, d) : dc_swing_rhs<double>(x, d);
    };

    std::vector<Index> steps;
    Index total = 1;
    for (const auto& s : segs) {
        const double len = s.t1 - s.t0;
        steps.push_back(std::max<Index>(1, static_cast<Index>(std::ceil(len / options.dt - 1e-9))));
        total += steps.back();
    }

    SimulationResult result;
    Trajectory& tr = result.trajectory;
    tr.times.reserve(static_cast<std::size_t>(total));
    tr.stage_ids.reserve(static_cast<std::size_t>(total));
    Eigen::MatrixXd rows(total, 3 * n);

    Eigen::VectorXd x = s0.stacked();
    Index k = 0;
    auto record = [&](double t, int stage) {
        tr.times.push_back(t);
        tr.stage_ids.push_back(stage);
        rows.row(k++) = x.transpose();
    };

    bool stop = false;
    for (std::size_t si = 0; si < segs.size() && !stop; ++si) {
        const Segment& seg = segs[si];
        const DenseNetwork& d = stage_nets[static_cast<std::size_t>(seg.stage)];
        const double h = (seg.t1 - seg.t0) / static_cast<double>(steps[si]);
        if (si == 0) {
            record(seg.t0, seg.stage);
        } else {
            tr.stage_ids.back() = seg.stage;
        }
        for (Index i = 0; i < steps[si]; ++i) {
            const Eigen::VectorXd k1 = rhs(x, d);
            const Eigen::VectorXd k2 = rhs(x + 0.5 * h * k1, d);
            const Eigen::VectorXd k3 = rhs(x + 0.5 * h * k2, d);
            const Eigen::VectorXd k4 = rhs(x + h * k3, d);
            x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            const double t = (i + 1 == steps[si]) ? seg.t1 : seg.t0 + static_cast<double>(i + 1) * h;
            record(t, seg.stage);
            if (!x.allFinite() || x.cwiseAbs().maxCoeff() > options.blowup) {
                result.diverged = true;
                result.diverged_at = t;
                stop = true;
                break;
            }
        }
    }

    rows.conservativeResize(k, Eigen::NoChange);
    tr.delta = rows.leftCols(n);
    tr.omega = rows.middleCols(n, n);
    tr.V = rows.rightCols(n);
    return result;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "t,stage,bus,delta_rad,omega_hz,v_pu\n";
    char buf[160];
    for (Index k = 0; k < traj.size(); ++k) {
        for (Index b = 0; b < traj.n_buses(); ++b) {
            std::snprintf(buf, sizeof buf, "%.9f,%d,%ld,%.12e,%.12e,%.12e\n", traj.times[static_cast<std::size_t>(k)],
                          traj.stage_ids[static_cast<std::size_t>(k)], static_cast<long>(b), traj.delta(k, b),
                          traj.omega(k, b) / (2.0 * std::numbers::pi), traj.V(k, b));
            out << buf;
        }
    }
}

} // namespace gridfno::powerdyn
