#pragma once

#include "gridfno/powerdyn/dynamics.hpp"
#include "gridfno/powerdyn/fault.hpp"

#include <iosfwd>
#include <vector>

namespace gridfno::powerdyn {

/// One row per integrator node. Row k of delta/omega/V is the state at times[k];
/// stage_ids[k] is the stage used for the step leaving that node.
struct Trajectory {
    std::vector<double> times;
    Eigen::MatrixXd delta; // [T x N]
    Eigen::MatrixXd omega; // rad/s
    Eigen::MatrixXd V;
    std::vector<int> stage_ids;

    Index size() const { return static_cast<Index>(times.size()); }
    Index n_buses() const { return delta.cols(); }
    SystemState state(Index k) const;

    /// Index of the node at time t (within 1e-9 s); -1 if t is not a node.
    Index find_time(double t) const;

    /// State at t: exact node value when t is a node, linear interpolation otherwise.
    SystemState sample(double t) const;
};

struct SimulationOptions {
    double t_end = 5.0;
    double dt = 1.0 / 600.0;
    Model model = Model::Full;
    KappaTable kappa;
    double blowup = 1e6;
};

struct SimulationResult {
    Trajectory trajectory;
    bool diverged = false;
    double diverged_at = 0.0;

    std::string status() const;
};

/// Fixed-step RK4 over [0, t_end]. Each stage interval is split into equal steps
/// no longer than dt so every stage boundary is a node. A state entry beyond
/// `blowup` or non-finite stops the run and keeps the partial trajectory.
SimulationResult simulate(const NetworkModel& net, const FaultScenario& scenario, const SystemState& s0,
                          const SimulationOptions& options = {});

/// CSV with header t,stage,bus,delta_rad,omega_hz,v_pu.
void write_trajectory_csv(const Trajectory& traj, std::ostream& out);

} // namespace gridfno::powerdyn
