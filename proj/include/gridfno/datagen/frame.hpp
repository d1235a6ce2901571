#pragma once

#include "gridfno/datagen/scenario.hpp"
#include "gridfno/numcore/tensor.hpp"
#include "gridfno/powerdyn/simulate.hpp"

#include <array>

namespace gridfno::datagen {

using powerdyn::Trajectory;

inline constexpr Index kChannels = 7; // delta, omega (Hz), V, P, Q, u1, u2
inline constexpr Index kStates = 3;

struct FrameGeometry {
    double dt = 0.03;
    Index tau_in = 20;
    Index tau_out = 150;

    void validate() const;
};

/// Physical-unit frame. input[x, y, z] is channel y of bus x at
/// t_on - (tau_in - 1 - z) dt; target[z, x, s] is state s of bus x at
/// t_on + (z + 1) dt; u_out[z] holds (u1, u2) at that same output time.
struct SampleFrame {
    Tensor input;  // [N, 7, tau_in]
    Tensor target; // [tau_out, N, 3]
    Tensor u_out;  // [tau_out, 2]
    double t_on = 0.0;
    bool stable = true;
};

/// Throws Errc::insufficient_horizon when traj does not cover the frame window.
SampleFrame build_frame(const Trajectory& traj, const FaultScenario& scenario, const NetworkModel& net, double t_on,
                        const FrameGeometry& geo);

/// [tau_out, N, 7, tau_in + 3]: input copied along the output axis with
/// (z + 1) / tau_out, u1, u2 appended on the last axis.
Tensor expand_frame(const Tensor& input, const Tensor& u_out);

/// Mean |omega| over a time window after fault onset, threshold in Hz.
struct StabilityRule {
    double window_start = 4.0;
    double window_end = 4.5;
    double threshold_hz = 0.5;
};

/// Mean over the included buses and the samples with t in [t0, t1] of |omega| (Hz).
/// omega_hz rows are times. Throws Errc::insufficient_horizon if the window is not covered.
double mean_abs_frequency(const std::vector<double>& times, const Eigen::Ref<const Eigen::MatrixXd>& omega_hz,
                          const std::vector<bool>& include, double t0, double t1);

/// Buses that enter the stability average (non-infinite ones).
std::vector<bool> label_buses(const NetworkModel& net);

/// Stable iff the mean |omega| over [t_f + start, t_f + end] stays within the
/// threshold. A diverged run is unstable regardless of coverage.
bool label_stability(const Trajectory& traj, double t_f, const std::vector<bool>& include,
                     const StabilityRule& rule = {}, bool diverged = false);

/// Label of a target block [tau_out, N, 3] (omega in Hz) whose samples sit at t_on + (z + 1) dt.
bool label_target(const Tensor& target, double t_on, double dt, double t_f, const std::vector<bool>& include,
                  const StabilityRule& rule = {});

/// Per-channel affine map to zero mean / unit std.
struct ChannelStats {
    std::array<double, kChannels> mean{};
    std::array<double, kChannels> std{1, 1, 1, 1, 1, 1, 1};

    /// Statistics over every entry of each channel of the given inputs [N, 7, tau_in].
    /// A channel with zero spread keeps std = 1.
    static ChannelStats fit(const std::vector<const Tensor*>& inputs);

    double encode(Index channel, double x) const { return (x - mean[channel]) / std[channel]; }
    double decode(Index channel, double x) const { return mean[channel] + std[channel] * x; }
};

} // namespace gridfno::datagen
