#include "gridfno/datagen/frame.hpp"

#include <cmath>
#include <numbers>

namespace gridfno::datagen {

namespace {
constexpr double kTimeEps = 1e-9;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
} // namespace

void FrameGeometry::validate() const {
    require(dt > 0.0 && tau_in >= 1 && tau_out >= 1, Errc::config, "frame geometry must be positive");
}

SampleFrame build_frame(const Trajectory& traj, const FaultScenario& scenario, const NetworkModel& net, double t_on,
                        const FrameGeometry& geo) {
    geo.validate();
    const Index n = net.n_buses();
    require(traj.n_buses() == n, Errc::shape_mismatch, "trajectory does not match network");
    const double first = t_on - static_cast<double>(geo.tau_in - 1) * geo.dt;
    const double last = t_on + static_cast<double>(geo.tau_out) * geo.dt;
    require(traj.size() > 0 && first >= traj.times.front() - kTimeEps && last <= traj.times.back() + kTimeEps,
            Errc::insufficient_horizon,
            "insufficient horizon: frame needs [" + std::to_string(first) + ", " + std::to_string(last) + "] s");

    SampleFrame f;
    f.t_on = t_on;
    f.input = Tensor({n, kChannels, geo.tau_in});
    for (Index z = 0; z < geo.tau_in; ++z) {
        const double t = t_on - static_cast<double>(geo.tau_in - 1 - z) * geo.dt;
        const auto s = traj.sample(t);
        const auto u = encode_u_channels(scenario, net, t);
        for (Index x = 0; x < n; ++x) {
            const auto& bus = net.buses[static_cast<std::size_t>(x)];
            const double row[kChannels] = {s.delta[x], s.omega[x] / kTwoPi, s.V[x], bus.P, bus.Q, u.u1, u.u2};
            for (Index y = 0; y < kChannels; ++y) {
                f.input[(x * kChannels + y) * geo.tau_in + z] = row[y];
            }
        }
    }
    f.target = Tensor({geo.tau_out, n, kStates});
    f.u_out = Tensor({geo.tau_out, 2});
    for (Index z = 0; z < geo.tau_out; ++z) {
        const double t = t_on + static_cast<double>(z + 1) * geo.dt;
        const auto s = traj.sample(t);
        for (Index x = 0; x < n; ++x) {
            f.target[(z * n + x) * kStates + 0] = s.delta[x];
            f.target[(z * n + x) * kStates + 1] = s.omega[x] / kTwoPi;
            f.target[(z * n + x) * kStates + 2] = s.V[x];
        }
        const auto u = encode_u_channels(scenario, net, t);
        f.u_out[2 * z] = u.u1;
        f.u_out[2 * z + 1] = u.u2;
    }
    return f;
}

Tensor expand_frame(const Tensor& input, const Tensor& u_out) {
    require(input.rank() == 3 && input.dim(1) == kChannels, Errc::shape_mismatch,
            "frame input must be [N, 7, tau_in], got " + shape_string(input.shape));
    require(u_out.rank() == 2 && u_out.dim(1) == 2, Errc::shape_mismatch, "u_out must be [tau_out, 2]");
    const Index n = input.dim(0), tin = input.dim(2), tout = u_out.dim(0);
    const Index c = tin + 3;
    Tensor out({tout, n, kChannels, c});
    for (Index z = 0; z < tout; ++z) {
        const double stamp = static_cast<double>(z + 1) / static_cast<double>(tout);
        for (Index x = 0; x < n; ++x) {
            for (Index y = 0; y < kChannels; ++y) {
                double* dst = out.data.data() + ((z * n + x) * kChannels + y) * c;
                const double* src = input.data.data() + (x * kChannels + y) * tin;
                std::copy(src, src + tin, dst);
                dst[tin] = stamp;
                dst[tin + 1] = u_out[2 * z];
                dst[tin + 2] = u_out[2 * z + 1];
            }
        }
    }
    return out;
}

double mean_abs_frequency(const std::vector<double>& times, const Eigen::Ref<const Eigen::MatrixXd>& omega_hz,
                          const std::vector<bool>& include, double t0, double t1) {
    require(static_cast<Index>(times.size()) == omega_hz.rows(), Errc::shape_mismatch, "times and omega rows differ");
    require(static_cast<Index>(include.size()) == omega_hz.cols(), Errc::shape_mismatch, "bus mask size mismatch");
    require(!times.empty() && times.front() <= t0 + kTimeEps && times.back() >= t1 - kTimeEps,
            Errc::insufficient_horizon,
            "insufficient horizon: stability window [" + std::to_string(t0) + ", " + std::to_string(t1) +
                "] s not covered");
    double acc = 0.0;
    Index count = 0;
    for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < t0 - kTimeEps || times[k] > t1 + kTimeEps) continue;
        for (Index x = 0; x < omega_hz.cols(); ++x) {
            if (!include[static_cast<std::size_t>(x)]) continue;
            acc += std::abs(omega_hz(static_cast<Index>(k), x));
            ++count;
        }
    }
    require(count > 0, Errc::insufficient_horizon, "no samples inside the stability window");
    return acc / static_cast<double>(count);
}

std::vector<bool> label_buses(const NetworkModel& net) {
    std::vector<bool> mask(static_cast<std::size_t>(net.n_buses()));
    for (Index i = 0; i < net.n_buses(); ++i) mask[static_cast<std::size_t>(i)] = !net.is_infinite(i);
    return mask;
}

bool label_stability(const Trajectory& traj, double t_f, const std::vector<bool>& include, const StabilityRule& rule,
                     bool diverged) {
    if (diverged) {
        return false;
    }
    const Eigen::MatrixXd hz = traj.omega / kTwoPi;
    return mean_abs_frequency(traj.times, hz, include, t_f + rule.window_start, t_f + rule.window_end) <=
           rule.threshold_hz;
}

bool label_target(const Tensor& target, double t_on, double dt, double t_f, const std::vector<bool>& include,
                  const StabilityRule& rule) {
    require(target.rank() == 3 && target.dim(2) == kStates, Errc::shape_mismatch, "target must be [tau_out, N, 3]");
    const Index tout = target.dim(0), n = target.dim(1);
    std::vector<double> times(static_cast<std::size_t>(tout));
    Eigen::MatrixXd hz(tout, n);
    for (Index z = 0; z < tout; ++z) {
        times[static_cast<std::size_t>(z)] = t_on + static_cast<double>(z + 1) * dt;
        for (Index x = 0; x < n; ++x) hz(z, x) = target[(z * n + x) * kStates + 1];
    }
    return mean_abs_frequency(times, hz, include, t_f + rule.window_start, t_f + rule.window_end) <= rule.threshold_hz;
}

ChannelStats ChannelStats::fit(const std::vector<const Tensor*>& inputs) {
    ChannelStats st;
    std::array<double, kChannels> sum{}, sq{};
    std::array<double, kChannels> count{};
    for (const Tensor* t : inputs) {
        const Index n = t->dim(0), tin = t->dim(2);
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < kChannels; ++y)
                for (Index z = 0; z < tin; ++z) {
                    const double v = (*t)[(x * kChannels + y) * tin + z];
                    sum[y] += v;
                    count[y] += 1.0;
                }
    }
    for (Index y = 0; y < kChannels; ++y) st.mean[y] = count[y] > 0 ? sum[y] / count[y] : 0.0;
    for (const Tensor* t : inputs) {
        const Index n = t->dim(0), tin = t->dim(2);
        for (Index x = 0; x < n; ++x)
            for (Index y = 0; y < kChannels; ++y)
                for (Index z = 0; z < tin; ++z) {
                    const double d = (*t)[(x * kChannels + y) * tin + z] - st.mean[y];
                    sq[y] += d * d;
                }
    }
    for (Index y = 0; y < kChannels; ++y) {
        const double s = count[y] > 0 ? std::sqrt(sq[y] / count[y]) : 0.0;
        st.std[y] = s > 1e-12 ? s : 1.0;
    }
    return st;
}

} // namespace gridfno::datagen
