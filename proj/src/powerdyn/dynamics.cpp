#include "gridfno/powerdyn/dynamics.hpp"

namespace gridfno::powerdyn {
namespace {

void check_state(const SystemState& s, const NetworkModel& net) {
    const Index n = net.n_buses();
    require(s.delta.size() == n && s.omega.size() == n && s.V.size() == n, Errc::shape_mismatch,
            "state has " + std::to_string(s.delta.size()) + " buses, network has " + std::to_string(n));
    for (Index i = 0; i < n; ++i) {
        require(std::isfinite(s.delta[i]) && std::isfinite(s.omega[i]) && std::isfinite(s.V[i]),
                Errc::numerical_blowup, "numerical blow-up at bus " + std::to_string(i));
    }
}

} // namespace

SystemState swing_rhs(const SystemState& state, const NetworkModel& net) {
    check_state(state, net);
    return SystemState::unstack(swing_rhs<double>(state.stacked(), densify(net)));
}

SystemState dc_swing_rhs(const SystemState& state, const NetworkModel& net) {
    check_state(state, net);
    return SystemState::unstack(dc_swing_rhs<double>(state.stacked(), densify(net)));
}

} // namespace gridfno::powerdyn
