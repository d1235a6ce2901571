#pragma once

#include "gridfno/powerdyn/network.hpp"
#include "gridfno/powerdyn/state.hpp"

#include <optional>

namespace gridfno::powerdyn {

struct EquilibriumOptions {
    int max_iterations = 200;
    double tolerance = 1e-10; // on the max-norm of the derivative
    std::optional<SystemState> initial_guess;
};

/// (delta*, 0, V*) with swing_rhs = 0, from Levenberg-Marquardt damped Newton on
/// the omega and V derivatives. Fixed buses keep their given angle and voltage;
/// without any fixed bus the first bus angle is pinned (the equations are
/// translation invariant). Throws Errc::no_equilibrium on failure.
SystemState find_equilibrium(const NetworkModel& net, const EquilibriumOptions& options = {});

/// Sets P and Efd on every non-fixed bus (and Q for reporting) so that the given
/// operating point is an equilibrium of the intact network.
void balance_injections(NetworkModel& net, const SystemState& operating_point);

} // namespace gridfno::powerdyn
