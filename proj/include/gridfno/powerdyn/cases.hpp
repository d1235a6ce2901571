#pragma once

#include "gridfno/powerdyn/network.hpp"
#include "gridfno/powerdyn/state.hpp"

namespace gridfno::powerdyn {

/// One machine (bus 0) against an infinite bus (bus 1) through a double circuit.
NetworkModel smib_case();

/// WSCC-style 9-bus topology with generators on buses 0-2 and dynamic loads on
/// buses 3-8. Injections are balanced to a fixed operating point.
NetworkModel nine_bus_case();

double inertia_from_h(double h_seconds, double f_nominal = 60.0);

} // namespace gridfno::powerdyn
