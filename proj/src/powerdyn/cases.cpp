#include "gridfno/powerdyn/cases.hpp"

#include "gridfno/powerdyn/equilibrium.hpp"

#include <numbers>

namespace gridfno::powerdyn {

double inertia_from_h(double h, double f) { return 2.0 * h / (2.0 * std::numbers::pi * f); }

NetworkModel smib_case() {
    NetworkModel net;
    net.name = "smib";
    BusParams gen;
    gen.kind = BusKind::Generator;
    gen.M = inertia_from_h(3.5);
    gen.D = 0.04;
    gen.Tdo_prime = 5.0;
    gen.xd = 1.0;
    gen.xd_prime = 0.3;
    BusParams inf;
    inf.kind = BusKind::Infinite;
    net.buses = {gen, inf};
    net.lines = {{0, 1, 1.25, 0.0}, {0, 1, 1.25, 0.0}};

    SystemState op(2);
    op.delta << 0.42, 0.0;
    balance_injections(net, op);
    return net;
}

NetworkModel nine_bus_case() {
    NetworkModel net;
    net.name = "nine_bus";
    const double h[3] = {23.64, 6.4, 3.01};
    const double xd[3] = {0.146, 0.8958, 1.3125};
    const double xdp[3] = {0.0608, 0.1198, 0.1813};
    const double tdo[3] = {8.96, 6.0, 5.89};
    for (int g = 0; g < 3; ++g) {
        BusParams p;
        p.kind = BusKind::Generator;
        p.M = inertia_from_h(h[g]);
        p.D = 2.0 * p.M * 8.0 * 0.12; // about 12 % damping at 8 rad/s
        p.Tdo_prime = tdo[g];
        p.xd = xd[g];
        p.xd_prime = xdp[g];
        net.buses.push_back(p);
    }
    for (int l = 0; l < 6; ++l) {
        BusParams p;
        p.kind = BusKind::Load;
        p.M = 0.02;
        p.D = 0.5;
        p.Tdo_prime = 0.5;
        p.xd = 0.4;
        p.xd_prime = 0.2;
        net.buses.push_back(p);
    }
    // Lossless branches; reactances from the WSCC 9-bus data.
    auto line = [](Index i, Index j, double x) { return Line{i, j, 1.0 / x, 0.0}; };
    net.lines = {
        line(0, 3, 0.0576), line(1, 6, 0.0625), line(2, 8, 0.0586), line(3, 4, 0.085), line(3, 5, 0.092),
        line(4, 6, 0.161),  line(5, 8, 0.170),  line(6, 7, 0.072),  line(7, 8, 0.1008),
    };

    SystemState op(9);
    op.delta << 0.0, 0.50, 0.40, -0.05, -0.15, -0.10, 0.25, 0.15, 0.20;
    op.V << 1.04, 1.025, 1.025, 1.0, 0.98, 0.99, 1.01, 1.0, 1.01;
    balance_injections(net, op);
    return net;
}

} // namespace gridfno::powerdyn
