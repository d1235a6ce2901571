#pragma once

#include "gridfno/error.hpp"

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

namespace gridfno::powerdyn {

using Index = Eigen::Index;

struct Line {
    Index i = 0;
    Index j = 0;
    double B = 0.0; // susceptance, p.u.
    double G = 0.0; // conductance, p.u.
};

enum class BusKind { Generator, Load, Infinite };

/// Machine constants of Eq. (1) at one bus. Load buses carry the same fields
/// (small inertia, fast flux decay) so every non-infinite bus is dynamic.
struct BusParams {
    BusKind kind = BusKind::Generator;
    double M = 1.0;
    double D = 0.0;
    double Tdo_prime = 1.0;
    double xd = 1.0;
    double xd_prime = 0.5;
    double Efd = 1.0;
    double P = 0.0;
    double Q = 0.0;
    std::optional<double> B_self; // B_ii; defaults to -sum_j B_ij of the intact network
};

struct NetworkModel {
    std::string name;
    std::vector<BusParams> buses;
    std::vector<Line> lines;

    Index n_buses() const { return static_cast<Index>(buses.size()); }
    Index n_lines() const { return static_cast<Index>(lines.size()); }
    bool is_infinite(Index bus) const { return buses[static_cast<std::size_t>(bus)].kind == BusKind::Infinite; }

    /// Throws Errc::invalid_argument naming the first violated invariant.
    void validate() const;
};

/// Dense per-stage form used by the right-hand sides.
struct DenseNetwork {
    Eigen::MatrixXd B; // off-diagonal line susceptances, zero diagonal
    Eigen::MatrixXd G;
    Eigen::VectorXd B_self;
    Eigen::VectorXd P, M, D, Tdo, xd_gap, Efd;
    std::vector<bool> fixed;

    Index size() const { return B.rows(); }
};

/// Self-susceptances come from `intact` so they stay fixed while lines are scaled.
DenseNetwork densify(const NetworkModel& net, const NetworkModel& intact);
inline DenseNetwork densify(const NetworkModel& net) { return densify(net, net); }

NetworkModel load_network(const std::string& path);
void save_network(const NetworkModel& net, const std::string& path);

std::string network_to_json(const NetworkModel& net);
NetworkModel network_from_json(const std::string& text);

} // namespace gridfno::powerdyn
