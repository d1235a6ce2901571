#pragma once

#include "gridfno/powerdyn/fault.hpp"
#include "gridfno/powerdyn/state.hpp"
#include "gridfno/rng.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

namespace gridfno::datagen {

using powerdyn::FaultScenario;
using powerdyn::Index;
using gridfno::Rng;
using gridfno::splitmix64;
using powerdyn::FaultType;
using powerdyn::NetworkModel;
using powerdyn::SystemState;

inline constexpr double kCycle = 1.0 / 60.0;

/// Sampling law for one scenario. Perturbations are uniform in [-r, r] on every
/// non-infinite bus; clear times are whole cycles after t_f.
struct ScenarioDistribution {
    double delta_range = 0.0;    // rad
    double omega_range_hz = 0.0; // Hz
    std::vector<Index> lines;    // candidate fault lines (indices into net.lines)
    std::vector<double> line_weights; // empty = uniform
    std::array<double, 4> type_weights{1.0, 1.0, 1.0, 1.0}; // SLG, LLG, LL, ThreePhase
    int clear_min_cycles = 1;
    int clear_max_cycles = 30;
    double t_f = 0.6;
    std::vector<int> offsets_cycles{0, 2, 4, 10, 20, 30}; // t_on - t_f

    /// Throws Errc::config.
    void validate(const NetworkModel& net) const;
};

ScenarioDistribution distribution_from_json(const nlohmann::json& j, const NetworkModel& net);
nlohmann::json to_json(const ScenarioDistribution& d);

/// Seed of scenario k in a dataset with the given base seed.
inline std::uint64_t scenario_seed(std::uint64_t base, std::uint64_t k) { return splitmix64(base ^ splitmix64(k)); }

/// (scenario, initial state) drawn from `dist`; `equilibrium` is the unperturbed state.
std::pair<FaultScenario, SystemState> sample_scenario(const ScenarioDistribution& dist, const NetworkModel& net,
                                                      const SystemState& equilibrium, std::uint64_t seed);

/// Encoding id of a fault type: SLG 1, LLG 2, LL 3, ThreePhase 4, None 0.
int fault_type_id(FaultType t);

struct UChannels {
    double u1 = 0.0;
    double u2 = 0.0;
};

/// Fault location and type while the fault is active at t; zeros otherwise.
UChannels encode_u_channels(const FaultScenario& scenario, const NetworkModel& net, double t);

} // namespace gridfno::datagen
