#include "gridfno/datagen/scenario.hpp"

#include <cmath>
#include <numbers>

namespace gridfno::datagen {

void ScenarioDistribution::validate(const NetworkModel& net) const {
    require(delta_range >= 0.0 && omega_range_hz >= 0.0, Errc::config, "perturbation ranges must be non-negative");
    require(!lines.empty(), Errc::config, "scenario distribution has no candidate fault lines");
    for (Index l : lines) {
        require(l >= 0 && l < net.n_lines(), Errc::config, "candidate line " + std::to_string(l) + " does not exist");
    }
    require(line_weights.empty() || line_weights.size() == lines.size(), Errc::config,
            "line_weights must match lines");
    double lw = line_weights.empty() ? 1.0 : 0.0;
    for (double w : line_weights) {
        require(w >= 0.0, Errc::config, "negative line weight");
        lw += w;
    }
    require(lw > 0.0, Errc::config, "line weights sum to zero");
    double tw = 0.0;
    for (double w : type_weights) {
        require(w >= 0.0, Errc::config, "negative fault type weight");
        tw += w;
    }
    require(tw > 0.0, Errc::config, "fault type weights sum to zero");
    require(clear_min_cycles >= 1 && clear_max_cycles >= clear_min_cycles, Errc::config, "bad clear-time range");
    require(t_f > 0.0, Errc::config, "t_f must be positive");
    require(!offsets_cycles.empty(), Errc::config, "no t_on offsets");
    for (int c : offsets_cycles) {
        require(c >= 0, Errc::config, "t_on offsets must be non-negative");
    }
}

ScenarioDistribution distribution_from_json(const nlohmann::json& j, const NetworkModel& net) {
    ScenarioDistribution d;
    try {
        d.delta_range = j.value("delta_range", d.delta_range);
        d.omega_range_hz = j.value("omega_range_hz", d.omega_range_hz);
        if (j.contains("lines")) {
            d.lines = j.at("lines").get<std::vector<Index>>();
        } else {
            for (Index l = 0; l < net.n_lines(); ++l) d.lines.push_back(l);
        }
        d.line_weights = j.value("line_weights", d.line_weights);
        if (j.contains("type_weights")) {
            const auto& tw = j.at("type_weights");
            d.type_weights = {tw.value("SLG", 0.0), tw.value("LLG", 0.0), tw.value("LL", 0.0),
                              tw.value("ThreePhase", 0.0)};
        }
        d.clear_min_cycles = j.value("clear_min_cycles", d.clear_min_cycles);
        d.clear_max_cycles = j.value("clear_max_cycles", d.clear_max_cycles);
        d.t_f = j.value("t_f", d.t_f);
        d.offsets_cycles = j.value("offsets_cycles", d.offsets_cycles);
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::config, std::string("scenario distribution: ") + e.what());
    }
    d.validate(net);
    return d;
}

nlohmann::json to_json(const ScenarioDistribution& d) {
    return {{"delta_range", d.delta_range},
            {"omega_range_hz", d.omega_range_hz},
            {"lines", d.lines},
            {"line_weights", d.line_weights},
            {"type_weights",
             {{"SLG", d.type_weights[0]},
              {"LLG", d.type_weights[1]},
              {"LL", d.type_weights[2]},
              {"ThreePhase", d.type_weights[3]}}},
            {"clear_min_cycles", d.clear_min_cycles},
            {"clear_max_cycles", d.clear_max_cycles},
            {"t_f", d.t_f},
            {"offsets_cycles", d.offsets_cycles}};
}

std::pair<FaultScenario, SystemState> sample_scenario(const ScenarioDistribution& dist, const NetworkModel& net,
                                                      const SystemState& equilibrium, std::uint64_t seed) {
    dist.validate(net);
    require(equilibrium.size() == net.n_buses(), Errc::shape_mismatch, "equilibrium does not match network");
    Rng rng(seed);

    FaultScenario sc;
    sc.t_f = dist.t_f;
    const std::size_t li = dist.line_weights.empty()
                                ? static_cast<std::size_t>(rng.integer(0, static_cast<std::int64_t>(dist.lines.size()) - 1))
                                : rng.weighted(dist.line_weights);
    sc.line = dist.lines[li];
    static constexpr FaultType kTypes[] = {FaultType::SLG, FaultType::LLG, FaultType::LL, FaultType::ThreePhase};
    sc.type = kTypes[rng.weighted({dist.type_weights.begin(), dist.type_weights.end()})];
    const auto cycles = rng.integer(dist.clear_min_cycles, dist.clear_max_cycles);
    sc.t_cl = dist.t_f + static_cast<double>(cycles) * kCycle;

    SystemState s0 = equilibrium;
    for (Index i = 0; i < net.n_buses(); ++i) {
        const double dd = rng.uniform(-1.0, 1.0) * dist.delta_range;
        const double dw = rng.uniform(-1.0, 1.0) * dist.omega_range_hz;
        if (net.is_infinite(i)) continue;
        s0.delta[i] += dd;
        s0.omega[i] += 2.0 * std::numbers::pi * dw;
    }
    return {sc, s0};
}

int fault_type_id(FaultType t) {
    switch (t) {
    case FaultType::SLG: return 1;
    case FaultType::LLG: return 2;
    case FaultType::LL: return 3;
    case FaultType::ThreePhase: return 4;
    case FaultType::None: break;
    }
    return 0;
}

UChannels encode_u_channels(const FaultScenario& scenario, const NetworkModel& net, double t) {
    // sample times are sums of steps; snap to the stage boundaries
    constexpr double eps = 1e-9;
    if (!scenario.has_fault() || t < scenario.t_f - eps || t >= scenario.t_cl - eps || net.n_lines() == 0) {
        return {};
    }
    return {static_cast<double>(scenario.line + 1) / static_cast<double>(net.n_lines()),
            fault_type_id(scenario.type) / 4.0};
}

} // namespace gridfno::datagen
