#pragma once

#include "gridfno/powerdyn/network.hpp"

#include <array>
#include <string>
#include <vector>

namespace gridfno::powerdyn {

enum class FaultType { None, SLG, LLG, LL, ThreePhase };

std::string to_string(FaultType t);
FaultType parse_fault_type(const std::string& s);

/// Admittance factor applied to the faulted line while the fault is on.
struct KappaTable {
    double slg = 0.5;
    double llg = 0.2;
    double ll = 0.3;
    double three_phase = 0.0;

    double operator()(FaultType t) const;
};

enum class ActionKind { ScaleAdmittance, RestoreLine, TripLine };

struct ClearAction {
    double t = 0.0;
    ActionKind kind = ActionKind::RestoreLine;
    double factor = 1.0; // ScaleAdmittance only
};

/// Stage 0 is pre-fault, stage 1 starts at t_f, stage 1+k follows the k-th
/// scheduled action and the last stage starts at t_cl. The line is referenced by
/// index so parallel circuits stay distinguishable.
struct FaultScenario {
    FaultType type = FaultType::None;
    Index line = 0;
    double t_f = 0.0;
    std::vector<ClearAction> schedule;
    double t_cl = 0.0;

    bool has_fault() const { return type != FaultType::None; }
    int stage_count() const { return has_fault() ? static_cast<int>(schedule.size()) + 3 : 1; }

    /// Times at which stage u+1 begins, u = 0..stage_count()-2.
    std::vector<double> boundaries() const;

    /// Stage active on [boundary, next boundary).
    int stage_at(double t) const;

    /// Fault active at t, i.e. t in [t_f, t_cl).
    bool fault_active(double t) const { return has_fault() && t >= t_f && t < t_cl; }

    void validate(const NetworkModel& net) const;
};

/// Network of the given stage: the faulted line scaled by kappa during the
/// fault-on stages, then by each scheduled action; after t_cl it returns to its
/// original admittance unless a TripLine happened.
NetworkModel apply_stage(const NetworkModel& net, const FaultScenario& scenario, int stage,
                         const KappaTable& kappa = {});

} // namespace gridfno::powerdyn
