#include "gridfno/powerdyn/fault.hpp"

#include <cmath>

namespace gridfno::powerdyn {

std::string to_string(FaultType t) {
    switch (t) {
    case FaultType::None: return "None";
    case FaultType::SLG: return "SLG";
    case FaultType::LLG: return "LLG";
    case FaultType::LL: return "LL";
    case FaultType::ThreePhase: return "ThreePhase";
    }
    return "None";
}

FaultType parse_fault_type(const std::string& s) {
    for (FaultType t : {FaultType::None, FaultType::SLG, FaultType::LLG, FaultType::LL, FaultType::ThreePhase}) {
        if (to_string(t) == s) {
            return t;
        }
    }
    fail(Errc::config, "unknown fault type '" + s + "'");
}

double KappaTable::operator()(FaultType t) const {
    switch (t) {
    case FaultType::None: return 1.0;
    case FaultType::SLG: return slg;
    case FaultType::LLG: return llg;
    case FaultType::LL: return ll;
    case FaultType::ThreePhase: return three_phase;
    }
    return 1.0;
}

std::vector<double> FaultScenario::boundaries() const {
    std::vector<double> out;
    if (!has_fault()) {
        return out;
    }
    out.push_back(t_f);
    for (const auto& a : schedule) {
        out.push_back(a.t);
    }
    out.push_back(t_cl);
    return out;
}

int FaultScenario::stage_at(double t) const {
    int u = 0;
    for (double b : boundaries()) {
        if (t >= b) {
            ++u;
        }
    }
    return u;
}

void FaultScenario::validate(const NetworkModel& net) const {
    if (!has_fault()) {
        return;
    }
    require(line >= 0 && line < net.n_lines(), Errc::invalid_argument,
            "fault line " + std::to_string(line) + " does not exist");
    require(std::isfinite(t_f) && t_f >= 0.0, Errc::invalid_argument, "fault time must be finite and non-negative");
    double prev = t_f;
    for (const auto& a : schedule) {
        require(a.t > prev, Errc::invalid_argument, "clear schedule times must be strictly increasing after t_f");
        prev = a.t;
    }
    require(t_cl > prev, Errc::invalid_argument, "t_cl must follow every scheduled action");
}

NetworkModel apply_stage(const NetworkModel& net, const FaultScenario& scenario, int stage,
                         const KappaTable& kappa) {
    require(stage >= 0 && stage < scenario.stage_count(), Errc::invalid_argument,
            "unknown stage " + std::to_string(stage));
    if (stage == 0) {
        return net;
    }
    double factor = kappa(scenario.type);
    bool tripped = false;
    const int last = scenario.stage_count() - 1;
    const int actions = std::min(stage - 1, static_cast<int>(scenario.schedule.size()));
    for (int k = 0; k < actions; ++k) {
        const ClearAction& a = scenario.schedule[static_cast<std::size_t>(k)];
        switch (a.kind) {
        case ActionKind::ScaleAdmittance:
            factor = a.factor;
            tripped = false;
            break;
        case ActionKind::RestoreLine:
            factor = 1.0;
            tripped = false;
            break;
        case ActionKind::TripLine:
            factor = 0.0;
            tripped = true;
            break;
        }
    }
    if (stage == last) {
        factor = tripped ? 0.0 : 1.0;
    }
    NetworkModel out = net;
    Line& l = out.lines[static_cast<std::size_t>(scenario.line)];
    l.B *= factor;
    l.G *= factor;
    return out;
}

} // namespace gridfno::powerdyn
