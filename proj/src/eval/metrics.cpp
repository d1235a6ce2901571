#include "gridfno/eval/metrics.hpp"

#include <algorithm>
#include <iomanip>
#include <limits>
#include <ostream>

namespace gridfno::eval {

ClassScore score_labels(const std::vector<bool>& predicted_stable, const std::vector<bool>& true_stable) {
    require(predicted_stable.size() == true_stable.size(), Errc::shape_mismatch, "label counts differ");
    ClassScore s;
    for (std::size_t i = 0; i < true_stable.size(); ++i) {
        if (true_stable[i]) {
            ++s.n_stable;
            if (!predicted_stable[i]) ++s.false_alarms;
        } else {
            ++s.n_unstable;
            if (predicted_stable[i]) ++s.missed_unstable;
        }
    }
    if (s.n_unstable > 0) s.type1 = static_cast<double>(s.missed_unstable) / static_cast<double>(s.n_unstable);
    if (s.n_stable > 0) s.type2 = static_cast<double>(s.false_alarms) / static_cast<double>(s.n_stable);
    return s;
}

ClassScore classify_and_score(const std::vector<Tensor>& preds, const std::vector<double>& t_on, double dt,
                              double t_f, const std::vector<bool>& true_stable, const std::vector<bool>& include,
                              const StabilityRule& rule) {
    require(preds.size() == t_on.size() && preds.size() == true_stable.size(), Errc::shape_mismatch,
            "classify: prediction, onset and label counts differ");
    std::vector<bool> labels(preds.size());
    for (std::size_t i = 0; i < preds.size(); ++i) {
        labels[i] = datagen::label_target(preds[i], t_on[i], dt, t_f, include, rule);
    }
    return score_labels(labels, true_stable);
}

nlohmann::json to_json(const ClassScore& s) {
    auto opt = [](const std::optional<double>& v) { return v ? nlohmann::json(*v) : nlohmann::json("N/A"); };
    return {{"type1_error", opt(s.type1)},      {"type2_error", opt(s.type2)},
            {"n_unstable", s.n_unstable},       {"n_stable", s.n_stable},
            {"missed_unstable", s.missed_unstable}, {"false_alarms", s.false_alarms}};
}

Envelope envelope(const Tensor& traj, const std::vector<bool>& include) {
    require(traj.rank() == 3 && traj.dim(2) == datagen::kStates, Errc::shape_mismatch,
            "envelope needs a [T, N, 3] trajectory");
    const Index t_len = traj.dim(0), n = traj.dim(1);
    require(include.empty() || static_cast<Index>(include.size()) == n, Errc::shape_mismatch,
            "envelope bus mask does not match");
    Envelope env{Tensor::constant({t_len, 3}, std::numeric_limits<double>::infinity()),
                 Tensor::constant({t_len, 3}, -std::numeric_limits<double>::infinity())};
    bool any = false;
    for (Index x = 0; x < n; ++x) {
        if (!include.empty() && !include[static_cast<std::size_t>(x)]) continue;
        any = true;
        for (Index z = 0; z < t_len; ++z)
            for (Index k = 0; k < 3; ++k) {
                const double v = traj[(z * n + x) * 3 + k];
                env.lo[z * 3 + k] = std::min(env.lo[z * 3 + k], v);
                env.hi[z * 3 + k] = std::max(env.hi[z * 3 + k], v);
            }
    }
    require(any, Errc::invalid_argument, "envelope over no buses");
    return env;
}

void write_envelope_csv(const Envelope& env, const std::vector<double>& times, std::ostream& out) {
    require(static_cast<Index>(times.size()) == env.lo.dim(0), Errc::shape_mismatch, "envelope times do not match");
    out << "t,delta_min,delta_max,omega_min,omega_max,v_min,v_max\n" << std::setprecision(17);
    for (std::size_t z = 0; z < times.size(); ++z) {
        const auto r = static_cast<Index>(z) * 3;
        out << times[z];
        for (Index k = 0; k < 3; ++k) out << ',' << env.lo[r + k] << ',' << env.hi[r + k];
        out << '\n';
    }
}

} // namespace gridfno::eval
