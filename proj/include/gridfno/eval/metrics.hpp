#pragma once

#include "gridfno/datagen/frame.hpp"
#include "gridfno/numcore/tensor.hpp"

#include <json.hpp>

#include <iosfwd>
#include <optional>
#include <vector>

namespace gridfno::eval {

using datagen::StabilityRule;

/// Pooled squared-error ratio sum ||p - t||^2 / sum ||t||^2 over every block.
template <typename Scalar>
double relative_mse(const std::vector<BasicTensor<Scalar>>& preds, const std::vector<BasicTensor<Scalar>>& targets) {
    require(!preds.empty(), Errc::invalid_argument, "relative mse over an empty set");
    require(preds.size() == targets.size(), Errc::shape_mismatch, "relative mse: prediction and target counts differ");
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < preds.size(); ++i) {
        require_same_shape(preds[i].shape, targets[i].shape, "relative_mse");
        const auto p = preds[i].data.template cast<double>();
        const auto t = targets[i].data.template cast<double>();
        num += (p - t).square().sum();
        den += t.square().sum();
    }
    require(den > 0.0, Errc::degenerate_target, "relative mse: targets are all zero");
    return num / den;
}

/// Type-1: unstable cases called stable, over unstable cases. Type-2: stable
/// cases called unstable, over stable cases. nullopt when the class is absent.
struct ClassScore {
    std::optional<double> type1;
    std::optional<double> type2;
    Index n_unstable = 0;
    Index n_stable = 0;
    Index missed_unstable = 0;
    Index false_alarms = 0;
};

ClassScore score_labels(const std::vector<bool>& predicted_stable, const std::vector<bool>& true_stable);

/// Labels each predicted block [tau_out, N, 3] (omega in Hz, samples at t_on[i] + (z + 1) dt)
/// with the stability rule and scores it against `true_stable`.
ClassScore classify_and_score(const std::vector<Tensor>& preds, const std::vector<double>& t_on, double dt,
                              double t_f, const std::vector<bool>& true_stable, const std::vector<bool>& include,
                              const StabilityRule& rule = {});

nlohmann::json to_json(const ClassScore& s);

/// Pointwise (min, max) across buses for each state: lo/hi are [T, 3].
struct Envelope {
    Tensor lo;
    Tensor hi;
};

/// traj [T, N, 3]; buses with include[x] == false are skipped (empty = all).
Envelope envelope(const Tensor& traj, const std::vector<bool>& include = {});

/// Header t,delta_min,delta_max,omega_min,omega_max,v_min,v_max.
void write_envelope_csv(const Envelope& env, const std::vector<double>& times, std::ostream& out);

} // namespace gridfno::eval
