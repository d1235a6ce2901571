#pragma once

#include "gridfno/eval/metrics.hpp"
#include "gridfno/fno/model.hpp"

#include <json.hpp>

#include <optional>
#include <vector>

namespace gridfno::eval {

using datagen::Dataset;

struct OffsetMetrics {
    int offset_cycles = 0;
    Index n_samples = 0;
    double relative_mse = 0.0;
    ClassScore score;
};

struct Timing {
    double horizon_s = 0.0;
    Index tau_out = 0;
    int repetitions = 0;
    double encode_s = 0.0;   // frame extraction + normalization, not part of predict_s
    double predict_s = 0.0;  // median model forward
    double simulate_s = 0.0; // median RK4 run over [0, horizon]
    double speedup = 0.0;    // simulate_s / predict_s
};

struct EvalReport {
    double relative_mse = 0.0;
    ClassScore score;
    std::vector<OffsetMetrics> per_offset; // ascending offset
    std::vector<Timing> timing;
    Index n_cases = 0; // distinct scenarios
    Index n_samples = 0;
};

nlohmann::json to_json(const OffsetMetrics& m);
nlohmann::json to_json(const Timing& t);
nlohmann::json to_json(const EvalReport& r);

/// Normalized prediction [tau_out, N, 3] back to physical units (omega in Hz).
Tensor decode_prediction(const Dataset& ds, const Tensor& pred);

/// Physical-unit predictions for the listed samples.
std::vector<Tensor> predict_physical(const fno::Surrogate& model, const Dataset& ds, const std::vector<Index>& samples,
                                     Index batch_size = 32);

/// Relative mse and stability scores over `samples`, overall and per offset.
EvalReport evaluate(const fno::Surrogate& model, const Dataset& ds, const std::vector<Index>& samples,
                    Index batch_size = 32);

struct BenchOptions {
    int repetitions = 20;
    double dt_int = 1.0 / 600.0;
    powerdyn::KappaTable kappa;
    int onset_cycles = 10; // frame onset after fault inception
};

/// Median wall-clock of one FNO forward for the given horizon and of the RK4 run
/// over the same horizon. The model is copied and re-planned for the horizon.
Timing bench_speedup(const fno::FnoModel& model, const powerdyn::NetworkModel& net,
                     const powerdyn::FaultScenario& scenario, const powerdyn::SystemState& s0,
                     const datagen::DatasetMeta& meta, double horizon, const BenchOptions& options = {});

} // namespace gridfno::eval
