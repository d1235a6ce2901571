#pragma once

#include "gridfno/datagen/frame.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace gridfno::datagen {

struct SampleInfo {
    Index scenario = 0;
    int offset_cycles = 0;
    double t_on = 0.0;
    double t_f = 0.0;
    double t_cl = 0.0;
    bool stable = true;
    int fault_type = 0; // fault_type_id
    Index line = 0;
    bool train = false;
};

struct DatasetMeta {
    FrameGeometry geo;
    Index n_buses = 0;
    ChannelStats norm;
    std::uint64_t seed = 0;
    std::string network_name;
    std::string network_hash;
    std::string config_hash;
    std::vector<bool> label_buses;
    StabilityRule rule;
    Index n_scenarios = 0;
    Index n_train_scenarios = 0;
    Index diverged_skipped = 0;
    Index degenerate_skipped = 0;
};

/// Normalized float32 frames. Sample s is input[s] [N, 7, tau_in],
/// target[s] [tau_out, N, 3] and u_out[s] [tau_out, 2] (u_out is not normalized).
struct Dataset {
    DatasetMeta meta;
    TensorF input;
    TensorF target;
    TensorF u_out;
    std::vector<SampleInfo> info;

    Index size() const { return static_cast<Index>(info.size()); }
    std::vector<Index> indices(bool train) const;
    Index stable_count() const;

    /// Sample s decoded back to physical units (omega in Hz).
    SampleFrame frame(Index s) const;

    /// Empty dataset with the given geometry.
    static Dataset empty(const DatasetMeta& meta);
};

struct GenerationConfig {
    Index n_scenarios = 100;
    double train_fraction = 0.8; // leading scenarios go to the training split
    std::uint64_t seed = 0;
    FrameGeometry geo;
    double dt_int = 1.0 / 600.0;
    StabilityRule rule;
    powerdyn::KappaTable kappa;
    int threads = 1;
};

/// Samples scenarios, simulates them, encodes one frame per t_on offset and
/// normalizes with statistics of the training split.
Dataset generate_dataset(const NetworkModel& net, const ScenarioDistribution& dist, const GenerationConfig& cfg);

void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

nlohmann::json meta_to_json(const DatasetMeta& m);
DatasetMeta meta_from_json(const nlohmann::json& j);

/// Model input [tau_out, N, 7, B, tau_in + 3] for the listed samples.
Tensor batch_inputs(const Dataset& ds, const std::vector<Index>& samples);

/// Normalized targets [tau_out, N, 3, B, 1].
Tensor batch_targets(const Dataset& ds, const std::vector<Index>& samples);

} // namespace gridfno::datagen
