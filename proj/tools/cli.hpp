#pragma once

#include "gridfno/datagen/dataset.hpp"
#include "gridfno/fno/train.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace gridfno::cli {

inline constexpr int kConfigSchema = 1;

enum Exit : int { ok = 0, failure = 1, config_error = 2, divergence = 3 };

/// Flags shared by every command plus the per-command overrides.
struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out = ".";
    int threads = 1;
    bool force = false;

    std::optional<Index> scenarios;
    std::optional<int> episodes;
    std::optional<Index> batch_size;
    std::optional<std::string> model;
    std::optional<Index> sample;
    std::optional<std::string> fault_type;
    std::optional<Index> line;
    std::optional<double> clear_cycles;
    std::optional<double> t_end;
    bool no_fault = false;
    std::vector<double> horizons;
    std::optional<int> repetitions;
};

struct SimulateSpec {
    double t_end = 5.0;
    powerdyn::FaultScenario scenario;
};

struct EvalSpec {
    Index batch_size = 32;
    std::vector<double> horizons{3.0, 4.5, 6.0};
    int repetitions = 20;
};

/// Effective configuration after overrides; `json` is what gets hashed.
struct RunConfig {
    nlohmann::json json;
    std::string hash;
    std::uint64_t seed = 0;
    std::string network_path;
    powerdyn::NetworkModel network;
    datagen::ScenarioDistribution dist;
    datagen::GenerationConfig gen;
    std::string model_kind = "fno";
    fno::FnoHyper fno;
    int dnn_layers = 7;
    fno::TrainConfig train;
    EvalSpec eval;
    SimulateSpec simulate;
};

/// Reads the config file, applies the overrides in `opt` and validates. Relative
/// paths inside the config resolve against the config file's directory.
RunConfig load_config(const Options& opt);

powerdyn::FaultScenario scenario_from_json(const nlohmann::json& j);

int cmd_simulate(const Options& opt);
int cmd_gen_dataset(const Options& opt);
int cmd_train(const Options& opt);
int cmd_predict(const Options& opt);
int cmd_eval(const Options& opt);
int cmd_bench(const Options& opt);

/// Full command line; returns the exit code. Messages go to stderr.
int run(int argc, const char* const* argv);

} // namespace gridfno::cli
