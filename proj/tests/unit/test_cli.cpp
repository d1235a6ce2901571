#include "cli.hpp"

#include "gridfno/io/container.hpp"
#include "gridfno/powerdyn/equilibrium.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <functional>
#include <array>
#include <map>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using namespace gridfno;
using nlohmann::json;

namespace {

struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("gridfno_cli_" + name)) {
        fs::remove_all(path);
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string str(const std::string& f = "") const { return (path / f).string(); }
};

// Small SMIB config written next to the outputs.
std::string tiny_config(const TempDir& dir, const std::function<void(json&)>& edit = {}) {
    std::ifstream in(std::string(GRIDFNO_SOURCE_DIR) + "/configs/smib.json");
    json j = json::parse(in);
    j["network"] = std::string(GRIDFNO_SOURCE_DIR) + "/data/smib.json";
    j["dataset"]["n_scenarios"] = 5;
    j["dataset"]["tau_out"] = 150;
    j["scenarios"]["offsets_cycles"] = {0, 10};
    j["model"]["layers"] = 1;
    j["model"]["kmax"] = {1, 1, 2};
    j["train"]["episodes"] = 1;
    j["train"]["batch_size"] = 4;
    j["eval"]["repetitions"] = 2;
    j["eval"]["horizons"] = {3.0};
    if (edit) edit(j);
    const std::string path = dir.str("config.json");
    std::ofstream(path) << j.dump(2);
    return path;
}

int run(std::vector<std::string> args) {
    args.insert(args.begin(), "gridfno");
    std::vector<const char*> argv;
    for (auto& a : args) argv.push_back(a.c_str());
    return cli::run(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

} // namespace

TEST_CASE("cli reports config errors with exit code 2") {
    TempDir dir("errors");
    SECTION("missing network file") {
        const auto cfg = tiny_config(dir, [](json& j) { j["network"] = "/nonexistent/net.json"; });
        CHECK(run({"simulate", "--config", cfg, "--out", dir.str()}) == cli::config_error);
    }
    SECTION("missing seed") {
        const auto cfg = tiny_config(dir, [](json& j) { j.erase("seed"); });
        CHECK(run({"simulate", "--config", cfg, "--out", dir.str()}) == cli::config_error);
        CHECK(run({"simulate", "--config", cfg, "--seed", "3", "--out", dir.str()}) == cli::ok);
    }
    SECTION("wrong schema") {
        const auto cfg = tiny_config(dir, [](json& j) { j["schema"] = 7; });
        CHECK(run({"gen-dataset", "--config", cfg, "--out", dir.str()}) == cli::config_error);
    }
    SECTION("missing prerequisites") {
        const auto cfg = tiny_config(dir);
        CHECK(run({"train", "--config", cfg, "--out", dir.str()}) == cli::config_error);
        CHECK(run({"eval", "--config", cfg, "--out", dir.str()}) == cli::config_error);
    }
    SECTION("empty dataset") {
        const auto cfg = tiny_config(dir);
        datagen::DatasetMeta meta;
        meta.n_buses = 2;
        meta.label_buses = {true, false};
        datagen::write_dataset(datagen::Dataset::empty(meta), dir.str("dataset.bin"));
        CHECK(run({"train", "--config", cfg, "--out", dir.str()}) == cli::config_error);
    }
    SECTION("unknown subcommand") {
        CHECK(run({"frobnicate"}) == cli::config_error);
    }
}

TEST_CASE("cli simulate matches the library") {
    TempDir dir("simulate");
    SECTION("fault run is byte-identical") {
        const auto cfg = tiny_config(dir);
        REQUIRE(run({"simulate", "--config", cfg, "--out", dir.str()}) == cli::ok);
        cli::Options opt;
        opt.config = cfg;
        const auto rc = cli::load_config(opt);
        powerdyn::SimulationOptions so;
        so.t_end = rc.simulate.t_end;
        so.dt = rc.gen.dt_int;
        const auto res = powerdyn::simulate(rc.network, rc.simulate.scenario, powerdyn::find_equilibrium(rc.network), so);
        std::ostringstream expected;
        powerdyn::write_trajectory_csv(res.trajectory, expected);
        CHECK(slurp(dir.str("trajectory.csv")) == expected.str());
    }
    SECTION("no-fault run from equilibrium is constant") {
        const auto cfg = tiny_config(dir);
        REQUIRE(run({"simulate", "--config", cfg, "--out", dir.str(), "--no-fault", "--t-end", "1"}) == cli::ok);
        std::ifstream in(dir.str("trajectory.csv"));
        std::string line;
        std::getline(in, line);
        std::map<std::string, std::array<double, 3>> first; // bus -> state
        Index rows = 0;
        double drift = 0.0;
        while (std::getline(in, line)) {
            std::vector<std::string> f;
            std::stringstream ss(line);
            for (std::string c; std::getline(ss, c, ',');) f.push_back(c);
            REQUIRE(f.size() == 6);
            const std::array<double, 3> state{std::stod(f[3]), std::stod(f[4]), std::stod(f[5])};
            auto [it, fresh] = first.emplace(f[2], state);
            for (int k = 0; k < 3; ++k) drift = std::max(drift, std::abs(it->second[k] - state[k]));
            ++rows;
        }
        CHECK(drift < 1e-9);
        CHECK(rows > 100);
    }
}

TEST_CASE("cli pipeline runs end to end and reruns identically") {
    TempDir a("pipe_a"), b("pipe_b");
    for (const TempDir* d : {&a, &b}) {
        const auto cfg = tiny_config(*d);
        REQUIRE(run({"gen-dataset", "--config", cfg, "--out", d->str()}) == cli::ok);
        REQUIRE(run({"train", "--config", cfg, "--out", d->str()}) == cli::ok);
        REQUIRE(run({"eval", "--config", cfg, "--out", d->str()}) == cli::ok);
        REQUIRE(run({"predict", "--config", cfg, "--out", d->str()}) == cli::ok);
    }
    for (const char* f : {"dataset.bin", "fno.ckpt", "fno_report.json", "prediction.csv", "envelope_pred.csv"}) {
        INFO(f);
        CHECK(slurp(a.str(f)) == slurp(b.str(f)));
    }
    const auto ma = json::parse(slurp(a.str("manifest.json"))), mb = json::parse(slurp(b.str("manifest.json")));
    CHECK(ma == mb);
    CHECK(ma["artifacts"]["dataset"]["seed"] == 7);
    const auto report = json::parse(slurp(a.str("fno_report.json")));
    CHECK(report["config_hash"] == ma["artifacts"]["fno_report"]["config_hash"]);
    CHECK(report.contains("per_offset"));

    // A checkpoint from another dataset is refused unless forced.
    const auto cfg = tiny_config(a);
    REQUIRE(run({"gen-dataset", "--config", cfg, "--out", a.str(), "--seed", "99"}) == cli::ok);
    CHECK(run({"eval", "--config", cfg, "--out", a.str()}) == cli::config_error);
    CHECK(run({"eval", "--config", cfg, "--out", a.str(), "--force"}) == cli::ok);

    REQUIRE(run({"bench", "--config", cfg, "--out", a.str()}) == cli::ok);
    const auto timing = json::parse(slurp(a.str("timing.json")));
    CHECK(timing["timing"].size() == 1);
}

TEST_CASE("dense baseline goes through the same commands") {
    TempDir dir("dnn");
    const auto cfg = tiny_config(dir);
    REQUIRE(run({"gen-dataset", "--config", cfg, "--out", dir.str()}) == cli::ok);
    REQUIRE(run({"train", "--config", cfg, "--out", dir.str(), "--model", "dnn"}) == cli::ok);
    REQUIRE(run({"eval", "--config", cfg, "--out", dir.str(), "--model", "dnn"}) == cli::ok);
    CHECK(fs::exists(dir.str("dnn_report.json")));
    CHECK(run({"bench", "--config", cfg, "--out", dir.str(), "--model", "dnn"}) == cli::config_error);
}
