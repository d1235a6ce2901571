#include "cli.hpp"

#include "gridfno/eval/report.hpp"
#include "gridfno/io/container.hpp"
#include "gridfno/powerdyn/equilibrium.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

namespace gridfno::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::config, "cannot open config file " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        fail(Errc::config, path + ": " + e.what());
    }
}

std::string out_path(const Options& opt, const std::string& name) { return (fs::path(opt.out) / name).string(); }

void require_artifact(const std::string& path, const std::string& what, const std::string& producer) {
    require(fs::exists(path), Errc::config, "missing " + what + " " + path + " (run " + producer + " first)");
}

void write_text(const std::string& path, const std::string& text) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary);
        require(out.good(), Errc::io_failure, "cannot write " + path);
        out << text;
        out.flush();
        require(out.good(), Errc::io_failure, "write failed for " + path);
    }
    require(std::rename(tmp.c_str(), path.c_str()) == 0, Errc::io_failure, "cannot move " + tmp + " to " + path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

// Merges one artifact record into <out>/manifest.json. No timestamps, so reruns match.
void record_artifact(const Options& opt, const RunConfig& cfg, const std::string& name, const std::string& file,
                     const std::string& command, bool hashed = true) {
    const std::string path = out_path(opt, "manifest.json");
    json m;
    if (fs::exists(path)) {
        try {
            m = read_json_file(path);
        } catch (const Error&) {
            m = json::object();
        }
    }
    if (!m.is_object() || m.value("schema", 0) != kConfigSchema) m = json::object();
    m["schema"] = kConfigSchema;
    json entry{{"file", fs::path(file).filename().string()},
               {"command", command},
               {"config_hash", cfg.hash},
               {"seed", cfg.seed}};
    if (hashed) entry["hash"] = io::hex64(io::hash_file(file));
    m["artifacts"][name] = entry;
    write_text(path, dump(m));
}

powerdyn::ActionKind parse_action(const std::string& s) {
    if (s == "ScaleAdmittance") return powerdyn::ActionKind::ScaleAdmittance;
    if (s == "RestoreLine") return powerdyn::ActionKind::RestoreLine;
    if (s == "TripLine") return powerdyn::ActionKind::TripLine;
    fail(Errc::config, "unknown clearing action '" + s + "'");
}

std::string model_file(const std::string& kind) { return kind + ".ckpt"; }

std::string dataset_file(const Options& opt) { return out_path(opt, "dataset.bin"); }

std::unique_ptr<fno::Surrogate> load_model(const Options& opt, const RunConfig& cfg, json* info) {
    const std::string path = out_path(opt, model_file(cfg.model_kind));
    require_artifact(path, "checkpoint", "train");
    return fno::load_checkpoint(path, info);
}

// Refuses a checkpoint trained on a different dataset file unless forced.
void check_lineage(const Options& opt, const json& info, const std::string& ds_path) {
    const std::string have = io::hex64(io::hash_file(ds_path));
    const std::string want = info.value("dataset_hash", "");
    if (have == want) return;
    if (opt.force) {
        std::cerr << "warning: checkpoint was trained on dataset " << want << ", evaluating on " << have << "\n";
        return;
    }
    fail(Errc::config, "checkpoint was trained on dataset " + want + " but " + ds_path + " hashes to " + have +
                           " (use --force to override)");
}

} // namespace

powerdyn::FaultScenario scenario_from_json(const json& j) {
    powerdyn::FaultScenario sc;
    try {
        sc.type = powerdyn::parse_fault_type(j.value("type", std::string("None")));
        sc.line = j.value("line", Index{0});
        sc.t_f = j.value("t_f", 0.6);
        sc.t_cl = j.contains("clear_cycles") ? sc.t_f + j.at("clear_cycles").get<double>() * datagen::kCycle
                                            : j.value("t_cl", sc.t_f + 5 * datagen::kCycle);
        for (const auto& a : j.value("schedule", json::array())) {
            powerdyn::ClearAction act;
            act.t = a.at("t").get<double>();
            act.kind = parse_action(a.at("kind").get<std::string>());
            act.factor = a.value("factor", 1.0);
            sc.schedule.push_back(act);
        }
    } catch (const json::exception& e) {
        fail(Errc::config, std::string("fault: ") + e.what());
    } catch (const Error& e) {
        fail(Errc::config, std::string("fault: ") + e.what());
    }
    return sc;
}

RunConfig load_config(const Options& opt) {
    require(!opt.config.empty(), Errc::config, "--config is required");
    json j = read_json_file(opt.config);
    require(j.is_object(), Errc::config, opt.config + ": config must be a JSON object");
    require(j.value("schema", 0) == kConfigSchema, Errc::config,
            opt.config + ": unsupported config schema (expected " + std::to_string(kConfigSchema) + ")");

    if (opt.seed) j["seed"] = *opt.seed;
    require(j.contains("seed"), Errc::config, "no seed: set \"seed\" in the config or pass --seed");
    if (opt.scenarios) j["dataset"]["n_scenarios"] = *opt.scenarios;
    if (opt.episodes) j["train"]["episodes"] = *opt.episodes;
    if (opt.batch_size) j["train"]["batch_size"] = *opt.batch_size;
    if (opt.model) j["model"]["kind"] = *opt.model;
    if (opt.t_end) j["simulate"]["t_end"] = *opt.t_end;
    if (opt.no_fault) j["simulate"]["fault"] = json{{"type", "None"}};
    if (opt.fault_type) j["simulate"]["fault"]["type"] = *opt.fault_type;
    if (opt.line) j["simulate"]["fault"]["line"] = *opt.line;
    if (opt.clear_cycles) j["simulate"]["fault"]["clear_cycles"] = *opt.clear_cycles;
    if (!opt.horizons.empty()) j["eval"]["horizons"] = opt.horizons;
    if (opt.repetitions) j["eval"]["repetitions"] = *opt.repetitions;

    RunConfig c;
    try {
        c.seed = j.at("seed").get<std::uint64_t>();
        const fs::path base = fs::path(opt.config).parent_path();
        const std::string net = j.at("network").get<std::string>();
        c.network_path = fs::path(net).is_absolute() ? net : (base / net).lexically_normal().string();
        require(fs::exists(c.network_path), Errc::config, "missing network file " + c.network_path);
        c.network = powerdyn::load_network(c.network_path);
        c.network.validate();
        c.dist = datagen::distribution_from_json(j.value("scenarios", json::object()), c.network);

        const json d = j.value("dataset", json::object());
        c.gen.n_scenarios = d.value("n_scenarios", c.gen.n_scenarios);
        c.gen.train_fraction = d.value("train_fraction", c.gen.train_fraction);
        c.gen.geo.dt = d.value("dt", c.gen.geo.dt);
        c.gen.geo.tau_in = d.value("tau_in", c.gen.geo.tau_in);
        c.gen.geo.tau_out = d.value("tau_out", c.gen.geo.tau_out);
        c.gen.dt_int = d.value("dt_int", c.gen.dt_int);
        if (d.contains("stability")) {
            const json& s = d.at("stability");
            c.gen.rule.window_start = s.value("window_start", c.gen.rule.window_start);
            c.gen.rule.window_end = s.value("window_end", c.gen.rule.window_end);
            c.gen.rule.threshold_hz = s.value("threshold_hz", c.gen.rule.threshold_hz);
        }
        if (d.contains("kappa")) {
            const json& k = d.at("kappa");
            c.gen.kappa.slg = k.value("SLG", c.gen.kappa.slg);
            c.gen.kappa.llg = k.value("LLG", c.gen.kappa.llg);
            c.gen.kappa.ll = k.value("LL", c.gen.kappa.ll);
            c.gen.kappa.three_phase = k.value("ThreePhase", c.gen.kappa.three_phase);
        }
        c.gen.seed = c.seed;
        c.gen.threads = opt.threads;
        c.gen.geo.validate();
        require(c.gen.n_scenarios >= 1, Errc::config, "dataset.n_scenarios must be positive");
        require(c.gen.train_fraction > 0.0 && c.gen.train_fraction <= 1.0, Errc::config,
                "dataset.train_fraction must be in (0, 1]");

        const json m = j.value("model", json::object());
        c.model_kind = m.value("kind", c.model_kind);
        require(c.model_kind == "fno" || c.model_kind == "dnn", Errc::config,
                "model.kind must be fno or dnn, got " + c.model_kind);
        c.fno.n_buses = c.network.n_buses();
        c.fno.tau_in = c.gen.geo.tau_in;
        c.fno.tau_out = c.gen.geo.tau_out;
        c.fno.layers = m.value("layers", c.fno.layers);
        c.fno.kmax = m.value("kmax", c.fno.kmax);
        c.fno.batch_norm = m.value("batch_norm", c.fno.batch_norm);
        c.dnn_layers = m.value("dnn_layers", c.dnn_layers);
        if (c.model_kind == "fno") c.fno.validate();

        json t = j.value("train", json::object());
        t["seed"] = c.seed;
        c.train = fno::train_config_from_json(t);

        const json e = j.value("eval", json::object());
        c.eval.batch_size = e.value("batch_size", c.eval.batch_size);
        c.eval.horizons = e.value("horizons", c.eval.horizons);
        c.eval.repetitions = e.value("repetitions", c.eval.repetitions);
        require(c.eval.batch_size >= 1 && c.eval.repetitions >= 1, Errc::config,
                "eval.batch_size and eval.repetitions must be positive");

        const json s = j.value("simulate", json::object());
        c.simulate.t_end = s.value("t_end", c.simulate.t_end);
        c.simulate.scenario = scenario_from_json(s.value("fault", json::object()));
        require(c.simulate.t_end > 0.0, Errc::config, "simulate.t_end must be positive");
        c.simulate.scenario.validate(c.network);
    } catch (const json::exception& e) {
        fail(Errc::config, opt.config + ": " + e.what());
    } catch (const Error& e) {
        if (e.code() == Errc::config) throw;
        fail(Errc::config, opt.config + ": " + e.what());
    }
    c.json = j;
    c.hash = io::hex64(io::hash_json(j));
    return c;
}

int cmd_simulate(const Options& opt) {
    const RunConfig cfg = load_config(opt);
    fs::create_directories(opt.out);
    const auto eq = powerdyn::find_equilibrium(cfg.network);
    powerdyn::SimulationOptions so;
    so.t_end = cfg.simulate.t_end;
    so.dt = cfg.gen.dt_int;
    so.kappa = cfg.gen.kappa;
    const auto res = powerdyn::simulate(cfg.network, cfg.simulate.scenario, eq, so);

    const std::string csv = out_path(opt, "trajectory.csv");
    std::ostringstream traj;
    powerdyn::write_trajectory_csv(res.trajectory, traj);
    write_text(csv, traj.str());

    std::ostringstream stages;
    stages << "stage,t_start\n0,0\n";
    const auto b = cfg.simulate.scenario.boundaries();
    for (std::size_t u = 0; u < b.size(); ++u) stages << u + 1 << ',' << json(b[u]).dump() << '\n';
    stages << "# " << res.status() << '\n';
    const std::string log = out_path(opt, "stages.csv");
    write_text(log, stages.str());

    record_artifact(opt, cfg, "trajectory", csv, "simulate");
    record_artifact(opt, cfg, "stages", log, "simulate");
    if (res.diverged) {
        std::cerr << "simulation diverged: " << res.status() << " (partial trajectory kept)\n";
        return divergence;
    }
    return ok;
}

int cmd_gen_dataset(const Options& opt) {
    const RunConfig cfg = load_config(opt);
    fs::create_directories(opt.out);
    const auto ds = datagen::generate_dataset(cfg.network, cfg.dist, cfg.gen);
    const std::string path = dataset_file(opt);
    write_dataset(ds, path);
    record_artifact(opt, cfg, "dataset", path, "gen-dataset");
    std::cerr << "dataset: " << ds.size() << " samples (" << ds.indices(true).size() << " train), "
              << ds.stable_count() << " stable, " << ds.meta.diverged_skipped << " diverged skipped\n";
    return ok;
}

int cmd_train(const Options& opt) {
    const RunConfig cfg = load_config(opt);
    const std::string ds_path = dataset_file(opt);
    require_artifact(ds_path, "dataset", "gen-dataset");
    const auto ds = datagen::read_dataset(ds_path);
    require(ds.size() > 0 && !ds.indices(true).empty(), Errc::config, "dataset " + ds_path + " has no training samples");

    std::unique_ptr<fno::Surrogate> model;
    if (cfg.model_kind == "fno") {
        fno::FnoHyper h = cfg.fno;
        h.n_buses = ds.meta.n_buses;
        h.tau_in = ds.meta.geo.tau_in;
        h.tau_out = ds.meta.geo.tau_out;
        model = std::make_unique<fno::FnoModel>(h, cfg.seed);
    } else {
        model = std::make_unique<fno::DnnModel>(fno::DnnModel::hyper_for(ds, cfg.dnn_layers), cfg.seed);
    }

    const json info{{"config_hash", cfg.hash},
                    {"seed", cfg.seed},
                    {"dataset_hash", io::hex64(io::hash_file(ds_path))},
                    {"dataset_config_hash", ds.meta.config_hash},
                    {"train", fno::to_json(cfg.train)}};
    const std::string log_path = out_path(opt, cfg.model_kind + "_train_log.jsonl");
    std::ofstream log(log_path, std::ios::trunc);
    require(log.good(), Errc::io_failure, "cannot write " + log_path);

    fno::TrainCallbacks cb;
    cb.on_episode = [&](const fno::EpisodeRecord& r) { log << fno::to_json(r).dump() << '\n' << std::flush; };
    cb.on_checkpoint = [&](int ep) {
        json i = info;
        i["episode"] = ep;
        fno::save_checkpoint(*model, i, out_path(opt, cfg.model_kind + "_ep" + std::to_string(ep) + ".ckpt"));
    };
    fno::train(*model, ds, cfg.train, cb);

    const std::string path = out_path(opt, model_file(cfg.model_kind));
    json i = info;
    i["episode"] = cfg.train.episodes;
    fno::save_checkpoint(*model, i, path);
    record_artifact(opt, cfg, cfg.model_kind, path, "train");
    // wall-clock column makes the log run-dependent
    record_artifact(opt, cfg, cfg.model_kind + "_train_log", log_path, "train", false);
    return ok;
}

int cmd_predict(const Options& opt) {
    const RunConfig cfg = load_config(opt);
    const std::string ds_path = dataset_file(opt);
    require_artifact(ds_path, "dataset", "gen-dataset");
    json info;
    const auto model = load_model(opt, cfg, &info);
    const auto ds = datagen::read_dataset(ds_path);
    check_lineage(opt, info, ds_path);

    const auto test = ds.indices(false);
    Index s = opt.sample.value_or(test.empty() ? 0 : test.front());
    require(s >= 0 && s < ds.size(), Errc::config, "sample " + std::to_string(s) + " out of range");
    const Tensor pred = eval::predict_physical(*model, ds, {s}).front();
    const auto frame = ds.frame(s);
    const Index tout = ds.meta.geo.tau_out, n = ds.meta.n_buses;

    std::vector<double> times(static_cast<std::size_t>(tout));
    std::ostringstream csv;
    csv << "t,bus,delta_rad,omega_hz,v_pu,delta_true,omega_true,v_true\n" << std::setprecision(17);
    for (Index z = 0; z < tout; ++z) {
        times[static_cast<std::size_t>(z)] = frame.t_on + static_cast<double>(z + 1) * ds.meta.geo.dt;
        for (Index x = 0; x < n; ++x) {
            const Index r = (z * n + x) * 3;
            csv << times[static_cast<std::size_t>(z)] << ',' << x;
            for (Index k = 0; k < 3; ++k) csv << ',' << pred[r + k];
            for (Index k = 0; k < 3; ++k) csv << ',' << frame.target[r + k];
            csv << '\n';
        }
    }
    const std::string p = out_path(opt, "prediction.csv");
    write_text(p, csv.str());
    record_artifact(opt, cfg, "prediction", p, "predict");

    for (const auto& [name, block] : {std::pair{std::string("envelope_pred.csv"), pred},
                                      std::pair{std::string("envelope_true.csv"), frame.target}}) {
        std::ostringstream e;
        eval::write_envelope_csv(eval::envelope(block, ds.meta.label_buses), times, e);
        write_text(out_path(opt, name), e.str());
        record_artifact(opt, cfg, fs::path(name).stem().string(), out_path(opt, name), "predict");
    }
    return ok;
}

int cmd_eval(const Options& opt) {
    const RunConfig cfg = load_config(opt);
    const std::string ds_path = dataset_file(opt);
    require_artifact(ds_path, "dataset", "gen-dataset");
    json info;
    const auto model = load_model(opt, cfg, &info);
    check_lineage(opt, info, ds_path);
    const auto ds = datagen::read_dataset(ds_path);
    const auto test = ds.indices(false);
    require(!test.empty(), Errc::config, "dataset " + ds_path + " has no test samples");

    const auto r = eval::evaluate(*model, ds, test, cfg.eval.batch_size);
    json j = eval::to_json(r);
    j["model"] = cfg.model_kind;
    j["config_hash"] = cfg.hash;
    j["seed"] = cfg.seed;
    j["dataset_hash"] = io::hex64(io::hash_file(ds_path));
    j["model_hash"] = io::hex64(io::hash_file(out_path(opt, model_file(cfg.model_kind))));
    const std::string path = out_path(opt, cfg.model_kind + "_report.json");
    write_text(path, dump(j));
    record_artifact(opt, cfg, cfg.model_kind + "_report", path, "eval");
    std::cerr << "relative mse " << r.relative_mse << "\n";
    return ok;
}

int cmd_bench(const Options& opt) {
    const RunConfig cfg = load_config(opt);
    const std::string ds_path = dataset_file(opt);
    require_artifact(ds_path, "dataset", "gen-dataset");
    json info;
    const auto model = load_model(opt, cfg, &info);
    const auto* fno_model = dynamic_cast<const fno::FnoModel*>(model.get());
    require(fno_model != nullptr, Errc::config, "bench needs an fno checkpoint");
    const auto ds = datagen::read_dataset(ds_path);
    require(cfg.simulate.scenario.has_fault(), Errc::config, "bench needs simulate.fault to describe a fault");

    const auto eq = powerdyn::find_equilibrium(cfg.network);
    eval::BenchOptions bo;
    bo.repetitions = cfg.eval.repetitions;
    bo.dt_int = cfg.gen.dt_int;
    bo.kappa = cfg.gen.kappa;
    json j{{"config_hash", cfg.hash}, {"seed", cfg.seed}, {"timing", json::array()}};
    for (double h : cfg.eval.horizons) {
        const auto t = eval::bench_speedup(*fno_model, cfg.network, cfg.simulate.scenario, eq, ds.meta, h, bo);
        j["timing"].push_back(eval::to_json(t));
        std::cerr << "horizon " << h << " s: predict " << t.predict_s << " s, simulate " << t.simulate_s
                  << " s, speed-up " << t.speedup << "\n";
    }
    const std::string path = out_path(opt, "timing.json");
    write_text(path, dump(j));
    record_artifact(opt, cfg, "timing", path, "bench", false);
    return ok;
}

int run(int argc, const char* const* argv) {
    CLI::App app{"Power-system transient simulation and Fourier neural operator surrogate"};
    app.require_subcommand(1);
    Options opt;
    std::uint64_t seed = 0;

    auto common = [&](CLI::App* c) {
        c->add_option("--config", opt.config, "run config (JSON)")->required();
        c->add_option("--seed", seed, "rng seed, overrides the config");
        c->add_option("--out", opt.out, "output directory");
        c->add_option("--threads", opt.threads, "worker threads")->check(CLI::PositiveNumber);
        c->add_flag("--force", opt.force, "ignore dataset/model lineage mismatches");
    };
    auto* sim = app.add_subcommand("simulate", "simulate one fault scenario to trajectory.csv");
    common(sim);
    sim->add_option("--fault-type", opt.fault_type, "SLG, LLG, LL, ThreePhase or None");
    sim->add_option("--line", opt.line, "faulted line index");
    sim->add_option("--clear-cycles", opt.clear_cycles, "clearing time after inception, cycles");
    sim->add_option("--t-end", opt.t_end, "end time, s");
    sim->add_flag("--no-fault", opt.no_fault, "run from equilibrium without a fault");
    auto* gen = app.add_subcommand("gen-dataset", "generate dataset.bin");
    common(gen);
    gen->add_option("--scenarios", opt.scenarios, "number of scenarios");
    auto* tr = app.add_subcommand("train", "train a surrogate on dataset.bin");
    common(tr);
    tr->add_option("--episodes", opt.episodes, "passes over the training split");
    tr->add_option("--batch-size", opt.batch_size, "mini-batch size");
    tr->add_option("--model", opt.model, "fno or dnn");
    auto* pr = app.add_subcommand("predict", "predict one sample to prediction.csv");
    common(pr);
    pr->add_option("--model", opt.model, "fno or dnn");
    pr->add_option("--sample", opt.sample, "dataset sample index (default: first test sample)");
    auto* ev = app.add_subcommand("eval", "score the test split into <model>_report.json");
    common(ev);
    ev->add_option("--model", opt.model, "fno or dnn");
    auto* be = app.add_subcommand("bench", "time inference against simulation into timing.json");
    common(be);
    be->add_option("--model", opt.model, "fno (dnn checkpoints are rejected)");
    be->add_option("--horizons", opt.horizons, "horizons, s");
    be->add_option("--repetitions", opt.repetitions, "timed repetitions per measurement");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : config_error;
    }
    for (auto* sub : app.get_subcommands()) {
        if (sub->count("--seed") > 0) opt.seed = seed;
    }

    try {
        if (sim->parsed()) return cmd_simulate(opt);
        if (gen->parsed()) return cmd_gen_dataset(opt);
        if (tr->parsed()) return cmd_train(opt);
        if (pr->parsed()) return cmd_predict(opt);
        if (ev->parsed()) return cmd_eval(opt);
        if (be->parsed()) return cmd_bench(opt);
    } catch (const Error& e) {
        std::cerr << "error [" << to_string(e.code()) << "]: " << e.what() << "\n";
        switch (e.code()) {
        case Errc::numerical_blowup:
        case Errc::training_diverged:
            return divergence;
        default:
            return config_error;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return failure;
    }
    return config_error;
}

} // namespace gridfno::cli
