#include "gridfno/datagen/dataset.hpp"

#include "gridfno/io/container.hpp"
#include "gridfno/parallel.hpp"
#include "gridfno/powerdyn/equilibrium.hpp"

#include <algorithm>
#include <cmath>

namespace gridfno::datagen {

using nlohmann::json;

std::vector<Index> Dataset::indices(bool train) const {
    std::vector<Index> out;
    for (Index s = 0; s < size(); ++s) {
        if (info[static_cast<std::size_t>(s)].train == train) out.push_back(s);
    }
    return out;
}

Index Dataset::stable_count() const {
    return static_cast<Index>(std::count_if(info.begin(), info.end(), [](const SampleInfo& i) { return i.stable; }));
}

SampleFrame Dataset::frame(Index s) const {
    require(s >= 0 && s < size(), Errc::invalid_argument, "sample index out of range");
    const Index n = meta.n_buses, tin = meta.geo.tau_in, tout = meta.geo.tau_out;
    SampleFrame f;
    f.t_on = info[static_cast<std::size_t>(s)].t_on;
    f.stable = info[static_cast<std::size_t>(s)].stable;
    f.input = Tensor({n, kChannels, tin});
    const Index in_size = n * kChannels * tin;
    for (Index k = 0; k < in_size; ++k) {
        const Index y = (k / tin) % kChannels;
        f.input[k] = meta.norm.decode(y, static_cast<double>(input[s * in_size + k]));
    }
    f.target = Tensor({tout, n, kStates});
    const Index tg_size = tout * n * kStates;
    for (Index k = 0; k < tg_size; ++k) {
        f.target[k] = meta.norm.decode(k % kStates, static_cast<double>(target[s * tg_size + k]));
    }
    f.u_out = Tensor({tout, 2});
    for (Index k = 0; k < 2 * tout; ++k) f.u_out[k] = static_cast<double>(u_out[s * 2 * tout + k]);
    return f;
}

Dataset Dataset::empty(const DatasetMeta& meta) {
    Dataset ds;
    ds.meta = meta;
    ds.input = TensorF({0, meta.n_buses, kChannels, meta.geo.tau_in});
    ds.target = TensorF({0, meta.geo.tau_out, meta.n_buses, kStates});
    ds.u_out = TensorF({0, meta.geo.tau_out, 2});
    return ds;
}

namespace {

struct ScenarioResult {
    bool diverged = false;
    std::vector<SampleFrame> frames;
    std::vector<SampleInfo> info;
    Index degenerate = 0;
};

} // namespace

Dataset generate_dataset(const NetworkModel& net, const ScenarioDistribution& dist, const GenerationConfig& cfg) {
    net.validate();
    dist.validate(net);
    cfg.geo.validate();
    require(cfg.n_scenarios >= 0, Errc::config, "n_scenarios must be non-negative");
    require(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0, Errc::config, "train_fraction must be in (0, 1)");

    const SystemState eq = powerdyn::find_equilibrium(net);
    const auto mask = label_buses(net);
    const int max_offset = *std::max_element(dist.offsets_cycles.begin(), dist.offsets_cycles.end());
    const double t_end = std::max(dist.t_f + max_offset * kCycle + static_cast<double>(cfg.geo.tau_out) * cfg.geo.dt,
                                  dist.t_f + cfg.rule.window_end) +
                         cfg.geo.dt;
    const Index n_train = std::clamp<Index>(
        static_cast<Index>(std::llround(cfg.train_fraction * static_cast<double>(cfg.n_scenarios))), 0,
        cfg.n_scenarios);

    powerdyn::SimulationOptions sim;
    sim.t_end = t_end;
    sim.dt = cfg.dt_int;
    sim.kappa = cfg.kappa;

    std::vector<ScenarioResult> results(static_cast<std::size_t>(cfg.n_scenarios));
    parallel_for(cfg.n_scenarios, cfg.threads, [&](std::ptrdiff_t k) {
        auto& res = results[static_cast<std::size_t>(k)];
        const auto [sc, s0] = sample_scenario(dist, net, eq, scenario_seed(cfg.seed, static_cast<std::uint64_t>(k)));
        const auto run = powerdyn::simulate(net, sc, s0, sim);
        if (run.diverged) {
            res.diverged = true;
            return;
        }
        for (int c : dist.offsets_cycles) {
            const double t_on = dist.t_f + c * kCycle;
            SampleFrame f = build_frame(run.trajectory, sc, net, t_on, cfg.geo);
            if (f.target.data.abs().sum() == 0.0) {
                ++res.degenerate;
                continue;
            }
            const double last = t_on + static_cast<double>(cfg.geo.tau_out) * cfg.geo.dt;
            f.stable = (t_on + cfg.geo.dt <= dist.t_f + cfg.rule.window_start + 1e-9 &&
                        last >= dist.t_f + cfg.rule.window_end - 1e-9)
                           ? label_target(f.target, t_on, cfg.geo.dt, dist.t_f, mask, cfg.rule)
                           : label_stability(run.trajectory, dist.t_f, mask, cfg.rule);
            SampleInfo info;
            info.scenario = k;
            info.offset_cycles = c;
            info.t_on = t_on;
            info.t_f = sc.t_f;
            info.t_cl = sc.t_cl;
            info.stable = f.stable;
            info.fault_type = fault_type_id(sc.type);
            info.line = sc.line;
            info.train = k < n_train;
            res.frames.push_back(std::move(f));
            res.info.push_back(info);
        }
    });

    DatasetMeta meta;
    meta.geo = cfg.geo;
    meta.n_buses = net.n_buses();
    meta.seed = cfg.seed;
    meta.network_name = net.name;
    meta.network_hash = io::hex64(io::hash_json(json::parse(powerdyn::network_to_json(net))));
    json cfg_json{{"distribution", to_json(dist)},
                  {"n_scenarios", cfg.n_scenarios},
                  {"train_fraction", cfg.train_fraction},
                  {"seed", cfg.seed},
                  {"dt", cfg.geo.dt},
                  {"tau_in", cfg.geo.tau_in},
                  {"tau_out", cfg.geo.tau_out},
                  {"dt_int", cfg.dt_int}};
    meta.config_hash = io::hex64(io::hash_json(cfg_json));
    meta.label_buses = mask;
    meta.rule = cfg.rule;
    meta.n_scenarios = cfg.n_scenarios;
    meta.n_train_scenarios = n_train;

    std::vector<const Tensor*> train_inputs;
    Index total = 0;
    for (const auto& r : results) {
        meta.diverged_skipped += r.diverged ? 1 : 0;
        meta.degenerate_skipped += r.degenerate;
        total += static_cast<Index>(r.frames.size());
        for (std::size_t i = 0; i < r.frames.size(); ++i) {
            if (r.info[i].train) train_inputs.push_back(&r.frames[i].input);
        }
    }
    meta.norm = ChannelStats::fit(train_inputs);

    Dataset ds = Dataset::empty(meta);
    const Index n = meta.n_buses, tin = cfg.geo.tau_in, tout = cfg.geo.tau_out;
    const Index in_size = n * kChannels * tin, tg_size = tout * n * kStates;
    ds.input = TensorF({total, n, kChannels, tin});
    ds.target = TensorF({total, tout, n, kStates});
    ds.u_out = TensorF({total, tout, 2});
    Index s = 0;
    for (const auto& r : results) {
        for (std::size_t i = 0; i < r.frames.size(); ++i, ++s) {
            const auto& f = r.frames[i];
            for (Index k = 0; k < in_size; ++k) {
                ds.input[s * in_size + k] = static_cast<float>(meta.norm.encode((k / tin) % kChannels, f.input[k]));
            }
            for (Index k = 0; k < tg_size; ++k) {
                ds.target[s * tg_size + k] = static_cast<float>(meta.norm.encode(k % kStates, f.target[k]));
            }
            for (Index k = 0; k < 2 * tout; ++k) ds.u_out[s * 2 * tout + k] = static_cast<float>(f.u_out[k]);
            ds.info.push_back(r.info[i]);
        }
    }
    return ds;
}

json meta_to_json(const DatasetMeta& m) {
    std::vector<int> mask(m.label_buses.begin(), m.label_buses.end());
    return {{"dt", m.geo.dt},
            {"tau_in", m.geo.tau_in},
            {"tau_out", m.geo.tau_out},
            {"n_buses", m.n_buses},
            {"channels", {"delta_rad", "omega_hz", "v_pu", "p_pu", "q_pu", "u1", "u2"}},
            {"norm_mean", m.norm.mean},
            {"norm_std", m.norm.std},
            {"seed", m.seed},
            {"network_name", m.network_name},
            {"network_hash", m.network_hash},
            {"config_hash", m.config_hash},
            {"label_buses", mask},
            {"stability_window", {m.rule.window_start, m.rule.window_end}},
            {"stability_threshold_hz", m.rule.threshold_hz},
            {"n_scenarios", m.n_scenarios},
            {"n_train_scenarios", m.n_train_scenarios},
            {"diverged_skipped", m.diverged_skipped},
            {"degenerate_skipped", m.degenerate_skipped}};
}

DatasetMeta meta_from_json(const json& j) {
    DatasetMeta m;
    try {
        m.geo.dt = j.at("dt").get<double>();
        m.geo.tau_in = j.at("tau_in").get<Index>();
        m.geo.tau_out = j.at("tau_out").get<Index>();
        m.n_buses = j.at("n_buses").get<Index>();
        m.norm.mean = j.at("norm_mean").get<std::array<double, kChannels>>();
        m.norm.std = j.at("norm_std").get<std::array<double, kChannels>>();
        m.seed = j.at("seed").get<std::uint64_t>();
        m.network_name = j.value("network_name", "");
        m.network_hash = j.at("network_hash").get<std::string>();
        m.config_hash = j.at("config_hash").get<std::string>();
        for (int b : j.at("label_buses").get<std::vector<int>>()) m.label_buses.push_back(b != 0);
        const auto w = j.at("stability_window").get<std::vector<double>>();
        require(w.size() == 2, Errc::schema_mismatch, "stability_window must have two entries");
        m.rule.window_start = w[0];
        m.rule.window_end = w[1];
        m.rule.threshold_hz = j.at("stability_threshold_hz").get<double>();
        m.n_scenarios = j.at("n_scenarios").get<Index>();
        m.n_train_scenarios = j.at("n_train_scenarios").get<Index>();
        m.diverged_skipped = j.value("diverged_skipped", Index{0});
        m.degenerate_skipped = j.value("degenerate_skipped", Index{0});
    } catch (const json::exception& e) {
        fail(Errc::schema_mismatch, std::string("dataset meta: ") + e.what());
    }
    return m;
}

void write_dataset(const Dataset& ds, const std::string& path) {
    io::Container c;
    c.kind = "dataset";
    c.meta = meta_to_json(ds.meta);
    c.meta["n_samples"] = ds.size();
    c.meta["stable_count"] = ds.stable_count();
    c.meta["unstable_count"] = ds.size() - ds.stable_count();
    c.meta["stable_ratio"] = ds.size() > 0 ? static_cast<double>(ds.stable_count()) / static_cast<double>(ds.size()) : 0.0;
    json rows = json::array();
    for (const auto& i : ds.info) {
        rows.push_back({i.scenario, i.offset_cycles, i.t_on, i.t_f, i.t_cl, i.stable ? 1 : 0, i.fault_type, i.line,
                        i.train ? 1 : 0});
    }
    c.meta["sample_columns"] = {"scenario", "offset_cycles", "t_on", "t_f", "t_cl", "stable", "fault_type", "line",
                                "train"};
    c.meta["samples"] = rows;
    c.tensors.push_back({"input", ds.input});
    c.tensors.push_back({"target", ds.target});
    c.tensors.push_back({"u_out", ds.u_out});
    io::write_container(c, path);
}

Dataset read_dataset(const std::string& path) {
    const io::Container c = io::read_container(path, "dataset");
    Dataset ds;
    ds.meta = meta_from_json(c.meta);
    ds.input = c.f32("input");
    ds.target = c.f32("target");
    ds.u_out = c.f32("u_out");
    try {
        for (const auto& r : c.meta.at("samples")) {
            SampleInfo i;
            i.scenario = r.at(0).get<Index>();
            i.offset_cycles = r.at(1).get<int>();
            i.t_on = r.at(2).get<double>();
            i.t_f = r.at(3).get<double>();
            i.t_cl = r.at(4).get<double>();
            i.stable = r.at(5).get<int>() != 0;
            i.fault_type = r.at(6).get<int>();
            i.line = r.at(7).get<Index>();
            i.train = r.at(8).get<int>() != 0;
            ds.info.push_back(i);
        }
    } catch (const json::exception& e) {
        fail(Errc::schema_mismatch, path + ": sample table: " + e.what());
    }
    const Index s = ds.size(), n = ds.meta.n_buses;
    require(ds.input.shape == Shape{s, n, kChannels, ds.meta.geo.tau_in} &&
                ds.target.shape == Shape{s, ds.meta.geo.tau_out, n, kStates} &&
                ds.u_out.shape == Shape{s, ds.meta.geo.tau_out, 2},
            Errc::schema_mismatch, path + ": tensor shapes do not match the header");
    return ds;
}

Tensor batch_inputs(const Dataset& ds, const std::vector<Index>& samples) {
    const Index n = ds.meta.n_buses, tin = ds.meta.geo.tau_in, tout = ds.meta.geo.tau_out;
    const Index b = static_cast<Index>(samples.size()), c = tin + 3;
    const Index in_size = n * kChannels * tin;
    Tensor out({tout, n, kChannels, b, c});
    for (Index j = 0; j < b; ++j) {
        const Index s = samples[static_cast<std::size_t>(j)];
        require(s >= 0 && s < ds.size(), Errc::invalid_argument, "sample index out of range");
        const float* in = ds.input.data.data() + s * in_size;
        const float* u = ds.u_out.data.data() + s * 2 * tout;
        for (Index z = 0; z < tout; ++z) {
            const double stamp = static_cast<double>(z + 1) / static_cast<double>(tout);
            for (Index x = 0; x < n; ++x) {
                for (Index y = 0; y < kChannels; ++y) {
                    double* dst = out.data.data() + (((z * n + x) * kChannels + y) * b + j) * c;
                    const float* src = in + (x * kChannels + y) * tin;
                    for (Index k = 0; k < tin; ++k) dst[k] = static_cast<double>(src[k]);
                    dst[tin] = stamp;
                    dst[tin + 1] = static_cast<double>(u[2 * z]);
                    dst[tin + 2] = static_cast<double>(u[2 * z + 1]);
                }
            }
        }
    }
    return out;
}

Tensor batch_targets(const Dataset& ds, const std::vector<Index>& samples) {
    const Index n = ds.meta.n_buses, tout = ds.meta.geo.tau_out;
    const Index b = static_cast<Index>(samples.size());
    const Index tg_size = tout * n * kStates;
    Tensor out({tout, n, kStates, b, 1});
    for (Index j = 0; j < b; ++j) {
        const Index s = samples[static_cast<std::size_t>(j)];
        require(s >= 0 && s < ds.size(), Errc::invalid_argument, "sample index out of range");
        const float* src = ds.target.data.data() + s * tg_size;
        for (Index k = 0; k < tg_size; ++k) out[k * b + j] = static_cast<double>(src[k]);
    }
    return out;
}

} // namespace gridfno::datagen
