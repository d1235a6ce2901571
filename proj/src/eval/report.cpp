#include "gridfno/eval/report.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <set>

namespace gridfno::eval {
namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double median_seconds(int reps, Fn&& fn) {
    std::vector<double> t(static_cast<std::size_t>(reps));
    for (auto& v : t) {
        const auto a = Clock::now();
        fn();
        v = std::chrono::duration<double>(Clock::now() - a).count();
    }
    std::sort(t.begin(), t.end());
    const std::size_t m = t.size() / 2;
    return t.size() % 2 ? t[m] : 0.5 * (t[m - 1] + t[m]);
}

// One-sample dataset holding a normalized frame.
Dataset encode_single(const datagen::SampleFrame& f, const datagen::DatasetMeta& meta) {
    Dataset ds = Dataset::empty(meta);
    const Index n = meta.n_buses, tin = meta.geo.tau_in, tout = meta.geo.tau_out;
    ds.input = TensorF({1, n, datagen::kChannels, tin});
    for (Index k = 0; k < ds.input.size(); ++k) {
        ds.input[k] = static_cast<float>(meta.norm.encode((k / tin) % datagen::kChannels, f.input[k]));
    }
    ds.target = TensorF({1, tout, n, datagen::kStates});
    ds.u_out = TensorF({1, tout, 2});
    for (Index k = 0; k < 2 * tout; ++k) ds.u_out[k] = static_cast<float>(f.u_out[k]);
    datagen::SampleInfo info;
    info.t_on = f.t_on;
    ds.info.push_back(info);
    return ds;
}

} // namespace

nlohmann::json to_json(const OffsetMetrics& m) {
    nlohmann::json j = to_json(m.score);
    j["offset_cycles"] = m.offset_cycles;
    j["n_samples"] = m.n_samples;
    j["relative_mse"] = m.relative_mse;
    return j;
}

nlohmann::json to_json(const Timing& t) {
    return {{"horizon_s", t.horizon_s},   {"tau_out", t.tau_out},       {"repetitions", t.repetitions},
            {"encode_s", t.encode_s},     {"predict_s", t.predict_s},   {"simulate_s", t.simulate_s},
            {"speedup", t.speedup}};
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json j = to_json(r.score);
    j["relative_mse"] = r.relative_mse;
    j["n_cases"] = r.n_cases;
    j["n_samples"] = r.n_samples;
    j["per_offset"] = nlohmann::json::array();
    for (const auto& m : r.per_offset) j["per_offset"].push_back(to_json(m));
    if (!r.timing.empty()) {
        j["timing"] = nlohmann::json::array();
        for (const auto& t : r.timing) j["timing"].push_back(to_json(t));
    }
    return j;
}

Tensor decode_prediction(const Dataset& ds, const Tensor& pred) {
    Tensor out = pred;
    for (Index k = 0; k < out.size(); ++k) out[k] = ds.meta.norm.decode(k % datagen::kStates, pred[k]);
    return out;
}

std::vector<Tensor> predict_physical(const fno::Surrogate& model, const Dataset& ds, const std::vector<Index>& samples,
                                     Index batch_size) {
    auto preds = model.predict_frames(ds, samples, batch_size);
    for (auto& p : preds) p = decode_prediction(ds, p);
    return preds;
}

EvalReport evaluate(const fno::Surrogate& model, const Dataset& ds, const std::vector<Index>& samples,
                    Index batch_size) {
    require(!samples.empty(), Errc::invalid_argument, "evaluation over an empty sample set");
    const auto preds = predict_physical(model, ds, samples, batch_size);

    std::vector<Tensor> targets;
    std::vector<double> t_on;
    std::vector<bool> stable;
    std::set<Index> cases;
    std::map<int, std::vector<std::size_t>> by_offset;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& info = ds.info[static_cast<std::size_t>(samples[i])];
        targets.push_back(ds.frame(samples[i]).target);
        t_on.push_back(info.t_on);
        stable.push_back(info.stable);
        cases.insert(info.scenario);
        by_offset[info.offset_cycles].push_back(i);
    }
    // Every sample of a dataset shares the fault inception time.
    const double t_f = ds.info[static_cast<std::size_t>(samples.front())].t_f;
    const double dt = ds.meta.geo.dt;

    EvalReport r;
    r.n_samples = static_cast<Index>(samples.size());
    r.n_cases = static_cast<Index>(cases.size());
    r.relative_mse = relative_mse(preds, targets);
    r.score = classify_and_score(preds, t_on, dt, t_f, stable, ds.meta.label_buses, ds.meta.rule);
    for (const auto& [offset, idx] : by_offset) {
        std::vector<Tensor> p, t;
        std::vector<double> on;
        std::vector<bool> st;
        for (std::size_t i : idx) {
            p.push_back(preds[i]);
            t.push_back(targets[i]);
            on.push_back(t_on[i]);
            st.push_back(stable[i]);
        }
        OffsetMetrics m;
        m.offset_cycles = offset;
        m.n_samples = static_cast<Index>(idx.size());
        m.relative_mse = relative_mse(p, t);
        m.score = classify_and_score(p, on, dt, t_f, st, ds.meta.label_buses, ds.meta.rule);
        r.per_offset.push_back(m);
    }
    return r;
}

Timing bench_speedup(const fno::FnoModel& model, const powerdyn::NetworkModel& net,
                     const powerdyn::FaultScenario& scenario, const powerdyn::SystemState& s0,
                     const datagen::DatasetMeta& meta, double horizon, const BenchOptions& options) {
    require(options.repetitions >= 1, Errc::invalid_argument, "bench needs at least one repetition");
    require(horizon > 0.0, Errc::invalid_argument, "bench horizon must be positive");
    Timing t;
    t.horizon_s = horizon;
    t.repetitions = options.repetitions;
    t.tau_out = static_cast<Index>(std::llround(horizon / meta.geo.dt));

    datagen::DatasetMeta m = meta;
    m.geo.tau_out = t.tau_out;
    fno::FnoModel net_model = model;
    net_model.set_tau_out(t.tau_out);

    const double t_on = scenario.t_f + options.onset_cycles * datagen::kCycle;
    powerdyn::SimulationOptions ref;
    ref.dt = options.dt_int;
    ref.kappa = options.kappa;
    ref.t_end = t_on + horizon + meta.geo.dt;
    const auto reference = powerdyn::simulate(net, scenario, s0, ref);
    require(!reference.diverged, Errc::numerical_blowup, "bench scenario diverged: " + reference.status());

    Dataset single;
    t.encode_s = median_seconds(options.repetitions, [&] {
        single = encode_single(datagen::build_frame(reference.trajectory, scenario, net, t_on, m.geo), m);
    });
    const Tensor x = net_model.make_inputs(single, {0});
    t.predict_s = median_seconds(options.repetitions, [&] { (void)net_model.predict(x); });

    powerdyn::SimulationOptions sim = ref;
    sim.t_end = horizon;
    t.simulate_s = median_seconds(options.repetitions, [&] { (void)powerdyn::simulate(net, scenario, s0, sim); });
    t.speedup = t.simulate_s / t.predict_s;
    return t;
}

} // namespace gridfno::eval
