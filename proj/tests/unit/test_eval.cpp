#include "support/oracles.hpp"
#include "support/reference_fno.hpp"

#include "gridfno/eval/report.hpp"
#include "gridfno/powerdyn/cases.hpp"
#include "gridfno/powerdyn/equilibrium.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <sstream>

using namespace gridfno;
using namespace gridfno::eval;
using testing::random_tensor;

namespace {

Tensor vec(std::initializer_list<double> v) {
    Tensor t({static_cast<Index>(v.size())});
    Index i = 0;
    for (double x : v) t[i++] = x;
    return t;
}

// [tau_out, N, 3] block with constant omega (Hz) on every bus.
Tensor flat_frequency(Index tout, Index n, double hz) {
    Tensor t({tout, n, 3});
    for (Index z = 0; z < tout; ++z)
        for (Index x = 0; x < n; ++x) t[(z * n + x) * 3 + 1] = hz;
    return t;
}

} // namespace

TEST_CASE("relative mse examples", "[metric]") {
    const std::vector<Tensor> target{vec({3, 4})};
    CHECK(relative_mse(target, target) == 0.0);
    CHECK(relative_mse(std::vector<Tensor>{vec({0, 0})}, target) == 1.0);
    CHECK(relative_mse(std::vector<Tensor>{vec({3, 0})}, target) == 16.0 / 25.0);
    CHECK_THROWS_AS(relative_mse(std::vector<Tensor>{}, std::vector<Tensor>{}), Error);
    CHECK_THROWS_AS(relative_mse(std::vector<Tensor>{vec({1})}, target), Error);
}

TEST_CASE("relative mse pools the whole set", "[metric]") {
    // (1-0)^2 + (0-2)^2 over 1 + 4; the per-sample mean would be (1 + 1) / 2.
    const std::vector<Tensor> p{vec({0}), vec({0})}, t{vec({1}), vec({2})};
    CHECK(relative_mse(p, t) == 1.0);
    const std::vector<Tensor> q{vec({2}), vec({2})};
    CHECK(relative_mse(q, t) == Catch::Approx(1.0 / 5.0).epsilon(1e-15));
}

TEST_CASE("relative mse is invariant to joint scaling", "[property][metric]") {
    std::mt19937_64 rng(1);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<Tensor> p, t, ps, ts;
        const double c = std::uniform_real_distribution<double>(-5, 5)(rng) + 0.1;
        for (int i = 0; i < 4; ++i) {
            p.push_back(random_tensor({6, 2, 3}, rng));
            t.push_back(random_tensor({6, 2, 3}, rng));
            ps.push_back(p.back());
            ps.back().data *= c;
            ts.push_back(t.back());
            ts.back().data *= c;
        }
        CHECK(relative_mse(ps, ts) == Catch::Approx(relative_mse(p, t)).epsilon(1e-12));
    }
}

TEST_CASE("relative mse works on float blocks", "[metric]") {
    TensorF a({2}), b({2});
    a[0] = 3, a[1] = 4;
    b[0] = 3;
    CHECK(relative_mse(std::vector<TensorF>{b}, std::vector<TensorF>{a}) == 16.0 / 25.0);
}

TEST_CASE("stability scoring examples", "[metric]") {
    SECTION("perfect predictions") {
        const std::vector<bool> truth{true, false, true, false};
        const auto s = score_labels(truth, truth);
        REQUIRE(s.type1);
        REQUIRE(s.type2);
        CHECK(*s.type1 == 0.0);
        CHECK(*s.type2 == 0.0);
    }
    SECTION("one of four unstable cases missed") {
        const std::vector<bool> truth{false, false, false, false, true};
        const std::vector<bool> pred{true, false, false, false, true};
        const auto s = score_labels(pred, truth);
        CHECK(*s.type1 == 0.25);
        CHECK(*s.type2 == 0.0);
        CHECK(s.missed_unstable == 1);
    }
    SECTION("no unstable cases") {
        const std::vector<bool> truth{true, true};
        const auto s = score_labels({true, false}, truth);
        CHECK_FALSE(s.type1.has_value());
        CHECK(*s.type2 == 0.5);
        CHECK(to_json(s)["type1_error"] == "N/A");
    }
    SECTION("no stable cases") {
        const auto s = score_labels({false}, {false});
        CHECK_FALSE(s.type2.has_value());
        CHECK(*s.type1 == 0.0);
    }
}

TEST_CASE("stability scores ignore sample order", "[property][metric]") {
    std::mt19937_64 rng(2);
    std::vector<bool> truth(40), pred(40);
    for (std::size_t i = 0; i < 40; ++i) {
        truth[i] = rng() % 3 != 0;
        pred[i] = rng() % 4 != 0;
    }
    const auto a = score_labels(pred, truth);
    std::vector<std::size_t> perm(40);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<bool> tp(40), pp(40);
    for (std::size_t i = 0; i < 40; ++i) {
        tp[i] = truth[perm[i]];
        pp[i] = pred[perm[i]];
    }
    const auto b = score_labels(pp, tp);
    CHECK(*a.type1 == *b.type1);
    CHECK(*a.type2 == *b.type2);
}

TEST_CASE("classification labels predicted trajectories with the stability rule", "[metric]") {
    // dt 0.03, 150 steps from t_on = 0.6 reach 5.1 s and cover [4.6, 5.1].
    const std::vector<bool> include{true, true};
    std::vector<Tensor> preds{flat_frequency(150, 2, 0.1), flat_frequency(150, 2, 2.0), flat_frequency(150, 2, 0.49),
                              flat_frequency(150, 2, -0.6)};
    const std::vector<double> t_on(4, 0.6);
    const std::vector<bool> truth{true, false, false, false};
    const auto s = classify_and_score(preds, t_on, 0.03, 0.6, truth, include);
    CHECK(*s.type1 == Catch::Approx(1.0 / 3.0));
    CHECK(*s.type2 == 0.0);

    // 100 steps stop at 3.6 s, short of the window
    std::vector<Tensor> shortp{flat_frequency(100, 2, 0.0)};
    CHECK_THROWS_AS(classify_and_score(shortp, {0.6}, 0.03, 0.6, {true}, include), Error);
}

TEST_CASE("envelope bands") {
    SECTION("single bus is degenerate") {
        std::mt19937_64 rng(3);
        const Tensor t = random_tensor({5, 1, 3}, rng);
        const auto e = envelope(t);
        CHECK((e.lo.data == t.data).all());
        CHECK((e.hi.data == t.data).all());
    }
    SECTION("constant 0 and 1 buses") {
        Tensor t({4, 2, 3});
        for (Index z = 0; z < 4; ++z)
            for (Index k = 0; k < 3; ++k) t[(z * 2 + 1) * 3 + k] = 1.0;
        const auto e = envelope(t);
        CHECK((e.lo.data == 0.0).all());
        CHECK((e.hi.data == 1.0).all());
    }
    SECTION("random set against a naive scan") {
        std::mt19937_64 rng(4);
        const Tensor t = random_tensor({7, 5, 3}, rng);
        const std::vector<bool> inc{true, false, true, true, false};
        const auto e = envelope(t, inc);
        for (Index z = 0; z < 7; ++z)
            for (Index k = 0; k < 3; ++k) {
                std::vector<double> col;
                for (Index x : {0, 2, 3}) col.push_back(t[(z * 5 + x) * 3 + k]);
                CHECK(e.lo[z * 3 + k] == *std::min_element(col.begin(), col.end()));
                CHECK(e.hi[z * 3 + k] == *std::max_element(col.begin(), col.end()));
                for (double v : col) CHECK((e.lo[z * 3 + k] <= v && v <= e.hi[z * 3 + k]));
            }
    }
    SECTION("csv") {
        Tensor t({2, 1, 3});
        t.data << 1, 2, 3, 4, 5, 6;
        std::ostringstream out;
        write_envelope_csv(envelope(t), {0.0, 0.5}, out);
        CHECK(out.str() == "t,delta_min,delta_max,omega_min,omega_max,v_min,v_max\n0,1,1,2,2,3,3\n0.5,4,4,5,5,6,6\n");
    }
}

TEST_CASE("evaluation report on a generated dataset") {
    const auto net = powerdyn::smib_case();
    datagen::ScenarioDistribution dist;
    dist.offsets_cycles = {0, 10};
    dist.lines = {0};
    datagen::GenerationConfig cfg;
    cfg.n_scenarios = 6;
    cfg.train_fraction = 0.5;
    cfg.seed = 3;
    const auto ds = datagen::generate_dataset(net, dist, cfg);
    fno::FnoHyper h;
    h.n_buses = ds.meta.n_buses;
    h.layers = 1;
    h.kmax = {1, 1, 2};
    const fno::FnoModel model(h, 1);
    const auto test = ds.indices(false);
    const auto r = evaluate(model, ds, test);
    CHECK(r.n_samples == static_cast<Index>(test.size()));
    CHECK(r.n_cases == 3);
    REQUIRE(r.per_offset.size() == 2);
    CHECK(r.per_offset[0].offset_cycles == 0);
    CHECK(r.per_offset[1].n_samples == 3);
    CHECK(r.relative_mse >= 0.0);
    const auto j = to_json(r);
    CHECK(j["per_offset"].size() == 2);

    // Exact targets score perfectly.
    std::vector<Tensor> targets;
    for (Index s : test) targets.push_back(ds.frame(s).target);
    CHECK(relative_mse(targets, targets) == 0.0);
}

TEST_CASE("bench reports medians and their ratio") {
    const auto net = powerdyn::smib_case();
    const auto eq = powerdyn::find_equilibrium(net);
    powerdyn::FaultScenario sc;
    sc.type = powerdyn::FaultType::ThreePhase;
    sc.line = 0;
    sc.t_f = 0.6;
    sc.t_cl = 0.6 + 5 * datagen::kCycle;
    datagen::DatasetMeta meta;
    meta.n_buses = net.n_buses();
    meta.label_buses = datagen::label_buses(net);
    fno::FnoHyper h;
    h.n_buses = meta.n_buses;
    h.layers = 0;
    h.kmax = {1, 1, 1};
    const fno::FnoModel model(h, 1);
    BenchOptions opt;
    opt.repetitions = 3;
    const auto t = bench_speedup(model, net, sc, eq, meta, 3.0, opt);
    CHECK(t.tau_out == 100);
    CHECK(t.predict_s > 0.0);
    CHECK(t.simulate_s > 0.0);
    CHECK(t.speedup == t.simulate_s / t.predict_s);
    CHECK(model.hyper().tau_out == 150); // original untouched
}
