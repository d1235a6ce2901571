#include "support/oracles.hpp"
#include "support/reference_fno.hpp"

#include "gridfno/fno/train.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

using namespace gridfno;
using namespace gridfno::fno;
using namespace gridfno::numcore;
using testing::check_gradients;
using testing::random_tensor;

namespace {

Var project(Tape& t, Var x, std::uint64_t seed = 17) {
    std::mt19937_64 rng(seed);
    const Index n = shape_size(t.shape(x));
    Var w = t.constant(random_tensor({n, 1}, rng));
    return sum(t, linear(t, reshape(t, x, {1, n}), w));
}

Tensor identity_weights(const ModeSet& modes, Index c) {
    Tensor w({modes.kept_count(0), modes.kept_count(1), modes.kept_count(2), c, c});
    for (Index m = 0; m < modes.total_kept(); ++m)
        for (Index i = 0; i < c; ++i) w[(m * c + i) * c + i] = 1.0;
    return w;
}

std::vector<double> as_vector(const Tensor& t) { return {t.data.data(), t.data.data() + t.size()}; }

// Dataset of synthetic frames with the given geometry; every sample is in the training split.
datagen::Dataset synthetic_dataset(Index samples, Index n, Index tin, Index tout, std::uint64_t seed) {
    datagen::DatasetMeta meta;
    meta.geo = {0.03, tin, tout};
    meta.n_buses = n;
    meta.label_buses.assign(static_cast<std::size_t>(n), true);
    auto ds = datagen::Dataset::empty(meta);
    ds.input = TensorF({samples, n, 7, tin});
    ds.target = TensorF({samples, tout, n, 3});
    ds.u_out = TensorF({samples, tout, 2});
    Rng rng(seed);
    for (Index i = 0; i < ds.input.size(); ++i) ds.input[i] = static_cast<float>(rng.uniform(-1, 1));
    for (Index s = 0; s < samples; ++s)
        for (Index z = 0; z < tout; ++z)
            for (Index x = 0; x < n; ++x)
                for (Index k = 0; k < 3; ++k)
                    ds.target[((s * tout + z) * n + x) * 3 + k] =
                        static_cast<float>(std::sin(0.4 * z + x + k) + 1.5 + 0.1 * s);
    for (Index s = 0; s < samples; ++s) {
        datagen::SampleInfo info;
        info.scenario = s;
        info.train = true;
        ds.info.push_back(info);
    }
    return ds;
}

} // namespace

TEST_CASE("spectral conv with identity weights and all modes is the identity") {
    std::mt19937_64 rng(1);
    const Tensor g = random_tensor({4, 2, 6, 2, 3}, rng);
    const ModeSet modes({4, 2, 6}, {2, 1, 3});
    const TruncatedDft dft(modes);
    const Tensor w = identity_weights(modes, 3);
    const Tensor y = spectral_conv(g, w, Tensor(w.shape), dft);
    CHECK((y.data - g.data).abs().maxCoeff() < 1e-9);

    Tape t;
    Var out = spectral_conv(t, t.constant(g), complex_from(t, t.constant(w), t.constant(Tensor(w.shape))), dft);
    CHECK((t.value(out).data - g.data).abs().maxCoeff() < 1e-9);
}

TEST_CASE("spectral conv with zero weights is zero") {
    std::mt19937_64 rng(2);
    const Tensor g = random_tensor({4, 3, 5, 1, 2}, rng);
    const TruncatedDft dft(ModeSet({4, 3, 5}, {1, 1, 2}));
    const Tensor w({2, 2, 4, 2, 2});
    CHECK(spectral_conv(g, w, w, dft).data.abs().maxCoeff() == 0.0);
}

TEST_CASE("spectral conv matches the brute-force spectral oracle") {
    std::mt19937_64 rng(3);
    // tau_out = 4, N = 3, Y = 2, C = 3
    for (const std::array<Index, 3> k : {std::array<Index, 3>{1, 1, 1}, {2, 1, 1}}) {
        const Tensor g = random_tensor({4, 3, 2, 3}, rng);
        const TruncatedDft dft(ModeSet({4, 3, 2}, k));
        const Shape ws{2 * k[0], 2 * k[1], 2 * k[2], 3, 3};
        const Tensor wr = random_tensor(ws, rng), wi = random_tensor(ws, rng);
        double imag = 1.0;
        const auto ref = testing::reference_spectral(as_vector(g), {4, 3, 2}, 3, k, wr, wi, &imag);
        CHECK(imag < 1e-12);
        const Tensor y = spectral_conv(g, wr, wi, dft);
        for (Index i = 0; i < y.size(); ++i) REQUIRE(std::abs(y[i] - ref[static_cast<std::size_t>(i)]) < 1e-9);
    }
}

TEST_CASE("fourier layer reduces to relu with identity pointwise weights") {
    std::mt19937_64 rng(4);
    const Tensor g = random_tensor({4, 3, 2, 1, 3}, rng);
    const TruncatedDft dft(ModeSet({4, 3, 2}, {1, 1, 1}));
    Tensor eye({3, 3});
    for (Index i = 0; i < 3; ++i) eye[i * 3 + i] = 1.0;
    const Tensor zero({2, 2, 2, 3, 3});
    for (bool non_negative : {false, true}) {
        Tensor in = g;
        if (non_negative) in.data = in.data.abs();
        Tape t;
        const LayerVars p{complex_from(t, t.constant(zero), t.constant(zero)), t.constant(eye),
                          t.constant(Tensor::constant({3}, 1.0)), t.constant(Tensor({3}))};
        const Var out = fourier_layer(t, t.constant(in), p, dft, nullptr, {});
        const Eigen::ArrayXd expected = in.data.max(0.0);
        CHECK((t.value(out).data - expected).abs().maxCoeff() == 0.0);
        if (non_negative) CHECK((t.value(out).data - in.data).abs().maxCoeff() == 0.0);
    }
}

TEST_CASE("fourier layer gradients match finite differences", "[grad]") {
    std::mt19937_64 rng(5);
    const TruncatedDft dft(ModeSet({4, 3, 4}, {1, 1, 2}));
    const Index c = 3;
    const std::vector<Tensor> params{random_tensor({4, 3, 4, 2, c}, rng), random_tensor({2, 2, 4, c, c}, rng, -0.3, 0.3),
                                     random_tensor({2, 2, 4, c, c}, rng, -0.3, 0.3), random_tensor({c, c}, rng),
                                     random_tensor({c}, rng, 0.5, 1.5), random_tensor({c}, rng)};
    for (bool use_bn : {false, true}) {
        const auto r = check_gradients(params, [&](Tape& t, const std::vector<Var>& v) {
            BatchNormState bn;
            const LayerVars p{complex_from(t, v[1], v[2]), v[3], v[4], v[5]};
            return project(t, fourier_layer(t, v[0], p, dft, use_bn ? &bn : nullptr, {}));
        });
        INFO("batch norm " << use_bn << " worst param " << r.worst_param);
        CHECK(r.worst_relative < 1e-4);
    }
}

TEST_CASE("end-to-end toy FNO gradients match finite differences", "[grad]") {
    FnoHyper h;
    h.n_buses = 3;
    h.tau_in = 4;
    h.tau_out = 5;
    h.layers = 2;
    h.kmax = {1, 1, 2};
    FnoModel model(h, 8);
    const auto ds = synthetic_dataset(2, 3, 4, 5, 9);
    const std::vector<Index> batch{0, 1};
    const Tensor x = model.make_inputs(ds, batch);
    const Tensor y = model.make_targets(ds, batch);
    CHECK(x.shape == Shape{5, 3, 7, 2, 7});

    std::vector<Tensor> params;
    for (Tensor* p : model.parameters()) params.push_back(*p);
    const auto r = check_gradients(params, [&](Tape& t, const std::vector<Var>& v) {
        return mape(t, model.forward(t, v, x, true), y, model.batch_axis());
    });
    INFO("worst param " << r.worst_param);
    CHECK(r.worst_relative < 1e-4);
}

TEST_CASE("dense baseline gradients match finite differences", "[grad]") {
    DnnHyper h{12, 6, 5, 3};
    DnnModel model(h, 3);
    std::mt19937_64 rng(6);
    const Tensor x = random_tensor({4, 12}, rng);
    Tensor y = random_tensor({4, 6}, rng, 0.5, 1.5);
    std::vector<Tensor> params;
    for (Tensor* p : model.parameters()) {
        params.push_back(*p);
        params.back().data += 0.05; // keep relus away from their kinks
    }
    const auto r = check_gradients(params, [&](Tape& t, const std::vector<Var>& v) {
        return mape(t, model.forward(t, v, x, true), y, 0);
    });
    CHECK(r.worst_relative < 1e-4);
}

TEST_CASE("prediction matches the recorded golden vector") {
    const auto model = testing::golden_model();
    const Tensor x = testing::golden_input();
    std::ifstream in(std::string(GRIDFNO_TEST_DATA) + "/fno_golden.json");
    REQUIRE(in.good());
    const auto golden = nlohmann::json::parse(in).at("values").get<std::vector<double>>();
    const Tensor p = model.predict(x);
    REQUIRE(static_cast<std::size_t>(p.size()) == golden.size());
    const auto ref = testing::reference_fno(model, x);
    for (std::size_t i = 0; i < golden.size(); ++i) {
        REQUIRE(std::abs(p[static_cast<Index>(i)] - golden[i]) < 1e-9);
        REQUIRE(std::abs(ref[i] - golden[i]) < 1e-9);
    }
}

TEST_CASE("inference forward properties") {
    auto model = testing::golden_model();
    Tensor x({4, 3, 7, 2, 5});
    const Tensor one = testing::golden_input();
    for (Index i = 0; i < 4 * 3 * 7; ++i)
        for (Index b = 0; b < 2; ++b)
            for (Index c = 0; c < 5; ++c) x[(i * 2 + b) * 5 + c] = one[i * 5 + c];
    SECTION("identical frames give identical predictions") {
        const Tensor p = model.predict(x);
        const auto parts = model.unbatch(p, 4, 3);
        CHECK((parts[0].data - parts[1].data).abs().maxCoeff() < 1e-12);
    }
    SECTION("tape forward in inference mode equals predict") {
        Tape t;
        std::vector<Var> v;
        for (Tensor* p : model.parameters()) v.push_back(t.constant(*p));
        const Var out = model.forward(t, v, x, false);
        CHECK((t.value(out).data - model.predict(x).data).abs().maxCoeff() < 1e-12);
    }
    SECTION("zero decoder predicts zero") {
        model.decoder.data.setZero();
        CHECK(model.predict(x).data.abs().maxCoeff() == 0.0);
    }
    SECTION("outputs are finite") {
        CHECK(model.predict(x).data.allFinite());
    }
}

TEST_CASE("zero final dense layer predicts zero") {
    DnnModel model({10, 4, 0, 7}, 1);
    CHECK(model.hyper().width == 10);
    CHECK(model.weights.size() == 7);
    model.weights.back().data.setZero();
    std::mt19937_64 rng(7);
    CHECK(model.predict(random_tensor({3, 10}, rng)).data.abs().maxCoeff() == 0.0);
}

TEST_CASE("mape loss values", "[metric]") {
    Tape t;
    Tensor target({2, 1});
    target.data << 1, 2;
    SECTION("exact prediction") {
        CHECK(t.value(mape(t, t.constant(target), target, 1))[0] == 0.0);
    }
    SECTION("doubled prediction") {
        Tensor p = target;
        p.data *= 2;
        CHECK(t.value(mape(t, t.constant(p), target, 1))[0] == 1.0);
    }
    SECTION("hand value") {
        Tensor p = target;
        p[0] = 1.5;
        CHECK(t.value(mape(t, t.constant(p), target, 1))[0] == Catch::Approx(0.5 / 3).epsilon(1e-15));
    }
    SECTION("degenerate target") {
        Tensor z({2, 2});
        try {
            mape(t, t.constant(z), z, 1);
            FAIL("accepted a zero target");
        } catch (const Error& e) {
            CHECK(e.code() == Errc::degenerate_target);
        }
    }
}

TEST_CASE("batch loss is invariant to sample order", "[metric]") {
    std::mt19937_64 rng(8);
    const Tensor p = random_tensor({3, 4, 2}, rng), y = random_tensor({3, 4, 2}, rng, 0.5, 1.0);
    Tensor ps({3, 4, 2}), ys({3, 4, 2});
    const Index perm[4] = {2, 0, 3, 1};
    for (Index a = 0; a < 3; ++a)
        for (Index b = 0; b < 4; ++b)
            for (Index c = 0; c < 2; ++c) {
                ps[(a * 4 + b) * 2 + c] = p[(a * 4 + perm[b]) * 2 + c];
                ys[(a * 4 + b) * 2 + c] = y[(a * 4 + perm[b]) * 2 + c];
            }
    CHECK(mape_value(ps, ys, 1) == Catch::Approx(mape_value(p, y, 1)).epsilon(1e-14));
}

TEST_CASE("learning rate schedule") {
    TrainConfig cfg;
    CHECK(learning_rate(cfg, 0) == Catch::Approx(0.02).epsilon(1e-15));
    CHECK(learning_rate(cfg, 99) == Catch::Approx(0.02).epsilon(1e-15));
    CHECK(learning_rate(cfg, 100) == Catch::Approx(0.017).epsilon(1e-12));
    CHECK(learning_rate(cfg, 250) == Catch::Approx(0.01445).epsilon(1e-12));
}

TEST_CASE("adam first step moves each weight by the learning rate") {
    Tensor w({3});
    w.data << 1.0, -2.0, 0.5;
    Adam adam({&w});
    Tensor g({3});
    g.data << 0.3, -4.0, 1e-3;
    adam.step({g}, 0.1);
    CHECK(w[0] == Catch::Approx(0.9).epsilon(1e-6));
    CHECK(w[1] == Catch::Approx(-1.9).epsilon(1e-6));
    CHECK(w[2] == Catch::Approx(0.4).epsilon(1e-4));
    CHECK(adam.steps() == 1);
}

TEST_CASE("overfitting a single sample") {
    FnoHyper h;
    h.n_buses = 2;
    h.tau_in = 3;
    h.tau_out = 4;
    h.layers = 1;
    h.kmax = {1, 1, 1};
    FnoModel model(h, 5);
    const auto ds = synthetic_dataset(1, 2, 3, 4, 10);
    TrainConfig cfg;
    cfg.episodes = 500;
    cfg.batch_size = 1;
    cfg.lr = 0.005;
    cfg.decay_interval = 100;
    cfg.decay_base = 0.5;
    cfg.seed = 1;
    cfg.eval_every = 0;
    const auto hist = train(model, ds, cfg);
    REQUIRE(hist.size() == 500);
    CHECK(hist.back().train_loss < 1e-3);
    // 50-episode moving average eventually decreases
    auto avg = [&](std::size_t end) {
        double s = 0;
        for (std::size_t i = end - 50; i < end; ++i) s += hist[i].train_loss;
        return s / 50;
    };
    CHECK(avg(500) < avg(400));
    CHECK(avg(400) < avg(300));
    CHECK(avg(300) < avg(200));
}

TEST_CASE("training is deterministic for a fixed seed") {
    const auto ds = synthetic_dataset(6, 2, 3, 4, 11);
    TrainConfig cfg;
    cfg.episodes = 3;
    cfg.batch_size = 4;
    cfg.seed = 42;
    cfg.eval_every = 0;
    FnoHyper h;
    h.n_buses = 2;
    h.tau_in = 3;
    h.tau_out = 4;
    h.layers = 2;
    h.kmax = {1, 1, 1};
    FnoModel a(h, 3), b(h, 3);
    const auto ha = train(a, ds, cfg), hb = train(b, ds, cfg);
    for (std::size_t i = 0; i < ha.size(); ++i) CHECK(ha[i].train_loss == hb[i].train_loss);
    CHECK((a.decoder.data == b.decoder.data).all());

    DnnModel da(DnnModel::hyper_for(ds), 3), db(DnnModel::hyper_for(ds), 3);
    const auto hda = train(da, ds, cfg), hdb = train(db, ds, cfg);
    for (std::size_t i = 0; i < hda.size(); ++i) CHECK(hda[i].train_loss == hdb[i].train_loss);
}

TEST_CASE("non-finite loss aborts training") {
    auto ds = synthetic_dataset(2, 2, 3, 4, 12);
    ds.input[0] = std::numeric_limits<float>::quiet_NaN();
    DnnModel m(DnnModel::hyper_for(ds), 1);
    TrainConfig cfg;
    cfg.episodes = 1;
    cfg.batch_size = 2;
    try {
        train(m, ds, cfg);
        FAIL("training accepted a NaN loss");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::training_diverged);
        CHECK(std::string(e.what()).find("episode 1") != std::string::npos);
    }
}

TEST_CASE("checkpoint round trip restores predictions") {
    const auto path = (std::filesystem::temp_directory_path() / "gridfno_ckpt.bin").string();
    auto model = testing::golden_model();
    save_checkpoint(model, {{"note", "test"}}, path);
    nlohmann::json meta;
    const auto back = load_checkpoint(path, &meta);
    CHECK(meta["note"] == "test");
    CHECK(back->kind() == "fno");
    const Tensor x = testing::golden_input();
    CHECK((back->predict(x).data == model.predict(x).data).all());

    DnnModel d({6, 3, 4, 3}, 2);
    save_checkpoint(d, {}, path);
    std::mt19937_64 rng(1);
    const Tensor xd = random_tensor({2, 6}, rng);
    CHECK((load_checkpoint(path)->predict(xd).data == d.predict(xd).data).all());
    std::remove(path.c_str());
}

TEST_CASE("horizon can change without touching the weights") {
    auto model = testing::golden_model();
    const auto before = model.encoder.data;
    model.set_tau_out(9);
    CHECK(model.hyper().tau_out == 9);
    Tensor x({9, 3, 7, 1, 5});
    CHECK(model.predict(x).shape == Shape{9, 3, 3, 1, 1});
    CHECK((model.encoder.data == before).all());
    CHECK_THROWS_AS(model.set_tau_out(3), Error);
}

TEST_CASE("hyperparameter validation") {
    FnoHyper h;
    h.n_buses = 2;
    CHECK_THROWS_AS(h.validate(), Error); // kmax 3 on a 2-bus axis
    h.kmax = {1, 3, 6};
    CHECK_NOTHROW(h.validate());
    h.kmax = {1, 4, 6};
    CHECK_THROWS_AS(h.validate(), Error);
    CHECK_THROWS_AS(fno_hyper_from_json({{"n_buses", 2}}), Error);
}
