#include "gridfno/fno/model.hpp"

#include <cmath>

namespace gridfno::fno {

using nlohmann::json;
using datagen::kChannels;
using datagen::kStates;

namespace {

constexpr double kBnEpsilon = 1e-5;

Tensor to_tensor(const Eigen::ArrayXd& a) { return Tensor({a.size()}, a); }

void copy_checked(Tensor& dst, const Tensor& src, const std::string& name) {
    require(dst.shape == src.shape, Errc::schema_mismatch,
            "checkpoint tensor " + name + " has shape " + shape_string(src.shape) + ", model expects " +
                shape_string(dst.shape));
    dst.data = src.data;
}

} // namespace

Tensor glorot(Index fan_in, Index fan_out, Rng& rng) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    Tensor w({fan_in, fan_out});
    for (Index i = 0; i < w.size(); ++i) w[i] = rng.uniform(-a, a);
    return w;
}

std::vector<Tensor> Surrogate::predict_frames(const Dataset& ds, const std::vector<Index>& samples,
                                              Index batch_size) const {
    require(batch_size > 0, Errc::invalid_argument, "batch size must be positive");
    std::vector<Tensor> out;
    out.reserve(samples.size());
    for (std::size_t b = 0; b < samples.size(); b += static_cast<std::size_t>(batch_size)) {
        const std::vector<Index> chunk(samples.begin() + static_cast<std::ptrdiff_t>(b),
                                       samples.begin() + static_cast<std::ptrdiff_t>(
                                                             std::min(samples.size(), b + static_cast<std::size_t>(batch_size))));
        auto part = unbatch(predict(make_inputs(ds, chunk)), ds.meta.geo.tau_out, ds.meta.n_buses);
        for (auto& p : part) out.push_back(std::move(p));
    }
    return out;
}

// FNO

void FnoHyper::validate() const {
    require(n_buses >= 1 && tau_in >= 1 && tau_out >= 1, Errc::config, "fno: sizes must be positive");
    require(layers >= 0, Errc::config, "fno: negative layer count");
    const Index ext[3] = {n_buses, kChannels, tau_out};
    const char* names[3] = {"bus", "channel", "time"};
    for (int a = 0; a < 3; ++a) {
        require(kmax[a] >= 1 && 2 * kmax[a] <= ext[a], Errc::config,
                std::string("fno: kmax for the ") + names[a] + " axis must satisfy 1 <= k <= " +
                    std::to_string(ext[a] / 2));
    }
}

json to_json(const FnoHyper& h) {
    return {{"n_buses", h.n_buses}, {"tau_in", h.tau_in}, {"tau_out", h.tau_out},
            {"layers", h.layers},   {"kmax", h.kmax},     {"batch_norm", h.batch_norm}};
}

FnoHyper fno_hyper_from_json(const json& j) {
    FnoHyper h;
    try {
        h.n_buses = j.at("n_buses").get<Index>();
        h.tau_in = j.at("tau_in").get<Index>();
        h.tau_out = j.at("tau_out").get<Index>();
        h.layers = j.value("layers", h.layers);
        h.kmax = j.value("kmax", h.kmax);
        h.batch_norm = j.value("batch_norm", h.batch_norm);
    } catch (const json::exception& e) {
        fail(Errc::config, std::string("fno hyperparameters: ") + e.what());
    }
    h.validate();
    return h;
}

FnoModel::FnoModel(const FnoHyper& hyper, std::uint64_t seed) : hyper_(hyper) {
    hyper_.validate();
    Rng rng(seed);
    const Index c = hyper_.width();
    encoder = glorot(c, c, rng);
    const Shape wshape{2 * hyper_.kmax[2], 2 * hyper_.kmax[0], 2 * hyper_.kmax[1], c, c};
    const double scale = 1.0 / (static_cast<double>(c) * std::sqrt(2.0));
    for (int l = 0; l < hyper_.layers; ++l) {
        FourierLayerParams p;
        p.w_re = Tensor(wshape);
        p.w_im = Tensor(wshape);
        for (Index i = 0; i < p.w_re.size(); ++i) {
            p.w_re[i] = scale * rng.normal();
            p.w_im[i] = scale * rng.normal();
        }
        p.W = glorot(c, c, rng);
        p.gamma = Tensor::constant({c}, 1.0);
        p.beta = Tensor({c});
        p.bn.running_mean = Eigen::ArrayXd::Zero(c);
        p.bn.running_var = Eigen::ArrayXd::Ones(c);
        layers.push_back(std::move(p));
    }
    decoder = glorot(c, 1, rng);
    set_tau_out(hyper_.tau_out);
}

void FnoModel::set_tau_out(Index tau_out) {
    hyper_.tau_out = tau_out;
    hyper_.validate();
    dft_ = std::make_shared<TruncatedDft>(numcore::ModeSet({hyper_.tau_out, hyper_.n_buses, kChannels},
                                                           {hyper_.kmax[2], hyper_.kmax[0], hyper_.kmax[1]}));
}

std::vector<Tensor*> FnoModel::parameters() {
    std::vector<Tensor*> out{&encoder};
    for (auto& l : layers) {
        out.insert(out.end(), {&l.w_re, &l.w_im, &l.W, &l.gamma, &l.beta});
    }
    out.push_back(&decoder);
    return out;
}

Tensor FnoModel::make_inputs(const Dataset& ds, const std::vector<Index>& samples) const {
    require(ds.meta.n_buses == hyper_.n_buses && ds.meta.geo.tau_in == hyper_.tau_in &&
                ds.meta.geo.tau_out == hyper_.tau_out,
            Errc::shape_mismatch, "dataset geometry does not match the model");
    return datagen::batch_inputs(ds, samples);
}

Tensor FnoModel::make_targets(const Dataset& ds, const std::vector<Index>& samples) const {
    return datagen::batch_targets(ds, samples);
}

Var FnoModel::forward(Tape& tape, const std::vector<Var>& params, const Tensor& inputs, bool training) {
    require(params.size() == 2 + 5 * layers.size(), Errc::invalid_argument, "fno: wrong parameter count");
    require(inputs.rank() == 5 && inputs.dim(0) == hyper_.tau_out && inputs.dim(1) == hyper_.n_buses &&
                inputs.dim(2) == kChannels && inputs.dim(4) == hyper_.width(),
            Errc::shape_mismatch, "fno: input shape " + shape_string(inputs.shape));
    BatchNormOptions bn_opts;
    bn_opts.training = training;
    bn_opts.epsilon = kBnEpsilon;
    Var h = numcore::linear(tape, tape.constant(inputs), params[0]);
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::size_t o = 1 + 5 * l;
        const LayerVars lv{numcore::complex_from(tape, params[o], params[o + 1]), params[o + 2], params[o + 3],
                           params[o + 4]};
        h = fourier_layer(tape, h, lv, *dft_, hyper_.batch_norm ? &layers[l].bn : nullptr, bn_opts);
    }
    const Var out = numcore::linear(tape, h, params.back());
    return numcore::slice(tape, out, 2, 0, kStates);
}

Tensor FnoModel::predict(const Tensor& inputs) const {
    require(inputs.rank() == 5 && inputs.dim(0) == hyper_.tau_out && inputs.dim(1) == hyper_.n_buses &&
                inputs.dim(2) == kChannels && inputs.dim(4) == hyper_.width(),
            Errc::shape_mismatch, "fno: input shape " + shape_string(inputs.shape));
    const Index c = hyper_.width();
    Tensor h = apply_linear(inputs, encoder);
    const Index rows = h.size() / c;
    for (const auto& l : layers) {
        Tensor a = apply_linear(h, l.W);
        a.data += spectral_conv(h, l.w_re, l.w_im, *dft_).data;
        Eigen::Map<Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic>> m(a.data.data(), c, rows);
        if (hyper_.batch_norm) {
            const Eigen::ArrayXd inv = (l.bn.running_var + kBnEpsilon).rsqrt() * l.gamma.data;
            const Eigen::ArrayXd shift = l.beta.data - l.bn.running_mean * inv;
            m = (m.colwise() * inv).colwise() + shift;
        }
        a.data = a.data.max(0.0);
        h = std::move(a);
    }
    const Tensor out = apply_linear(h, decoder); // [T, N, 7, B, 1]
    const Index t = out.dim(0), n = out.dim(1), b = out.dim(3);
    Tensor pred({t, n, kStates, b, 1});
    for (Index tn = 0; tn < t * n; ++tn) {
        pred.data.segment(tn * kStates * b, kStates * b) = out.data.segment(tn * kChannels * b, kStates * b);
    }
    return pred;
}

std::vector<Tensor> FnoModel::unbatch(const Tensor& output, Index tau_out, Index n_buses) const {
    const Index b = output.dim(3);
    require(output.shape == Shape({tau_out, n_buses, kStates, b, 1}), Errc::shape_mismatch,
            "fno: output shape " + shape_string(output.shape));
    std::vector<Tensor> out(static_cast<std::size_t>(b), Tensor({tau_out, n_buses, kStates}));
    const Index per = tau_out * n_buses * kStates;
    for (Index k = 0; k < per; ++k)
        for (Index j = 0; j < b; ++j) out[static_cast<std::size_t>(j)][k] = output[k * b + j];
    return out;
}

std::vector<io::Entry> FnoModel::state() const {
    std::vector<io::Entry> out{{"encoder", encoder}};
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        const auto& L = layers[l];
        out.push_back({p + "w_re", L.w_re});
        out.push_back({p + "w_im", L.w_im});
        out.push_back({p + "W", L.W});
        out.push_back({p + "gamma", L.gamma});
        out.push_back({p + "beta", L.beta});
        out.push_back({p + "bn_mean", to_tensor(L.bn.running_mean)});
        out.push_back({p + "bn_var", to_tensor(L.bn.running_var)});
    }
    out.push_back({"decoder", decoder});
    return out;
}

void FnoModel::load_state(const io::Container& c) {
    copy_checked(encoder, c.f64("encoder"), "encoder");
    for (std::size_t l = 0; l < layers.size(); ++l) {
        const std::string p = "layer" + std::to_string(l) + ".";
        auto& L = layers[l];
        copy_checked(L.w_re, c.f64(p + "w_re"), p + "w_re");
        copy_checked(L.w_im, c.f64(p + "w_im"), p + "w_im");
        copy_checked(L.W, c.f64(p + "W"), p + "W");
        copy_checked(L.gamma, c.f64(p + "gamma"), p + "gamma");
        copy_checked(L.beta, c.f64(p + "beta"), p + "beta");
        Tensor m = to_tensor(L.bn.running_mean), v = to_tensor(L.bn.running_var);
        copy_checked(m, c.f64(p + "bn_mean"), p + "bn_mean");
        copy_checked(v, c.f64(p + "bn_var"), p + "bn_var");
        L.bn.running_mean = m.data;
        L.bn.running_var = v.data;
    }
    copy_checked(decoder, c.f64("decoder"), "decoder");
}

// DNN

void DnnHyper::validate() const {
    require(n_inputs >= 1 && n_outputs >= 1 && width >= 0, Errc::config, "dnn: sizes must be positive");
    require(layers >= 1, Errc::config, "dnn: needs at least one layer");
}

json to_json(const DnnHyper& h) {
    return {{"n_inputs", h.n_inputs}, {"n_outputs", h.n_outputs}, {"width", h.width}, {"layers", h.layers}};
}

DnnHyper dnn_hyper_from_json(const json& j) {
    DnnHyper h;
    try {
        h.n_inputs = j.at("n_inputs").get<Index>();
        h.n_outputs = j.at("n_outputs").get<Index>();
        h.width = j.value("width", h.width);
        h.layers = j.value("layers", h.layers);
    } catch (const json::exception& e) {
        fail(Errc::config, std::string("dnn hyperparameters: ") + e.what());
    }
    h.validate();
    return h;
}

DnnHyper DnnModel::hyper_for(const Dataset& ds, int layers) {
    DnnHyper h;
    h.n_inputs = ds.meta.n_buses * kChannels * ds.meta.geo.tau_in;
    h.n_outputs = ds.meta.geo.tau_out * ds.meta.n_buses * kStates;
    h.layers = layers;
    return h;
}

DnnModel::DnnModel(const DnnHyper& hyper, std::uint64_t seed) : hyper_(hyper) {
    hyper_.validate();
    if (hyper_.width == 0) hyper_.width = hyper_.n_inputs;
    Rng rng(seed);
    for (int l = 0; l < hyper_.layers; ++l) {
        const Index in = l == 0 ? hyper_.n_inputs : hyper_.width;
        const Index out = l + 1 == hyper_.layers ? hyper_.n_outputs : hyper_.width;
        weights.push_back(glorot(in, out, rng));
        biases.push_back(Tensor({out}));
    }
}

std::vector<Tensor*> DnnModel::parameters() {
    std::vector<Tensor*> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.push_back(&weights[l]);
        out.push_back(&biases[l]);
    }
    return out;
}

Tensor DnnModel::make_inputs(const Dataset& ds, const std::vector<Index>& samples) const {
    const Index per = ds.meta.n_buses * kChannels * ds.meta.geo.tau_in;
    require(per == hyper_.n_inputs, Errc::shape_mismatch, "dataset geometry does not match the model");
    Tensor x({static_cast<Index>(samples.size()), per});
    for (std::size_t j = 0; j < samples.size(); ++j) {
        x.data.segment(static_cast<Index>(j) * per, per) = ds.input.data.segment(samples[j] * per, per).cast<double>();
    }
    return x;
}

Tensor DnnModel::make_targets(const Dataset& ds, const std::vector<Index>& samples) const {
    const Index per = ds.meta.geo.tau_out * ds.meta.n_buses * kStates;
    require(per == hyper_.n_outputs, Errc::shape_mismatch, "dataset geometry does not match the model");
    Tensor y({static_cast<Index>(samples.size()), per});
    for (std::size_t j = 0; j < samples.size(); ++j) {
        y.data.segment(static_cast<Index>(j) * per, per) = ds.target.data.segment(samples[j] * per, per).cast<double>();
    }
    return y;
}

Var DnnModel::forward(Tape& tape, const std::vector<Var>& params, const Tensor& inputs, bool) {
    require(params.size() == 2 * weights.size(), Errc::invalid_argument, "dnn: wrong parameter count");
    Var h = tape.constant(inputs);
    for (std::size_t l = 0; l < weights.size(); ++l) {
        h = numcore::add_bias(tape, numcore::linear(tape, h, params[2 * l]), params[2 * l + 1]);
        if (l + 1 < weights.size()) h = numcore::relu(tape, h);
    }
    return h;
}

Tensor DnnModel::predict(const Tensor& inputs) const {
    Tensor h = inputs;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        h = apply_linear(h, weights[l]);
        const Index out = weights[l].dim(1);
        Eigen::Map<Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic>> m(h.data.data(), out, h.size() / out);
        m.colwise() += biases[l].data;
        if (l + 1 < weights.size()) h.data = h.data.max(0.0);
    }
    return h;
}

std::vector<Tensor> DnnModel::unbatch(const Tensor& output, Index tau_out, Index n_buses) const {
    const Index per = tau_out * n_buses * kStates;
    require(output.rank() == 2 && output.dim(1) == per, Errc::shape_mismatch,
            "dnn: output shape " + shape_string(output.shape));
    std::vector<Tensor> out;
    for (Index j = 0; j < output.dim(0); ++j) {
        out.emplace_back(Shape{tau_out, n_buses, kStates}, output.data.segment(j * per, per).eval());
    }
    return out;
}

std::vector<io::Entry> DnnModel::state() const {
    std::vector<io::Entry> out;
    for (std::size_t l = 0; l < weights.size(); ++l) {
        out.push_back({"dense" + std::to_string(l) + ".W", weights[l]});
        out.push_back({"dense" + std::to_string(l) + ".b", biases[l]});
    }
    return out;
}

void DnnModel::load_state(const io::Container& c) {
    for (std::size_t l = 0; l < weights.size(); ++l) {
        const std::string p = "dense" + std::to_string(l) + ".";
        copy_checked(weights[l], c.f64(p + "W"), p + "W");
        copy_checked(biases[l], c.f64(p + "b"), p + "b");
    }
}

// checkpoints

void save_checkpoint(Surrogate& model, const json& meta, const std::string& path) {
    io::Container c;
    c.kind = "checkpoint";
    c.meta = {{"model", model.kind()}, {"hyper", model.hyper_json()}, {"info", meta}};
    c.tensors = model.state();
    io::write_container(c, path);
}

std::unique_ptr<Surrogate> load_checkpoint(const std::string& path, json* meta) {
    const io::Container c = io::read_container(path, "checkpoint");
    const std::string kind = c.meta.value("model", "");
    std::unique_ptr<Surrogate> m;
    if (kind == "fno") {
        m = std::make_unique<FnoModel>(fno_hyper_from_json(c.meta.at("hyper")));
    } else if (kind == "dnn") {
        m = std::make_unique<DnnModel>(dnn_hyper_from_json(c.meta.at("hyper")));
    } else {
        fail(Errc::schema_mismatch, path + ": unknown model kind '" + kind + "'");
    }
    m->load_state(c);
    if (meta) *meta = c.meta.value("info", json::object());
    return m;
}

} // namespace gridfno::fno
