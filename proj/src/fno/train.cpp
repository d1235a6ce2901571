#include "gridfno/fno/train.hpp"

#include <chrono>
#include <cmath>

namespace gridfno::fno {

using nlohmann::json;

void TrainConfig::validate() const {
    require(episodes >= 1 && batch_size >= 1, Errc::config, "train: episodes and batch_size must be positive");
    require(lr > 0.0 && decay_interval >= 1 && decay_base > 0.0 && decay_base <= 1.0, Errc::config,
            "train: invalid learning-rate schedule");
    require(checkpoint_every >= 0 && eval_every >= 0, Errc::config, "train: intervals must be non-negative");
}

json to_json(const TrainConfig& c) {
    return {{"episodes", c.episodes},
            {"batch_size", c.batch_size},
            {"lr", c.lr},
            {"decay_interval", c.decay_interval},
            {"decay_base", c.decay_base},
            {"seed", c.seed},
            {"checkpoint_every", c.checkpoint_every},
            {"eval_every", c.eval_every}};
}

TrainConfig train_config_from_json(const json& j) {
    TrainConfig c;
    try {
        c.episodes = j.value("episodes", c.episodes);
        c.batch_size = j.value("batch_size", c.batch_size);
        c.lr = j.value("lr", c.lr);
        c.decay_interval = j.value("decay_interval", c.decay_interval);
        c.decay_base = j.value("decay_base", c.decay_base);
        c.seed = j.value("seed", c.seed);
        c.checkpoint_every = j.value("checkpoint_every", c.checkpoint_every);
        c.eval_every = j.value("eval_every", c.eval_every);
    } catch (const json::exception& e) {
        fail(Errc::config, std::string("train config: ") + e.what());
    }
    c.validate();
    return c;
}

double learning_rate(const TrainConfig& cfg, std::int64_t step) {
    return cfg.lr * std::pow(cfg.decay_base, static_cast<double>(step / cfg.decay_interval));
}

Adam::Adam(std::vector<Tensor*> params, double beta1, double beta2, double eps)
    : params_(std::move(params)), b1_(beta1), b2_(beta2), eps_(eps) {
    for (const Tensor* p : params_) {
        m_.push_back(Eigen::ArrayXd::Zero(p->size()));
        v_.push_back(Eigen::ArrayXd::Zero(p->size()));
    }
}

void Adam::step(const std::vector<Tensor>& grads, double lr) {
    require(grads.size() == params_.size(), Errc::invalid_argument, "adam: gradient count mismatch");
    ++t_;
    const double c1 = 1.0 - std::pow(b1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(b2_, static_cast<double>(t_));
    for (std::size_t i = 0; i < params_.size(); ++i) {
        const auto& g = grads[i].data;
        m_[i] = b1_ * m_[i] + (1.0 - b1_) * g;
        v_[i] = b2_ * v_[i] + (1.0 - b2_) * g.square();
        params_[i]->data -= lr * (m_[i] / c1) / ((v_[i] / c2).sqrt() + eps_);
    }
}

json to_json(const EpisodeRecord& r) {
    json j{{"episode", r.episode}, {"step", r.step}, {"lr", r.lr}, {"train_loss", r.train_loss}};
    j["test_loss"] = r.test_loss ? json(*r.test_loss) : json(nullptr);
    j["wall_s"] = r.wall_s;
    return j;
}

double mape_value(const Tensor& pred, const Tensor& target, std::size_t batch_axis) {
    Tape tape;
    const Var p = tape.constant(pred);
    return tape.value(numcore::mape(tape, p, target, batch_axis))[0];
}

double evaluate_loss(const Surrogate& model, const Dataset& ds, const std::vector<Index>& samples, Index batch_size) {
    require(!samples.empty(), Errc::invalid_argument, "evaluate_loss on an empty sample set");
    double total = 0.0;
    for (std::size_t b = 0; b < samples.size(); b += static_cast<std::size_t>(batch_size)) {
        const std::vector<Index> chunk(
            samples.begin() + static_cast<std::ptrdiff_t>(b),
            samples.begin() + static_cast<std::ptrdiff_t>(std::min(samples.size(), b + static_cast<std::size_t>(batch_size))));
        const Tensor pred = model.predict(model.make_inputs(ds, chunk));
        total += mape_value(pred, model.make_targets(ds, chunk), model.batch_axis()) * static_cast<double>(chunk.size());
    }
    return total / static_cast<double>(samples.size());
}

std::vector<EpisodeRecord> train(Surrogate& model, const Dataset& ds, const TrainConfig& cfg,
                                 const TrainCallbacks& callbacks) {
    cfg.validate();
    std::vector<Index> train_idx = ds.indices(true);
    const std::vector<Index> test_idx = ds.indices(false);
    require(!train_idx.empty(), Errc::config, "training split is empty");

    const auto params = model.parameters();
    Adam adam(params);
    std::vector<EpisodeRecord> history;
    const auto t0 = std::chrono::steady_clock::now();

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const std::uint64_t shuffle_seed = splitmix64(cfg.seed ^ splitmix64(static_cast<std::uint64_t>(ep)));
        Rng rng(shuffle_seed);
        std::vector<Index> order = train_idx;
        shuffle(order, rng);

        EpisodeRecord rec;
        rec.episode = ep + 1;
        double loss_sum = 0.0;
        int batch_no = 0;
        for (std::size_t b = 0; b < order.size(); b += static_cast<std::size_t>(cfg.batch_size), ++batch_no) {
            const std::vector<Index> batch(
                order.begin() + static_cast<std::ptrdiff_t>(b),
                order.begin() +
                    static_cast<std::ptrdiff_t>(std::min(order.size(), b + static_cast<std::size_t>(cfg.batch_size))));
            Tape tape;
            std::vector<Var> vars;
            vars.reserve(params.size());
            for (Tensor* p : params) vars.push_back(tape.parameter(*p));
            const Var pred = model.forward(tape, vars, model.make_inputs(ds, batch), true);
            const Var loss = numcore::mape(tape, pred, model.make_targets(ds, batch), model.batch_axis());
            const double value = tape.value(loss)[0];
            require(std::isfinite(value), Errc::training_diverged,
                    "non-finite loss at episode " + std::to_string(ep + 1) + ", batch " + std::to_string(batch_no) +
                        " (shuffle seed " + std::to_string(shuffle_seed) + ")");
            tape.backward(loss);
            std::vector<Tensor> grads;
            grads.reserve(vars.size());
            for (Var v : vars) grads.push_back(tape.grad(v));
            rec.lr = learning_rate(cfg, adam.steps());
            adam.step(grads, rec.lr);
            loss_sum += value * static_cast<double>(batch.size());
        }
        rec.step = adam.steps();
        rec.train_loss = loss_sum / static_cast<double>(order.size());
        if (cfg.eval_every > 0 && !test_idx.empty() && ((ep + 1) % cfg.eval_every == 0 || ep + 1 == cfg.episodes)) {
            rec.test_loss = evaluate_loss(model, ds, test_idx);
        }
        rec.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        history.push_back(rec);
        if (callbacks.on_episode) callbacks.on_episode(rec);
        if (callbacks.on_checkpoint && cfg.checkpoint_every > 0 && (ep + 1) % cfg.checkpoint_every == 0) {
            callbacks.on_checkpoint(ep + 1);
        }
    }
    return history;
}

} // namespace gridfno::fno
