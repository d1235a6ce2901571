#pragma once

#include "gridfno/fno/model.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

namespace gridfno::fno {

struct TrainConfig {
    int episodes = 4000; // passes over the training split
    Index batch_size = 800;
    double lr = 0.02;
    int decay_interval = 100; // optimizer steps
    double decay_base = 0.85;
    std::uint64_t seed = 0;
    int checkpoint_every = 0; // episodes; 0 = never
    int eval_every = 1;       // episodes between test-loss evaluations; 0 = never

    void validate() const;
};

nlohmann::json to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

/// lr * base^floor(step / interval).
double learning_rate(const TrainConfig& cfg, std::int64_t step);

class Adam {
public:
    explicit Adam(std::vector<Tensor*> params, double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

    /// grads[i] matches params[i].
    void step(const std::vector<Tensor>& grads, double lr);
    std::int64_t steps() const { return t_; }

private:
    std::vector<Tensor*> params_;
    std::vector<Eigen::ArrayXd> m_, v_;
    double b1_, b2_, eps_;
    std::int64_t t_ = 0;
};

struct EpisodeRecord {
    int episode = 0;
    std::int64_t step = 0; // optimizer steps taken so far
    double lr = 0.0;       // rate of the last step
    double train_loss = 0.0;
    std::optional<double> test_loss;
    double wall_s = 0.0;
};

nlohmann::json to_json(const EpisodeRecord& r);

struct TrainCallbacks {
    std::function<void(const EpisodeRecord&)> on_episode;
    std::function<void(int episode)> on_checkpoint;
};

/// Adam on the MAPE loss over shuffled mini-batches of the training split.
/// Throws Errc::training_diverged on a non-finite loss.
std::vector<EpisodeRecord> train(Surrogate& model, const Dataset& ds, const TrainConfig& cfg,
                                 const TrainCallbacks& callbacks = {});

/// Mean per-sample MAPE of inference-mode predictions.
double evaluate_loss(const Surrogate& model, const Dataset& ds, const std::vector<Index>& samples,
                     Index batch_size = 32);

/// Scalar MAPE without a tape.
double mape_value(const Tensor& pred, const Tensor& target, std::size_t batch_axis);

} // namespace gridfno::fno
