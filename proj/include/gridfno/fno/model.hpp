#pragma once

#include "gridfno/datagen/dataset.hpp"
#include "gridfno/fno/layers.hpp"
#include "gridfno/io/container.hpp"

#include <json.hpp>

#include <array>
#include <memory>
#include <string>
#include <vector>

namespace gridfno::fno {

using datagen::Dataset;

/// Trainable surrogate: parameter list, a taped forward on a batch and a
/// tape-free prediction. Predictions and targets are normalized.
class Surrogate {
public:
    virtual ~Surrogate() = default;

    virtual std::string kind() const = 0;
    virtual std::vector<Tensor*> parameters() = 0;

    virtual Tensor make_inputs(const Dataset& ds, const std::vector<Index>& samples) const = 0;
    virtual Tensor make_targets(const Dataset& ds, const std::vector<Index>& samples) const = 0;
    virtual std::size_t batch_axis() const = 0;

    /// params[i] must be the tape variable of parameters()[i].
    virtual Var forward(Tape& tape, const std::vector<Var>& params, const Tensor& inputs, bool training) = 0;

    /// Inference mode; same layout as forward().
    virtual Tensor predict(const Tensor& inputs) const = 0;

    /// Per-sample predictions [tau_out, N, 3] (normalized) for the listed samples.
    std::vector<Tensor> predict_frames(const Dataset& ds, const std::vector<Index>& samples,
                                       Index batch_size = 32) const;

    /// Split a batch output back into per-sample [tau_out, N, 3] blocks.
    virtual std::vector<Tensor> unbatch(const Tensor& output, Index tau_out, Index n_buses) const = 0;

    virtual nlohmann::json hyper_json() const = 0;

    /// Every tensor needed to restore the model (parameters and running statistics).
    virtual std::vector<io::Entry> state() const = 0;
    virtual void load_state(const io::Container& c) = 0;
};

/// kmax ordered (bus, channel, time).
struct FnoHyper {
    Index n_buses = 0;
    Index tau_in = 20;
    Index tau_out = 150;
    int layers = 4;
    std::array<Index, 3> kmax{3, 3, 6};
    bool batch_norm = true;

    Index width() const { return tau_in + 3; }
    void validate() const;
};

nlohmann::json to_json(const FnoHyper& h);
FnoHyper fno_hyper_from_json(const nlohmann::json& j);

struct FourierLayerParams {
    Tensor w_re; // [2k_t, 2k_bus, 2k_ch, C, C]
    Tensor w_im;
    Tensor W;    // [C, C]
    Tensor gamma;
    Tensor beta;
    BatchNormState bn;
};

/// Input [tau_out, N, 7, B, C] -> encoder E [C, C] -> Fourier layers ->
/// decoder [C, 1] -> channels 0..2 -> [tau_out, N, 3, B, 1].
class FnoModel final : public Surrogate {
public:
    explicit FnoModel(const FnoHyper& hyper, std::uint64_t seed = 0);

    const FnoHyper& hyper() const { return hyper_; }

    Tensor encoder;
    std::vector<FourierLayerParams> layers;
    Tensor decoder;

    std::string kind() const override { return "fno"; }
    std::vector<Tensor*> parameters() override;
    Tensor make_inputs(const Dataset& ds, const std::vector<Index>& samples) const override;
    Tensor make_targets(const Dataset& ds, const std::vector<Index>& samples) const override;
    std::size_t batch_axis() const override { return 3; }
    Var forward(Tape& tape, const std::vector<Var>& params, const Tensor& inputs, bool training) override;
    Tensor predict(const Tensor& inputs) const override;
    std::vector<Tensor> unbatch(const Tensor& output, Index tau_out, Index n_buses) const override;
    nlohmann::json hyper_json() const override { return to_json(hyper_); }
    std::vector<io::Entry> state() const override;
    void load_state(const io::Container& c) override;

    const TruncatedDft& dft() const { return *dft_; }

    /// Rebuilds the transform plan for a different output horizon (weights are
    /// horizon independent as long as 2 k_time <= tau_out).
    void set_tau_out(Index tau_out);

private:
    FnoHyper hyper_;
    std::shared_ptr<TruncatedDft> dft_;
};

struct DnnHyper {
    Index n_inputs = 0;
    Index n_outputs = 0;
    Index width = 0; // 0 = n_inputs
    int layers = 7;

    void validate() const;
};

nlohmann::json to_json(const DnnHyper& h);
DnnHyper dnn_hyper_from_json(const nlohmann::json& j);

/// Dense baseline on flattened frames: [B, N*7*tau_in] -> [B, tau_out*N*3].
class DnnModel final : public Surrogate {
public:
    explicit DnnModel(const DnnHyper& hyper, std::uint64_t seed = 0);
    static DnnHyper hyper_for(const Dataset& ds, int layers = 7);

    const DnnHyper& hyper() const { return hyper_; }

    std::vector<Tensor> weights;
    std::vector<Tensor> biases;

    std::string kind() const override { return "dnn"; }
    std::vector<Tensor*> parameters() override;
    Tensor make_inputs(const Dataset& ds, const std::vector<Index>& samples) const override;
    Tensor make_targets(const Dataset& ds, const std::vector<Index>& samples) const override;
    std::size_t batch_axis() const override { return 0; }
    Var forward(Tape& tape, const std::vector<Var>& params, const Tensor& inputs, bool training) override;
    Tensor predict(const Tensor& inputs) const override;
    std::vector<Tensor> unbatch(const Tensor& output, Index tau_out, Index n_buses) const override;
    nlohmann::json hyper_json() const override { return to_json(hyper_); }
    std::vector<io::Entry> state() const override;
    void load_state(const io::Container& c) override;

private:
    DnnHyper hyper_;
};

/// Uniform(+-sqrt(6 / (fan_in + fan_out))).
Tensor glorot(Index fan_in, Index fan_out, Rng& rng);

/// Checkpoint container; meta is stored alongside the hyperparameters.
void save_checkpoint(Surrogate& model, const nlohmann::json& meta, const std::string& path);
std::unique_ptr<Surrogate> load_checkpoint(const std::string& path, nlohmann::json* meta = nullptr);

} // namespace gridfno::fno
