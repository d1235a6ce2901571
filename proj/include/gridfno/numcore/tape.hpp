#pragma once

#include "gridfno/numcore/tensor.hpp"

#include <cstddef>
#include <functional>
#include <limits>
#include <vector>

namespace gridfno::numcore {

/// Handle to a node on a Tape.
struct Var {
    std::size_t id = std::numeric_limits<std::size_t>::max();
    bool valid() const { return id != std::numeric_limits<std::size_t>::max(); }
};

/// Dynamic reverse-mode graph. Nodes are appended in evaluation order and
/// backward() replays their adjoints in exact reverse order, accumulating
/// gradients additively. Complex nodes carry gradients as dL/dRe + i dL/dIm.
///
/// A tape is single-threaded; build one per forward pass.
class Tape {
public:
    using Adjoint = std::function<void(Tape&, Var self)>;

    Var constant(Tensor value);
    Var constant(ComplexTensor value);
    Var parameter(Tensor value);

    /// Appends a computed node. The adjoint is only kept when an input needs gradients.
    Var record(Tensor value, std::initializer_list<Var> inputs, Adjoint adjoint);
    Var record(ComplexTensor value, std::initializer_list<Var> inputs, Adjoint adjoint);

    bool is_complex(Var v) const { return node(v).complex; }
    bool requires_grad(Var v) const { return node(v).requires_grad; }
    const Tensor& value(Var v) const;
    const ComplexTensor& cvalue(Var v) const;
    const Shape& shape(Var v) const;

    /// Gradient of the last backward() loss; zeros for unreached or constant nodes.
    Tensor grad(Var v) const;
    ComplexTensor cgrad(Var v) const;

    /// Upstream gradient of `self`, for use inside adjoints.
    const Eigen::ArrayXd& upstream(Var self) const { return node(self).grad; }
    const Eigen::ArrayXd& upstream_im(Var self) const { return node(self).grad_im; }

    void accumulate(Var v, const Eigen::Ref<const Eigen::ArrayXd>& g);
    void accumulate(Var v, const Eigen::Ref<const Eigen::ArrayXd>& g_re,
                    const Eigen::Ref<const Eigen::ArrayXd>& g_im);

    /// Reverse sweep from a scalar (single-element, real) node.
    void backward(Var loss);

    std::size_t size() const { return nodes_.size(); }

private:
    struct Node {
        bool complex = false;
        bool requires_grad = false;
        bool has_grad = false;
        Tensor value;
        ComplexTensor cvalue;
        Eigen::ArrayXd grad;
        Eigen::ArrayXd grad_im;
        Adjoint adjoint;
    };

    const Node& node(Var v) const;
    Node& node(Var v);
    bool any_requires_grad(std::initializer_list<Var> inputs) const;

    std::vector<Node> nodes_;
};

} // namespace gridfno::numcore
