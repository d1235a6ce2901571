#include "gridfno/numcore/tape.hpp"

namespace gridfno::numcore {

const Tape::Node& Tape::node(Var v) const {
    require(v.id < nodes_.size(), Errc::invalid_argument, "variable does not belong to this tape");
    return nodes_[v.id];
}

Tape::Node& Tape::node(Var v) {
    require(v.id < nodes_.size(), Errc::invalid_argument, "variable does not belong to this tape");
    return nodes_[v.id];
}

bool Tape::any_requires_grad(std::initializer_list<Var> inputs) const {
    for (Var v : inputs) {
        if (node(v).requires_grad) {
            return true;
        }
    }
    return false;
}

Var Tape::constant(Tensor value) {
    Node n;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::constant(ComplexTensor value) {
    Node n;
    n.complex = true;
    n.cvalue = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::parameter(Tensor value) {
    Node n;
    n.requires_grad = true;
    n.value = std::move(value);
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::record(Tensor value, std::initializer_list<Var> inputs, Adjoint adjoint) {
    Node n;
    n.value = std::move(value);
    n.requires_grad = any_requires_grad(inputs);
    if (n.requires_grad) {
        n.adjoint = std::move(adjoint);
    }
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

Var Tape::record(ComplexTensor value, std::initializer_list<Var> inputs, Adjoint adjoint) {
    Node n;
    n.complex = true;
    n.cvalue = std::move(value);
    n.requires_grad = any_requires_grad(inputs);
    if (n.requires_grad) {
        n.adjoint = std::move(adjoint);
    }
    nodes_.push_back(std::move(n));
    return Var{nodes_.size() - 1};
}

const Tensor& Tape::value(Var v) const {
    const Node& n = node(v);
    require(!n.complex, Errc::invalid_argument, "real value requested from a complex node");
    return n.value;
}

const ComplexTensor& Tape::cvalue(Var v) const {
    const Node& n = node(v);
    require(n.complex, Errc::invalid_argument, "complex value requested from a real node");
    return n.cvalue;
}

const Shape& Tape::shape(Var v) const {
    const Node& n = node(v);
    return n.complex ? n.cvalue.shape : n.value.shape;
}

Tensor Tape::grad(Var v) const {
    const Node& n = node(v);
    require(!n.complex, Errc::invalid_argument, "real gradient requested from a complex node");
    if (!n.has_grad) {
        return Tensor(n.value.shape);
    }
    return Tensor(n.value.shape, n.grad);
}

ComplexTensor Tape::cgrad(Var v) const {
    const Node& n = node(v);
    require(n.complex, Errc::invalid_argument, "complex gradient requested from a real node");
    if (!n.has_grad) {
        return ComplexTensor(n.cvalue.shape);
    }
    return ComplexTensor(n.cvalue.shape, n.grad, n.grad_im);
}

void Tape::accumulate(Var v, const Eigen::Ref<const Eigen::ArrayXd>& g) {
    Node& n = node(v);
    if (!n.requires_grad) {
        return;
    }
    require(!n.complex, Errc::invalid_argument, "real gradient accumulated into a complex node");
    require(g.size() == n.value.size(), Errc::shape_mismatch, "gradient size mismatch");
    if (!n.has_grad) {
        n.grad = g;
        n.has_grad = true;
    } else {
        n.grad += g;
    }
}

void Tape::accumulate(Var v, const Eigen::Ref<const Eigen::ArrayXd>& g_re,
                      const Eigen::Ref<const Eigen::ArrayXd>& g_im) {
    Node& n = node(v);
    if (!n.requires_grad) {
        return;
    }
    require(n.complex, Errc::invalid_argument, "complex gradient accumulated into a real node");
    require(g_re.size() == n.cvalue.size() && g_im.size() == n.cvalue.size(), Errc::shape_mismatch,
            "gradient size mismatch");
    if (!n.has_grad) {
        n.grad = g_re;
        n.grad_im = g_im;
        n.has_grad = true;
    } else {
        n.grad += g_re;
        n.grad_im += g_im;
    }
}

void Tape::backward(Var loss) {
    Node& root = node(loss);
    require(!root.complex && root.value.size() == 1, Errc::invalid_argument,
            "backward() needs a real scalar loss");
    for (Node& n : nodes_) {
        n.has_grad = false;
        n.grad.resize(0);
        n.grad_im.resize(0);
    }
    if (!root.requires_grad) {
        return;
    }
    root.grad = Eigen::ArrayXd::Ones(1);
    root.has_grad = true;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (n.has_grad && n.adjoint) {
            n.adjoint(*this, Var{i});
        }
    }
}

} // namespace gridfno::numcore
