#pragma once

#include "gridfno/error.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <functional>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

namespace gridfno {

using Index = Eigen::Index;
using Shape = std::vector<Index>;

inline Index shape_size(const Shape& shape) {
    return std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>{});
}

std::string shape_string(const Shape& shape);

// Row-major dense tensor; the data buffer always holds shape_size(shape) entries.
template <typename Scalar>
struct BasicTensor {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    Shape shape;
    Array data;

    BasicTensor() = default;

    explicit BasicTensor(Shape s) : shape(std::move(s)), data(Array::Zero(shape_size(shape))) {}

    BasicTensor(Shape s, Array values) : shape(std::move(s)), data(std::move(values)) {
        if (data.size() != shape_size(shape))
            fail(Errc::shape_mismatch,
                 "tensor data length " + std::to_string(data.size()) + " does not match shape " + shape_string(shape));
    }

    static BasicTensor constant(Shape s, Scalar value) {
        BasicTensor t(std::move(s));
        t.data.setConstant(value);
        return t;
    }

    Index size() const { return data.size(); }
    Index rank() const { return static_cast<Index>(shape.size()); }
    Index dim(std::size_t axis) const { return shape.at(axis); }

    Scalar& operator[](Index i) { return data[i]; }
    const Scalar& operator[](Index i) const { return data[i]; }
};

// Split-storage complex tensor (separate real and imaginary buffers).
template <typename Scalar>
struct BasicComplexTensor {
    using Array = Eigen::Array<Scalar, Eigen::Dynamic, 1>;

    Shape shape;
    Array re;
    Array im;

    BasicComplexTensor() = default;

    explicit BasicComplexTensor(Shape s)
        : shape(std::move(s)), re(Array::Zero(shape_size(shape))), im(Array::Zero(shape_size(shape))) {}

    BasicComplexTensor(Shape s, Array real, Array imag)
        : shape(std::move(s)), re(std::move(real)), im(std::move(imag)) {
        if (re.size() != shape_size(shape) || im.size() != re.size())
            fail(Errc::shape_mismatch, "complex tensor buffers do not match shape " + shape_string(shape));
    }

    Index size() const { return re.size(); }
    Index rank() const { return static_cast<Index>(shape.size()); }
    Index dim(std::size_t axis) const { return shape.at(axis); }
};

using Tensor = BasicTensor<double>;
using ComplexTensor = BasicComplexTensor<double>;
using TensorF = BasicTensor<float>;

inline void require_same_shape(const Shape& a, const Shape& b, const char* what) {
    if (a != b) fail(Errc::shape_mismatch, std::string(what) + ": shape " + shape_string(a) + " vs " + shape_string(b));
}

} // namespace gridfno
