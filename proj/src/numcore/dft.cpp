#include "gridfno/numcore/dft.hpp"

namespace gridfno::numcore {

ModeSet::ModeSet(Extents3 extents, Extents3 kmax) : extents_(extents), kmax_(kmax) {
    for (std::size_t axis = 0; axis < 3; ++axis) {
        const Index n = extents[axis];
        const Index k = kmax[axis];
        require(n > 0, Errc::invalid_argument, "zero-length transform axis");
        require(k >= 1 && 2 * k <= n, Errc::invalid_argument,
                "kmax " + std::to_string(k) + " too large for axis " + std::to_string(axis) +
                    " of length " + std::to_string(n) + " (need 1 <= k <= n/2)");
        slot_[axis].assign(static_cast<std::size_t>(n), -1);
        for (Index i = 0; i < k; ++i) {
            kept_[axis].push_back(i);
        }
        for (Index i = n - k; i < n; ++i) {
            kept_[axis].push_back(i);
        }
        for (std::size_t s = 0; s < kept_[axis].size(); ++s) {
            slot_[axis][static_cast<std::size_t>(kept_[axis][s])] = static_cast<Index>(s);
        }
    }
}

bool ModeSet::contains(Index i0, Index i1, Index i2) const {
    return slot(0, i0) >= 0 && slot(1, i1) >= 0 && slot(2, i2) >= 0;
}

Index ModeSet::slot(std::size_t axis, Index index) const {
    if (index < 0 || index >= extents_[axis]) {
        return -1;
    }
    return slot_[axis][static_cast<std::size_t>(index)];
}

} // namespace gridfno::numcore
