#include "gridfno/numcore/tensor.hpp"

namespace gridfno {

std::string shape_string(const Shape& shape) {
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i > 0) {
            out += "x";
        }
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

std::string_view to_string(Errc code) noexcept {
    switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::shape_mismatch: return "shape mismatch";
    case Errc::numerical_blowup: return "numerical blow-up";
    case Errc::no_equilibrium: return "no equilibrium found";
    case Errc::insufficient_horizon: return "insufficient horizon";
    case Errc::schema_mismatch: return "schema mismatch";
    case Errc::truncated_payload: return "truncated payload";
    case Errc::checksum_mismatch: return "checksum mismatch";
    case Errc::io_failure: return "i/o failure";
    case Errc::degenerate_target: return "degenerate target";
    case Errc::non_real_inverse: return "non-real inverse";
    case Errc::training_diverged: return "training diverged";
    case Errc::config: return "configuration error";
    }
    return "unknown";
}

} // namespace gridfno
