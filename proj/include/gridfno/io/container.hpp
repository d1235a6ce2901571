#pragma once

#include "gridfno/numcore/tensor.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace gridfno::io {

/// One named tensor in a container; float32 or float64 on disk.
struct Entry {
    std::string name;
    std::variant<TensorF, Tensor> value;

    const Shape& shape() const;
};

/// File layout: one UTF-8 JSON header line, '\n', then the little-endian
/// row-major payload. The header carries schema, kind, free-form meta, the
/// tensor table (name, dtype, shape, offset, length in bytes), the payload size
/// and its CRC-32.
struct Container {
    std::string kind;
    nlohmann::json meta = nlohmann::json::object();
    std::vector<Entry> tensors;

    const Entry& at(const std::string& name) const;
    const TensorF& f32(const std::string& name) const;
    const Tensor& f64(const std::string& name) const;
};

inline constexpr int kSchemaVersion = 1;

void write_container(const Container& c, const std::string& path);

/// Throws schema_mismatch (version or kind), truncated_payload, checksum_mismatch
/// or io_failure.
Container read_container(const std::string& path, const std::string& expected_kind = "");

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::uint64_t hash_file(const std::string& path);
std::uint64_t hash_json(const nlohmann::json& j);
std::string hex64(std::uint64_t v);

} // namespace gridfno::io
