#include "gridfno/io/container.hpp"

#include <zlib.h>

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gridfno::io {

static_assert(std::endian::native == std::endian::little, "payload is written in host byte order");

namespace {

using nlohmann::json;

struct Blob {
    const char* data;
    std::size_t bytes;
    const char* dtype;
};

Blob blob_of(const Entry& e) {
    if (const auto* f = std::get_if<TensorF>(&e.value)) {
        return {reinterpret_cast<const char*>(f->data.data()), static_cast<std::size_t>(f->size()) * sizeof(float),
                "f32"};
    }
    const auto& d = std::get<Tensor>(e.value);
    return {reinterpret_cast<const char*>(d.data.data()), static_cast<std::size_t>(d.size()) * sizeof(double), "f64"};
}

} // namespace

const Shape& Entry::shape() const {
    return std::visit([](const auto& t) -> const Shape& { return t.shape; }, value);
}

const Entry& Container::at(const std::string& name) const {
    for (const auto& e : tensors) {
        if (e.name == name) {
            return e;
        }
    }
    fail(Errc::schema_mismatch, "container has no tensor '" + name + "'");
}

const TensorF& Container::f32(const std::string& name) const {
    const auto* t = std::get_if<TensorF>(&at(name).value);
    require(t != nullptr, Errc::schema_mismatch, "tensor '" + name + "' is not float32");
    return *t;
}

const Tensor& Container::f64(const std::string& name) const {
    const auto* t = std::get_if<Tensor>(&at(name).value);
    require(t != nullptr, Errc::schema_mismatch, "tensor '" + name + "' is not float64");
    return *t;
}

void write_container(const Container& c, const std::string& path) {
    json table = json::array();
    std::size_t offset = 0;
    uLong crc = crc32(0L, Z_NULL, 0);
    for (const auto& e : c.tensors) {
        const Blob b = blob_of(e);
        table.push_back({{"name", e.name}, {"dtype", b.dtype}, {"shape", e.shape()}, {"offset", offset},
                         {"length", b.bytes}});
        if (b.bytes > 0) {
            crc = crc32(crc, reinterpret_cast<const Bytef*>(b.data), static_cast<uInt>(b.bytes));
        }
        offset += b.bytes;
    }
    const json header{{"schema", kSchemaVersion}, {"kind", c.kind},          {"meta", c.meta},
                      {"tensors", table},         {"payload_bytes", offset}, {"crc32", static_cast<std::uint64_t>(crc)}};

    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        require(out.good(), Errc::io_failure, "cannot write " + path);
        out << header.dump() << '\n';
        for (const auto& e : c.tensors) {
            const Blob b = blob_of(e);
            out.write(b.data, static_cast<std::streamsize>(b.bytes));
        }
        require(out.good(), Errc::io_failure, "write failed for " + path);
    }
    require(std::rename(tmp.c_str(), path.c_str()) == 0, Errc::io_failure, "cannot move " + tmp + " to " + path);
}

Container read_container(const std::string& path, const std::string& expected_kind) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::io_failure, "cannot open " + path);
    std::string line;
    std::getline(in, line);
    json header;
    try {
        header = json::parse(line);
    } catch (const json::exception&) {
        fail(Errc::schema_mismatch, path + ": header is not JSON");
    }
    const int schema = header.value("schema", -1);
    require(schema == kSchemaVersion, Errc::schema_mismatch,
            path + ": schema " + std::to_string(schema) + " is not supported (expected " +
                std::to_string(kSchemaVersion) + ")");
    Container c;
    c.kind = header.value("kind", "");
    require(expected_kind.empty() || c.kind == expected_kind, Errc::schema_mismatch,
            path + ": expected a " + expected_kind + " file, found '" + c.kind + "'");
    c.meta = header.value("meta", json::object());

    const auto payload_bytes = header.at("payload_bytes").get<std::size_t>();
    std::string payload(payload_bytes, '\0');
    in.read(payload.data(), static_cast<std::streamsize>(payload_bytes));
    require(static_cast<std::size_t>(in.gcount()) == payload_bytes, Errc::truncated_payload,
            path + ": truncated payload (" + std::to_string(in.gcount()) + " of " + std::to_string(payload_bytes) +
                " bytes)");
    in.peek();
    require(in.eof(), Errc::truncated_payload, path + ": trailing bytes after payload");

    uLong crc = crc32(0L, Z_NULL, 0);
    if (payload_bytes > 0) {
        crc = crc32(crc, reinterpret_cast<const Bytef*>(payload.data()), static_cast<uInt>(payload_bytes));
    }
    require(static_cast<std::uint64_t>(crc) == header.at("crc32").get<std::uint64_t>(), Errc::checksum_mismatch,
            path + ": checksum mismatch");

    for (const auto& t : header.at("tensors")) {
        const auto name = t.at("name").get<std::string>();
        const auto dtype = t.at("dtype").get<std::string>();
        const auto shape = t.at("shape").get<Shape>();
        const auto offset = t.at("offset").get<std::size_t>();
        const auto length = t.at("length").get<std::size_t>();
        require(offset + length <= payload_bytes, Errc::truncated_payload, path + ": tensor '" + name + "' overruns payload");
        const auto count = static_cast<std::size_t>(shape_size(shape));
        if (dtype == "f32") {
            require(length == count * sizeof(float), Errc::schema_mismatch, path + ": bad length for " + name);
            TensorF v(shape);
            if (length) std::memcpy(v.data.data(), payload.data() + offset, length);
            c.tensors.push_back({name, std::move(v)});
        } else if (dtype == "f64") {
            require(length == count * sizeof(double), Errc::schema_mismatch, path + ": bad length for " + name);
            Tensor v(shape);
            if (length) std::memcpy(v.data.data(), payload.data() + offset, length);
            c.tensors.push_back({name, std::move(v)});
        } else {
            fail(Errc::schema_mismatch, path + ": unknown dtype " + dtype);
        }
    }
    return c;
}

std::uint64_t fnv1a64(const void* data, std::size_t size, std::uint64_t h) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < size; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

std::uint64_t hash_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), Errc::io_failure, "cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in) {
        in.read(buf, sizeof buf);
        h = fnv1a64(buf, static_cast<std::size_t>(in.gcount()), h);
    }
    return h;
}

std::uint64_t hash_json(const nlohmann::json& j) {
    const std::string s = j.dump();
    return fnv1a64(s.data(), s.size());
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

} // namespace gridfno::io
