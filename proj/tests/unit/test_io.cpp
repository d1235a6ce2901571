#include "gridfno/io/container.hpp"

#include <catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>

using namespace gridfno;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("gridfno_" + name)).string();
}

io::Container sample_container() {
    io::Container c;
    c.kind = "test";
    c.meta = {{"answer", 42}};
    TensorF a({2, 3});
    for (Index i = 0; i < a.size(); ++i) a[i] = 0.1f * static_cast<float>(i) - 0.25f;
    Tensor b({4});
    b.data << 1e-300, -2.5, 3.0, 1.0 / 3.0;
    c.tensors.push_back({"a", a});
    c.tensors.push_back({"b", b});
    c.tensors.push_back({"empty", TensorF({0, 5})});
    return c;
}

void flip_byte(const std::string& path, std::streamoff from_end) {
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekg(-from_end, std::ios::end);
    char ch;
    f.get(ch);
    f.seekp(-from_end, std::ios::end);
    f.put(static_cast<char>(ch ^ 0x5a));
}

Errc read_error(const std::string& path, const std::string& kind = "") {
    try {
        io::read_container(path, kind);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("read succeeded");
    return Errc::invalid_argument;
}

} // namespace

TEST_CASE("container round trip is bit exact") {
    const auto path = temp_path("roundtrip.bin");
    const auto c = sample_container();
    io::write_container(c, path);
    const auto r = io::read_container(path, "test");
    CHECK(r.kind == "test");
    CHECK(r.meta["answer"] == 42);
    CHECK(r.f32("a").shape == Shape{2, 3});
    CHECK((r.f32("a").data == c.f32("a").data).all());
    CHECK((r.f64("b").data == c.f64("b").data).all());
    CHECK(r.f32("empty").shape == Shape{0, 5});
    CHECK_THROWS_AS(r.f64("a"), Error);
    CHECK_THROWS_AS(r.at("missing"), Error);
    std::remove(path.c_str());
}

TEST_CASE("container corruption is reported with distinct codes") {
    const auto path = temp_path("corrupt.bin");
    io::write_container(sample_container(), path);

    SECTION("payload byte flipped") {
        flip_byte(path, 3);
        CHECK(read_error(path) == Errc::checksum_mismatch);
    }
    SECTION("payload truncated") {
        const auto size = std::filesystem::file_size(path);
        std::filesystem::resize_file(path, size - 5);
        CHECK(read_error(path) == Errc::truncated_payload);
    }
    SECTION("wrong kind") {
        CHECK(read_error(path, "dataset") == Errc::schema_mismatch);
    }
    SECTION("schema version") {
        std::ifstream in(path, std::ios::binary);
        std::string header, rest;
        std::getline(in, header);
        rest.assign(std::istreambuf_iterator<char>(in), {});
        in.close();
        auto j = nlohmann::json::parse(header);
        j["schema"] = 99;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        out << j.dump() << '\n' << rest;
        out.close();
        CHECK(read_error(path) == Errc::schema_mismatch);
    }
    SECTION("missing file") {
        CHECK(read_error(path + ".nope") == Errc::io_failure);
    }
    std::remove(path.c_str());
}

TEST_CASE("fnv1a64 reference values") {
    CHECK(io::fnv1a64("", 0) == 0xcbf29ce484222325ULL);
    CHECK(io::fnv1a64("a", 1) == 0xaf63dc4c8601ec8cULL);
    CHECK(io::fnv1a64("foobar", 6) == 0x85944171f73967e8ULL);
    CHECK(io::hex64(0xabcULL) == "0000000000000abc");
}
