#include "gridfno/powerdyn/network.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace gridfno::powerdyn {
namespace {

using nlohmann::json;

const char* kind_name(BusKind k) {
    switch (k) {
    case BusKind::Generator: return "generator";
    case BusKind::Load: return "load";
    case BusKind::Infinite: return "infinite";
    }
    return "generator";
}

BusKind parse_kind(const std::string& s) {
    if (s == "generator") return BusKind::Generator;
    if (s == "load") return BusKind::Load;
    if (s == "infinite") return BusKind::Infinite;
    fail(Errc::config, "unknown bus kind '" + s + "'");
}

std::size_t bus_ref(const json& j, std::size_t n, const char* what) {
    const auto b = j.at("bus").get<long long>();
    require(b >= 0 && static_cast<std::size_t>(b) < n, Errc::config,
            std::string(what) + " references bus " + std::to_string(b) + " out of range");
    return static_cast<std::size_t>(b);
}

} // namespace

void NetworkModel::validate() const {
    require(!buses.empty(), Errc::invalid_argument, "network needs at least one bus");
    const Index n = n_buses();
    for (std::size_t k = 0; k < lines.size(); ++k) {
        const Line& l = lines[k];
        const std::string tag = "line " + std::to_string(k);
        require(l.i >= 0 && l.i < n && l.j >= 0 && l.j < n, Errc::invalid_argument, tag + " references a missing bus");
        require(l.i != l.j, Errc::invalid_argument, tag + " connects a bus to itself");
        require(std::isfinite(l.B) && std::isfinite(l.G), Errc::invalid_argument, tag + " has non-finite admittance");
    }
    for (std::size_t b = 0; b < buses.size(); ++b) {
        const BusParams& p = buses[b];
        const std::string tag = "bus " + std::to_string(b);
        require(std::isfinite(p.P) && std::isfinite(p.Q) && std::isfinite(p.Efd) && std::isfinite(p.D),
                Errc::invalid_argument, tag + " has non-finite parameters");
        if (p.kind == BusKind::Infinite) {
            continue;
        }
        require(p.M > 0, Errc::invalid_argument, tag + ": M must be positive");
        require(p.Tdo_prime > 0, Errc::invalid_argument, tag + ": Tdo_prime must be positive");
        require(p.xd > p.xd_prime && p.xd_prime > 0, Errc::invalid_argument, tag + ": need xd > xd_prime > 0");
    }
}

DenseNetwork densify(const NetworkModel& net, const NetworkModel& intact) {
    const Index n = net.n_buses();
    require(intact.n_buses() == n, Errc::shape_mismatch, "stage network and intact network differ in size");
    DenseNetwork d;
    d.B = Eigen::MatrixXd::Zero(n, n);
    d.G = Eigen::MatrixXd::Zero(n, n);
    for (const Line& l : net.lines) {
        d.B(l.i, l.j) += l.B;
        d.B(l.j, l.i) += l.B;
        d.G(l.i, l.j) += l.G;
        d.G(l.j, l.i) += l.G;
    }
    Eigen::VectorXd intact_row_sum = Eigen::VectorXd::Zero(n);
    for (const Line& l : intact.lines) {
        intact_row_sum[l.i] += l.B;
        intact_row_sum[l.j] += l.B;
    }
    d.B_self.resize(n);
    d.P.resize(n);
    d.M.resize(n);
    d.D.resize(n);
    d.Tdo.resize(n);
    d.xd_gap.resize(n);
    d.Efd.resize(n);
    d.fixed.resize(static_cast<std::size_t>(n));
    for (Index b = 0; b < n; ++b) {
        const BusParams& p = net.buses[static_cast<std::size_t>(b)];
        d.B_self[b] = p.B_self ? *p.B_self : -intact_row_sum[b];
        d.P[b] = p.P;
        d.M[b] = p.M;
        d.D[b] = p.D;
        d.Tdo[b] = p.Tdo_prime;
        d.xd_gap[b] = p.xd - p.xd_prime;
        d.Efd[b] = p.Efd;
        d.fixed[static_cast<std::size_t>(b)] = p.kind == BusKind::Infinite;
    }
    return d;
}

std::string network_to_json(const NetworkModel& net) {
    json j;
    j["schema"] = 1;
    j["name"] = net.name;
    j["buses"] = json::array();
    j["generators"] = json::array();
    j["injections"] = json::array();
    for (std::size_t b = 0; b < net.buses.size(); ++b) {
        const BusParams& p = net.buses[b];
        json bus{{"id", b}, {"kind", kind_name(p.kind)}};
        if (p.B_self) {
            bus["B_self"] = *p.B_self;
        }
        j["buses"].push_back(bus);
        j["generators"].push_back({{"bus", b}, {"M", p.M}, {"D", p.D}, {"Tdo_prime", p.Tdo_prime},
                                   {"xd", p.xd}, {"xd_prime", p.xd_prime}, {"Efd", p.Efd}});
        j["injections"].push_back({{"bus", b}, {"P", p.P}, {"Q", p.Q}});
    }
    j["lines"] = json::array();
    for (const Line& l : net.lines) {
        j["lines"].push_back({{"i", l.i}, {"j", l.j}, {"B", l.B}, {"G", l.G}});
    }
    return j.dump(2) + "\n";
}

NetworkModel network_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        fail(Errc::config, std::string("network file is not valid JSON: ") + e.what());
    }
    try {
        require(j.value("schema", 0) == 1, Errc::schema_mismatch,
                "network schema " + std::to_string(j.value("schema", 0)) + " is not supported (expected 1)");
        NetworkModel net;
        net.name = j.value("name", "");
        const auto& buses = j.at("buses");
        net.buses.resize(buses.size());
        for (std::size_t b = 0; b < buses.size(); ++b) {
            net.buses[b].kind = parse_kind(buses[b].value("kind", "generator"));
            if (buses[b].contains("B_self")) {
                net.buses[b].B_self = buses[b].at("B_self").get<double>();
            }
        }
        for (const auto& g : j.at("generators")) {
            BusParams& p = net.buses[bus_ref(g, net.buses.size(), "generator")];
            p.M = g.at("M").get<double>();
            p.D = g.at("D").get<double>();
            p.Tdo_prime = g.at("Tdo_prime").get<double>();
            p.xd = g.at("xd").get<double>();
            p.xd_prime = g.at("xd_prime").get<double>();
            p.Efd = g.at("Efd").get<double>();
        }
        for (const auto& inj : j.at("injections")) {
            BusParams& p = net.buses[bus_ref(inj, net.buses.size(), "injection")];
            p.P = inj.at("P").get<double>();
            p.Q = inj.value("Q", 0.0);
        }
        for (const auto& l : j.at("lines")) {
            net.lines.push_back(Line{l.at("i").get<Index>(), l.at("j").get<Index>(), l.at("B").get<double>(),
                                     l.value("G", 0.0)});
        }
        net.validate();
        return net;
    } catch (const json::exception& e) {
        fail(Errc::config, std::string("malformed network file: ") + e.what());
    }
}

NetworkModel load_network(const std::string& path) {
    std::ifstream in(path);
    require(in.good(), Errc::io_failure, "cannot open network file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return network_from_json(ss.str());
}

void save_network(const NetworkModel& net, const std::string& path) {
    std::ofstream out(path);
    require(out.good(), Errc::io_failure, "cannot write network file " + path);
    out << network_to_json(net);
}

} // namespace gridfno::powerdyn
