#include "weakpointer/circuit_json.hpp"

#include <fstream>

namespace weakpointer {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& what) { throw ConfigError(what); }

const json& want(const json& j, const char* key, const std::string& where) {
    if (!j.is_object()) fail(where + " must be an object");
    auto it = j.find(key);
    if (it == j.end()) fail(where + " is missing \"" + key + "\"");
    return *it;
}

std::string want_string(const json& j, const char* key, const std::string& where) {
    const json& v = want(j, key, where);
    if (!v.is_string()) fail(where + " \"" + std::string(key) + "\" must be a string");
    return v.get<std::string>();
}

int want_int(const json& j, const char* key, const std::string& where) {
    const json& v = want(j, key, where);
    if (!v.is_number_integer()) fail(where + " \"" + std::string(key) + "\" must be an integer");
    return v.get<int>();
}

double want_number(const json& j, const char* key, const std::string& where) {
    const json& v = want(j, key, where);
    if (!v.is_number()) fail(where + " \"" + std::string(key) + "\" must be a number");
    return v.get<double>();
}

cplx parse_complex(const json& v, const std::string& where) {
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number())
        fail(where + " must be a [re, im] pair");
    return {v[0].get<double>(), v[1].get<double>()};
}

}  // namespace

CircuitSpec circuit_spec_from_json(const json& j) {
    CircuitSpec spec;

    const json& stages = want(j, "stages", "circuit");
    if (!stages.is_array() || stages.empty()) fail("circuit \"stages\" must be a non-empty array");
    for (const auto& s : stages) {
        if (!s.is_string()) fail("circuit \"stages\" entries must be strings");
        spec.stages.push_back(s.get<std::string>());
    }

    const json& paths = want(j, "paths", "circuit");
    if (!paths.is_array()) fail("circuit \"paths\" must be an array");
    for (const auto& p : paths)
        spec.paths.push_back({want_string(p, "name", "path"),
                              want_int(p, "first_stage", "path"),
                              want_int(p, "last_stage", "path")});

    const json& couplers = want(j, "couplers", "circuit");
    if (!couplers.is_array()) fail("circuit \"couplers\" must be an array");
    for (const auto& cj : couplers) {
        Coupler cp;
        cp.stage = want_int(cj, "stage", "coupler");
        const json& in = want(cj, "in", "coupler");
        const json& out = want(cj, "out", "coupler");
        if (!in.is_array() || in.size() != 2 || !in[0].is_string() || !in[1].is_string())
            fail("coupler \"in\" must be a pair of path names");
        if (!out.is_array() || out.size() != 2 || !out[0].is_string() || !out[1].is_string())
            fail("coupler \"out\" must be a pair of path names");
        cp.in[0] = in[0].get<std::string>();
        cp.in[1] = in[1].get<std::string>();
        cp.out[0] = out[0].get<std::string>();
        cp.out[1] = out[1].get<std::string>();
        const json& m = want(cj, "matrix", "coupler");
        if (!m.is_array() || m.size() != 4)
            fail("coupler \"matrix\" must list 4 row-major [re, im] entries");
        for (int e = 0; e < 4; ++e)
            cp.matrix(e / 2, e % 2) = parse_complex(m[e], "coupler matrix entry");
        spec.couplers.push_back(cp);
    }

    if (j.contains("passthroughs")) {
        const json& pts = j.at("passthroughs");
        if (!pts.is_array()) fail("circuit \"passthroughs\" must be an array");
        for (const auto& pt : pts)
            spec.passthroughs.push_back({want_int(pt, "stage", "passthrough"),
                                         want_string(pt, "from", "passthrough"),
                                         want_string(pt, "to", "passthrough")});
    }

    spec.source = want_string(j, "source", "circuit");

    const json& terms = want(j, "terminals", "circuit");
    if (!terms.is_array() || terms.empty())
        fail("circuit \"terminals\" must be a non-empty array");
    for (const auto& t : terms) {
        if (!t.is_string()) fail("circuit \"terminals\" entries must be strings");
        spec.terminals.push_back(t.get<std::string>());
    }

    return spec;
}

nlohmann::ordered_json circuit_spec_to_json(const CircuitSpec& spec) {
    nlohmann::ordered_json j;
    j["stages"] = spec.stages;
    j["paths"] = nlohmann::ordered_json::array();
    for (const auto& p : spec.paths)
        j["paths"].push_back({{"name", p.name},
                              {"first_stage", p.first_stage},
                              {"last_stage", p.last_stage}});
    j["couplers"] = nlohmann::ordered_json::array();
    for (const auto& cp : spec.couplers) {
        nlohmann::ordered_json m = nlohmann::ordered_json::array();
        for (int e = 0; e < 4; ++e) {
            const cplx v = cp.matrix(e / 2, e % 2);
            m.push_back({v.real(), v.imag()});
        }
        j["couplers"].push_back({{"stage", cp.stage},
                                 {"in", {cp.in[0], cp.in[1]}},
                                 {"out", {cp.out[0], cp.out[1]}},
                                 {"matrix", m}});
    }
    if (!spec.passthroughs.empty()) {
        j["passthroughs"] = nlohmann::ordered_json::array();
        for (const auto& pt : spec.passthroughs)
            j["passthroughs"].push_back(
                {{"stage", pt.stage}, {"from", pt.from}, {"to", pt.to}});
    }
    j["source"] = spec.source;
    j["terminals"] = spec.terminals;
    return j;
}

Circuit circuit_from_json(const json& j) { return build_circuit(circuit_spec_from_json(j)); }

Circuit load_circuit_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open circuit file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("circuit file '" + path + "': " + e.what());
    }
    return circuit_from_json(j);
}

std::vector<MeterDevice> devices_from_json(const json& j) {
    const json& devs = want(j, "devices", "devices file");
    if (!devs.is_array()) fail("\"devices\" must be an array");
    std::vector<MeterDevice> out;
    for (const auto& d : devs) {
        MeterDevice md;
        md.id = want_string(d, "id", "device");
        md.path = want_string(d, "path", "device");
        md.stage = want_int(d, "stage", "device");
        md.delta = want_number(d, "delta", "device");
        md.sigma = d.contains("sigma") ? want_number(d, "sigma", "device") : 1.0;
        out.push_back(std::move(md));
    }
    return out;
}

std::vector<MeterDevice> load_devices_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open devices file '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("devices file '" + path + "': " + e.what());
    }
    return devices_from_json(j);
}

}  // namespace weakpointer
