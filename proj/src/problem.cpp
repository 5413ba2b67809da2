#include <floquetcm/problem.hpp>

#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace fcm {

namespace {

using nlohmann::json;

void only_keys(const json& obj, const std::string& path, const std::set<std::string>& allowed) {
    if (!obj.is_object()) throw UsageError(path + ": expected an object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw UsageError(path + "/" + it.key() + ": unknown key");
}

double number_at(const json& obj, const std::string& key, const std::string& path) {
    const auto& v = obj.at(key);
    if (!v.is_number()) throw UsageError(path + "/" + key + ": expected a number");
    return v.get<double>();
}

Vec vector_at(const json& arr, const std::string& path) {
    if (!arr.is_array()) throw UsageError(path + ": expected an array of numbers");
    Vec v(arr.size());
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number()) throw UsageError(path + "/" + std::to_string(i) + ": expected a number");
        v(static_cast<int>(i)) = arr[i].get<double>();
    }
    return v;
}

PolynomialSpec parse_polynomial(const json& j) {
    const std::string path = "/polynomial";
    only_keys(j, path, {"dim", "terms"});
    if (!j.contains("dim") || !j["dim"].is_number_integer())
        throw UsageError(path + "/dim: expected an integer");
    PolynomialSpec p;
    p.dim = j["dim"].get<int>();
    if (p.dim < 1) throw UsageError(path + "/dim: must be positive");
    if (!j.contains("terms") || !j["terms"].is_array())
        throw UsageError(path + "/terms: expected an array");
    for (std::size_t k = 0; k < j["terms"].size(); ++k) {
        const auto& t = j["terms"][k];
        const std::string tp = path + "/terms/" + std::to_string(k);
        only_keys(t, tp, {"eq", "coef", "pow", "time", "harmonic"});
        Monomial m;
        if (!t.contains("eq") || !t["eq"].is_number_integer())
            throw UsageError(tp + "/eq: expected an integer");
        m.eq = t["eq"].get<int>();
        if (!t.contains("coef")) throw UsageError(tp + "/coef: missing");
        m.coef = number_at(t, "coef", tp);
        if (!t.contains("pow") || !t["pow"].is_array()) throw UsageError(tp + "/pow: expected an array");
        for (const auto& p : t["pow"]) {
            if (!p.is_number_integer()) throw UsageError(tp + "/pow: expected integers");
            m.pow.push_back(p.get<int>());
        }
        if (t.contains("time")) {
            std::string kind = t["time"].is_string() ? t["time"].get<std::string>() : "";
            if (kind == "sin") m.time = TimeFactor::Sin;
            else if (kind == "cos") m.time = TimeFactor::Cos;
            else if (kind == "none") m.time = TimeFactor::None;
            else throw UsageError(tp + "/time: expected \"sin\", \"cos\" or \"none\"");
        }
        if (t.contains("harmonic")) {
            if (!t["harmonic"].is_number_integer() || t["harmonic"].get<int>() < 1)
                throw UsageError(tp + "/harmonic: expected a positive integer");
            m.harmonic = t["harmonic"].get<int>();
        }
        p.terms.push_back(std::move(m));
    }
    return p;
}

}  // namespace

ProblemSpec parse_problem(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw UsageError(std::string("malformed JSON: ") + e.what());
    }
    only_keys(j, "", {"system", "params", "integrator", "analyses", "polynomial", "period", "cycle"});
    ProblemSpec spec;
    if (!j.contains("system") || !j["system"].is_string())
        throw UsageError("/system: expected a string");
    spec.system = j["system"].get<std::string>();

    if (j.contains("params")) {
        if (!j["params"].is_object()) throw UsageError("/params: expected an object");
        for (auto it = j["params"].begin(); it != j["params"].end(); ++it) {
            if (!it.value().is_number()) throw UsageError("/params/" + it.key() + ": expected a number");
            spec.params[it.key()] = it.value().get<double>();
        }
    }
    if (j.contains("integrator")) {
        const auto& in = j["integrator"];
        only_keys(in, "/integrator", {"method", "h", "atol", "rtol", "max_steps"});
        if (in.contains("method")) {
            if (!in["method"].is_string()) throw UsageError("/integrator/method: expected a string");
            spec.integrator.method = method_from_string(in["method"].get<std::string>());
        }
        if (in.contains("h")) spec.integrator.h = number_at(in, "h", "/integrator");
        if (in.contains("atol")) spec.integrator.atol = number_at(in, "atol", "/integrator");
        if (in.contains("rtol")) spec.integrator.rtol = number_at(in, "rtol", "/integrator");
        if (in.contains("max_steps")) {
            if (!in["max_steps"].is_number_integer())
                throw UsageError("/integrator/max_steps: expected an integer");
            spec.integrator.max_steps = in["max_steps"].get<std::int64_t>();
        }
        spec.integrator.validate();
    }
    if (j.contains("analyses")) {
        if (!j["analyses"].is_array()) throw UsageError("/analyses: expected an array");
        const auto& known = known_analyses();
        for (std::size_t k = 0; k < j["analyses"].size(); ++k) {
            const auto& a = j["analyses"][k];
            const std::string p = "/analyses/" + std::to_string(k);
            if (!a.is_string()) throw UsageError(p + ": expected a string");
            auto id = a.get<std::string>();
            if (std::find(known.begin(), known.end(), id) == known.end())
                throw UsageError(p + ": unknown analysis '" + id + "'");
            spec.analyses.push_back(id);
        }
    }
    if (j.contains("polynomial")) spec.polynomial = parse_polynomial(j["polynomial"]);
    if (j.contains("period")) {
        spec.period = number_at(j, "period", "");
        if (!(*spec.period > 0)) throw UsageError("/period: non-positive period");
    }
    if (j.contains("cycle")) {
        if (!j["cycle"].is_array()) throw UsageError("/cycle: expected an array of samples");
        for (std::size_t k = 0; k < j["cycle"].size(); ++k)
            spec.cycle.push_back(vector_at(j["cycle"][k], "/cycle/" + std::to_string(k)));
    }

    if (spec.system == "polynomial") {
        if (!spec.polynomial) throw UsageError("/polynomial: required for system polynomial");
        if (!spec.period) throw UsageError("/period: required for system polynomial");
        if (!spec.params.empty()) throw UsageError("/params: system polynomial takes no parameters");
    } else {
        if (spec.polynomial || spec.period || !spec.cycle.empty())
            throw UsageError("/" + std::string(spec.polynomial ? "polynomial" : spec.period ? "period" : "cycle") +
                             ": only allowed for system polynomial");
    }
    // Validates the system id and its parameters.
    build_system(spec);
    return spec;
}

ProblemSpec load_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read problem file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_problem(ss.str());
}

std::string serialize_problem(const ProblemSpec& spec) {
    json j;
    j["system"] = spec.system;
    j["params"] = json::object();
    for (const auto& [k, v] : spec.params) j["params"][k] = v;
    j["integrator"] = {{"method", to_string(spec.integrator.method)},
                       {"h", spec.integrator.h},
                       {"atol", spec.integrator.atol},
                       {"rtol", spec.integrator.rtol},
                       {"max_steps", spec.integrator.max_steps}};
    j["analyses"] = spec.analyses;
    if (spec.polynomial) {
        json terms = json::array();
        for (const auto& m : spec.polynomial->terms) {
            json t = {{"eq", m.eq}, {"coef", m.coef}, {"pow", m.pow}};
            if (m.time != TimeFactor::None) {
                t["time"] = m.time == TimeFactor::Sin ? "sin" : "cos";
                t["harmonic"] = m.harmonic;
            }
            terms.push_back(t);
        }
        j["polynomial"] = {{"dim", spec.polynomial->dim}, {"terms", terms}};
    }
    if (spec.period) j["period"] = *spec.period;
    if (!spec.cycle.empty()) {
        json c = json::array();
        for (const auto& v : spec.cycle) c.push_back(std::vector<double>(v.data(), v.data() + v.size()));
        j["cycle"] = c;
    }
    return j.dump();
}

System build_system(const ProblemSpec& spec) {
    if (spec.system != "polynomial") return builtin(spec.system, spec.params);
    PolynomialSpec poly = *spec.polynomial;
    poly.period = spec.period;
    System sys;
    sys.id = "polynomial";
    sys.field = polynomial_field(poly);
    if (spec.cycle.empty())
        sys.cycle = CycleOrbit::equilibrium(Vec::Zero(poly.dim), *spec.period);
    else {
        for (const auto& v : spec.cycle)
            if (v.size() != poly.dim) throw UsageError("/cycle: sample dimension does not match");
        sys.cycle = CycleOrbit::from_samples(spec.cycle, *spec.period);
    }
    return sys;
}

}  // namespace fcm
