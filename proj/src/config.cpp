#include "spme/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace spme {

const std::vector<std::string>& known_suites() {
    static const std::vector<std::string> s = {
        "simulate", "couple",    "harnack",   "girsanov",
        "feller",   "ergodics",  "constants", "check-conditions",
    };
    return s;
}

namespace {

std::string trim(const std::string& s) {
    const auto a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    const auto b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

struct RawConfig {
    // section.key -> raw value text
    std::vector<std::pair<std::string, std::string>> entries;

    const std::string* find(const std::string& key) const {
        for (const auto& [k, v] : entries)
            if (k == key) return &v;
        return nullptr;
    }
};

RawConfig tokenize(const std::string& text) {
    RawConfig raw;
    std::istringstream is(text);
    std::string line, section;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key or value");
        raw.entries.emplace_back(section.empty() ? key : section + "." + key, val);
    }
    return raw;
}

std::string unquote(const std::string& v, const std::string& key) {
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"')
        return v.substr(1, v.size() - 2);
    throw std::invalid_argument("config: " + key + " must be a quoted string");
}

double as_number(const std::string& v, const std::string& key) {
    std::size_t pos = 0;
    double out;
    try {
        out = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("config: " + key + " is not a number");
    }
    if (pos != v.size())
        throw std::invalid_argument("config: " + key + " has trailing characters");
    return out;
}

bool as_bool(const std::string& v, const std::string& key) {
    if (v == "true") return true;
    if (v == "false") return false;
    throw std::invalid_argument("config: " + key + " must be true or false");
}

std::vector<std::string> as_string_array(const std::string& v, const std::string& key) {
    if (v.size() < 2 || v.front() != '[' || v.back() != ']')
        throw std::invalid_argument("config: " + key + " must be an array");
    std::vector<std::string> out;
    std::string inner = v.substr(1, v.size() - 2);
    std::stringstream ss(inner);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        cell = trim(cell);
        if (cell.empty()) continue;
        out.push_back(unquote(cell, key));
    }
    return out;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    const RawConfig raw = tokenize(text);
    ExperimentConfig cfg;
    cfg.suites.clear();

    auto num = [&](const char* key, double& dst) {
        if (const auto* v = raw.find(key)) dst = as_number(*v, key);
    };
    auto get_int = [&](const char* key, int& dst) {
        if (const auto* v = raw.find(key)) {
            const double d = as_number(*v, key);
            if (d != std::floor(d))
                throw std::invalid_argument(std::string("config: ") + key + " must be an integer");
            dst = static_cast<int>(d);
        }
    };

    if (const auto* v = raw.find("basis.kind")) cfg.kind = basis_kind_from_string(unquote(*v, "basis.kind"));
    get_int("basis.n_modes", cfg.n_modes);
    get_int("basis.n_quad", cfg.n_quad);
    if (const auto* v = raw.find("basis.map")) {
        const std::string m = unquote(*v, "basis.map");
        double expo = 1.0, shift = 0.0;
        num("basis.map_exponent", expo);
        num("basis.map_shift", shift);
        if (m == "identity")
            cfg.map = SpectralMap::identity();
        else if (m == "power")
            cfg.map = SpectralMap::power(expo);
        else if (m == "shifted_power")
            cfg.map = SpectralMap::shifted_power(shift, expo);
        else
            throw std::invalid_argument("config: basis.map must be identity, power or shifted_power");
    }

    num("model.r", cfg.r);
    num("model.theta", cfg.theta);
    num("model.delta", cfg.delta);
    num("model.xi", cfg.xi);
    num("model.gamma", cfg.gamma);
    num("model.q_value", cfg.q_value);

    num("run.horizon", cfg.horizon);
    num("run.dt", cfg.dt);
    if (const auto* v = raw.find("run.seed")) {
        try {
            cfg.seed = std::stoull(*v);
        } catch (const std::exception&) {
            throw std::invalid_argument("config: run.seed must be a nonnegative integer");
        }
    }
    get_int("run.n_paths", cfg.n_paths);
    if (const auto* v = raw.find("run.taming")) cfg.taming = as_bool(*v, "run.taming");
    num("run.tol_coal", cfg.tol_coal);
    num("run.beta_safety", cfg.beta_safety);

    if (const auto* v = raw.find("suites.run")) cfg.suites = as_string_array(*v, "suites.run");
    if (const auto* v = raw.find("output.dir")) cfg.out_dir = unquote(*v, "output.dir");
    if (const auto* v = raw.find("name")) cfg.name = unquote(*v, "name");

    cfg.validate();
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::invalid_argument("config: cannot open " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return parse_config_text(os.str());
}

void ExperimentConfig::validate() const {
    if (n_modes < 1) throw std::invalid_argument("config: basis.n_modes must be >= 1");
    if (n_quad != 0 && n_quad < 2 * n_modes)
        throw std::invalid_argument("config: basis.n_quad below oversampling floor");
    if (kind == BasisKind::hermite_ou && map.form == SpectralMap::Form::identity)
        throw std::invalid_argument(
            "config: hermite_ou needs a shifted_power map (lambda_1 would be 0)");
    if (suites.empty()) throw std::invalid_argument("config: suites must be nonempty");
    for (const auto& s : suites)
        if (std::find(known_suites().begin(), known_suites().end(), s) == known_suites().end())
            throw std::invalid_argument("config: unknown suite '" + s + "'");
    if (n_paths < 1) throw std::invalid_argument("config: run.n_paths must be >= 1");
    make_spec().validate(n_modes);
    make_run().validate();
}

EigenBasis ExperimentConfig::make_basis() const {
    return n_quad == 0 ? build_basis(kind, n_modes, map) : build_basis(kind, n_modes, n_quad, map);
}

ModelSpec ExperimentConfig::make_spec() const {
    ModelSpec spec;
    spec.r = r;
    spec.theta = theta;
    spec.delta = PiecewiseConstant::constant(delta);
    spec.xi = PiecewiseConstant::constant(xi);
    spec.gamma = PiecewiseConstant::constant(gamma);
    spec.sigma_growth = gamma;
    spec.q_seq = constant_q(n_modes, q_value);
    return spec;
}

PathConfig ExperimentConfig::make_run() const {
    PathConfig run;
    run.horizon = horizon;
    run.dt = dt;
    run.seed = seed;
    run.taming = taming;
    run.tol_coal = tol_coal;
    run.beta_safety = beta_safety;
    return run;
}

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
    char buf[40];
    auto f = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::vector<std::pair<std::string, std::string>> out;
    out.emplace_back("name", name);
    out.emplace_back("basis.kind", to_string(kind));
    out.emplace_back("basis.n_modes", std::to_string(n_modes));
    out.emplace_back("basis.n_quad", std::to_string(n_quad == 0 ? default_quad_size(kind, n_modes) : n_quad));
    const char* map_name = map.form == SpectralMap::Form::identity ? "identity"
                           : map.form == SpectralMap::Form::power  ? "power"
                                                                   : "shifted_power";
    out.emplace_back("basis.map", map_name);
    out.emplace_back("basis.map_exponent", f(map.exponent));
    out.emplace_back("basis.map_shift", f(map.shift));
    out.emplace_back("model.r", f(r));
    out.emplace_back("model.theta", f(theta));
    out.emplace_back("model.delta", f(delta));
    out.emplace_back("model.xi", f(xi));
    out.emplace_back("model.gamma", f(gamma));
    out.emplace_back("model.q_value", f(q_value));
    out.emplace_back("run.horizon", f(horizon));
    out.emplace_back("run.dt", f(dt));
    out.emplace_back("run.seed", std::to_string(seed));
    out.emplace_back("run.n_paths", std::to_string(n_paths));
    out.emplace_back("run.taming", taming ? "true" : "false");
    out.emplace_back("run.tol_coal", f(tol_coal));
    out.emplace_back("run.beta_safety", f(beta_safety));
    std::string joined;
    for (const auto& s : suites) joined += (joined.empty() ? "" : ";") + s;
    out.emplace_back("suites", joined);
    return out;
}

ExperimentConfig porous_default() {
    ExperimentConfig cfg;
    cfg.name = "porous-default";
    cfg.suites = known_suites();
    return cfg;
}

ExperimentConfig hermite_ou_config() {
    ExperimentConfig cfg;
    cfg.name = "hermite-ou";
    cfg.kind = BasisKind::hermite_ou;
    cfg.map = SpectralMap::shifted_power(1.0, 2.0);
    cfg.n_modes = 16;
    cfg.suites = {"constants", "check-conditions", "simulate", "couple"};
    return cfg;
}

ExperimentConfig linear_oracle() {
    ExperimentConfig cfg;
    cfg.name = "linear-oracle";
    cfg.r = 1.0;
    cfg.theta = 0.0;
    cfg.n_modes = 4;
    cfg.taming = false;
    cfg.suites = {"constants", "check-conditions", "simulate", "couple", "girsanov", "ergodics"};
    return cfg;
}

} // namespace spme
