#include "htbem/config.hpp"

#include "htbem/kernels.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace htbem {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

} // namespace

bool ConfigMap::has(const std::string& key) const { return kv.count(key) != 0; }

std::string ConfigMap::get(const std::string& key, const std::string& fallback) const {
    auto it = kv.find(key);
    return it == kv.end() ? fallback : it->second;
}

double ConfigMap::get_double(const std::string& key, double fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t pos = 0;
        double v = std::stod(it->second, &pos);
        if (trim(it->second.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: key '" + key + "' is not a real number: '" +
                                it->second + "'");
}

int ConfigMap::get_int(const std::string& key, int fallback) const {
    auto it = kv.find(key);
    if (it == kv.end()) return fallback;
    try {
        std::size_t pos = 0;
        int v = std::stoi(it->second, &pos);
        if (trim(it->second.substr(pos)).empty()) return v;
    } catch (const std::exception&) {
    }
    throw std::invalid_argument("config: key '" + key + "' is not an integer: '" +
                                it->second + "'");
}

std::vector<double> ConfigMap::get_list(const std::string& key) const {
    std::vector<double> out;
    auto it = kv.find(key);
    if (it == kv.end()) return out;
    std::istringstream in(it->second);
    double v;
    while (in >> v) out.push_back(v);
    if (!in.eof())
        throw std::invalid_argument("config: key '" + key +
                                    "' is not a list of reals: '" + it->second + "'");
    return out;
}

ConfigMap parse_config_text(const std::string& text) {
    ConfigMap cfg;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::size_t cut = line.find_first_of("#;");
        if (cut != std::string::npos) line = line.substr(0, cut);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(lineno) +
                                            ": unterminated section header");
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": expected key = value");
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(lineno) +
                                        ": empty key");
        if (!section.empty()) key = section + "." + key;
        cfg.kv[key] = val;
    }
    return cfg;
}

ConfigMap parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

uint64_t config_hash(const ConfigMap& cfg) {
    // std::map iterates in sorted key order already.
    uint64_t h = 1469598103934665603ull;
    auto mix = [&](const std::string& s) {
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ull;
        }
    };
    for (const auto& [k, v] : cfg.kv) {
        mix(k);
        mix("=");
        mix(v);
        mix("\n");
    }
    return h;
}

ExperimentConfig load_experiment_config(const ConfigMap& cfg) {
    ExperimentConfig ec;
    ec.group = cfg.get("group.name", ec.group);
    ec.mesh_R = cfg.get_double("mesh.radius", ec.mesh_R);
    ec.mesh_h = cfg.get_double("mesh.h", ec.mesh_h);
    ec.mesh_center = cfg.get_list("mesh.center");
    ec.density = cfg.get("density.name", ec.density);
    ec.density_support = cfg.get_double("density.support", ec.density_support);
    ec.solver_mode = cfg.get("solver.mode", ec.solver_mode);
    ec.solver_tol = cfg.get_double("solver.tol", ec.solver_tol);
    ec.out_dir = cfg.get("output.dir", ec.out_dir);
    ec.seed = static_cast<uint64_t>(cfg.get_int("run.seed", static_cast<int>(ec.seed)));
    ec.threads = cfg.get_int("run.threads", ec.threads);
    ec.allow_invalid = cfg.get_int("run.allow_invalid", 0) != 0;

    // Probes are rows "x1 x2 ... t1 ..." under probes.p0, probes.p1, ...
    for (int i = 0;; ++i) {
        std::string key = "probes.p" + std::to_string(i);
        if (!cfg.has(key)) break;
        ec.probes.push_back(cfg.get_list(key));
    }
    ec.validate();
    return ec;
}

void ExperimentConfig::validate() const {
    if (!(solver_tol > 0.0) || solver_tol > 1e-2)
        throw std::invalid_argument("config: solver.tol must lie in (0, 1e-2]");
    if (!(mesh_h > 0.0) || !(mesh_h < mesh_R / 4.0))
        throw std::invalid_argument("config: need 0 < mesh.h < mesh.radius/4");
    if (!(density_support > 0.0))
        throw std::invalid_argument("config: density.support must be positive");
    if (solver_mode != "direct" && solver_mode != "homotopy" &&
        solver_mode != "automatic")
        throw std::invalid_argument("config: solver.mode must be direct, homotopy, or "
                                    "automatic");
    if (threads < 0) throw std::invalid_argument("config: run.threads must be >= 0");
}

GroupSpec resolve_group(const std::string& name_or_path, bool allow_invalid) {
    GroupSpec spec;
    if (name_or_path == "heisenberg1") {
        spec = make_prototype(GroupKind::heisenberg, 1);
    } else if (name_or_path == "heisenberg2") {
        spec = make_prototype(GroupKind::heisenberg, 2);
    } else if (name_or_path == "quaternionic") {
        spec = make_prototype(GroupKind::quaternionic);
    } else {
        spec = load_group_spec(name_or_path, allow_invalid);
    }
    if (!spec.has_c_q() && validate_h_type(spec).passed) spec.c_q = calibrate_cq(spec);
    return spec;
}

} // namespace htbem
