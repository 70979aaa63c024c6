#pragma once

#include "htbem/group.hpp"

#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace htbem {

// Plain-text key-value configuration with [section] headers; keys are stored
// flattened as "section.key".  Comments start with # or ;.

struct ConfigMap {
    std::map<std::string, std::string> kv;

    bool has(const std::string& key) const;
    std::string get(const std::string& key, const std::string& fallback = "") const;
    double get_double(const std::string& key, double fallback) const;
    int get_int(const std::string& key, int fallback) const;
    // Whitespace-separated list of reals.
    std::vector<double> get_list(const std::string& key) const;
};

ConfigMap parse_config_text(const std::string& text);
ConfigMap parse_config_file(const std::string& path);

// FNV-1a over the sorted normalized key=value pairs; stable across runs.
uint64_t config_hash(const ConfigMap& cfg);

struct ExperimentConfig {
    std::string group = "heisenberg1"; // name or spec-file path
    double mesh_R = 1.0;
    double mesh_h = 0.05;
    std::vector<double> mesh_center;   // empty = origin
    std::string density = "bump";
    double density_support = 0.5;
    std::string solver_mode = "direct"; // direct | homotopy
    double solver_tol = 1e-10;
    std::vector<std::vector<double>> probes; // explicit interior points
    std::string out_dir = ".";
    uint64_t seed = 1;
    int threads = 0;                    // 0 = library default
    bool allow_invalid = false;

    // Throws std::invalid_argument on violated invariants
    // (tol in (0, 1e-2], h < R/4).
    void validate() const;
};

ExperimentConfig load_experiment_config(const ConfigMap& cfg);

// Resolve a group name ("heisenberg1", "heisenberg2", "quaternionic") or a
// spec-file path into a validated GroupSpec with calibrated c_q.
GroupSpec resolve_group(const std::string& name_or_path, bool allow_invalid = false);

} // namespace htbem
