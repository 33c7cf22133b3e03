#ifndef HERMRT_TOOLS_CONFIG_HPP
#define HERMRT_TOOLS_CONFIG_HPP

#include <array>
#include <string>
#include <vector>

#include "hermrt/modes.hpp"
#include "json.hpp"

namespace hermrt::cli
{

using json = nlohmann::json;

/// Invalid configuration; the message starts with the offending key.
class ConfigError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

json read_json_file(const std::string& path);

/// Applies "a.b.c=value" overrides. The value is parsed as JSON when it
/// parses, otherwise taken as a string.
void apply_overrides(json& config, const std::vector<std::string>& overrides);

struct Tolerances
{
    double viscous  = 0.01;
    double thermal  = 0.02;
    double acoustic = 0.02;

    double for_mode(int mode) const;
};

struct SweepPoint
{
    json config;  // fully resolved, no sweep block
    std::vector<std::pair<std::string, json>> coords;
};

struct ModesConfig
{
    json resolved;  // every field present, defaults filled in
    std::vector<SweepPoint> points;
    Tolerances tolerance;
    std::string out_dir = ".";
    std::string prefix  = "modes";
    int jobs            = 0;
};

/// Validates keys and types, fills defaults and expands the sweep axes
/// (cartesian product, in the order the axes are listed in the schema).
ModesConfig parse_modes_config(const json& config);

/// A resolved point configuration as an experiment.
ModeExperiment experiment_from_json(const json& point);

struct SimConfig
{
    json resolved;
    ModeExperiment init;  // grid, set, base state and perturbation
    bool uniform = true;
    std::int64_t steps = 0;
    std::string diagnostics_path;
    std::int64_t diagnostics_every = 1;
    std::string checkpoint_path;
    std::int64_t checkpoint_every = 0;
    std::string resume;
};

SimConfig parse_sim_config(const json& config);

json to_json(const DispersionResult& r, const Tolerances& tol);
bool within_tolerance(const DispersionResult& r, const Tolerances& tol);

}  // namespace hermrt::cli

#endif  // HERMRT_TOOLS_CONFIG_HPP
