#include "config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace hermrt::cli
{

namespace
{

const std::vector<std::string> kTauKeys = {"tau21", "tau22", "tau31", "tau32", "tau41", "tau42", "tau43"};

[[noreturn]] void fail(const std::string& key, const std::string& why) { throw ConfigError(key + ": " + why); }

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& path)
{
    if (!obj.is_object())
    {
        fail(path.empty() ? "config" : path, "expected an object");
    }
    for (const auto& [key, value] : obj.items())
    {
        if (!allowed.count(key))
        {
            fail(join(path, key), "unknown key");
        }
    }
}

double number(const json& obj, const std::string& key, const std::string& path, double dflt)
{
    if (!obj.contains(key) || obj[key].is_null())
    {
        return dflt;
    }
    if (!obj[key].is_number())
    {
        fail(join(path, key), "expected a number");
    }
    return obj[key].get<double>();
}

std::int64_t integer(const json& obj, const std::string& key, const std::string& path, std::int64_t dflt)
{
    if (!obj.contains(key) || obj[key].is_null())
    {
        return dflt;
    }
    const json& v = obj[key];
    if (v.is_number_integer())
    {
        return v.get<std::int64_t>();
    }
    if (v.is_number_float() && v.get<double>() == static_cast<double>(static_cast<std::int64_t>(v.get<double>())))
    {
        return static_cast<std::int64_t>(v.get<double>());
    }
    fail(join(path, key), "expected an integer");
}

std::string string(const json& obj, const std::string& key, const std::string& path, const std::string& dflt)
{
    if (!obj.contains(key) || obj[key].is_null())
    {
        return dflt;
    }
    if (!obj[key].is_string())
    {
        fail(join(path, key), "expected a string");
    }
    return obj[key].get<std::string>();
}

template <class T>
std::vector<T> array(const json& obj, const std::string& key, const std::string& path, std::vector<T> dflt,
                     std::size_t min_len, std::size_t max_len)
{
    if (!obj.contains(key) || obj[key].is_null())
    {
        return dflt;
    }
    const json& v = obj[key];
    if (!v.is_array() || v.size() < min_len || v.size() > max_len)
    {
        fail(join(path, key), "expected an array of " + std::to_string(min_len) + ".." + std::to_string(max_len) +
                                  " numbers");
    }
    std::vector<T> out;
    for (std::size_t i = 0; i < v.size(); ++i)
    {
        if (!v[i].is_number() || (std::is_integral_v<T> && !v[i].is_number_integer()))
        {
            fail(join(path, key) + "[" + std::to_string(i) + "]",
                 std::is_integral_v<T> ? "expected an integer" : "expected a number");
        }
        out.push_back(v[i].get<T>());
    }
    return out;
}

json resolve_tau(const json& user)
{
    json t = json::object();
    if (user.contains("tau"))
    {
        check_keys(user["tau"], std::set<std::string>(kTauKeys.begin(), kTauKeys.end()), "tau");
    }
    const json& u = user.contains("tau") ? user["tau"] : json::object();
    const double tau32 = number(u, "tau32", "tau", 1.0);
    t["tau21"]         = number(u, "tau21", "tau", 1.0);
    t["tau22"]         = number(u, "tau22", "tau", 1.0);
    t["tau32"]         = tau32;
    for (const char* k : {"tau31", "tau41", "tau42", "tau43"})
    {
        t[k] = number(u, k, "tau", tau32);
    }
    return t;
}

json resolve_gas(const json& user)
{
    json g = json::object();
    if (user.contains("gas"))
    {
        check_keys(user["gas"], {"S", "tau_g"}, "gas");
    }
    const json& u = user.contains("gas") ? user["gas"] : json::object();
    g["S"]        = integer(u, "S", "gas", 0);
    g["tau_g"]    = u.contains("tau_g") && !u["tau_g"].is_null() ? json(number(u, "tau_g", "gas", 1.0)) : json();
    return g;
}

// Fields shared by modes and sim: velocity set, grid, base state,
// perturbation, relaxation and gas.
json resolve_common(const json& user)
{
    json r;
    r["velocity_set"] = string(user, "velocity_set", "", "D2Q37");
    r["order"]        = integer(user, "order", "", 0);
    const auto grid   = array<int>(user, "grid", "", {100, 100}, 1, 3);
    r["grid"]         = grid;
    std::vector<int> wave(grid.size(), 0);
    wave[0]             = 1;
    r["wave_index"]     = array<int>(user, "wave_index", "", wave, grid.size(), grid.size());
    r["kind"]           = string(user, "kind", "", "shear");
    r["amplitude"]      = number(user, "amplitude", "", 1e-5);
    r["amplitudes"]     = user.contains("amplitudes") && !user["amplitudes"].is_null()
                              ? json(array<double>(user, "amplitudes", "", {}, 4, 4))
                              : json();
    r["base_flow"]      = array<double>(user, "base_flow", "", std::vector<double>(grid.size(), 0.0), grid.size(),
                                   grid.size());
    r["rho0"]           = number(user, "rho0", "", 1.0);
    r["theta0"]         = number(user, "theta0", "", 1.0);
    r["tau"]            = resolve_tau(user);
    r["gas"]            = resolve_gas(user);
    r["jobs"]           = integer(user, "jobs", "", 0);
    try
    {
        parse_mode_kind(r["kind"].get<std::string>());
    }
    catch (const std::invalid_argument& e)
    {
        fail("kind", e.what());
    }
    return r;
}

const std::set<std::string> kCommonKeys = {"velocity_set", "order",  "grid",      "wave_index", "kind",
                                           "amplitude",    "amplitudes", "base_flow", "rho0",       "theta0",
                                           "tau",          "gas",    "jobs"};

const std::vector<std::string> kSweepAxes = {"tau21", "tau22", "tau31", "tau32", "tau41",
                                             "tau42", "tau43", "S",     "tau_g"};

json resolve_modes_point(const json& user)
{
    json r        = resolve_common(user);
    r["steps"]    = integer(user, "steps", "", 0);
    r["discard"]  = integer(user, "discard", "", -1);
    r["max_steps"] = integer(user, "max_steps", "", 1000);
    json fit      = json::object();
    if (user.contains("fit"))
    {
        check_keys(user["fit"], {"stride", "condition_limit"}, "fit");
    }
    const json& uf         = user.contains("fit") ? user["fit"] : json::object();
    fit["stride"]          = integer(uf, "stride", "fit", 0);
    fit["condition_limit"] = number(uf, "condition_limit", "fit", 1e10);
    r["fit"]               = fit;
    return r;
}

// Checks the experiment and re-labels the library's message with the key.
void validate_point(const json& point)
{
    try
    {
        experiment_from_json(point).validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(e.what());
    }
}

}  // namespace

json read_json_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw ConfigError("config: cannot open " + path);
    }
    try
    {
        return json::parse(in, nullptr, true, true);
    }
    catch (const json::parse_error& e)
    {
        throw ConfigError("config: " + path + ": " + e.what());
    }
}

void apply_overrides(json& config, const std::vector<std::string>& overrides)
{
    for (const std::string& o : overrides)
    {
        const auto eq = o.find('=');
        if (eq == std::string::npos || eq == 0)
        {
            fail(o, "override must look like key.path=value");
        }
        const std::string path = o.substr(0, eq);
        const std::string text = o.substr(eq + 1);
        json value;
        try
        {
            value = json::parse(text);
        }
        catch (const json::parse_error&)
        {
            value = text;
        }
        json* node = &config;
        std::stringstream ss(path);
        std::string part;
        std::vector<std::string> parts;
        while (std::getline(ss, part, '.'))
        {
            if (part.empty())
            {
                fail(path, "empty path component");
            }
            parts.push_back(part);
        }
        for (std::size_t i = 0; i + 1 < parts.size(); ++i)
        {
            json& next = (*node)[parts[i]];
            if (next.is_null())
            {
                next = json::object();
            }
            if (!next.is_object())
            {
                fail(path, "'" + parts[i] + "' is not an object");
            }
            node = &next;
        }
        (*node)[parts.back()] = value;
    }
}

double Tolerances::for_mode(int mode) const
{
    switch (mode)
    {
        case kViscous: return viscous;
        case kThermal: return thermal;
        default: return acoustic;
    }
}

ModeExperiment experiment_from_json(const json& p)
{
    ModeExperiment e;
    e.velocity_set = p["velocity_set"].get<std::string>();
    e.order        = p["order"].get<int>();
    const auto grid = p["grid"].get<std::vector<int>>();
    const auto wave = p["wave_index"].get<std::vector<int>>();
    const auto flow = p["base_flow"].get<std::vector<double>>();
    e.dims          = {1, 1, 1};
    e.wave_index    = {0, 0, 0};
    for (std::size_t j = 0; j < grid.size(); ++j)
    {
        e.dims[j]       = grid[j];
        e.wave_index[j] = wave[j];
        e.base_flow[j]  = flow[j];
    }
    e.kind      = parse_mode_kind(p["kind"].get<std::string>());
    e.amplitude = p["amplitude"].get<double>();
    if (!p["amplitudes"].is_null())
    {
        const auto a = p["amplitudes"].get<std::vector<double>>();
        e.amplitudes = Amplitudes{a[0], a[1], a[2], a[3]};
    }
    e.rho0   = p["rho0"].get<double>();
    e.theta0 = p["theta0"].get<double>();
    const json& t = p["tau"];
    e.spec   = {t["tau21"].get<double>(), t["tau22"].get<double>(), t["tau31"].get<double>(),
                t["tau32"].get<double>(), t["tau41"].get<double>(), t["tau42"].get<double>(),
                t["tau43"].get<double>()};
    e.gas.S  = p["gas"]["S"].get<int>();
    e.gas.D  = static_cast<int>(grid.size());
    if (!p["gas"]["tau_g"].is_null())
    {
        e.gas.tau_g = p["gas"]["tau_g"].get<double>();
    }
    e.jobs = p["jobs"].get<int>();
    if (p.contains("fit"))
    {
        e.steps     = p["steps"].get<std::int64_t>();
        e.discard   = p["discard"].get<std::int64_t>();
        e.max_steps = p["max_steps"].get<std::int64_t>();
        e.fit.stride          = p["fit"]["stride"].get<int>();
        e.fit.condition_limit = p["fit"]["condition_limit"].get<double>();
    }
    return e;
}

ModesConfig parse_modes_config(const json& config)
{
    std::set<std::string> allowed = kCommonKeys;
    for (const char* k : {"steps", "discard", "max_steps", "fit", "tolerance", "sweep", "output"})
    {
        allowed.insert(k);
    }
    check_keys(config, allowed, "");

    ModesConfig mc;
    json user = config;
    for (const char* k : {"sweep", "tolerance", "output"})
    {
        if (user.contains(k) && user[k].is_null())
        {
            user.erase(k);
        }
    }
    json sweep = json::object();
    if (user.contains("sweep"))
    {
        sweep = user["sweep"];
        check_keys(sweep, std::set<std::string>(kSweepAxes.begin(), kSweepAxes.end()), "sweep");
        for (const auto& [axis, values] : sweep.items())
        {
            if (!values.is_array() || values.empty())
            {
                fail("sweep." + axis, "expected a nonempty array");
            }
            for (const auto& v : values)
            {
                if (!v.is_number())
                {
                    fail("sweep." + axis, "expected numbers");
                }
            }
        }
        user.erase("sweep");
    }

    json tol_json = user.contains("tolerance") ? user["tolerance"] : json(nullptr);
    user.erase("tolerance");
    if (tol_json.is_number())
    {
        const double t = tol_json.get<double>();
        mc.tolerance   = {t, t, t};
    }
    else if (tol_json.is_object())
    {
        check_keys(tol_json, {"viscous", "thermal", "acoustic"}, "tolerance");
        mc.tolerance.viscous  = number(tol_json, "viscous", "tolerance", mc.tolerance.viscous);
        mc.tolerance.thermal  = number(tol_json, "thermal", "tolerance", mc.tolerance.thermal);
        mc.tolerance.acoustic = number(tol_json, "acoustic", "tolerance", mc.tolerance.acoustic);
    }
    else if (!tol_json.is_null())
    {
        fail("tolerance", "expected a number or an object");
    }

    if (user.contains("output"))
    {
        check_keys(user["output"], {"dir", "prefix"}, "output");
        mc.out_dir = string(user["output"], "dir", "output", ".");
        mc.prefix  = string(user["output"], "prefix", "output", "modes");
        user.erase("output");
    }

    mc.resolved              = resolve_modes_point(user);
    mc.jobs                  = mc.resolved["jobs"].get<int>();
    mc.resolved["tolerance"] = {{"viscous", mc.tolerance.viscous},
                                {"thermal", mc.tolerance.thermal},
                                {"acoustic", mc.tolerance.acoustic}};
    mc.resolved["output"]    = {{"dir", mc.out_dir}, {"prefix", mc.prefix}};
    if (!sweep.empty())
    {
        mc.resolved["sweep"] = sweep;
    }

    // Cartesian product; the first listed schema axis varies slowest.
    std::vector<std::vector<std::pair<std::string, json>>> combos{{}};
    for (const std::string& axis : kSweepAxes)
    {
        if (!sweep.contains(axis))
        {
            continue;
        }
        std::vector<std::vector<std::pair<std::string, json>>> next;
        for (const auto& c : combos)
        {
            for (const auto& v : sweep[axis])
            {
                auto d = c;
                d.emplace_back(axis, v);
                next.push_back(std::move(d));
            }
        }
        combos = std::move(next);
    }
    for (const auto& c : combos)
    {
        // Sweep values go into the user document before defaults resolve, so
        // rates tied to tau32 follow a swept tau32.
        json u = user;
        for (const auto& [axis, v] : c)
        {
            if (axis == "S" || axis == "tau_g")
            {
                u["gas"][axis] = v;
            }
            else
            {
                u["tau"][axis] = v;
            }
        }
        SweepPoint sp{resolve_modes_point(u), c};
        validate_point(sp.config);
        mc.points.push_back(std::move(sp));
    }
    return mc;
}

SimConfig parse_sim_config(const json& config)
{
    std::set<std::string> allowed = kCommonKeys;
    for (const char* k : {"steps", "diagnostics", "checkpoint", "resume", "init"})
    {
        allowed.insert(k);
    }
    check_keys(config, allowed, "");
    SimConfig sc;
    json r           = resolve_common(config);
    const std::string init = string(config, "init", "", "uniform");
    if (init != "uniform" && init != "plane_wave")
    {
        fail("init", "expected 'uniform' or 'plane_wave'");
    }
    r["init"]        = init;
    sc.uniform       = init == "uniform";
    sc.steps         = integer(config, "steps", "", 100);
    if (sc.steps < 0)
    {
        fail("steps", "must be nonnegative");
    }
    r["steps"] = sc.steps;

    json diag = json::object();
    if (config.contains("diagnostics"))
    {
        check_keys(config["diagnostics"], {"path", "every"}, "diagnostics");
        diag = config["diagnostics"];
    }
    sc.diagnostics_path  = string(diag, "path", "diagnostics", "");
    sc.diagnostics_every = integer(diag, "every", "diagnostics", 1);
    if (sc.diagnostics_every < 1)
    {
        fail("diagnostics.every", "must be positive");
    }
    r["diagnostics"] = {{"path", sc.diagnostics_path}, {"every", sc.diagnostics_every}};

    json ck = json::object();
    if (config.contains("checkpoint"))
    {
        check_keys(config["checkpoint"], {"path", "every"}, "checkpoint");
        ck = config["checkpoint"];
    }
    sc.checkpoint_path  = string(ck, "path", "checkpoint", "");
    sc.checkpoint_every = integer(ck, "every", "checkpoint", 0);
    if (sc.checkpoint_every < 0)
    {
        fail("checkpoint.every", "must be nonnegative");
    }
    r["checkpoint"] = {{"path", sc.checkpoint_path}, {"every", sc.checkpoint_every}};
    sc.resume       = string(config, "resume", "", "");
    r["resume"]     = sc.resume;

    sc.init = experiment_from_json(r);
    if (sc.uniform)
    {
        sc.init.amplitudes = Amplitudes{0.0, 0.0, 0.0, 0.0};
    }
    try
    {
        sc.init.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw ConfigError(e.what());
    }
    sc.resolved = r;
    return sc;
}

namespace
{

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

}  // namespace

bool within_tolerance(const DispersionResult& r, const Tolerances& tol)
{
    if (r.ill_conditioned)
    {
        return false;
    }
    for (int m = 0; m < kModeCount; ++m)
    {
        const auto M = static_cast<std::size_t>(m);
        if (r.measured_mask[M] && !(r.rel_error[M] <= tol.for_mode(m)))
        {
            return false;
        }
    }
    return true;
}

json to_json(const DispersionResult& r, const Tolerances& tol)
{
    json out;
    out["transport"] = {{"nu", r.transport.nu},
                        {"nu_b", r.transport.nu_b},
                        {"kappa", r.transport.kappa},
                        {"gamma", r.transport.gamma},
                        {"negative", r.transport.negative}};
    out["k"]               = r.k;
    out["peclet"]          = r.peclet;
    out["steps"]           = r.steps;
    out["discard"]         = r.discard;
    out["fit_residual"]    = r.fit_residual;
    out["ill_conditioned"] = r.ill_conditioned;
    json modes             = json::object();
    for (int m = 0; m < kModeCount; ++m)
    {
        const auto M = static_cast<std::size_t>(m);
        if (!r.measured_mask[M])
        {
            continue;
        }
        modes[mode_name(m)] = {{"measured", complex_json(r.measured[M])},
                               {"theoretical", complex_json(r.theoretical[M])},
                               {"rel_error", r.rel_error[M]},
                               {"rel_error_re", r.rel_error_re[M]},
                               {"rel_error_im", r.rel_error_im[M]},
                               {"tolerance", tol.for_mode(m)}};
    }
    out["modes"]            = modes;
    out["within_tolerance"] = within_tolerance(r, tol);
    return out;
}

}  // namespace hermrt::cli
