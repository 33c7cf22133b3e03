#include "commands.hpp"

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "config.hpp"
#include "hermrt/error.hpp"
#include "hermrt/solver.hpp"

namespace hermrt::cli
{

namespace
{

std::string point_name(const std::string& prefix, std::size_t i)
{
    std::ostringstream s;
    s << prefix << '_' << std::setw(3) << std::setfill('0') << i;
    return s.str();
}

void write_json(const std::filesystem::path& path, const json& j)
{
    std::ofstream out(path);
    if (!out)
    {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << std::setw(2) << j << '\n';
}

std::string coords_label(const SweepPoint& p)
{
    std::ostringstream s;
    for (const auto& [axis, v] : p.coords)
    {
        s << axis << '=' << v.dump() << ' ';
    }
    return s.str();
}

}  // namespace

int cmd_modes(const ModesOptions& opt, std::ostream& out, std::ostream& err)
{
    ModesConfig mc;
    try
    {
        json config = read_json_file(opt.config_path);
        apply_overrides(config, opt.overrides);
        mc = parse_modes_config(config);
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kError;
    }

    const std::filesystem::path dir(mc.out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec)
    {
        err << "error: output.dir: " << ec.message() << '\n';
        return kError;
    }

    const std::size_t n = mc.points.size();
    int workers         = opt.jobs > 0 ? opt.jobs : (mc.jobs > 0 ? mc.jobs : default_jobs());
    workers             = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), n));
    std::vector<json> rows(n);
    std::vector<std::string> errors(n);
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;

    auto worker = [&] {
        for (std::size_t i = next++; i < n; i = next++)
        {
            const SweepPoint& p = mc.points[i];
            const std::string name = point_name(mc.prefix, i);
            try
            {
                ModeExperiment e = experiment_from_json(p.config);
                // Several sweep workers share the machine; one solver thread each.
                if (workers > 1)
                {
                    e.jobs = 1;
                }
                const DispersionResult r = run_mode_experiment(e);
                {
                    std::ofstream csv(dir / (name + ".csv"));
                    write_amplitude_csv(csv, r);
                    if (!csv)
                    {
                        throw std::runtime_error("cannot write " + (dir / (name + ".csv")).string());
                    }
                }
                json summary      = to_json(r, mc.tolerance);
                summary["config"] = p.config;
                json sweep_coords = json::object();
                for (const auto& [axis, v] : p.coords)
                {
                    sweep_coords[axis] = v;
                }
                summary["sweep"] = sweep_coords;
                write_json(dir / (name + ".json"), summary);
                summary.erase("config");
                summary["index"] = i;
                summary["name"]  = name;
                rows[i]          = summary;
                if (!opt.quiet)
                {
                    std::lock_guard lock(log_mutex);
                    out << name << ' ' << coords_label(p);
                    for (const auto& [mode, v] : summary["modes"].items())
                    {
                        out << mode << "_err=" << std::setprecision(4) << v["rel_error"].get<double>() << ' ';
                    }
                    out << (summary["within_tolerance"].get<bool>() ? "ok" : "FAIL") << '\n';
                }
            }
            catch (const std::exception& e)
            {
                errors[i] = e.what();
                std::lock_guard lock(log_mutex);
                err << "error: " << name << ' ' << coords_label(p) << ": " << e.what() << '\n';
            }
        }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w)
    {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool)
    {
        t.join();
    }

    bool any_error = false;
    bool all_pass  = true;
    json table     = json::array();
    for (std::size_t i = 0; i < n; ++i)
    {
        if (!errors[i].empty())
        {
            any_error = true;
            table.push_back({{"index", i}, {"name", point_name(mc.prefix, i)}, {"error", errors[i]}});
            continue;
        }
        all_pass = all_pass && rows[i]["within_tolerance"].get<bool>();
        table.push_back(rows[i]);
    }
    json summary = {{"config", mc.resolved}, {"points", table}};
    try
    {
        write_json(dir / (mc.prefix + "_summary.json"), summary);
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kError;
    }
    if (any_error)
    {
        return kError;
    }
    return all_pass ? kOk : kTolerance;
}

int cmd_velset_list(std::ostream& out)
{
    out << std::left << std::setw(8) << "name" << std::setw(4) << "D" << std::setw(5) << "Q" << std::setw(8)
        << "degree" << "r\n";
    for (const std::string& name : builtin_velocity_set_names())
    {
        const auto set = builtin_velocity_set(name);
        out << std::setw(8) << name << std::setw(4) << set->dim() << std::setw(5) << set->count() << std::setw(8)
            << set->degree() << std::setprecision(17) << set->scale() << '\n';
    }
    return kOk;
}

int cmd_velset_validate(const std::string& name, int degree, double tol, std::ostream& out, std::ostream& err)
{
    VelocitySetPtr set;
    try
    {
        set = load_velocity_set(name);
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kError;
    }
    const ValidationReport rep = validate(*set, degree, tol);
    out << set->name() << ": D=" << set->dim() << " Q=" << set->count() << " degree=" << rep.degree
        << " max_defect=" << std::setprecision(3) << rep.max_defect << (rep.passed ? " PASS" : " FAIL") << '\n';
    if (!rep.passed && rep.first_failure)
    {
        out << "first failing monomial: exponents (";
        for (std::size_t j = 0; j < rep.first_failure->size(); ++j)
        {
            out << (j ? "," : "") << (*rep.first_failure)[j];
        }
        out << ") defect " << rep.first_failure_defect << '\n';
    }
    return rep.passed ? kOk : kTolerance;
}

int cmd_velset_derive(const DeriveOptions& opt, std::ostream& out, std::ostream& err)
{
    try
    {
        std::vector<std::vector<LatticeVector>> groups;
        for (const std::string& g : opt.groups)
        {
            LatticeVector rep{0, 0, 0};
            std::stringstream ss(g);
            std::string tok;
            int j = 0;
            while (std::getline(ss, tok, ','))
            {
                if (j >= opt.dim)
                {
                    throw std::invalid_argument("group '" + g + "' has more components than --dim");
                }
                rep[static_cast<std::size_t>(j++)] = std::stoi(tok);
            }
            if (j != opt.dim)
            {
                throw std::invalid_argument("group '" + g + "' needs " + std::to_string(opt.dim) + " components");
            }
            groups.push_back(symmetry_orbit(rep, opt.dim));
        }
        const VelocitySet set = make_velocity_set(opt.name, groups, opt.dim, opt.degree);
        const ValidationReport rep = validate(set);
        if (opt.output.empty())
        {
            write_velocity_set(out, set);
        }
        else
        {
            std::ofstream f(opt.output);
            write_velocity_set(f, set);
            if (!f)
            {
                throw std::runtime_error("cannot write " + opt.output);
            }
            out << opt.output << ": Q=" << set.count() << " r=" << std::setprecision(17) << set.scale()
                << " max_defect=" << std::setprecision(3) << rep.max_defect << '\n';
        }
        return rep.passed ? kOk : kTolerance;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kError;
    }
}

int cmd_sim(const SimOptions& opt, std::ostream& out, std::ostream& err)
{
    try
    {
        json config = read_json_file(opt.config_path);
        apply_overrides(config, opt.overrides);
        const SimConfig sc = parse_sim_config(config);
        const ModeExperiment& e = sc.init;
        auto set = load_velocity_set(e.velocity_set);
        int order = e.order > 0 ? e.order : set->max_order();

        LatticeState state = [&] {
            if (sc.resume.empty())
            {
                return init_plane_wave(e, set);
            }
            Checkpoint ck = read_checkpoint_file(sc.resume, set);
            if (ck.state.dims() != e.dims || ck.state.S() != e.gas.S || ck.order != order)
            {
                throw std::runtime_error("resume: checkpoint does not match the configuration");
            }
            return std::move(ck.state);
        }();

        Solver solver(std::move(state), e.spec, e.gas, order, opt.jobs > 0 ? opt.jobs : e.jobs);
        const AmplitudeProbe probe(e, solver.state());

        std::ofstream diag;
        if (!sc.diagnostics_path.empty())
        {
            // A resumed run appends to the existing table.
            diag.open(sc.diagnostics_path, sc.resume.empty() ? std::ios::out : std::ios::app);
            if (!diag)
            {
                throw std::runtime_error("cannot write " + sc.diagnostics_path);
            }
            diag << std::setprecision(17);
            if (sc.resume.empty())
            {
                diag << "step,mass,momentum_x,momentum_y,momentum_z,energy,internal_energy,"
                        "rho_amp,upar_amp,uperp_amp,theta_amp\n";
            }
        }
        auto record = [&] {
            if (!diag.is_open())
            {
                return;
            }
            const LatticeState& s = solver.state();
            const Totals t        = totals(s);
            const auto a          = probe(s);
            diag << s.time << ',' << t.mass << ',' << t.momentum[0] << ',' << t.momentum[1] << ','
                 << t.momentum[2] << ',' << t.energy << ',' << t.internal_energy;
            for (const Complex& z : a)
            {
                diag << ',' << std::abs(z);
            }
            diag << '\n';
        };

        if (sc.resume.empty())
        {
            record();
        }
        while (solver.state().time < sc.steps)
        {
            solver.step();
            const std::int64_t t = solver.state().time;
            if (t % sc.diagnostics_every == 0)
            {
                record();
            }
            if (!sc.checkpoint_path.empty() && sc.checkpoint_every > 0 && t % sc.checkpoint_every == 0)
            {
                write_checkpoint_file(sc.checkpoint_path, solver.state(), order);
            }
        }
        if (!sc.checkpoint_path.empty())
        {
            write_checkpoint_file(sc.checkpoint_path, solver.state(), order);
        }
        const Totals t = totals(solver.state());
        out << "step " << solver.state().time << " mass " << std::setprecision(17) << t.mass << " energy "
            << t.energy << '\n';
        return kOk;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kError;
    }
}

int run(int argc, char** argv)
{
    CLI::App app{"Hermite-expansion MRT lattice Boltzmann: linear-mode verification and simulation"};
    app.require_subcommand(1);

    ModesOptions mo;
    auto* modes = app.add_subcommand("modes", "run plane-wave dispersion experiments from a config file");
    modes->add_option("config", mo.config_path, "JSON config")->required();
    modes->add_option("--set", mo.overrides, "override a config value, key.path=value")->take_all();
    modes->add_option("-j,--jobs", mo.jobs, "parallel sweep points (default: HERMRT_JOBS or all cores)");
    modes->add_flag("-q,--quiet", mo.quiet, "no per-point lines");

    auto* velset = app.add_subcommand("velset", "inspect or derive velocity sets");
    velset->require_subcommand(1);
    velset->add_subcommand("list", "built-in sets");
    std::string vname;
    int vdegree = -1;
    double vtol = 1e-12;
    auto* vval  = velset->add_subcommand("validate", "check the Gaussian moment identities");
    vval->add_option("set", vname, "built-in name or file")->required();
    vval->add_option("--degree", vdegree, "degree to check (default: declared)");
    vval->add_option("--tol", vtol, "defect tolerance");
    DeriveOptions dopt;
    auto* vder = velset->add_subcommand("derive", "solve weights and scale for symmetry groups");
    vder->add_option("--dim", dopt.dim, "dimension")->required();
    vder->add_option("--degree", dopt.degree, "quadrature degree")->required();
    vder->add_option("--group", dopt.groups, "group representative, e.g. 1,0 (repeatable)")->required();
    vder->add_option("--name", dopt.name, "set name");
    vder->add_option("-o,--output", dopt.output, "output file (default stdout)");

    SimOptions so;
    auto* sim = app.add_subcommand("sim", "free-form periodic simulation");
    sim->add_option("config", so.config_path, "JSON config")->required();
    sim->add_option("--set", so.overrides, "override a config value, key.path=value")->take_all();
    sim->add_option("-j,--jobs", so.jobs, "solver threads");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e);
        return code == 0 ? kOk : kError;
    }

    if (modes->parsed())
    {
        return cmd_modes(mo, std::cout, std::cerr);
    }
    if (sim->parsed())
    {
        return cmd_sim(so, std::cout, std::cerr);
    }
    if (vval->parsed())
    {
        return cmd_velset_validate(vname, vdegree, vtol, std::cout, std::cerr);
    }
    if (vder->parsed())
    {
        return cmd_velset_derive(dopt, std::cout, std::cerr);
    }
    return cmd_velset_list(std::cout);
}

}  // namespace hermrt::cli
