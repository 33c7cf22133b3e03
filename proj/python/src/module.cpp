#include <pybind11/complex.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hermrt/collision.hpp"
#include "hermrt/error.hpp"
#include "hermrt/fit.hpp"
#include "hermrt/modes.hpp"
#include "hermrt/solver.hpp"
#include "hermrt/velocity_set.hpp"

namespace py = pybind11;
using namespace hermrt;

namespace
{

py::array_t<double> field(const std::vector<double>& v, const std::array<int, 3>& dims, int dim)
{
    // cells are numbered x fastest, so the numpy shape runs (z, y, x)
    std::vector<py::ssize_t> shape;
    for (int j = dim - 1; j >= 0; --j)
    {
        shape.push_back(dims[static_cast<std::size_t>(j)]);
    }
    py::array_t<double> out(shape);
    std::copy(v.begin(), v.end(), out.mutable_data());
    return out;
}

py::dict mode_dict(const ModeFrequencies& w)
{
    py::dict d;
    for (int m = 0; m < kModeCount; ++m)
    {
        d[mode_name(m)] = w[static_cast<std::size_t>(m)];
    }
    return d;
}

py::dict result_dict(const DispersionResult& r)
{
    py::dict out;
    out["nu"]       = r.transport.nu;
    out["nu_b"]     = r.transport.nu_b;
    out["kappa"]    = r.transport.kappa;
    out["gamma"]    = r.transport.gamma;
    out["k"]        = r.k;
    out["peclet"]   = r.peclet;
    out["steps"]    = r.steps;
    out["discard"]  = r.discard;
    out["residual"] = r.fit_residual;
    out["ill_conditioned"] = r.ill_conditioned;
    py::dict measured, theory, err;
    for (int m = 0; m < kModeCount; ++m)
    {
        const auto M = static_cast<std::size_t>(m);
        if (!r.measured_mask[M])
        {
            continue;
        }
        measured[mode_name(m)] = r.measured[M];
        theory[mode_name(m)]   = r.theoretical[M];
        err[mode_name(m)]      = r.rel_error[M];
    }
    out["measured"]    = measured;
    out["theoretical"] = theory;
    out["rel_error"]   = err;
    py::array_t<std::complex<double>> series({static_cast<py::ssize_t>(r.series.size()), py::ssize_t{4}});
    auto s = series.mutable_unchecked<2>();
    for (std::size_t t = 0; t < r.series.size(); ++t)
    {
        for (std::size_t c = 0; c < 4; ++c)
        {
            s(static_cast<py::ssize_t>(t), static_cast<py::ssize_t>(c)) = r.series[t][c];
        }
    }
    out["series"] = series;
    return out;
}

// Owns the solver together with the probe used for amplitudes.
class Simulation
{
public:
    explicit Simulation(const ModeExperiment& e)
        : exp_(e), set_(load_velocity_set(e.velocity_set)),
          solver_(init_plane_wave(e, set_), e.spec, e.gas, e.order > 0 ? e.order : set_->max_order(), e.jobs)
    {
    }

    void run(std::int64_t steps)
    {
        py::gil_scoped_release release;
        solver_.run(steps);
    }
    std::int64_t time() const { return solver_.state().time; }

    py::dict totals() const
    {
        const Totals t = hermrt::totals(solver_.state());
        py::dict d;
        d["mass"]            = t.mass;
        d["momentum"]        = t.momentum;
        d["energy"]          = t.energy;
        d["internal_energy"] = t.internal_energy;
        return d;
    }

    py::dict fields() const
    {
        const auto& s       = solver_.state();
        const MacroFields f = macro_fields(s, exp_.gas);
        const int dim       = s.set().dim();
        py::dict d;
        d["rho"]   = field(f.rho, s.dims(), dim);
        d["theta"] = field(f.theta, s.dims(), dim);
        py::list u;
        for (int j = 0; j < dim; ++j)
        {
            u.append(field(f.u[static_cast<std::size_t>(j)], s.dims(), dim));
        }
        d["u"] = u;
        return d;
    }

    std::array<Complex, 4> amplitudes() const { return extract_amplitudes(solver_.state(), exp_); }

private:
    ModeExperiment exp_;
    VelocitySetPtr set_;
    Solver solver_;
};

}  // namespace

PYBIND11_MODULE(_hermrt, m)
{
    m.doc() = "Hermite-expansion MRT lattice Boltzmann model and linear-mode dispersion measurement";

    py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);

    py::class_<VelocitySet, std::shared_ptr<VelocitySet>>(m, "VelocitySet")
        .def_property_readonly("name", &VelocitySet::name)
        .def_property_readonly("dim", &VelocitySet::dim)
        .def_property_readonly("count", &VelocitySet::count)
        .def_property_readonly("degree", &VelocitySet::degree)
        .def_property_readonly("scale", &VelocitySet::scale)
        .def_property_readonly("max_order", &VelocitySet::max_order)
        .def_property_readonly("weights",
                               [](const VelocitySet& s) {
                                   return std::vector<double>(s.weights().begin(), s.weights().end());
                               })
        .def_property_readonly("velocities",
                               [](const VelocitySet& s) {
                                   py::array_t<int> out({s.count(), s.dim()});
                                   auto a = out.mutable_unchecked<2>();
                                   for (int i = 0; i < s.count(); ++i)
                                   {
                                       for (int j = 0; j < s.dim(); ++j)
                                       {
                                           a(i, j) = s.c(i)[static_cast<std::size_t>(j)];
                                       }
                                   }
                                   return out;
                               })
        .def("__repr__", [](const VelocitySet& s) {
            return "<VelocitySet " + s.name() + " D=" + std::to_string(s.dim()) + " Q=" + std::to_string(s.count()) +
                   ">";
        });

    m.def("builtin_velocity_sets", &builtin_velocity_set_names);
    m.def(
        "velocity_set",
        [](const std::string& name) { return std::const_pointer_cast<VelocitySet>(load_velocity_set(name)); },
        py::arg("name_or_path"));
    m.def(
        "validate",
        [](const VelocitySet& s, int degree, double tol) {
            const ValidationReport r = validate(s, degree, tol);
            py::dict d;
            d["passed"]     = r.passed;
            d["degree"]     = r.degree;
            d["max_defect"] = r.max_defect;
            if (r.first_failure)
            {
                d["first_failure"] = *r.first_failure;
            }
            return d;
        },
        py::arg("set"), py::arg("degree") = 0, py::arg("tol") = 1e-12);

    py::class_<RelaxationSpec>(m, "RelaxationSpec")
        .def(py::init([](double t21, double t22, double t31, double t32, double t41, double t42, double t43) {
                 return RelaxationSpec{t21, t22, t31, t32, t41, t42, t43};
             }),
             py::arg("tau21") = 1.0, py::arg("tau22") = 1.0, py::arg("tau31") = 1.0, py::arg("tau32") = 1.0,
             py::arg("tau41") = 1.0, py::arg("tau42") = 1.0, py::arg("tau43") = 1.0)
        .def_static("uniform", &RelaxationSpec::uniform)
        .def_readwrite("tau21", &RelaxationSpec::tau21)
        .def_readwrite("tau22", &RelaxationSpec::tau22)
        .def_readwrite("tau31", &RelaxationSpec::tau31)
        .def_readwrite("tau32", &RelaxationSpec::tau32)
        .def_readwrite("tau41", &RelaxationSpec::tau41)
        .def_readwrite("tau42", &RelaxationSpec::tau42)
        .def_readwrite("tau43", &RelaxationSpec::tau43)
        .def("validate", [](const RelaxationSpec& s) { s.validate(); });

    py::class_<GasSpec>(m, "GasSpec")
        .def(py::init([](int S, int D, std::optional<double> tau_g) { return GasSpec{S, D, tau_g}; }),
             py::arg("S") = 0, py::arg("D") = 2, py::arg("tau_g") = py::none())
        .def_readwrite("S", &GasSpec::S)
        .def_readwrite("D", &GasSpec::D)
        .def_readwrite("tau_g", &GasSpec::tau_g)
        .def_property_readonly("gamma", &GasSpec::gamma);

    m.def(
        "transport",
        [](const RelaxationSpec& spec, double theta0, const GasSpec& gas) {
            const Transport t = transport_from_relaxation(spec, theta0, gas);
            py::dict d;
            d["nu"]       = t.nu;
            d["nu_b"]     = t.nu_b;
            d["kappa"]    = t.kappa;
            d["gamma"]    = t.gamma;
            d["negative"] = t.negative;
            return d;
        },
        py::arg("spec"), py::arg("theta0") = 1.0, py::arg("gas") = GasSpec{});

    m.def(
        "theoretical_dispersion",
        [](double nu, double nu_b, double kappa, double gamma, int D, double k, double theta0) {
            return mode_dict(theoretical_dispersion(nu, nu_b, kappa, gamma, D, k, theta0));
        },
        py::arg("nu"), py::arg("nu_b"), py::arg("kappa"), py::arg("gamma"), py::arg("D"), py::arg("k"),
        py::arg("theta0") = 1.0);

    m.def(
        "fit_frequencies",
        [](const std::vector<ComplexSeries>& channels, int modes, int stride) {
            FitOptions opt;
            opt.stride          = stride;
            const FitResult r   = fit_frequencies(channels, modes, opt);
            py::dict d;
            d["omega"]           = r.omega;
            d["amplitudes"]      = r.amplitudes;
            d["residual"]        = r.residual;
            d["condition"]       = r.condition;
            d["ill_conditioned"] = r.ill_conditioned;
            return d;
        },
        py::arg("channels"), py::arg("modes"), py::arg("stride") = 0);

    py::class_<ModeExperiment>(m, "ModeExperiment")
        .def(py::init([](const std::string& set, std::array<int, 3> dims, std::array<int, 3> wave,
                         const std::string& kind, double amplitude, std::array<double, 3> base_flow, double theta0,
                         const RelaxationSpec& spec, const GasSpec& gas, int order, std::int64_t steps, int jobs) {
                 ModeExperiment e;
                 e.velocity_set = set;
                 e.dims         = dims;
                 e.wave_index   = wave;
                 e.kind         = parse_mode_kind(kind);
                 e.amplitude    = amplitude;
                 e.base_flow    = base_flow;
                 e.theta0       = theta0;
                 e.spec         = spec;
                 e.gas          = gas;
                 e.order        = order;
                 e.steps        = steps;
                 e.jobs         = jobs;
                 return e;
             }),
             py::arg("velocity_set") = "D2Q37", py::arg("grid") = std::array<int, 3>{100, 100, 1},
             py::arg("wave_index") = std::array<int, 3>{1, 0, 0}, py::arg("kind") = "shear",
             py::arg("amplitude") = 1e-5, py::arg("base_flow") = std::array<double, 3>{},
             py::arg("theta0") = 1.0, py::arg("spec") = RelaxationSpec{}, py::arg("gas") = GasSpec{},
             py::arg("order") = 0, py::arg("steps") = 0, py::arg("jobs") = 0)
        .def_readwrite("velocity_set", &ModeExperiment::velocity_set)
        .def_readwrite("grid", &ModeExperiment::dims)
        .def_readwrite("wave_index", &ModeExperiment::wave_index)
        .def_readwrite("amplitude", &ModeExperiment::amplitude)
        .def_readwrite("base_flow", &ModeExperiment::base_flow)
        .def_readwrite("theta0", &ModeExperiment::theta0)
        .def_readwrite("spec", &ModeExperiment::spec)
        .def_readwrite("gas", &ModeExperiment::gas)
        .def_readwrite("steps", &ModeExperiment::steps)
        .def_readwrite("jobs", &ModeExperiment::jobs)
        .def("validate", &ModeExperiment::validate);

    m.def(
        "run_mode_experiment",
        [](const ModeExperiment& e) {
            DispersionResult r;
            {
                py::gil_scoped_release release;
                r = run_mode_experiment(e);
            }
            return result_dict(r);
        },
        py::arg("experiment"));

    py::class_<Simulation>(m, "Simulation")
        .def(py::init<const ModeExperiment&>(), py::arg("experiment"))
        .def("run", &Simulation::run, py::arg("steps"))
        .def_property_readonly("time", &Simulation::time)
        .def("totals", &Simulation::totals)
        .def("fields", &Simulation::fields)
        .def("amplitudes", &Simulation::amplitudes);
}
