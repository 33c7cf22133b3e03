#include "hermrt/modes.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hermrt/error.hpp"

namespace hermrt
{

Transport transport_from_relaxation(const RelaxationSpec& spec, double theta0, const GasSpec& gas)
{
    Transport t;
    const double D = gas.D;
    const double S = gas.S;
    t.nu           = theta0 * (spec.tau21 - 0.5);
    t.kappa        = theta0 * (spec.tau32 - 0.5);
    t.nu_b         = 2.0 * S * theta0 / (D * (D + S)) * (spec.tau22 - 0.5);
    t.gamma        = gas.gamma();
    t.negative     = t.nu < 0.0 || t.kappa < 0.0 || t.nu_b < 0.0;
    return t;
}

const char* mode_name(int mode)
{
    switch (mode)
    {
        case kViscous: return "viscous";
        case kThermal: return "thermal";
        case kAcousticPlus: return "acoustic_plus";
        case kAcousticMinus: return "acoustic_minus";
        default: throw std::out_of_range("mode index");
    }
}

ModeFrequencies theoretical_dispersion(double nu, double nu_b, double kappa, double gamma, int D, double k,
                                       double theta0)
{
    if (kappa == 0.0)
    {
        throw std::domain_error("dispersion: kappa = 0 leaves the Peclet number undefined");
    }
    if (!(k > 0.0))
    {
        throw std::domain_error("dispersion: k must be positive");
    }
    if (!(theta0 > 0.0) || D < 1)
    {
        throw std::domain_error("dispersion: bad base state");
    }
    const double dd  = D;
    const double cs  = std::sqrt(gamma * theta0);
    const double pe  = cs / (kappa * k);
    const double pe2 = pe * pe;
    const double pr  = nu / kappa;
    // (nu_b / nu) Pr written as nu_b / kappa so nu = 0 stays finite.
    const double lambda = 1.0 - (2.0 - 2.0 / dd) * pr - nu_b / kappa;
    const double alpha  = (gamma - 1.0) * kappa / 2.0 + (dd - 1.0) * nu / dd + nu_b / 2.0;
    const double k2     = k * k;

    ModeFrequencies w;
    w[kViscous]         = Complex(-nu * k2, 0.0);
    w[kThermal]         = Complex(-kappa * k2 * (1.0 + (gamma - 1.0) * lambda / pe2), 0.0);
    const double re     = -alpha * k2 * (1.0 - (gamma - 1.0) * lambda / ((gamma - lambda) * pe2));
    const double im     = cs * k * (1.0 - ((gamma + lambda) * (gamma + lambda) - 4.0 * lambda) / (8.0 * pe2));
    w[kAcousticPlus]    = Complex(re, im);
    w[kAcousticMinus]   = Complex(re, -im);
    return w;
}

ModeFrequencies theoretical_dispersion(const Transport& t, int D, double k, double theta0)
{
    return theoretical_dispersion(t.nu, t.nu_b, t.kappa, t.gamma, D, k, theta0);
}

double peclet(const Transport& t, double k, double theta0)
{
    return std::sqrt(t.gamma * theta0) / (t.kappa * k);
}

const char* to_string(ModeKind kind)
{
    switch (kind)
    {
        case ModeKind::shear: return "shear";
        case ModeKind::thermal: return "thermal";
        case ModeKind::acoustic: return "acoustic";
        case ModeKind::all: return "all";
    }
    return "?";
}

ModeKind parse_mode_kind(const std::string& s)
{
    for (ModeKind k : {ModeKind::shear, ModeKind::thermal, ModeKind::acoustic, ModeKind::all})
    {
        if (s == to_string(k))
        {
            return k;
        }
    }
    throw std::invalid_argument("unknown mode kind '" + s + "' (shear, thermal, acoustic, all)");
}

Amplitudes default_amplitudes(ModeKind kind, double gamma, double a)
{
    switch (kind)
    {
        case ModeKind::shear: return {0.0, 0.0, a, 0.0};
        case ModeKind::thermal: return {-a, 0.0, 0.0, a};
        case ModeKind::acoustic: return {a, 0.0, 0.0, (gamma - 1.0) * a};
        case ModeKind::all: return {a, 0.0, a, 2.0 * a};
    }
    return {};
}

void ModeExperiment::validate() const
{
    auto fail = [](const std::string& key, const std::string& why) {
        throw std::invalid_argument(key + ": " + why);
    };
    if (order < 0 || order > 4)
    {
        fail("order", "must be 0 (auto) or 2..4");
    }
    bool any = false;
    for (int j = 0; j < 3; ++j)
    {
        const auto J = static_cast<std::size_t>(j);
        if (dims[J] < 1)
        {
            fail("grid", "extents must be positive");
        }
        if (2 * std::abs(wave_index[J]) > dims[J])
        {
            fail("wave_index", "beyond the Nyquist limit of the grid");
        }
        any = any || wave_index[J] != 0;
    }
    if (!any)
    {
        fail("wave_index", "must be nonzero");
    }
    const Amplitudes amp = amplitudes.value_or(default_amplitudes(kind, gas.gamma(), amplitude));
    for (double x : amp)
    {
        if (!(std::abs(x) <= 1e-3))
        {
            fail(amplitudes ? "amplitudes" : "amplitude", "exceeds the linear-regime limit 1e-3");
        }
    }
    if (!(rho0 > 0.0))
    {
        fail("rho0", "must be positive");
    }
    if (!(theta0 > 0.0))
    {
        fail("theta0", "must be positive");
    }
    try
    {
        spec.validate();
    }
    catch (const std::invalid_argument& e)
    {
        fail("tau", e.what());
    }
    try
    {
        gas.validate();
    }
    catch (const std::invalid_argument& e)
    {
        fail("gas", e.what());
    }
    if (steps < 0)
    {
        fail("steps", "must be nonnegative");
    }
    if (max_steps < 1)
    {
        fail("max_steps", "must be positive");
    }
}

std::array<double, 3> wave_vector(const ModeExperiment& exp, const VelocitySet& set)
{
    std::array<double, 3> k{};
    for (int j = 0; j < set.dim(); ++j)
    {
        const auto J = static_cast<std::size_t>(j);
        k[J] = 2.0 * std::numbers::pi * exp.wave_index[J] / (exp.dims[J] * set.scale());
    }
    return k;
}

namespace
{

void check_grid(const ModeExperiment& exp, const VelocitySet& set)
{
    for (int j = set.dim(); j < 3; ++j)
    {
        if (exp.dims[static_cast<std::size_t>(j)] != 1 || exp.wave_index[static_cast<std::size_t>(j)] != 0)
        {
            throw std::invalid_argument("grid: extents beyond the velocity-set dimension must be 1");
        }
    }
    if (exp.gas.D != set.dim())
    {
        throw std::invalid_argument("gas: D does not match the velocity set");
    }
}

// Phase k.x = 2 pi sum m_j x_j / L_j, reduced exactly in integers.
double cell_phase(const ModeExperiment& exp, const std::array<int, 3>& x)
{
    double ph = 0.0;
    for (std::size_t j = 0; j < 3; ++j)
    {
        const long long L = exp.dims[j];
        long long p       = (static_cast<long long>(exp.wave_index[j]) * x[j]) % L;
        if (p < 0)
        {
            p += L;
        }
        ph += static_cast<double>(p) / static_cast<double>(L);
    }
    return 2.0 * std::numbers::pi * ph;
}

struct Directions
{
    std::array<double, 3> par{};
    std::array<double, 3> perp{};
};

Directions directions(const ModeExperiment& exp, int dim)
{
    Directions d;
    double n = 0.0;
    for (int j = 0; j < dim; ++j)
    {
        // Direction of k in physical space (extents may differ per axis).
        const auto J = static_cast<std::size_t>(j);
        d.par[J]     = static_cast<double>(exp.wave_index[J]) / exp.dims[J];
        n += d.par[J] * d.par[J];
    }
    n = std::sqrt(n);
    for (auto& v : d.par)
    {
        v /= n;
    }
    if (dim >= 2)
    {
        if (std::abs(d.par[0]) + std::abs(d.par[1]) > 0.0)
        {
            const double m = std::hypot(d.par[0], d.par[1]);
            d.perp         = {-d.par[1] / m, d.par[0] / m, 0.0};
        }
        else
        {
            d.perp = {1.0, 0.0, 0.0};
        }
    }
    return d;
}

}  // namespace

LatticeState init_plane_wave(const ModeExperiment& exp, VelocitySetPtr set)
{
    exp.validate();
    check_grid(exp, *set);
    const int dim   = set->dim();
    const int order = exp.order > 0 ? exp.order : set->max_order();
    if (order > set->max_order())
    {
        throw std::invalid_argument("order: exceeds what the velocity set supports");
    }
    const Amplitudes amp = exp.amplitudes.value_or(default_amplitudes(exp.kind, exp.gas.gamma(), exp.amplitude));
    const Directions dir = directions(exp, dim);
    const double us      = std::sqrt(exp.theta0);
    const int S          = exp.gas.S;

    LatticeState state(set, exp.dims, S);
    const int q = set->count();
    std::vector<double> g(static_cast<std::size_t>(q));
    for (std::size_t cell = 0; cell < state.cells(); ++cell)
    {
        const double c = std::cos(cell_phase(exp, state.coords(cell)));
        MacroState m;
        m.dim   = dim;
        m.rho   = exp.rho0 * (1.0 + amp[0] * c);
        m.theta = exp.theta0 * (1.0 + amp[3] * c);
        for (int j = 0; j < dim; ++j)
        {
            const auto J = static_cast<std::size_t>(j);
            m.u[J]       = exp.base_flow[J] + us * c * (amp[1] * dir.par[J] + amp[2] * dir.perp[J]);
        }
        const PopulationVector feq = equilibrium_populations(m, *set, order);
        if (S > 0)
        {
            for (int i = 0; i < q; ++i)
            {
                g[static_cast<std::size_t>(i)] = 0.5 * S * m.theta * feq[static_cast<std::size_t>(i)];
            }
        }
        state.scatter(cell, feq, S > 0 ? std::span<const double>(g) : std::span<const double>());
    }
    return state;
}

AmplitudeProbe::AmplitudeProbe(const ModeExperiment& exp, const LatticeState& state)
    : rho0_(exp.rho0), theta0_(exp.theta0), S_(state.S())
{
    check_grid(exp, state.set());
    const int dim      = state.set().dim();
    const Directions d = directions(exp, dim);
    par_               = d.par;
    perp_              = d.perp;
    k_                 = wave_vector(exp, state.set());
    u0_                = exp.base_flow;
    phase_.resize(state.cells());
    for (std::size_t cell = 0; cell < state.cells(); ++cell)
    {
        phase_[cell] = std::polar(1.0, -cell_phase(exp, state.coords(cell)));
    }
}

std::array<Complex, 4> AmplitudeProbe::operator()(const LatticeState& state) const
{
    const VelocitySet& set = state.set();
    const int dim          = set.dim();
    const int q            = set.count();
    const std::size_t n    = state.cells();
    const double* f        = state.f().data();
    const double* g        = state.g().data();
    double u0par           = 0.0;
    double u0perp          = 0.0;
    double ku0             = 0.0;
    for (int j = 0; j < dim; ++j)
    {
        const auto J = static_cast<std::size_t>(j);
        u0par += u0_[J] * par_[J];
        u0perp += u0_[J] * perp_[J];
        ku0 += k_[J] * u0_[J];
    }
    const double us = std::sqrt(theta0_);

    std::array<Complex, 4> acc{};
    for (std::size_t cell = 0; cell < n; ++cell)
    {
        double rho = 0.0;
        double e2  = 0.0;
        double eint = 0.0;
        std::array<double, 3> mom{};
        for (int i = 0; i < q; ++i)
        {
            const double fi = f[static_cast<std::size_t>(i) * n + cell];
            const auto xi   = set.xi(i);
            rho += fi;
            double x2 = 0.0;
            for (int j = 0; j < dim; ++j)
            {
                mom[static_cast<std::size_t>(j)] += fi * xi[static_cast<std::size_t>(j)];
                x2 += xi[static_cast<std::size_t>(j)] * xi[static_cast<std::size_t>(j)];
            }
            e2 += fi * x2;
            if (S_ > 0)
            {
                eint += g[static_cast<std::size_t>(i) * n + cell];
            }
        }
        double u2 = 0.0;
        double up = 0.0;
        double uq = 0.0;
        for (int j = 0; j < dim; ++j)
        {
            const auto J   = static_cast<std::size_t>(j);
            const double u = mom[J] / rho;
            u2 += u * u;
            up += u * par_[J];
            uq += u * perp_[J];
        }
        const double theta_tr = (e2 - rho * u2) / (dim * rho);
        const double theta    = (dim * rho * theta_tr + 2.0 * eint) / ((dim + S_) * rho);
        const Complex p       = phase_[cell];
        acc[0] += (rho / rho0_ - 1.0) * p;
        acc[1] += ((up - u0par) / us) * p;
        acc[2] += ((uq - u0perp) / us) * p;
        acc[3] += (theta / theta0_ - 1.0) * p;
    }
    const Complex doppler = std::polar(2.0 / static_cast<double>(n), ku0 * static_cast<double>(state.time));
    for (auto& a : acc)
    {
        a *= doppler;
    }
    return acc;
}

std::array<Complex, 4> extract_amplitudes(const LatticeState& state, const ModeExperiment& exp)
{
    return AmplitudeProbe(exp, state)(state);
}

double relative_error(Complex measured, Complex theory) { return std::abs(measured - theory) / std::abs(theory); }

namespace
{

// -ln|1 - 1/tau|: per-step decay of a moment relaxed at 1/tau alone.
double kinetic_rate(double tau)
{
    const double f = std::abs(1.0 - 1.0 / tau);
    return f > 0.0 ? -std::log(f) : std::numeric_limits<double>::infinity();
}

std::int64_t auto_discard(const ModeExperiment& exp)
{
    const RelaxationSpec& s = exp.spec;
    double slow             = std::numeric_limits<double>::infinity();
    for (double tau : {s.tau21, s.tau22, s.tau31, s.tau32, s.tau41, s.tau42, s.tau43})
    {
        slow = std::min(slow, kinetic_rate(tau));
    }
    if (exp.gas.S > 0)
    {
        slow = std::min(slow, kinetic_rate(exp.gas.tau_g.value_or(s.tau32)));
    }
    const double d = std::ceil(25.0 / slow);
    return std::max<std::int64_t>(50, static_cast<std::int64_t>(std::min(d, 5000.0)));
}

}  // namespace

DispersionResult run_mode_experiment(const ModeExperiment& exp)
{
    return run_mode_experiment(exp, load_velocity_set(exp.velocity_set));
}

DispersionResult run_mode_experiment(const ModeExperiment& exp, VelocitySetPtr set)
{
    exp.validate();
    check_grid(exp, *set);
    const int dim   = set->dim();
    const int order = exp.order > 0 ? exp.order : set->max_order();

    DispersionResult r;
    r.transport = transport_from_relaxation(exp.spec, exp.theta0, exp.gas);
    const auto kv = wave_vector(exp, *set);
    r.k           = std::sqrt(kv[0] * kv[0] + kv[1] * kv[1] + kv[2] * kv[2]);
    r.theoretical = theoretical_dispersion(r.transport, dim, r.k, exp.theta0);
    r.peclet      = peclet(r.transport, r.k, exp.theta0);

    const bool shear_fit = exp.kind == ModeKind::shear || exp.kind == ModeKind::all;
    const bool wave_fit  = exp.kind != ModeKind::shear;
    if (shear_fit && dim < 2)
    {
        throw std::invalid_argument("kind: shear modes need D >= 2");
    }
    r.measured_mask[kViscous]       = shear_fit;
    r.measured_mask[kThermal]       = wave_fit;
    r.measured_mask[kAcousticPlus]  = wave_fit;
    r.measured_mask[kAcousticMinus] = wave_fit;

    r.discard = exp.discard >= 0 ? exp.discard : auto_discard(exp);
    if (exp.steps > 0)
    {
        r.steps = exp.steps;
    }
    else
    {
        double slow = std::numeric_limits<double>::infinity();
        for (int m = 0; m < kModeCount; ++m)
        {
            if (r.measured_mask[static_cast<std::size_t>(m)])
            {
                slow = std::min(slow, std::abs(r.theoretical[static_cast<std::size_t>(m)].real()));
            }
        }
        const double window = std::clamp(std::ceil(1.0 / slow), 400.0, static_cast<double>(exp.max_steps));
        r.steps             = r.discard + static_cast<std::int64_t>(window);
    }
    if (r.steps - r.discard + 1 < min_fit_length(wave_fit ? 3 : 1))
    {
        throw std::invalid_argument("steps: too few samples after the discarded transient");
    }

    Solver solver(init_plane_wave(exp, set), exp.spec, exp.gas, order, exp.jobs);
    const AmplitudeProbe probe(exp, solver.state());
    r.series.reserve(static_cast<std::size_t>(r.steps + 1));
    r.series.push_back(probe(solver.state()));
    for (std::int64_t s = 1; s <= r.steps; ++s)
    {
        solver.step();
        const auto a = probe(solver.state());
        for (const Complex& z : a)
        {
            if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
            {
                throw SimulationError("step " + std::to_string(s) + ": non-finite mode amplitude");
            }
        }
        r.series.push_back(a);
    }

    const auto first = static_cast<std::size_t>(r.discard);
    auto channel     = [&](int c) {
        ComplexSeries out;
        for (std::size_t t = first; t < r.series.size(); ++t)
        {
            out.push_back(r.series[t][static_cast<std::size_t>(c)]);
        }
        return out;
    };

    double residual = 0.0;
    if (shear_fit)
    {
        const ComplexSeries perp = channel(2);
        const FitResult fit      = fit_frequencies(std::span<const Complex>(perp), 1, exp.fit);
        r.measured[kViscous]     = fit.omega[0];
        residual                 = std::max(residual, fit.residual);
        r.ill_conditioned        = r.ill_conditioned || fit.ill_conditioned;
    }
    if (wave_fit)
    {
        const FitResult fit = fit_frequencies(std::vector<ComplexSeries>{channel(0), channel(1), channel(3)}, 3, exp.fit);
        residual            = std::max(residual, fit.residual);
        r.ill_conditioned   = r.ill_conditioned || fit.ill_conditioned;
        std::array<Complex, 3> w{fit.omega[0], fit.omega[1], fit.omega[2]};
        const auto thermal = std::min_element(w.begin(), w.end(), [](Complex a, Complex b) {
            return std::abs(a.imag()) < std::abs(b.imag());
        });
        r.measured[kThermal] = *thermal;
        std::vector<Complex> rest;
        for (auto it = w.begin(); it != w.end(); ++it)
        {
            if (it != thermal)
            {
                rest.push_back(*it);
            }
        }
        if (rest[0].imag() < rest[1].imag())
        {
            std::swap(rest[0], rest[1]);
        }
        r.measured[kAcousticPlus]  = rest[0];
        r.measured[kAcousticMinus] = rest[1];
    }
    r.fit_residual = residual;

    for (int m = 0; m < kModeCount; ++m)
    {
        const auto M = static_cast<std::size_t>(m);
        if (!r.measured_mask[M])
        {
            continue;
        }
        const Complex t   = r.theoretical[M];
        const Complex mes = r.measured[M];
        r.rel_error[M]    = relative_error(mes, t);
        r.rel_error_re[M] = std::abs(mes.real() - t.real()) / std::abs(t.real());
        r.rel_error_im[M] = t.imag() != 0.0 ? std::abs(mes.imag() - t.imag()) / std::abs(t.imag())
                                            : std::abs(mes.imag()) / std::abs(t);
    }
    return r;
}

void write_amplitude_csv(std::ostream& out, const DispersionResult& r)
{
    out << "step,rho_re,rho_im,upar_re,upar_im,uperp_re,uperp_im,theta_re,theta_im\n";
    std::ostringstream line;
    line << std::setprecision(17);
    for (std::size_t t = 0; t < r.series.size(); ++t)
    {
        line.str("");
        line << t;
        for (const Complex& z : r.series[t])
        {
            line << ',' << z.real() << ',' << z.imag();
        }
        out << line.str() << '\n';
    }
}

}  // namespace hermrt
