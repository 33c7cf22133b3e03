#include "hermrt/collision.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

#include "hermite_kernels.hpp"
#include "hermrt/error.hpp"

namespace hermrt
{

RelaxationSpec RelaxationSpec::uniform(double tau) { return {tau, tau, tau, tau, tau, tau, tau}; }

RelaxationSpec RelaxationSpec::with_defaults(double tau21, double tau22, double tau32)
{
    return {tau21, tau22, tau32, tau32, tau32, tau32, tau32};
}

std::array<double, 3> RelaxationSpec::order_taus(int n) const
{
    switch (n)
    {
    case 2:
        return {tau21, tau22, 0.0};
    case 3:
        return {tau31, tau32, 0.0};
    case 4:
        return {tau41, tau42, tau43};
    default:
        throw std::domain_error("RelaxationSpec: no relaxation times for order " + std::to_string(n));
    }
}

void RelaxationSpec::validate(double eps) const
{
    const std::pair<const char*, double> all[] = {{"tau21", tau21}, {"tau22", tau22}, {"tau31", tau31},
                                                  {"tau32", tau32}, {"tau41", tau41}, {"tau42", tau42},
                                                  {"tau43", tau43}};
    for (const auto& [name, tau] : all)
    {
        if (!std::isfinite(tau) || tau < 0.5 + eps)
        {
            std::ostringstream msg;
            msg << name << " = " << tau << " is below the stability bound 0.5 + " << eps;
            throw std::invalid_argument(msg.str());
        }
    }
}

namespace
{

void check_populations(std::span<const double> f, const VelocitySet& set)
{
    if (static_cast<int>(f.size()) != set.count())
    {
        throw std::invalid_argument("population vector length does not match the velocity set");
    }
}

double total_temperature(double rho, double theta_tr, int dim, int S, std::optional<double> eint)
{
    if (S == 0 || !eint)
    {
        return theta_tr;
    }
    return (dim * rho * theta_tr + 2.0 * *eint) / ((dim + S) * rho);
}

void check_macro(double rho, double theta)
{
    if (!(rho > 0.0))
    {
        std::ostringstream msg;
        msg << "non-positive density " << rho;
        throw SimulationError(msg.str());
    }
    if (!(theta > 0.0))
    {
        std::ostringstream msg;
        msg << "non-positive temperature " << theta;
        throw SimulationError(msg.str());
    }
}

}  // namespace

MacroState macro_from_populations(std::span<const double> f, const VelocitySet& set, int S, std::optional<double> eint)
{
    check_populations(f, set);
    const int dim = set.dim();
    MacroState m;
    m.dim = dim;
    double rho = 0.0;
    std::array<double, 3> mom{};
    for (int i = 0; i < set.count(); ++i)
    {
        const double fi = f[static_cast<std::size_t>(i)];
        rho += fi;
        const auto xi = set.xi(i);
        for (int j = 0; j < dim; ++j)
        {
            mom[static_cast<std::size_t>(j)] += fi * xi[static_cast<std::size_t>(j)];
        }
    }
    if (!(rho > 0.0))
    {
        check_macro(rho, 1.0);
    }
    for (int j = 0; j < dim; ++j)
    {
        m.u[static_cast<std::size_t>(j)] = mom[static_cast<std::size_t>(j)] / rho;
    }
    double e = 0.0;
    for (int i = 0; i < set.count(); ++i)
    {
        const auto xi = set.xi(i);
        double c2     = 0.0;
        for (int j = 0; j < dim; ++j)
        {
            const double c = xi[static_cast<std::size_t>(j)] - m.u[static_cast<std::size_t>(j)];
            c2 += c * c;
        }
        e += f[static_cast<std::size_t>(i)] * c2;
    }
    m.rho   = rho;
    m.theta = total_temperature(rho, e / (dim * rho), dim, S, eint);
    check_macro(m.rho, m.theta);
    return m;
}

PopulationVector equilibrium_populations(const MacroState& m, const VelocitySet& set, int order)
{
    return populations_from_coeffs(equilibrium_coeffs(m.rho, m.velocity(), m.theta, order), set);
}

PopulationVector bgk_collide(std::span<const double> f, const MacroState& m, const VelocitySet& set, double tau,
                             int order)
{
    check_populations(f, set);
    if (!(tau > 0.0))
    {
        throw std::domain_error("bgk_collide: tau must be positive");
    }
    const PopulationVector feq = equilibrium_populations(m, set, order);
    PopulationVector out(f.begin(), f.end());
    for (std::size_t i = 0; i < out.size(); ++i)
    {
        out[i] -= (out[i] - feq[i]) / tau;
    }
    return out;
}

MrtCollider::MrtCollider(const VelocitySet& set, const RelaxationSpec& spec, int order)
    : set_(&set), spec_(spec), order_(order), basis_(&set.basis(order))
{
    if (order < 2)
    {
        throw std::invalid_argument("MrtCollider: truncation order must be at least 2");
    }
    for (int n = 2; n <= order; ++n)
    {
        const auto taus = spec.order_taus(n);
        for (int k = 0; k < irrep_count(n); ++k)
        {
            if (!(taus[static_cast<std::size_t>(k)] > 0.0))
            {
                throw std::domain_error("MrtCollider: relaxation times must be positive");
            }
        }
    }
}

SiteResult MrtCollider::collide_impl(std::span<double> f, std::optional<double> eint, int S,
                                     std::span<double> feq_out) const
{
    const VelocitySet& set = *set_;
    const HermiteBasis& b  = *basis_;
    const int q            = set.count();
    const int dim          = set.dim();
    check_populations(f, set);

    // Laboratory-frame coefficients a^(n)(f).
    double flat[64];
    for (int c = 0; c < b.ncoef; ++c)
    {
        const double* row = b.project.data() + static_cast<std::size_t>(c * q);
        double acc        = 0.0;
        for (int i = 0; i < q; ++i)
        {
            acc += row[i] * f[static_cast<std::size_t>(i)];
        }
        flat[c] = acc;
    }
    CoeffSet a(dim, order_);
    for (int n = 0; n <= order_; ++n)
    {
        for (int c = 0; c < a[n].size(); ++c)
        {
            a[n][c] = flat[b.offset[static_cast<std::size_t>(n)] + c];
        }
    }

    SiteResult res;
    MacroState& m = res.macro;
    m.dim         = dim;
    m.rho         = a[0][0];
    if (!(m.rho > 0.0))
    {
        check_macro(m.rho, 1.0);
    }
    double u2 = 0.0;
    for (int j = 0; j < dim; ++j)
    {
        m.u[static_cast<std::size_t>(j)] = a[1][j] / m.rho;
        u2 += m.u[static_cast<std::size_t>(j)] * m.u[static_cast<std::size_t>(j)];
    }
    // tr a^(2) = sum f xi^2 - D rho.
    const double tr2 = trace(a[2])[0];
    res.theta_tr     = (tr2 + dim * m.rho - m.rho * u2) / (dim * m.rho);
    m.theta          = total_temperature(m.rho, res.theta_tr, dim, S, eint);
    check_macro(m.rho, m.theta);
    const auto u = m.velocity();

    // Non-equilibrium part; orders 0 and 1 vanish by construction.
    const auto upow  = detail::outer_powers(u, order_);
    const auto eqlad = detail::binomial_ladder(upow, dim, m.theta - 1.0, order_);
    const auto apoly = detail::binomial_ladder(upow, dim, 1.0 - m.theta, order_);
    CoeffSet aeq(dim, order_);
    CoeffSet a1(dim, order_);
    for (int n = 0; n <= order_; ++n)
    {
        aeq[n] = m.rho * eqlad[static_cast<std::size_t>(n)];
        if (n >= 2)
        {
            a1[n] = a[n] - aeq[n];
        }
    }

    const CoeffSet d1 = detail::central_from_raw(a1, apoly, m.theta);
    CoeffSet d_omega(dim, order_);
    for (int n = 2; n <= order_; ++n)
    {
        const auto taus = spec_.order_taus(n);
        d_omega[n]      = reassemble(relax_parts(decompose(d1[n]), taus));
    }
    const CoeffSet a_omega = detail::raw_from_central(d_omega, apoly, m.theta);

    for (int n = 2; n <= order_; ++n)
    {
        for (int c = 0; c < a[n].size(); ++c)
        {
            flat[b.offset[static_cast<std::size_t>(n)] + c] += a_omega[n][c];
        }
    }

    // Reconstruction onto the Hermite span.
    double etr_in  = 0.0;
    double etr_out = 0.0;
    for (int i = 0; i < q; ++i)
    {
        const double* row = b.reconstruct.data() + static_cast<std::size_t>(i * b.ncoef);
        double acc        = 0.0;
        for (int c = 0; c < b.ncoef; ++c)
        {
            acc += row[c] * flat[c];
        }
        const auto xi = set.xi(i);
        double x2     = 0.0;
        for (int j = 0; j < dim; ++j)
        {
            x2 += xi[static_cast<std::size_t>(j)] * xi[static_cast<std::size_t>(j)];
        }
        etr_in += f[static_cast<std::size_t>(i)] * x2;
        etr_out += acc * x2;
        f[static_cast<std::size_t>(i)] = acc;
    }
    res.delta_etr = 0.5 * (etr_out - etr_in);

    if (!feq_out.empty())
    {
        for (int i = 0; i < q; ++i)
        {
            const double* row = b.reconstruct.data() + static_cast<std::size_t>(i * b.ncoef);
            double acc        = 0.0;
            for (int n = 0; n <= order_; ++n)
            {
                for (int c = 0; c < aeq[n].size(); ++c)
                {
                    acc += row[b.offset[static_cast<std::size_t>(n)] + c] * aeq[n][c];
                }
            }
            feq_out[static_cast<std::size_t>(i)] = acc;
        }
    }
    return res;
}

SiteResult MrtCollider::collide(std::span<double> f) const { return collide_impl(f, std::nullopt, 0, {}); }

SiteResult MrtCollider::collide(std::span<double> f, std::span<double> g, int S, double tau_g) const
{
    if (S == 0)
    {
        return collide(f);
    }
    if (S < 0)
    {
        throw std::invalid_argument("internal degrees of freedom must be nonnegative");
    }
    const int q = set_->count();
    if (static_cast<int>(g.size()) != q)
    {
        throw std::invalid_argument("internal-energy populations length does not match the velocity set");
    }
    double eint = 0.0;
    for (int i = 0; i < q; ++i)
    {
        eint += g[static_cast<std::size_t>(i)];
    }
    if (!(eint >= 0.0))
    {
        throw SimulationError("negative internal energy");
    }
    double feq[256];
    if (q > 256)
    {
        throw std::invalid_argument("velocity set too large for the internal-energy kernel");
    }
    SiteResult res = collide_impl(f, eint, S, std::span<double>(feq, static_cast<std::size_t>(q)));

    // g relaxes toward (eint / rho) f_eq at 1/tau_g, then receives the energy
    // released by the translational relaxation with the equilibrium shape.
    const double rho   = res.macro.rho;
    const double e     = eint / rho;
    const double keep  = 1.0 - 1.0 / tau_g;
    const double shift = -res.delta_etr / rho;
    double eint_out    = 0.0;
    for (int i = 0; i < q; ++i)
    {
        const double geq = e * feq[i];
        double& gi       = g[static_cast<std::size_t>(i)];
        gi               = geq + keep * (gi - geq) + shift * feq[i];
        eint_out += gi;
    }
    if (!(eint_out >= 0.0))
    {
        throw SimulationError("negative internal energy after collision");
    }
    return res;
}

PopulationVector mrt_collide(std::span<const double> f, const VelocitySet& set, const RelaxationSpec& spec, int order)
{
    PopulationVector out(f.begin(), f.end());
    MrtCollider(set, spec, order).collide(out);
    return out;
}

std::pair<PopulationVector, PopulationVector> internal_energy_exchange(std::span<const double> f,
                                                                       std::span<const double> g,
                                                                       const VelocitySet& set,
                                                                       const RelaxationSpec& spec, int S, int order,
                                                                       std::optional<double> tau_g)
{
    if (S <= 0)
    {
        throw std::invalid_argument("internal_energy_exchange: requires S > 0");
    }
    PopulationVector fo(f.begin(), f.end());
    PopulationVector go(g.begin(), g.end());
    MrtCollider(set, spec, order).collide(fo, go, S, tau_g.value_or(spec.tau32));
    return {std::move(fo), std::move(go)};
}

std::vector<IrreducibleMoment> irreducible_moments(std::span<const double> f, const VelocitySet& set, int order,
                                                   std::optional<double> theta)
{
    check_populations(f, set);
    if (order < 2)
    {
        throw std::invalid_argument("irreducible_moments: order must be at least 2");
    }
    const MacroState m  = macro_from_populations(f, set);
    const double th     = theta.value_or(m.theta);
    const CoeffSet a    = coeffs_from_populations(f, set, order);
    const CoeffSet d    = central_from_raw(a, m.velocity(), th);
    static const char* labels[3][3] = {{"deviatoric stress", "stress trace", ""},
                                       {"traceless third order", "heat-flux vector", ""},
                                       {"traceless fourth order", "traceless fourth-order trace", "double trace"}};
    std::vector<IrreducibleMoment> out;
    for (int n = 2; n <= order; ++n)
    {
        const IrrepParts parts = decompose(d[n]);
        for (int k = 0; k < parts.count; ++k)
        {
            out.push_back({n, k + 1, labels[n - 2][k], parts[k]});
        }
    }
    return out;
}

PressureHeatFlux pressure_heatflux(std::span<const double> f, const VelocitySet& set, const MacroState& m)
{
    check_populations(f, set);
    if (set.degree() < 6)
    {
        throw std::invalid_argument("pressure_heatflux: the heat flux needs a velocity set of degree >= 6");
    }
    const int dim = set.dim();
    PressureHeatFlux out;
    out.pressure = SymTensor(2, dim);
    for (int i = 0; i < set.count(); ++i)
    {
        const double fi = f[static_cast<std::size_t>(i)];
        const auto xi   = set.xi(i);
        std::array<double, 3> c{};
        double c2 = 0.0;
        for (int j = 0; j < dim; ++j)
        {
            c[static_cast<std::size_t>(j)] = xi[static_cast<std::size_t>(j)] - m.u[static_cast<std::size_t>(j)];
            c2 += c[static_cast<std::size_t>(j)] * c[static_cast<std::size_t>(j)];
        }
        for (int s = 0; s < out.pressure.size(); ++s)
        {
            const auto idx = out.pressure.index_tuple(s);
            out.pressure[s] += fi * c[static_cast<std::size_t>(idx[0])] * c[static_cast<std::size_t>(idx[1])];
        }
        for (int j = 0; j < dim; ++j)
        {
            out.heat_flux[static_cast<std::size_t>(j)] += 0.5 * fi * c2 * c[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

}  // namespace hermrt
