#ifndef HERMRT_COLLISION_HPP
#define HERMRT_COLLISION_HPP

#include <array>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hermrt/hermite.hpp"
#include "hermrt/irrep.hpp"
#include "hermrt/velocity_set.hpp"

namespace hermrt
{

///
/// Relaxation times of the irreducible parts of the non-equilibrium central
/// Hermite coefficients, in time steps. tau_nk relaxes part k of order n:
/// tau21 deviatoric stress, tau22 stress trace, tau31 traceless third order,
/// tau32 heat-flux vector, tau41..tau43 the three fourth-order parts.
///
struct RelaxationSpec
{
    double tau21 = 1.0;
    double tau22 = 1.0;
    double tau31 = 1.0;
    double tau32 = 1.0;
    double tau41 = 1.0;
    double tau42 = 1.0;
    double tau43 = 1.0;

    static RelaxationSpec uniform(double tau);

    /// tau31 and the fourth-order times default to tau32.
    static RelaxationSpec with_defaults(double tau21, double tau22, double tau32);

    /// Relaxation times of the parts of order n (2, 3 or 4).
    std::array<double, 3> order_taus(int n) const;

    /// Throws std::invalid_argument if any tau < 0.5 + eps.
    void validate(double eps = 1e-6) const;

    bool operator==(const RelaxationSpec&) const = default;
};

struct MacroState
{
    double rho   = 1.0;
    std::array<double, 3> u{};
    double theta = 1.0;
    int dim      = 2;

    std::span<const double> velocity() const { return {u.data(), static_cast<std::size_t>(dim)}; }
};

///
/// Density, velocity and temperature of a population vector. With S > 0
/// internal degrees of freedom and internal energy density `eint`, theta is
/// the total temperature, (D + S) rho theta = D rho theta_tr + 2 eint.
/// Throws SimulationError for non-positive density or temperature.
///
MacroState macro_from_populations(std::span<const double> f, const VelocitySet& set, int S = 0,
                                  std::optional<double> eint = std::nullopt);

/// Truncated (order N) Maxwell-Boltzmann populations.
PopulationVector equilibrium_populations(const MacroState& m, const VelocitySet& set, int order);

/// f - (f - f_eq(m)) / tau.
PopulationVector bgk_collide(std::span<const double> f, const MacroState& m, const VelocitySet& set, double tau,
                             int order);

/// Hermite MRT collision of one site (S = 0).
PopulationVector mrt_collide(std::span<const double> f, const VelocitySet& set, const RelaxationSpec& spec,
                             int order);

struct IrreducibleMoment
{
    int order = 2;
    int part  = 1;  // 1-based, as in tau_nk
    std::string label;
    SymTensor value;
};

/// Irreducible parts of the central coefficients d^(n), n = 2..N.
/// The temperature defaults to the one computed from f.
std::vector<IrreducibleMoment> irreducible_moments(std::span<const double> f, const VelocitySet& set, int order,
                                                   std::optional<double> theta = std::nullopt);

struct PressureHeatFlux
{
    SymTensor pressure;
    std::array<double, 3> heat_flux{};
};

/// P = sum f c c and q = 1/2 sum f c^2 c with c = xi - u.
PressureHeatFlux pressure_heatflux(std::span<const double> f, const VelocitySet& set, const MacroState& m);

/// Outcome of one site collision.
struct SiteResult
{
    MacroState macro;         // pre-collision state; theta is the total temperature
    double theta_tr = 1.0;    // translational temperature
    double delta_etr = 0.0;   // change of translational energy 1/2 sum f xi^2
};

///
/// Reusable per-site collision kernel for one velocity set, relaxation spec
/// and truncation order. Const member functions are safe to call from
/// several threads.
///
class MrtCollider
{
public:
    MrtCollider(const VelocitySet& set, const RelaxationSpec& spec, int order);

    const VelocitySet& set() const noexcept { return *set_; }
    int order() const noexcept { return order_; }
    const RelaxationSpec& spec() const noexcept { return spec_; }

    /// In-place collision of f (S = 0).
    SiteResult collide(std::span<double> f) const;

    ///
    /// In-place collision with S internal degrees of freedom carried by the
    /// internal-energy populations g. The translational trace relaxes toward
    /// the total temperature at 1/tau22; the energy it releases is deposited
    /// in g with the local equilibrium shape, and the g flux relaxes at
    /// 1/tau_g. Total energy is conserved to round-off.
    ///
    SiteResult collide(std::span<double> f, std::span<double> g, int S, double tau_g) const;

private:
    SiteResult collide_impl(std::span<double> f, std::optional<double> eint, int S, std::span<double> feq_out) const;

    const VelocitySet* set_;
    RelaxationSpec spec_;
    int order_;
    const HermiteBasis* basis_;
};

/// Per-site S > 0 collision returning (f', g').
std::pair<PopulationVector, PopulationVector> internal_energy_exchange(std::span<const double> f,
                                                                       std::span<const double> g,
                                                                       const VelocitySet& set,
                                                                       const RelaxationSpec& spec, int S,
                                                                       int order, std::optional<double> tau_g = {});

}  // namespace hermrt

#endif  // HERMRT_COLLISION_HPP
