#ifndef HERMRT_MODES_HPP
#define HERMRT_MODES_HPP

#include <array>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hermrt/collision.hpp"
#include "hermrt/fit.hpp"
#include "hermrt/solver.hpp"

namespace hermrt
{

struct Transport
{
    double nu    = 0.0;
    double nu_b  = 0.0;
    double kappa = 0.0;
    double gamma = 0.0;
    /// Set when any coefficient comes out negative (tau < 1/2).
    bool negative = false;
};

Transport transport_from_relaxation(const RelaxationSpec& spec, double theta0, const GasSpec& gas);

enum Mode : int
{
    kViscous = 0,
    kThermal = 1,
    kAcousticPlus = 2,
    kAcousticMinus = 3,
};
inline constexpr int kModeCount = 4;
const char* mode_name(int mode);

using ModeFrequencies = std::array<Complex, kModeCount>;

/// Large-Peclet linear dispersion relations of the four hydrodynamic modes.
/// Throws std::domain_error for kappa == 0 or k <= 0.
ModeFrequencies theoretical_dispersion(double nu, double nu_b, double kappa, double gamma, int D, double k,
                                       double theta0);
ModeFrequencies theoretical_dispersion(const Transport& t, int D, double k, double theta0);

/// Acoustic Peclet number c_s / (kappa k).
double peclet(const Transport& t, double k, double theta0);

enum class ModeKind
{
    shear,
    thermal,
    acoustic,
    all,
};
const char* to_string(ModeKind kind);
ModeKind parse_mode_kind(const std::string& s);

/// Perturbation amplitudes relative to the base state:
/// rho/rho0, u_par/sqrt(theta0), u_perp/sqrt(theta0), theta/theta0.
using Amplitudes = std::array<double, 4>;

/// shear: u_perp; thermal: isobaric (rho = -theta); acoustic: isentropic
/// compression; all: density, temperature and u_perp together.
Amplitudes default_amplitudes(ModeKind kind, double gamma, double a);

struct ModeExperiment
{
    std::string velocity_set = "D2Q37";
    int order = 0;  // 0: the set's highest order
    std::array<int, 3> dims{100, 100, 1};
    std::array<int, 3> wave_index{1, 0, 0};
    ModeKind kind = ModeKind::shear;
    double amplitude = 1e-5;
    std::optional<Amplitudes> amplitudes;  // overrides kind + amplitude
    std::array<double, 3> base_flow{};
    double rho0 = 1.0;
    double theta0 = 1.0;
    RelaxationSpec spec;
    GasSpec gas;
    std::int64_t steps = 0;    // 0: chosen from the theoretical decay rates
    std::int64_t discard = -1; // <0: chosen from the kinetic relaxation rates
    std::int64_t max_steps = 1000;
    int jobs = 0;
    FitOptions fit;

    /// Throws std::invalid_argument naming the offending field.
    void validate() const;
};

/// Wave vector 2 pi m_j / (L_j r) for the experiment's grid and set.
std::array<double, 3> wave_vector(const ModeExperiment& exp, const VelocitySet& set);

/// Truncated-equilibrium populations realizing base + amplitudes cos(k.x).
LatticeState init_plane_wave(const ModeExperiment& exp, VelocitySetPtr set);

///
/// Discrete Fourier component at the experiment's wave vector of
/// (rho, u_par, u_perp, theta), normalized like Amplitudes, with the
/// advection phase exp(-i k.u0 t) removed.
///
class AmplitudeProbe
{
public:
    AmplitudeProbe(const ModeExperiment& exp, const LatticeState& state);
    std::array<Complex, 4> operator()(const LatticeState& state) const;

private:
    std::vector<Complex> phase_;
    std::array<double, 3> par_{};
    std::array<double, 3> perp_{};
    std::array<double, 3> k_{};
    std::array<double, 3> u0_{};
    double rho0_;
    double theta0_;
    int S_;
};

std::array<Complex, 4> extract_amplitudes(const LatticeState& state, const ModeExperiment& exp);

struct DispersionResult
{
    Transport transport;
    double k = 0.0;
    double peclet = 0.0;
    std::array<bool, kModeCount> measured_mask{};
    ModeFrequencies measured{};
    ModeFrequencies theoretical{};
    std::array<double, kModeCount> rel_error{};
    std::array<double, kModeCount> rel_error_re{};
    std::array<double, kModeCount> rel_error_im{};
    double fit_residual = 0.0;
    bool ill_conditioned = false;
    std::int64_t steps = 0;
    std::int64_t discard = 0;
    /// Per-step amplitudes (rho, u_par, u_perp, theta), step 0 = initial state.
    std::vector<std::array<Complex, 4>> series;
};

/// |measured - theory| / |theory|.
double relative_error(Complex measured, Complex theory);

DispersionResult run_mode_experiment(const ModeExperiment& exp);
DispersionResult run_mode_experiment(const ModeExperiment& exp, VelocitySetPtr set);

/// step, Re/Im of the four amplitudes; 17 significant digits.
void write_amplitude_csv(std::ostream& out, const DispersionResult& r);

}  // namespace hermrt

#endif  // HERMRT_MODES_HPP
