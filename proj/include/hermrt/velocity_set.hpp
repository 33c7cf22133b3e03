#ifndef HERMRT_VELOCITY_SET_HPP
#define HERMRT_VELOCITY_SET_HPP

#include <array>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hermrt/hermite.hpp"
#include "hermrt/sym_tensor.hpp"

namespace hermrt
{

/// Discrete populations f_i, one per lattice velocity.
using PopulationVector = std::vector<double>;

using LatticeVector = std::array<int, 3>;

///
/// Flattened Hermite tables of one velocity set truncated at order N.
///
/// Coefficients of all orders 0..N are concatenated into one vector; order
/// n occupies [offset[n], offset[n+1]). `project` maps populations to
/// coefficients (row-major ncoef x count) and `reconstruct` maps
/// coefficients back to populations (row-major count x ncoef).
///
struct HermiteBasis
{
    int order = 0;
    int ncoef = 0;
    std::array<int, CoeffSet::kMaxOrder + 2> offset{};
    std::vector<double> project;
    std::vector<double> reconstruct;
};

///
/// Quadrature velocity set: integer streaming vectors c_i, weights w_i,
/// scale r (abscissas xi_i = r c_i in Hermite units) and algebraic degree Q.
/// Immutable after construction.
///
class VelocitySet
{
public:
    VelocitySet(std::string name, int dim, std::vector<LatticeVector> cvecs, std::vector<double> weights,
                double scale, int degree);

    const std::string& name() const noexcept { return name_; }
    int dim() const noexcept { return dim_; }
    int count() const noexcept { return static_cast<int>(cvecs_.size()); }
    double scale() const noexcept { return scale_; }
    int degree() const noexcept { return degree_; }
    /// Highest Hermite order N with 2N <= Q (capped at 4).
    int max_order() const noexcept;

    const LatticeVector& c(int i) const { return cvecs_[static_cast<std::size_t>(i)]; }
    std::span<const double> xi(int i) const
    {
        return {xi_.data() + static_cast<std::size_t>(i) * dim_, static_cast<std::size_t>(dim_)};
    }
    double weight(int i) const { return weights_[static_cast<std::size_t>(i)]; }
    std::span<const double> weights() const noexcept { return weights_; }

    /// H^(n)(xi_i), precomputed for n <= max_order().
    const SymTensor& hermite(int i, int n) const;

    /// Flattened projection tables for order N (2N <= Q).
    const HermiteBasis& basis(int order) const;

private:
    void balance_conserved(HermiteBasis& b) const;

    std::string name_;
    int dim_;
    std::vector<LatticeVector> cvecs_;
    std::vector<double> weights_;
    std::vector<double> xi_;
    double scale_;
    int degree_;
    std::vector<std::array<SymTensor, CoeffSet::kMaxOrder + 1>> hermite_;
    std::vector<HermiteBasis> bases_;
};

using VelocitySetPtr = std::shared_ptr<const VelocitySet>;

struct ValidationReport
{
    int degree         = 0;
    double max_defect  = 0.0;
    bool passed        = true;
    double tolerance   = 0.0;
    /// Exponent vector of the first monomial whose defect exceeds the tolerance.
    std::optional<std::vector<int>> first_failure;
    double first_failure_defect = 0.0;
};

/// Checks sum_i w_i P(xi_i) against the Gaussian integral for every monomial
/// of total degree <= `degree` (the set's declared degree when negative).
ValidationReport validate(const VelocitySet& set, int degree = -1, double tol = 1e-12);

/// Gaussian moment of a monomial: prod (e_j - 1)!! if all e_j even, else 0.
double gaussian_moment(std::span<const int> exponents);

struct DerivedWeights
{
    std::vector<double> group_weights;
    double scale    = 0.0;
    double residual = 0.0;
};

/// Full symmetry orbit (coordinate permutations and sign flips) of `rep`.
std::vector<LatticeVector> symmetry_orbit(const LatticeVector& rep, int dim);

///
/// Solves the moment conditions up to degree Q for one weight per group and
/// the scale r. Groups must each be closed under the lattice symmetry.
/// Throws std::runtime_error when no positive solution exists.
///
DerivedWeights derive_weights(std::span<const std::vector<LatticeVector>> groups, int dim, int degree);

/// Builds a set from symmetry groups and derived weights.
VelocitySet make_velocity_set(std::string name, std::span<const std::vector<LatticeVector>> groups, int dim,
                              int degree);

/// Built-in sets: D1Q3, D2Q9 (Q=5) and D2Q37 (Q=9).
VelocitySetPtr builtin_velocity_set(const std::string& name);
std::vector<std::string> builtin_velocity_set_names();

/// Resolves a built-in name or a velocity-set file path.
VelocitySetPtr load_velocity_set(const std::string& name_or_path);

/// Plain-text format: header "D d Q r", then d rows of D integers and a weight.
VelocitySet read_velocity_set(std::istream& in, std::string name);
VelocitySet read_velocity_set_file(const std::string& path);
void write_velocity_set(std::ostream& out, const VelocitySet& set);

/// a^(n) = sum_i f_i H^(n)(xi_i), n = 0..N.
CoeffSet coeffs_from_populations(std::span<const double> f, const VelocitySet& set, int order);

/// f_i = w_i sum_n (1/n!) a^(n) : H^(n)(xi_i).
PopulationVector populations_from_coeffs(const CoeffSet& a, const VelocitySet& set);

}  // namespace hermrt

#endif  // HERMRT_VELOCITY_SET_HPP
