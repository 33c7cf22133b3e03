#ifndef HERMRT_SOLVER_HPP
#define HERMRT_SOLVER_HPP

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hermrt/collision.hpp"
#include "hermrt/velocity_set.hpp"

namespace hermrt
{

/// Gas model: S internal degrees of freedom on top of D translational ones.
struct GasSpec
{
    int S = 0;
    int D = 2;
    /// Relaxation time of the internal-energy populations; defaults to tau32.
    std::optional<double> tau_g;

    double gamma() const { return 1.0 + 2.0 / static_cast<double>(D + S); }
    void validate() const;
};

///
/// Populations on a periodic grid, stored per velocity index over all cells
/// (f[i * cells + cell]). Cells are numbered x fastest. Unused trailing
/// extents are 1.
///
class LatticeState
{
public:
    LatticeState(VelocitySetPtr set, std::array<int, 3> dims, int S = 0);

    const VelocitySet& set() const noexcept { return *set_; }
    const VelocitySetPtr& set_ptr() const noexcept { return set_; }
    const std::array<int, 3>& dims() const noexcept { return dims_; }
    std::size_t cells() const noexcept { return cells_; }
    int q() const noexcept { return set_->count(); }
    int S() const noexcept { return S_; }
    bool has_g() const noexcept { return S_ > 0; }

    std::int64_t time = 0;

    std::vector<double>& f() noexcept { return f_; }
    const std::vector<double>& f() const noexcept { return f_; }
    /// Internal-energy populations; empty when S == 0.
    std::vector<double>& g() noexcept { return g_; }
    const std::vector<double>& g() const noexcept { return g_; }

    double& f(int i, std::size_t cell) { return f_[static_cast<std::size_t>(i) * cells_ + cell]; }
    double f(int i, std::size_t cell) const { return f_[static_cast<std::size_t>(i) * cells_ + cell]; }

    std::size_t cell_index(int x, int y = 0, int z = 0) const;
    std::array<int, 3> coords(std::size_t cell) const;

    /// Copies the populations of one cell out of / into the grid.
    void gather(std::size_t cell, std::span<double> f_site, std::span<double> g_site = {}) const;
    void scatter(std::size_t cell, std::span<const double> f_site, std::span<const double> g_site = {});

    /// Cell reached from `cell` by lattice vector c_i, periodic.
    std::size_t neighbor(std::size_t cell, int i) const;

    bool operator==(const LatticeState& o) const;

private:
    VelocitySetPtr set_;
    std::array<int, 3> dims_;
    std::size_t cells_;
    int S_;
    std::vector<double> f_;
    std::vector<double> g_;
};

/// Periodic advection: population i moves from x to x + c_i. No arithmetic.
void stream(LatticeState& state);

struct Totals
{
    double mass = 0.0;
    std::array<double, 3> momentum{};
    double energy          = 0.0;  // translational + internal
    double internal_energy = 0.0;
};

/// Global sums, reduced cell by cell in a fixed order.
Totals totals(const LatticeState& state);

struct MacroFields
{
    std::vector<double> rho;
    std::array<std::vector<double>, 3> u;
    std::vector<double> theta;  // total temperature
};

MacroFields macro_fields(const LatticeState& state, const GasSpec& gas);

///
/// Collide-and-stream driver. The collision is applied per cell and the
/// result pushed to the neighbours in a second buffer, then the buffers
/// swap. Workers own disjoint cell ranges, so the result does not depend on
/// the worker count.
///
class Solver
{
public:
    /// jobs <= 0 picks HERMRT_JOBS from the environment, else the machine's
    /// hardware concurrency.
    Solver(LatticeState state, const RelaxationSpec& spec, GasSpec gas, int order, int jobs = 0);

    void step();
    void run(std::int64_t steps);

    const LatticeState& state() const noexcept { return state_; }
    LatticeState& state() noexcept { return state_; }
    const RelaxationSpec& spec() const noexcept { return collider_.spec(); }
    const GasSpec& gas() const noexcept { return gas_; }
    int order() const noexcept { return collider_.order(); }
    int jobs() const noexcept { return jobs_; }

private:
    void sweep(std::size_t begin, std::size_t end);

    LatticeState state_;
    GasSpec gas_;
    MrtCollider collider_;
    double tau_g_;
    int jobs_;
    std::vector<double> fnext_;
    std::vector<double> gnext_;
    std::vector<std::uint32_t> dest_;
};

/// One collide-and-stream step with a single worker.
void step(LatticeState& state, const RelaxationSpec& spec, const GasSpec& gas, int order);

/// Worker count from HERMRT_JOBS, else hardware concurrency (at least 1).
int default_jobs();

///
/// Binary checkpoint. Header: magic "HRMTCKP1", dims[3], D, N, S, Q, step,
/// velocity-set name; body: f then g as little-endian 64-bit floats in
/// storage order.
///
void write_checkpoint(std::ostream& out, const LatticeState& state, int order);
void write_checkpoint_file(const std::string& path, const LatticeState& state, int order);

struct Checkpoint
{
    LatticeState state;
    int order;
};

/// The set must match the one recorded in the file (name, D and Q).
Checkpoint read_checkpoint(std::istream& in, VelocitySetPtr set);
Checkpoint read_checkpoint_file(const std::string& path, VelocitySetPtr set);

}  // namespace hermrt

#endif  // HERMRT_SOLVER_HPP
