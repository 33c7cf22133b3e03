#include <cmath>
#include <cstring>
#include <sstream>

#include "doctest.h"
#include "hermrt/collision.hpp"
#include "hermrt/error.hpp"
#include "hermrt/solver.hpp"
#include "oracles.hpp"

using hermrt::GasSpec;
using hermrt::LatticeState;
using hermrt::RelaxationSpec;
using hermrt::Solver;

namespace
{

RelaxationSpec spec_a()
{
    RelaxationSpec s = RelaxationSpec::with_defaults(0.8, 1.3, 1.1);
    s.tau31          = 0.9;
    s.tau43          = 1.4;
    return s;
}

// Random smooth-ish state near equilibrium; g carries internal energy when S > 0.
LatticeState random_state(hermrt::VelocitySetPtr set, std::array<int, 3> dims, int S, std::uint64_t seed,
                          double eps = 0.02)
{
    LatticeState st(set, dims, S);
    oracle::Rng rng(seed);
    const int N = set->max_order();
    std::vector<double> g(static_cast<std::size_t>(set->count()));
    for (std::size_t c = 0; c < st.cells(); ++c)
    {
        const auto u  = rng.vec(set->dim(), -0.05, 0.05);
        const auto f  = oracle::perturbed_equilibrium(rng, *set, N, rng.uniform(0.95, 1.05), u,
                                                      rng.uniform(0.95, 1.05), eps);
        const double ti = rng.uniform(0.9, 1.1);
        for (std::size_t i = 0; i < g.size(); ++i)
        {
            g[i] = 0.5 * S * ti * f[i];
        }
        st.scatter(c, f, S > 0 ? std::span<const double>(g) : std::span<const double>());
    }
    return st;
}

LatticeState uniform_state(hermrt::VelocitySetPtr set, std::array<int, 3> dims, int S, double rho,
                           std::array<double, 3> u, double theta, double theta_int)
{
    LatticeState st(set, dims, S);
    hermrt::MacroState m;
    m.dim   = set->dim();
    m.rho   = rho;
    m.u     = u;
    m.theta = theta;
    const auto f = hermrt::equilibrium_populations(m, *set, set->max_order());
    std::vector<double> g(f.size());
    for (std::size_t i = 0; i < f.size(); ++i)
    {
        g[i] = 0.5 * S * theta_int * f[i];
    }
    for (std::size_t c = 0; c < st.cells(); ++c)
    {
        st.scatter(c, f, S > 0 ? std::span<const double>(g) : std::span<const double>());
    }
    return st;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(1e-300, std::abs(b)); }

}  // namespace

TEST_CASE("lattice state shape")
{
    const auto d2 = hermrt::builtin_velocity_set("D2Q9");
    LatticeState st(d2, {4, 3, 1});
    CHECK(st.cells() == 12);
    CHECK(st.q() == 9);
    CHECK_FALSE(st.has_g());
    CHECK(st.g().empty());
    CHECK(st.cell_index(1, 2) == 9);
    CHECK(st.cell_index(-1, 0) == 3);
    CHECK(st.coords(9) == std::array<int, 3>{1, 2, 0});
    CHECK_THROWS(LatticeState(d2, {4, 3, 2}));
    CHECK_THROWS(LatticeState(d2, {0, 3, 1}));
    LatticeState sg(d2, {2, 2, 1}, 3);
    CHECK(sg.has_g());
    CHECK(sg.g().size() == 36);
}

TEST_CASE("stream is a permutation")
{
    const auto set = hermrt::builtin_velocity_set("D2Q37");

    auto uni        = uniform_state(set, {7, 5, 1}, 0, 1.0, {0.02, 0.0, 0.0}, 1.0, 1.0);
    const auto copy = uni.f();
    hermrt::stream(uni);
    CHECK(uni.f() == copy);
    CHECK(uni.time == 1);

    int j = -1;
    for (int i = 0; i < set->count(); ++i)
    {
        if (set->c(i) == hermrt::LatticeVector{1, 0, 0})
        {
            j = i;
        }
    }
    REQUIRE(j >= 0);
    LatticeState one(set, {8, 8, 1});
    one.f(j, one.cell_index(0, 0)) = 1.0;
    for (int s = 0; s < 5; ++s)
    {
        hermrt::stream(one);
    }
    for (std::size_t c = 0; c < one.cells(); ++c)
    {
        for (int i = 0; i < set->count(); ++i)
        {
            const double expect = (i == j && c == one.cell_index(5, 0)) ? 1.0 : 0.0;
            CHECK(one.f(i, c) == expect);
        }
    }

    auto rnd = random_state(set, {6, 9, 1}, 3, 7);
    std::vector<double> sums(static_cast<std::size_t>(set->count()));
    std::vector<std::vector<double>> sorted(sums.size());
    for (int i = 0; i < set->count(); ++i)
    {
        for (std::size_t c = 0; c < rnd.cells(); ++c)
        {
            sorted[static_cast<std::size_t>(i)].push_back(rnd.f(i, c));
        }
        std::sort(sorted[static_cast<std::size_t>(i)].begin(), sorted[static_cast<std::size_t>(i)].end());
    }
    const auto g0 = rnd.g();
    hermrt::stream(rnd);
    for (int i = 0; i < set->count(); ++i)
    {
        std::vector<double> v;
        for (std::size_t c = 0; c < rnd.cells(); ++c)
        {
            v.push_back(rnd.f(i, c));
        }
        std::sort(v.begin(), v.end());
        CHECK(v == sorted[static_cast<std::size_t>(i)]);
        // g moves with f
        const std::size_t c0 = rnd.cell_index(2, 3);
        CHECK(rnd.g()[static_cast<std::size_t>(i) * rnd.cells() + rnd.neighbor(c0, i)] ==
              g0[static_cast<std::size_t>(i) * rnd.cells() + c0]);
    }
}

TEST_CASE("uniform equilibrium is a fixed point")
{
    const auto set = hermrt::builtin_velocity_set("D2Q37");
    const GasSpec gas{0, 2, std::nullopt};
    Solver solver(uniform_state(set, {4, 4, 1}, 0, 1.2, {0.05, -0.02, 0.0}, 0.95, 0.95), spec_a(), gas, 4, 1);
    solver.run(1000);
    const auto mf = hermrt::macro_fields(solver.state(), gas);
    for (std::size_t c = 0; c < solver.state().cells(); ++c)
    {
        CHECK(std::abs(mf.rho[c] - 1.2) < 1e-12);
        CHECK(std::abs(mf.u[0][c] - 0.05) < 1e-12);
        CHECK(std::abs(mf.u[1][c] + 0.02) < 1e-12);
        CHECK(std::abs(mf.theta[c] - 0.95) < 1e-12);
    }
    CHECK(solver.state().time == 1000);
}

TEST_CASE("global conservation")
{
    struct Case
    {
        const char* set;
        std::array<int, 3> dims;
        int S;
        int steps;
    };
    for (const Case k : {Case{"D2Q9", {16, 16, 1}, 0, 10000}, Case{"D2Q37", {8, 8, 1}, 0, 10000},
                         Case{"D2Q37", {8, 8, 1}, 3, 10000}})
    {
        CAPTURE(k.set);
        CAPTURE(k.S);
        const auto set = hermrt::builtin_velocity_set(k.set);
        const GasSpec gas{k.S, 2, std::nullopt};
        Solver solver(random_state(set, k.dims, k.S, 99), spec_a(), gas, set->max_order(), 2);
        const auto t0 = hermrt::totals(solver.state());
        for (int chunk = 0; chunk < 10; ++chunk)
        {
            solver.run(k.steps / 10);
            const auto t = hermrt::totals(solver.state());
            CHECK(rel(t.mass, t0.mass) <= 1e-12);
            CHECK(std::abs(t.momentum[0] - t0.momentum[0]) <= 1e-12 * t0.mass);
            CHECK(std::abs(t.momentum[1] - t0.momentum[1]) <= 1e-12 * t0.mass);
            CHECK(rel(t.energy, t0.energy) <= 1e-12);
        }
        if (k.S > 0)
        {
            CHECK(hermrt::totals(solver.state()).internal_energy > 0.0);
        }
    }
}

TEST_CASE("result does not depend on the worker count")
{
    const auto set = hermrt::builtin_velocity_set("D2Q37");
    for (int S : {0, 2})
    {
        const GasSpec gas{S, 2, std::nullopt};
        const auto init = random_state(set, {12, 10, 1}, S, 5);
        Solver a(init, spec_a(), gas, 4, 1);
        Solver b(init, spec_a(), gas, 4, 3);
        Solver c(init, spec_a(), gas, 4, 7);
        a.run(30);
        b.run(30);
        c.run(30);
        CHECK(a.state() == b.state());
        CHECK(a.state() == c.state());
        CHECK(std::memcmp(a.state().f().data(), c.state().f().data(), a.state().f().size() * sizeof(double)) == 0);

        LatticeState free = init;
        for (int s = 0; s < 30; ++s)
        {
            hermrt::step(free, spec_a(), gas, 4);
        }
        CHECK(free == a.state());
    }
}

TEST_CASE("translation equivariance")
{
    const auto set  = hermrt::builtin_velocity_set("D2Q37");
    const GasSpec gas{2, 2, std::nullopt};
    const auto init = random_state(set, {10, 7, 1}, 2, 11);
    LatticeState shifted(set, init.dims(), 2);
    std::vector<double> f(37), g(37);
    for (std::size_t c = 0; c < init.cells(); ++c)
    {
        const auto x = init.coords(c);
        init.gather(c, f, g);
        shifted.scatter(shifted.cell_index(x[0] + 1, x[1]), f, g);
    }
    Solver a(init, spec_a(), gas, 4, 2);
    Solver b(shifted, spec_a(), gas, 4, 3);
    a.run(40);
    b.run(40);
    std::vector<double> fa(37), ga(37), fb(37), gb(37);
    for (std::size_t c = 0; c < init.cells(); ++c)
    {
        const auto x = a.state().coords(c);
        a.state().gather(c, fa, ga);
        b.state().gather(b.state().cell_index(x[0] + 1, x[1]), fb, gb);
        CHECK(fa == fb);
        CHECK(ga == gb);
    }
}

TEST_CASE("stress trace rate is inert at S = 0")
{
    const auto set  = hermrt::builtin_velocity_set("D2Q37");
    const GasSpec gas{0, 2, std::nullopt};
    const auto init = random_state(set, {8, 8, 1}, 0, 13);
    auto sa         = spec_a();
    auto sb         = spec_a();
    sa.tau22        = 0.6;
    sb.tau22        = 5.0;
    Solver a(init, sa, gas, 4, 1);
    Solver b(init, sb, gas, 4, 1);
    a.run(100);
    b.run(100);
    CHECK(oracle::max_abs_diff(a.state().f(), b.state().f()) < 1e-13);
}

TEST_CASE("two-temperature relaxation on a uniform grid")
{
    const auto set     = hermrt::builtin_velocity_set("D2Q37");
    const int S        = 3;
    const double th_tr = 1.15, th_int = 0.9;
    auto spec          = spec_a();
    spec.tau22         = 2.5;
    const GasSpec gas{S, 2, std::nullopt};
    Solver solver(uniform_state(set, {3, 3, 1}, S, 1.0, {}, th_tr, th_int), spec, gas, 4, 1);
    // zero-dimensional model: theta is fixed, theta_tr - theta shrinks by (1 - 1/tau22) per step
    const double theta = (2.0 * th_tr + S * th_int) / (2.0 + S);
    double gap         = th_tr - theta;
    for (int s = 0; s < 30; ++s)
    {
        solver.step();
        gap *= 1.0 - 1.0 / spec.tau22;
        const auto t   = hermrt::totals(solver.state());
        const double n = static_cast<double>(solver.state().cells());
        const double ttr = (t.energy - t.internal_energy) / n;  // (D/2) theta_tr at rest, rho = 1
        CHECK(std::abs(ttr - (theta + gap)) < 1e-12);
        const auto mf = hermrt::macro_fields(solver.state(), gas);
        CHECK(std::abs(mf.theta[0] - theta) < 1e-12);
    }
}

TEST_CASE("macro fields agree with the per-site operation")
{
    const auto set = hermrt::builtin_velocity_set("D2Q37");
    const auto st  = random_state(set, {5, 4, 1}, 3, 17);
    const GasSpec gas{3, 2, std::nullopt};
    const auto mf  = hermrt::macro_fields(st, gas);
    std::vector<double> f(37), g(37);
    for (std::size_t c = 0; c < st.cells(); ++c)
    {
        st.gather(c, f, g);
        double eint = 0.0;
        for (double x : g)
        {
            eint += x;
        }
        const auto m = hermrt::macro_from_populations(f, *set, 3, eint);
        CHECK(mf.rho[c] == m.rho);
        CHECK(mf.u[0][c] == m.u[0]);
        CHECK(mf.u[1][c] == m.u[1]);
        CHECK(mf.theta[c] == doctest::Approx(m.theta).epsilon(1e-15));
    }
}

TEST_CASE("site failures report the cell")
{
    const auto set = hermrt::builtin_velocity_set("D2Q9");
    auto st        = uniform_state(set, {6, 6, 1}, 0, 1.0, {}, 1.0, 1.0);
    std::vector<double> neg(9, -0.1);
    st.scatter(st.cell_index(2, 4), neg);
    Solver solver(st, RelaxationSpec::uniform(0.8), GasSpec{0, 2, std::nullopt}, 2, 2);
    try
    {
        solver.step();
        FAIL("expected a simulation error");
    }
    catch (const hermrt::SimulationError& e)
    {
        const std::string msg = e.what();
        CHECK(msg.find("(2, 4, 0)") != std::string::npos);
        CHECK(msg.find("step 0") != std::string::npos);
    }
}

TEST_CASE("checkpoint round trip and resume")
{
    const auto set  = hermrt::builtin_velocity_set("D2Q37");
    const GasSpec gas{2, 2, std::nullopt};
    Solver full(random_state(set, {6, 5, 1}, 2, 19), spec_a(), gas, 4, 2);
    full.run(20);

    std::stringstream io;
    hermrt::write_checkpoint(io, full.state(), 4);
    const auto ck = hermrt::read_checkpoint(io, set);
    CHECK(ck.order == 4);
    CHECK(ck.state == full.state());
    CHECK(ck.state.time == 20);

    Solver resumed(ck.state, spec_a(), gas, ck.order, 1);
    full.run(15);
    resumed.run(15);
    CHECK(resumed.state() == full.state());

    std::stringstream wrong;
    hermrt::write_checkpoint(wrong, full.state(), 4);
    CHECK_THROWS(hermrt::read_checkpoint(wrong, hermrt::builtin_velocity_set("D2Q9")));

    std::stringstream junk("not a checkpoint");
    CHECK_THROWS(hermrt::read_checkpoint(junk, set));
}

TEST_CASE("gas spec")
{
    GasSpec g{3, 2, std::nullopt};
    CHECK(g.gamma() == doctest::Approx(1.4));
    CHECK_NOTHROW(g.validate());
    CHECK_THROWS(GasSpec{-1, 2, std::nullopt}.validate());
    CHECK_THROWS(GasSpec{0, 2, 0.3}.validate());
}
