#include <cmath>
#include <stdexcept>

#include "doctest.h"
#include "hermrt/hermite.hpp"
#include "hermrt/velocity_set.hpp"
#include "oracles.hpp"

using hermrt::CoeffSet;
using hermrt::SymTensor;
using oracle::max_abs_diff;

namespace
{

double factorial(int n)
{
    double f = 1.0;
    for (int k = 2; k <= n; ++k)
    {
        f *= k;
    }
    return f;
}

// rho omega((xi-u)/sqrt(theta)) / theta^{D/2}
double maxwellian(std::span<const double> xi, double rho, std::span<const double> u, double theta)
{
    double r2 = 0.0;
    for (std::size_t j = 0; j < xi.size(); ++j)
    {
        r2 += (xi[j] - u[j]) * (xi[j] - u[j]);
    }
    const double d = static_cast<double>(xi.size());
    return rho * std::exp(-0.5 * r2 / theta) / std::pow(2.0 * std::numbers::pi * theta, 0.5 * d);
}

}  // namespace

TEST_CASE("dnk table values")
{
    CHECK(hermrt::dnk(4, 1) == 6);
    CHECK(hermrt::dnk(7, 3) == 105);
    for (int n = 0; n <= 12; ++n)
    {
        CHECK(hermrt::dnk(n, 0) == 1);
    }
    CHECK(hermrt::dnk(4, 2) == 3);
    CHECK(hermrt::dnk(6, 3) == 15);
    CHECK_THROWS_AS(hermrt::dnk(3, 2), std::domain_error);
    CHECK_THROWS_AS(hermrt::dnk(-1, 0), std::domain_error);
}

TEST_CASE("hermite_eval small cases")
{
    const double any[3] = {0.3, -1.2, 2.0};
    CHECK(hermrt::hermite_eval(0, std::span<const double>(any, 3))[0] == 1.0);

    const double xi[2] = {1.0, 2.0};
    const auto h2      = hermrt::hermite_eval(2, xi);
    CHECK(h2({0, 0}) == doctest::Approx(0.0));
    CHECK(h2({0, 1}) == doctest::Approx(2.0));
    CHECK(h2({1, 1}) == doctest::Approx(3.0));

    CHECK_THROWS(hermrt::hermite_eval(5, xi));
}

TEST_CASE("hermite_eval matches separable product form")
{
    oracle::Rng rng(11);
    for (int dim = 1; dim <= 3; ++dim)
    {
        for (int trial = 0; trial < 200; ++trial)
        {
            const auto xi = rng.vec(dim, -3.0, 3.0);
            for (int n = 0; n <= 4; ++n)
            {
                CHECK(max_abs_diff(hermrt::hermite_eval(n, xi), oracle::hermite_product(n, xi)) < 1e-12);
            }
        }
    }
}

TEST_CASE("hermite_eval matches Rodrigues formula by finite differences")
{
    oracle::Rng rng(12);
    for (int trial = 0; trial < 20; ++trial)
    {
        const auto xi = rng.vec(3, -1.5, 1.5);
        for (int n = 0; n <= 4; ++n)
        {
            const auto fd = oracle::rodrigues_fd(n, xi);
            CHECK(max_abs_diff(hermrt::hermite_eval(n, xi), fd) < 1e-6);
        }
    }
}

TEST_CASE("a_poly")
{
    const double u[2] = {0.5, 0.0};
    CHECK(hermrt::a_poly(0, u, 0.7)[0] == 1.0);
    const auto a1 = hermrt::a_poly(1, u, 0.3);
    CHECK(a1[0] == 0.5);
    CHECK(a1[1] == 0.0);
    const auto a2 = hermrt::a_poly(2, u, 0.8);
    CHECK(a2({0, 0}) == doctest::Approx(0.45).epsilon(1e-14));
    CHECK(a2({0, 1}) == doctest::Approx(0.0));
    CHECK(a2({1, 1}) == doctest::Approx(0.2).epsilon(1e-14));

    // theta = 1 gives the outer power
    oracle::Rng rng(13);
    for (int m = 0; m <= 4; ++m)
    {
        const auto v = rng.vec(3);
        CHECK(max_abs_diff(hermrt::a_poly(m, v, 1.0), hermrt::outer_power(v, m)) < 1e-15);
    }
}

TEST_CASE("shift, scale and moving frame agree with direct evaluation")
{
    oracle::Rng rng(14);
    for (int dim = 2; dim <= 3; ++dim)
    {
        for (int trial = 0; trial < 1000; ++trial)
        {
            const auto xi    = rng.vec(dim, -2.0, 2.0);
            const auto u     = rng.vec(dim, -0.5, 0.5);
            const double alp = rng.uniform(0.3, 2.0) * (rng.uniform() < 0 ? -1.0 : 1.0);
            const double th  = rng.uniform(0.5, 2.0);
            std::vector<double> xu(static_cast<std::size_t>(dim)), xa(xu.size()), xm(xu.size());
            for (std::size_t j = 0; j < xu.size(); ++j)
            {
                xu[j] = xi[j] + u[j];
                xa[j] = alp * xi[j];
                xm[j] = (xi[j] - u[j]) / std::sqrt(th);
            }
            for (int n = 0; n <= 4; ++n)
            {
                REQUIRE(max_abs_diff(hermrt::shift_hermite(n, xi, u), oracle::hermite_product(n, xu)) < 1e-12);
                REQUIRE(max_abs_diff(hermrt::scale_hermite(n, xi, alp), oracle::hermite_product(n, xa)) < 1e-12);
                REQUIRE(max_abs_diff(hermrt::moving_frame_hermite(n, xi, u, th), oracle::hermite_product(n, xm)) <
                        1e-10);
            }
        }
    }
}

TEST_CASE("shift, scale and moving frame special cases")
{
    const double xi[2]   = {0.7, -0.4};
    const double zero[2] = {0.0, 0.0};
    const double u[2]    = {0.2, 0.9};
    for (int n = 0; n <= 4; ++n)
    {
        CHECK(max_abs_diff(hermrt::shift_hermite(n, xi, zero), hermrt::hermite_eval(n, xi)) < 1e-15);
        CHECK(max_abs_diff(hermrt::scale_hermite(n, xi, 1.0), hermrt::hermite_eval(n, xi)) < 1e-15);
        CHECK(max_abs_diff(hermrt::moving_frame_hermite(n, xi, zero, 1.0), hermrt::hermite_eval(n, xi)) < 1e-15);
    }
    const auto h1 = hermrt::shift_hermite(1, xi, u);
    CHECK(h1[0] == doctest::Approx(0.9));
    CHECK(h1[1] == doctest::Approx(0.5));

    const double e1[2] = {1.0, 0.0};
    const auto s       = hermrt::scale_hermite(2, e1, 2.0);
    CHECK(s({0, 0}) == doctest::Approx(3.0));
    CHECK(s({0, 1}) == doctest::Approx(0.0));
    CHECK(s({1, 1}) == doctest::Approx(-1.0));
    CHECK_THROWS(hermrt::scale_hermite(2, e1, 0.0));

    const double ones[2] = {1.0, 1.0};
    const auto m         = hermrt::moving_frame_hermite(2, ones, ones, 4.0);
    CHECK(max_abs_diff(m, -1.0 * SymTensor::delta(2)) < 1e-15);
    CHECK_THROWS(hermrt::moving_frame_hermite(2, ones, ones, 0.0));
}

// Averaged symmetrization written out over index positions.
TEST_CASE("recurrence")
{
    oracle::Rng rng(15);
    for (int dim = 1; dim <= 3; ++dim)
    {
        for (int trial = 0; trial < 200; ++trial)
        {
            const auto xi = rng.vec(dim, -2.0, 2.0);
            for (int n = 1; n <= 3; ++n)
            {
                const auto hn  = hermrt::hermite_eval(n, xi);
                const auto hm  = hermrt::hermite_eval(n - 1, xi);
                const auto hp  = hermrt::hermite_eval(n + 1, xi);
                for (int c = 0; c < hp.size(); ++c)
                {
                    const auto idx = hp.index_tuple(c);
                    double xih     = 0.0;
                    for (int p = 0; p <= n; ++p)
                    {
                        std::vector<int> rest;
                        for (int q = 0; q <= n; ++q)
                        {
                            if (q != p)
                            {
                                rest.push_back(idx[static_cast<std::size_t>(q)]);
                            }
                        }
                        xih += xi[static_cast<std::size_t>(idx[static_cast<std::size_t>(p)])] * hn.at(rest);
                    }
                    xih /= (n + 1);
                    double dh = 0.0;
                    int pairs = 0;
                    for (int p = 0; p <= n; ++p)
                    {
                        for (int q = p + 1; q <= n; ++q)
                        {
                            ++pairs;
                            if (idx[static_cast<std::size_t>(p)] != idx[static_cast<std::size_t>(q)])
                            {
                                continue;
                            }
                            std::vector<int> rest;
                            for (int r = 0; r <= n; ++r)
                            {
                                if (r != p && r != q)
                                {
                                    rest.push_back(idx[static_cast<std::size_t>(r)]);
                                }
                            }
                            dh += hm.at(rest);
                        }
                    }
                    dh /= pairs;
                    CHECK(std::abs(xih - (hp[c] + n * dh)) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("monomial expansion")
{
    oracle::Rng rng(16);
    for (int dim = 1; dim <= 3; ++dim)
    {
        for (int trial = 0; trial < 200; ++trial)
        {
            const auto xi = rng.vec(dim, -2.0, 2.0);
            for (int n = 0; n <= 4; ++n)
            {
                SymTensor sum(n, dim);
                for (int k = 0; 2 * k <= n; ++k)
                {
                    sum += static_cast<double>(hermrt::dnk(n, k)) *
                           hermrt::sym_product(hermrt::hermite_eval(n - 2 * k, xi), hermrt::delta_power(k, dim));
                }
                CHECK(max_abs_diff(sum, hermrt::outer_power(xi, n)) < 1e-12);
            }
        }
    }
}

TEST_CASE("central_from_raw special cases")
{
    oracle::Rng rng(17);
    const double zero[2] = {0.0, 0.0};
    const auto a         = rng.coeffs(2, 4);
    const auto d         = hermrt::central_from_raw(a, zero, 1.0);
    for (int n = 0; n <= 4; ++n)
    {
        CHECK(max_abs_diff(d[n], a[n]) < 1e-15);
    }

    CoeffSet b(2, 4);
    b[2]          = rng.tensor(2, 2);
    const auto d2 = hermrt::central_from_raw(b, zero, 2.0);
    CHECK(max_abs_diff(d2[2], 0.25 * b[2]) < 1e-15);
    CHECK_THROWS(hermrt::central_from_raw(b, zero, 0.0));
    CHECK_THROWS(hermrt::central_from_raw(b, zero, -1.0));
}

// d^(n) = theta^{-D/2} integral f H^(n)((xi-u)/sqrt(theta)) for the continuous
// distribution reconstructed from a.
TEST_CASE("central_from_raw matches dense-grid integration")
{
    oracle::Rng rng(18);
    for (int trial = 0; trial < 3; ++trial)
    {
        const auto a     = rng.coeffs(2, 4, 0.3);
        const auto u     = rng.vec(2, -0.5, 0.5);
        const double th  = 1.3;
        const auto d     = hermrt::central_from_raw(a, u, th);
        CoeffSet quad(2, 4);
        const double pre = std::pow(th, -1.0);
        oracle::grid_integrate(2, 12.0, 0.08, [&](std::span<const double> xi, double w) {
            const double f = oracle::reconstruct(a, xi);
            const double c[2] = {(xi[0] - u[0]) / std::sqrt(th), (xi[1] - u[1]) / std::sqrt(th)};
            for (int n = 0; n <= 4; ++n)
            {
                quad[n].add_scaled(w * pre * f, oracle::hermite_product(n, c));
            }
        });
        for (int n = 0; n <= 4; ++n)
        {
            CHECK(max_abs_diff(d[n], quad[n]) < 1e-8);
        }
    }
}

TEST_CASE("central_from_raw in three dimensions matches grid integration")
{
    oracle::Rng rng(19);
    const auto a    = rng.coeffs(3, 4, 0.3);
    const auto u    = rng.vec(3, -0.4, 0.4);
    const double th = 0.8;
    const auto d    = hermrt::central_from_raw(a, u, th);
    CoeffSet quad(3, 4);
    const double pre = std::pow(th, -1.5);
    oracle::grid_integrate(3, 10.0, 0.25, [&](std::span<const double> xi, double w) {
        const double f = oracle::reconstruct(a, xi);
        double c[3];
        for (int j = 0; j < 3; ++j)
        {
            c[j] = (xi[static_cast<std::size_t>(j)] - u[static_cast<std::size_t>(j)]) / std::sqrt(th);
        }
        for (int n = 0; n <= 4; ++n)
        {
            quad[n].add_scaled(w * pre * f, oracle::hermite_product(n, std::span<const double>(c, 3)));
        }
    });
    for (int n = 0; n <= 4; ++n)
    {
        CHECK(max_abs_diff(d[n], quad[n]) < 1e-8);
    }
}

TEST_CASE("raw_from_central_collision round trips")
{
    oracle::Rng rng(20);
    const double u[2] = {0.1, 0.2};

    const CoeffSet z(2, 4);
    const auto az = hermrt::raw_from_central_collision(z, u, 0.9);
    for (int n = 0; n <= 4; ++n)
    {
        CHECK(az[n].is_zero());
    }

    for (int dim = 2; dim <= 3; ++dim)
    {
        const std::vector<double> zero(static_cast<std::size_t>(dim), 0.0);
        for (int trial = 0; trial < 100; ++trial)
        {
            auto d = rng.coeffs(dim, 4);
            d[0]   = SymTensor(0, dim);
            d[1]   = SymTensor(1, dim);

            const auto same = hermrt::raw_from_central_collision(d, zero, 1.0);
            for (int n = 0; n <= 4; ++n)
            {
                CHECK(max_abs_diff(same[n], d[n]) < 1e-15);
            }

            const auto v    = dim == 2 ? std::vector<double>{0.1, 0.2} : rng.vec(dim, -0.3, 0.3);
            const double th = dim == 2 ? 0.9 : rng.uniform(0.6, 1.5);
            const auto a    = hermrt::raw_from_central_collision(d, v, th);
            const auto back = hermrt::central_from_raw(a, v, th);
            for (int n = 0; n <= 4; ++n)
            {
                CHECK(max_abs_diff(back[n], d[n]) < 1e-12);
            }

            // the other direction on raw sets with vanishing orders 0 and 1
            auto r = rng.coeffs(dim, 4);
            r[0]   = SymTensor(0, dim);
            r[1]   = SymTensor(1, dim);
            const auto rr = hermrt::raw_from_central_collision(hermrt::central_from_raw(r, v, th), v, th);
            for (int n = 0; n <= 4; ++n)
            {
                CHECK(max_abs_diff(rr[n], r[n]) < 1e-12);
            }
        }
    }

    auto bad = rng.coeffs(2, 4);
    CHECK_THROWS(hermrt::raw_from_central_collision(bad, u, 0.9));
}

TEST_CASE("equilibrium coefficients")
{
    const double u[2] = {0.1, 0.0};
    CHECK(hermrt::equilibrium_raw_coeffs(1.7, u, 1.2, 0)[0] == doctest::Approx(1.7));
    const auto a2 = hermrt::equilibrium_raw_coeffs(1.0, u, 1.2, 2);
    CHECK(a2({0, 0}) == doctest::Approx(0.21).epsilon(1e-14));
    CHECK(a2({0, 1}) == doctest::Approx(0.0));
    CHECK(a2({1, 1}) == doctest::Approx(0.2).epsilon(1e-14));

    oracle::Rng rng(21);
    for (int trial = 0; trial < 3; ++trial)
    {
        const double rho = rng.uniform(0.5, 2.0);
        const auto v     = rng.vec(2, -0.4, 0.4);
        const double th  = rng.uniform(0.7, 1.4);
        CoeffSet quad(2, 4);
        oracle::grid_integrate(2, 12.0, 0.08, [&](std::span<const double> xi, double w) {
            const double f = maxwellian(xi, rho, v, th);
            for (int n = 0; n <= 4; ++n)
            {
                quad[n].add_scaled(w * f, oracle::hermite_product(n, xi));
            }
        });
        const auto eq = hermrt::equilibrium_coeffs(rho, v, th, 4);
        for (int n = 0; n <= 4; ++n)
        {
            CHECK(max_abs_diff(hermrt::equilibrium_raw_coeffs(rho, v, th, n), quad[n]) < 1e-8);
            CHECK(max_abs_diff(eq[n], quad[n]) < 1e-8);
        }
    }
}

TEST_CASE("orthogonality under grid integration")
{
    oracle::Rng rng(22);
    for (int dim = 2; dim <= 3; ++dim)
    {
        const double h = dim == 2 ? 0.1 : 0.25;
        for (int m = 0; m <= 3; ++m)
        {
            for (int n = 0; n <= 3; ++n)
            {
                const auto a = rng.tensor(m, dim);
                const auto b = rng.tensor(n, dim);
                double q     = 0.0;
                oracle::grid_integrate(dim, 10.0, h, [&](std::span<const double> xi, double w) {
                    q += w * oracle::gaussian_weight(xi) * oracle::full_contract(a, hermrt::hermite_eval(m, xi)) *
                         oracle::full_contract(b, hermrt::hermite_eval(n, xi));
                });
                // a:<H H>:b = n! a:b for symmetric a, b of equal rank
                const double expect = m == n ? factorial(n) * oracle::full_contract(a, b) : 0.0;
                CHECK(std::abs(q - expect) < 1e-8);
            }
        }
    }
}
