#include "hermrt/hermite.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "hermite_kernels.hpp"

namespace hermrt
{

namespace
{

void check_order(int n, const char* what)
{
    if (n < 0 || n > SymTensor::kMaxRank)
    {
        throw std::domain_error(std::string(what) + ": order " + std::to_string(n) + " not supported (max 4)");
    }
}

void check_theta(double theta, const char* what)
{
    if (!(theta > 0.0))
    {
        throw std::domain_error(std::string(what) + ": theta must be positive");
    }
}

std::int64_t factorial(int n)
{
    std::int64_t r = 1;
    for (int i = 2; i <= n; ++i)
    {
        r *= i;
    }
    return r;
}

double sign_pow(int e) { return (e % 2 == 0) ? 1.0 : -1.0; }

}  // namespace

std::int64_t dnk(int n, int k)
{
    if (n < 0 || k < 0 || 2 * k > n)
    {
        throw std::domain_error("dnk: requires 0 <= 2k <= n");
    }
    if (n > 20)
    {
        throw std::domain_error("dnk: n too large for 64-bit arithmetic");
    }
    return factorial(n) / (factorial(n - 2 * k) * (std::int64_t{1} << k) * factorial(k));
}

std::int64_t binomial(int n, int k)
{
    if (n < 0 || k < 0 || k > n)
    {
        throw std::domain_error("binomial: requires 0 <= k <= n");
    }
    std::int64_t r = 1;
    for (int i = 1; i <= k; ++i)
    {
        r = r * (n - k + i) / i;
    }
    return r;
}

CoeffSet::CoeffSet(int dim, int max_order) : dim_(dim), max_order_(max_order)
{
    check_order(max_order, "CoeffSet");
    for (int n = 0; n <= max_order; ++n)
    {
        tensors_[static_cast<std::size_t>(n)] = SymTensor(n, dim);
    }
}

CoeffSet& CoeffSet::operator+=(const CoeffSet& rhs)
{
    if (rhs.dim_ != dim_ || rhs.max_order_ != max_order_)
    {
        throw std::invalid_argument("CoeffSet: shape mismatch");
    }
    for (int n = 0; n <= max_order_; ++n)
    {
        (*this)[n] += rhs[n];
    }
    return *this;
}

CoeffSet& CoeffSet::operator-=(const CoeffSet& rhs)
{
    if (rhs.dim_ != dim_ || rhs.max_order_ != max_order_)
    {
        throw std::invalid_argument("CoeffSet: shape mismatch");
    }
    for (int n = 0; n <= max_order_; ++n)
    {
        (*this)[n] -= rhs[n];
    }
    return *this;
}

CoeffSet& CoeffSet::operator*=(double s)
{
    for (int n = 0; n <= max_order_; ++n)
    {
        (*this)[n] *= s;
    }
    return *this;
}

namespace
{

constexpr std::int64_t kSmallDnk[5][3] = {{1, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 3, 0}, {1, 6, 3}};

// sum_k D_m^k x^k Sym(u^(m-2k) delta^k).
SymTensor binomial_series(int m, std::span<const double> u, double x)
{
    const auto upow = detail::outer_powers(u, m);
    return detail::binomial_ladder(upow, static_cast<int>(u.size()), x, m)[static_cast<std::size_t>(m)];
}

}  // namespace

namespace detail
{

TensorLadder outer_powers(std::span<const double> u, int nmax)
{
    const int dim = static_cast<int>(u.size());
    TensorLadder out;
    out[0] = SymTensor::scalar(1.0, dim);
    if (nmax >= 1)
    {
        out[1] = SymTensor::vector(u);
    }
    for (int m = 2; m <= nmax; ++m)
    {
        out[static_cast<std::size_t>(m)] = sym_product(out[static_cast<std::size_t>(m - 1)], out[1]);
    }
    return out;
}

TensorLadder binomial_ladder(const TensorLadder& upow, int dim, double x, int nmax)
{
    TensorLadder out;
    for (int m = 0; m <= nmax; ++m)
    {
        SymTensor acc = upow[static_cast<std::size_t>(m)];
        double xk     = 1.0;
        for (int k = 1; 2 * k <= m; ++k)
        {
            xk *= x;
            if (xk != 0.0)
            {
                acc.add_scaled(static_cast<double>(kSmallDnk[m][k]) * xk,
                               sym_product(upow[static_cast<std::size_t>(m - 2 * k)], delta_power_ref(k, dim)));
            }
        }
        out[static_cast<std::size_t>(m)] = acc;
    }
    return out;
}

namespace
{

// theta^{-(D+n)/2} for n = 0..4, from one square root.
std::array<double, CoeffSet::kMaxOrder + 1> theta_factors(double theta, int dim)
{
    const double rt = std::sqrt(theta);
    std::array<double, CoeffSet::kMaxOrder + 1> out{};
    double base = 1.0;
    for (int j = 0; j < dim; ++j)
    {
        base /= rt;
    }
    for (int n = 0; n <= CoeffSet::kMaxOrder; ++n)
    {
        out[static_cast<std::size_t>(n)] = base;
        base /= rt;
    }
    return out;
}

constexpr double kBinom[5][5] = {
    {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};

}  // namespace

CoeffSet central_from_raw(const CoeffSet& a, const TensorLadder& apoly, double theta)
{
    const int dim  = a.dim();
    const int nmax = a.max_order();
    const auto tf  = theta_factors(theta, dim);
    CoeffSet d(dim, nmax);
    for (int n = 0; n <= nmax; ++n)
    {
        SymTensor& acc = d[n];
        for (int k = 0; k <= n; ++k)
        {
            if (a[k].is_zero())
            {
                continue;
            }
            const double s = ((n - k) % 2 == 0 ? 1.0 : -1.0) * kBinom[n][k];
            if (k == n)
            {
                acc.add_scaled(s, a[k]);
            }
            else
            {
                acc.add_scaled(s, sym_product(a[k], apoly[static_cast<std::size_t>(n - k)]));
            }
        }
        acc *= tf[static_cast<std::size_t>(n)];
    }
    return d;
}

CoeffSet raw_from_central(const CoeffSet& d, const TensorLadder& apoly, double theta)
{
    const int dim  = d.dim();
    const int nmax = d.max_order();
    const auto tf  = theta_factors(theta, dim);
    CoeffSet a(dim, nmax);
    for (int n = 2; n <= nmax; ++n)
    {
        SymTensor acc = d[n] * (1.0 / tf[static_cast<std::size_t>(n)]);
        for (int k = 2; k < n; ++k)
        {
            const double s = ((n - k) % 2 == 0 ? 1.0 : -1.0) * kBinom[n][k];
            acc.add_scaled(-s, sym_product(a[k], apoly[static_cast<std::size_t>(n - k)]));
        }
        a[n] = acc;
    }
    return a;
}

}  // namespace detail

SymTensor hermite_eval(int n, std::span<const double> xi)
{
    check_order(n, "hermite_eval");
    return binomial_series(n, xi, -1.0);
}

SymTensor a_poly(int m, std::span<const double> u, double theta)
{
    check_order(m, "a_poly");
    return binomial_series(m, u, 1.0 - theta);
}

SymTensor shift_hermite(int n, std::span<const double> xi, std::span<const double> u)
{
    check_order(n, "shift_hermite");
    if (xi.size() != u.size())
    {
        throw std::invalid_argument("shift_hermite: dimension mismatch");
    }
    SymTensor out(n, static_cast<int>(xi.size()));
    for (int k = 0; k <= n; ++k)
    {
        out += static_cast<double>(binomial(n, k)) * sym_product(hermite_eval(k, xi), outer_power(u, n - k));
    }
    return out;
}

SymTensor scale_hermite(int n, std::span<const double> xi, double alpha)
{
    check_order(n, "scale_hermite");
    if (alpha == 0.0)
    {
        throw std::domain_error("scale_hermite: alpha must be nonzero");
    }
    const int dim  = static_cast<int>(xi.size());
    const double x = 1.0 - 1.0 / (alpha * alpha);
    SymTensor out(n, dim);
    double xm = 1.0;
    for (int m = 0; 2 * m <= n; ++m)
    {
        out += static_cast<double>(dnk(n, m)) * xm * sym_product(hermite_eval(n - 2 * m, xi), delta_power(m, dim));
        xm *= x;
    }
    return out * std::pow(alpha, n);
}

SymTensor moving_frame_hermite(int n, std::span<const double> xi, std::span<const double> u, double theta)
{
    check_order(n, "moving_frame_hermite");
    check_theta(theta, "moving_frame_hermite");
    if (xi.size() != u.size())
    {
        throw std::invalid_argument("moving_frame_hermite: dimension mismatch");
    }
    SymTensor out(n, static_cast<int>(xi.size()));
    for (int k = 0; k <= n; ++k)
    {
        out += sign_pow(n - k) * static_cast<double>(binomial(n, k)) *
               sym_product(hermite_eval(k, xi), a_poly(n - k, u, theta));
    }
    return out * std::pow(theta, -0.5 * n);
}

CoeffSet central_from_raw(const CoeffSet& a, std::span<const double> u, double theta)
{
    check_theta(theta, "central_from_raw");
    if (static_cast<int>(u.size()) != a.dim())
    {
        throw std::invalid_argument("central_from_raw: dimension mismatch");
    }
    const int nmax  = a.max_order();
    const auto apol = detail::binomial_ladder(detail::outer_powers(u, nmax), a.dim(), 1.0 - theta, nmax);
    return detail::central_from_raw(a, apol, theta);
}

CoeffSet raw_from_central_collision(const CoeffSet& d_omega, std::span<const double> u, double theta)
{
    check_theta(theta, "raw_from_central_collision");
    if (static_cast<int>(u.size()) != d_omega.dim())
    {
        throw std::invalid_argument("raw_from_central_collision: dimension mismatch");
    }
    const int nmax = d_omega.max_order();
    for (int n = 0; n <= std::min(nmax, 1); ++n)
    {
        if (!d_omega[n].is_zero())
        {
            throw std::invalid_argument(
                "raw_from_central_collision: orders 0 and 1 of the collision coefficients must vanish");
        }
    }
    const auto apol = detail::binomial_ladder(detail::outer_powers(u, nmax), d_omega.dim(), 1.0 - theta, nmax);
    return detail::raw_from_central(d_omega, apol, theta);
}

SymTensor equilibrium_raw_coeffs(double rho, std::span<const double> u, double theta, int n)
{
    check_order(n, "equilibrium_raw_coeffs");
    check_theta(theta, "equilibrium_raw_coeffs");
    if (rho < 0.0)
    {
        throw std::domain_error("equilibrium_raw_coeffs: negative density");
    }
    return rho * binomial_series(n, u, theta - 1.0);
}

CoeffSet equilibrium_coeffs(double rho, std::span<const double> u, double theta, int max_order)
{
    check_order(max_order, "equilibrium_coeffs");
    check_theta(theta, "equilibrium_coeffs");
    const int dim   = static_cast<int>(u.size());
    const auto lad  = detail::binomial_ladder(detail::outer_powers(u, max_order), dim, theta - 1.0, max_order);
    CoeffSet a(dim, max_order);
    for (int n = 0; n <= max_order; ++n)
    {
        a[n] = rho * lad[static_cast<std::size_t>(n)];
    }
    return a;
}

}  // namespace hermrt
