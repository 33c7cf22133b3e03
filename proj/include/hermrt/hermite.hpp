#ifndef HERMRT_HERMITE_HPP
#define HERMRT_HERMITE_HPP

#include <array>
#include <cstdint>
#include <span>

#include "hermrt/sym_tensor.hpp"

namespace hermrt
{

/// D_n^k = n! / ((n-2k)! 2^k k!), the number of ways to pick k disjoint
/// index pairs out of n indices. Exact integer arithmetic.
std::int64_t dnk(int n, int k);

/// Binomial coefficient C_n^k.
std::int64_t binomial(int n, int k);

/// Hermite coefficients a^(0..N) (or d^(0..N)) of one distribution.
class CoeffSet
{
public:
    static constexpr int kMaxOrder = 4;

    CoeffSet() = default;
    CoeffSet(int dim, int max_order);

    int dim() const noexcept { return dim_; }
    int max_order() const noexcept { return max_order_; }

    SymTensor& operator[](int n) { return tensors_[static_cast<std::size_t>(n)]; }
    const SymTensor& operator[](int n) const { return tensors_[static_cast<std::size_t>(n)]; }

    CoeffSet& operator+=(const CoeffSet& rhs);
    CoeffSet& operator-=(const CoeffSet& rhs);
    CoeffSet& operator*=(double s);
    friend CoeffSet operator+(CoeffSet a, const CoeffSet& b) { return a += b; }
    friend CoeffSet operator-(CoeffSet a, const CoeffSet& b) { return a -= b; }
    friend CoeffSet operator*(CoeffSet a, double s) { return a *= s; }

private:
    std::array<SymTensor, kMaxOrder + 1> tensors_{};
    int dim_       = 1;
    int max_order_ = 0;
};

/// Rank-n Hermite tensor polynomial
///   H^(n)(xi) = sum_k (-1)^k D_n^k Sym(xi^(n-2k) delta^k).
SymTensor hermite_eval(int n, std::span<const double> xi);

/// A_m(u, theta) = sum_k D_m^k (1 - theta)^k Sym(u^(m-2k) delta^k).
SymTensor a_poly(int m, std::span<const double> u, double theta);

/// H^(n)(xi + u) through the shift theorem.
SymTensor shift_hermite(int n, std::span<const double> xi, std::span<const double> u);

/// H^(n)(alpha xi) through the scaling theorem.
SymTensor scale_hermite(int n, std::span<const double> xi, double alpha);

/// H^(n)((xi - u) / sqrt(theta)) expanded in laboratory-frame polynomials.
SymTensor moving_frame_hermite(int n, std::span<const double> xi, std::span<const double> u, double theta);

///
/// Laboratory to co-moving transform of Hermite coefficients:
///
///   d^(n) = theta^{-(D+n)/2} sum_k (-1)^{n-k} C_n^k Sym(a^(k) A_{n-k}(u, theta)).
///
CoeffSet central_from_raw(const CoeffSet& a, std::span<const double> u, double theta);

///
/// Inverse transform of collision coefficients. Orders 0 and 1 of the input
/// must vanish identically (the collision conserves mass and momentum).
///
CoeffSet raw_from_central_collision(const CoeffSet& d_omega, std::span<const double> u, double theta);

/// Order-n laboratory-frame coefficient of the Maxwell-Boltzmann
/// distribution, rho sum_k D_n^k (theta - 1)^k Sym(u^(n-2k) delta^k).
SymTensor equilibrium_raw_coeffs(double rho, std::span<const double> u, double theta, int n);

/// All equilibrium coefficients up to `max_order`.
CoeffSet equilibrium_coeffs(double rho, std::span<const double> u, double theta, int max_order);

}  // namespace hermrt

#endif  // HERMRT_HERMITE_HPP
