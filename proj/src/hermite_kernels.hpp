#ifndef HERMRT_SRC_HERMITE_KERNELS_HPP
#define HERMRT_SRC_HERMITE_KERNELS_HPP

#include <array>
#include <span>

#include "hermrt/hermite.hpp"

// Building blocks shared by the public transforms and the collision kernel.
// The A_m polynomials depend only on (u, theta), so a site evaluates them
// once and reuses them for the forward and inverse transforms.
namespace hermrt::detail
{

using TensorLadder = std::array<SymTensor, CoeffSet::kMaxOrder + 1>;

/// u^m for m = 0..nmax.
TensorLadder outer_powers(std::span<const double> u, int nmax);

/// sum_k D_m^k x^k Sym(u^(m-2k) delta^k) for m = 0..nmax.
TensorLadder binomial_ladder(const TensorLadder& upow, int dim, double x, int nmax);

CoeffSet central_from_raw(const CoeffSet& a, const TensorLadder& apoly, double theta);

/// Inverse of central_from_raw for inputs whose orders 0 and 1 vanish.
CoeffSet raw_from_central(const CoeffSet& d, const TensorLadder& apoly, double theta);

}  // namespace hermrt::detail

#endif  // HERMRT_SRC_HERMITE_KERNELS_HPP
