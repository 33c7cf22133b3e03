#ifndef HERMRT_IRREP_HPP
#define HERMRT_IRREP_HPP

#include <array>
#include <span>

#include "hermrt/sym_tensor.hpp"

namespace hermrt
{

///
/// Irreducible (traceless) parts of a symmetric tensor of rank 2, 3 or 4.
///
///  - rank 2: (a' traceless rank 2, a_pp scalar)
///  - rank 3: (a' traceless rank 3, a_ppi vector)
///  - rank 4: (a' traceless rank 4, a''_ppij traceless rank 2, a_ppqq scalar)
///
struct IrrepParts
{
    int rank  = 2;
    int count = 0;
    std::array<SymTensor, 3> parts{};

    SymTensor& operator[](int k) { return parts[static_cast<std::size_t>(k)]; }
    const SymTensor& operator[](int k) const { return parts[static_cast<std::size_t>(k)]; }
};

/// Number of irreducible parts for a tensor of the given rank.
int irrep_count(int rank);

IrrepParts decompose(const SymTensor& a);

SymTensor reassemble(const IrrepParts& parts);

/// Scales part k by -1/tau[k]; `taus` must hold irrep_count(rank) entries.
IrrepParts relax_parts(const IrrepParts& parts, std::span<const double> taus);

}  // namespace hermrt

#endif  // HERMRT_IRREP_HPP
