#include "hermrt/irrep.hpp"

#include <stdexcept>
#include <string>

namespace hermrt
{

int irrep_count(int rank)
{
    switch (rank)
    {
    case 2:
    case 3:
        return 2;
    case 4:
        return 3;
    default:
        throw std::domain_error("irrep decomposition: unsupported rank " + std::to_string(rank));
    }
}

namespace
{

// The isotropic pieces of each rank, written with normalized symmetrizers:
//   3 Sym(v delta)    = v_i d_jk + v_j d_ik + v_k d_ij
//   6 Sym(b delta)    = six distinct placements of b in a rank-4 tensor
//   3 Sym(delta delta) = d_ij d_kl + d_ik d_jl + d_il d_jk
SymTensor isotropic_part(const IrrepParts& p, int dim)
{
    const double d      = dim;
    const SymTensor del = SymTensor::delta(dim);
    switch (p.rank)
    {
    case 2:
        return (p[1][0] / d) * del;
    case 3:
        return (3.0 / (d + 2.0)) * sym_product(p[1], del);
    default:
        return (6.0 / (d + 4.0)) * sym_product(p[1], del) +
               (3.0 * p[2][0] / (d * (d + 2.0))) * sym_product(del, del);
    }
}

}  // namespace

IrrepParts decompose(const SymTensor& a)
{
    IrrepParts out;
    out.rank      = a.rank();
    out.count     = irrep_count(a.rank());
    const int dim = a.dim();
    if (dim < 2)
    {
        throw std::domain_error("irrep decomposition: dimension must be at least 2");
    }
    switch (a.rank())
    {
    case 2:
        out[1] = trace(a);
        break;
    case 3:
        out[1] = trace(a);
        break;
    default:
    {
        const SymTensor t2 = trace(a);
        out[2]             = trace(t2);
        out[1]             = t2 - (out[2][0] / dim) * SymTensor::delta(dim);
        break;
    }
    }
    out[0] = a - isotropic_part(out, dim);
    return out;
}

SymTensor reassemble(const IrrepParts& parts)
{
    const int count = irrep_count(parts.rank);
    if (parts.count != count)
    {
        throw std::invalid_argument("reassemble: wrong number of parts");
    }
    const int dim = parts[0].dim();
    const int expected[3][3] = {{2, 0, -1}, {3, 1, -1}, {4, 2, 0}};
    for (int k = 0; k < count; ++k)
    {
        if (parts[k].rank() != expected[parts.rank - 2][k] || parts[k].dim() != dim)
        {
            throw std::invalid_argument("reassemble: part rank mismatch");
        }
    }
    return parts[0] + isotropic_part(parts, dim);
}

IrrepParts relax_parts(const IrrepParts& parts, std::span<const double> taus)
{
    if (static_cast<int>(taus.size()) < parts.count)
    {
        throw std::invalid_argument("relax_parts: one relaxation time per part required");
    }
    IrrepParts out = parts;
    for (int k = 0; k < parts.count; ++k)
    {
        const double tau = taus[static_cast<std::size_t>(k)];
        if (!(tau > 0.0))
        {
            throw std::domain_error("relax_parts: relaxation times must be positive");
        }
        out[k] *= -1.0 / tau;
    }
    return out;
}

}  // namespace hermrt
