#ifndef HERMRT_SRC_SYM_TABLES_HPP
#define HERMRT_SRC_SYM_TABLES_HPP

#include <array>
#include <span>
#include <vector>

#include "hermrt/sym_tensor.hpp"

namespace hermrt::detail
{

struct RankTable
{
    int size = 0;
    std::vector<std::array<int, 4>> tuples;
    std::vector<int> mult;
    std::vector<int> flat_to_compact;
};

struct ProductTerm
{
    int out;
    int a;
    int b;
    double w;
};

// Index bookkeeping shared by every SymTensor; built once on first use.
struct Tables
{
    Tables();

    int compact(int dim, int rank, std::span<const int> idx) const;

    std::array<std::array<RankTable, SymTensor::kMaxRank + 1>, SymTensor::kMaxDim + 1> ranks;
    std::array<std::array<std::array<std::vector<ProductTerm>, SymTensor::kMaxRank + 1>, SymTensor::kMaxRank + 1>,
               SymTensor::kMaxDim + 1>
        products;
    // (output slot, input slot) pairs for the first-pair contraction.
    std::array<std::array<std::vector<std::array<int, 2>>, SymTensor::kMaxRank + 1>, SymTensor::kMaxDim + 1> traces;
};

const Tables& tables();

}  // namespace hermrt::detail

#endif  // HERMRT_SRC_SYM_TABLES_HPP
