#include "hermrt/sym_tensor.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "sym_tables.hpp"

namespace hermrt
{

namespace detail
{

namespace
{

int ipow(int base, int e)
{
    int r = 1;
    for (int i = 0; i < e; ++i)
    {
        r *= base;
    }
    return r;
}

int factorial(int n)
{
    int r = 1;
    for (int i = 2; i <= n; ++i)
    {
        r *= i;
    }
    return r;
}

void enumerate_sorted(int dim, int rank, int start, std::array<int, 4>& cur, int pos,
                      std::vector<std::array<int, 4>>& out)
{
    if (pos == rank)
    {
        out.push_back(cur);
        return;
    }
    for (int v = start; v < dim; ++v)
    {
        cur[pos] = v;
        enumerate_sorted(dim, rank, v, cur, pos + 1, out);
    }
}

RankTable build_rank_table(int dim, int rank)
{
    RankTable t;
    std::array<int, 4> cur{};
    enumerate_sorted(dim, rank, 0, cur, 0, t.tuples);
    t.size = static_cast<int>(t.tuples.size());
    t.mult.resize(t.tuples.size());
    for (std::size_t c = 0; c < t.tuples.size(); ++c)
    {
        int denom = 1;
        int run   = 1;
        for (int p = 1; p <= rank; ++p)
        {
            if (p < rank && t.tuples[c][p] == t.tuples[c][p - 1])
            {
                ++run;
            }
            else
            {
                denom *= factorial(run);
                run = 1;
            }
        }
        t.mult[c] = factorial(rank) / denom;
    }
    const int nflat = ipow(dim, rank);
    t.flat_to_compact.resize(static_cast<std::size_t>(nflat));
    for (int flat = 0; flat < nflat; ++flat)
    {
        std::array<int, 4> idx{};
        int rem = flat;
        for (int p = 0; p < rank; ++p)
        {
            idx[p] = rem % dim;
            rem /= dim;
        }
        std::sort(idx.begin(), idx.begin() + rank);
        const auto it = std::find(t.tuples.begin(), t.tuples.end(), idx);
        t.flat_to_compact[static_cast<std::size_t>(flat)] = static_cast<int>(it - t.tuples.begin());
    }
    return t;
}

}  // namespace

int Tables::compact(int dim, int rank, std::span<const int> idx) const
{
    const RankTable& t = ranks[dim][rank];
    int flat           = 0;
    int scale          = 1;
    for (int p = 0; p < rank; ++p)
    {
        flat += idx[p] * scale;
        scale *= dim;
    }
    return t.flat_to_compact[static_cast<std::size_t>(flat)];
}

Tables::Tables()
{
    for (int dim = 1; dim <= SymTensor::kMaxDim; ++dim)
    {
        for (int rank = 0; rank <= SymTensor::kMaxRank; ++rank)
        {
            ranks[dim][rank] = build_rank_table(dim, rank);
        }
    }
    for (int dim = 1; dim <= SymTensor::kMaxDim; ++dim)
    {
        for (int p = 0; p <= SymTensor::kMaxRank; ++p)
        {
            for (int q = 0; p + q <= SymTensor::kMaxRank; ++q)
            {
                const int n          = p + q;
                const RankTable& out = ranks[dim][n];
                // Subsets of n positions of size p, as bit masks.
                std::vector<unsigned> subsets;
                for (unsigned mask = 0; mask < (1u << n); ++mask)
                {
                    if (__builtin_popcount(mask) == p)
                    {
                        subsets.push_back(mask);
                    }
                }
                const double w = 1.0 / static_cast<double>(subsets.size());
                auto& terms    = products[dim][p][q];
                for (int c = 0; c < out.size; ++c)
                {
                    const auto& tup = out.tuples[static_cast<std::size_t>(c)];
                    for (unsigned mask : subsets)
                    {
                        std::array<int, 4> ia{};
                        std::array<int, 4> ib{};
                        int na = 0;
                        int nb = 0;
                        for (int pos = 0; pos < n; ++pos)
                        {
                            if (mask & (1u << pos))
                            {
                                ia[na++] = tup[pos];
                            }
                            else
                            {
                                ib[nb++] = tup[pos];
                            }
                        }
                        const int ca = compact(dim, p, ia);
                        const int cb = compact(dim, q, ib);
                        auto it      = std::find_if(terms.begin(), terms.end(), [&](const ProductTerm& t) {
                            return t.out == c && t.a == ca && t.b == cb;
                        });
                        if (it != terms.end())
                        {
                            it->w += w;
                        }
                        else
                        {
                            terms.push_back({c, ca, cb, w});
                        }
                    }
                }
            }
        }
        for (int rank = 2; rank <= SymTensor::kMaxRank; ++rank)
        {
            const RankTable& out = ranks[dim][rank - 2];
            auto& entries        = traces[dim][rank];
            for (int c = 0; c < out.size; ++c)
            {
                for (int p = 0; p < dim; ++p)
                {
                    std::array<int, 4> idx{};
                    idx[0] = p;
                    idx[1] = p;
                    for (int j = 0; j < rank - 2; ++j)
                    {
                        idx[j + 2] = out.tuples[static_cast<std::size_t>(c)][j];
                    }
                    entries.push_back({c, compact(dim, rank, idx)});
                }
            }
        }
    }
}

const Tables& tables()
{
    static const Tables t;
    return t;
}

}  // namespace detail

namespace
{

void check_shape(int rank, int dim)
{
    if (rank < 0 || rank > SymTensor::kMaxRank)
    {
        throw std::domain_error("SymTensor: unsupported rank " + std::to_string(rank));
    }
    if (dim < 1 || dim > SymTensor::kMaxDim)
    {
        throw std::domain_error("SymTensor: unsupported dimension " + std::to_string(dim));
    }
}

}  // namespace

int sym_size(int rank, int dim)
{
    check_shape(rank, dim);
    return detail::kSymSizes[dim][rank];
}

void SymTensor::throw_bad_shape(int rank, int dim)
{
    check_shape(rank, dim);
    throw std::domain_error("SymTensor: bad shape");
}

void SymTensor::throw_shape_mismatch() { throw std::invalid_argument("SymTensor: rank/dimension mismatch"); }

SymTensor SymTensor::scalar(double value, int dim)
{
    SymTensor t(0, dim);
    t.data_[0] = value;
    return t;
}

SymTensor SymTensor::vector(std::span<const double> v)
{
    SymTensor t(1, static_cast<int>(v.size()));
    std::copy(v.begin(), v.end(), t.data_.begin());
    return t;
}

SymTensor SymTensor::delta(int dim)
{
    // Diagonal slots of the compact rank-2 layout.
    static constexpr int kDiag[4][3] = {{0, 0, 0}, {0, 0, 0}, {0, 2, 0}, {0, 3, 5}};
    SymTensor t(2, dim);
    for (int p = 0; p < dim; ++p)
    {
        t.data_[static_cast<std::size_t>(kDiag[dim][p])] = 1.0;
    }
    return t;
}

int SymTensor::compact_index(std::span<const int> idx) const
{
    if (static_cast<int>(idx.size()) != rank_)
    {
        throw std::invalid_argument("SymTensor: index tuple length does not match rank");
    }
    for (int i : idx)
    {
        if (i < 0 || i >= dim_)
        {
            throw std::out_of_range("SymTensor: index out of range");
        }
    }
    return detail::tables().compact(dim_, rank_, idx);
}

double SymTensor::at(std::span<const int> idx) const
{
    return data_[static_cast<std::size_t>(compact_index(idx))];
}

void SymTensor::set(std::span<const int> idx, double value)
{
    data_[static_cast<std::size_t>(compact_index(idx))] = value;
}

int SymTensor::multiplicity(int c) const
{
    return detail::tables().ranks[dim_][rank_].mult[static_cast<std::size_t>(c)];
}

std::array<int, 4> SymTensor::index_tuple(int c) const
{
    return detail::tables().ranks[dim_][rank_].tuples[static_cast<std::size_t>(c)];
}

double SymTensor::norm() const
{
    const auto& mult = detail::tables().ranks[dim_][rank_].mult;
    double acc       = 0.0;
    for (int c = 0; c < size_; ++c)
    {
        acc += mult[static_cast<std::size_t>(c)] * data_[c] * data_[c];
    }
    return std::sqrt(acc);
}

double SymTensor::max_abs() const noexcept
{
    double m = 0.0;
    for (int c = 0; c < size_; ++c)
    {
        m = std::max(m, std::abs(data_[c]));
    }
    return m;
}

bool SymTensor::is_zero() const noexcept
{
    for (int c = 0; c < size_; ++c)
    {
        if (data_[c] != 0.0)
        {
            return false;
        }
    }
    return true;
}

SymTensor sym_product(const SymTensor& a, const SymTensor& b)
{
    if (a.dim() != b.dim())
    {
        throw std::invalid_argument("sym_product: dimension mismatch");
    }
    const int n = a.rank() + b.rank();
    if (n > SymTensor::kMaxRank)
    {
        throw std::domain_error("sym_product: result rank exceeds 4");
    }
    SymTensor out(n, a.dim());
    for (const auto& t : detail::tables().products[a.dim()][a.rank()][b.rank()])
    {
        out[t.out] += t.w * a[t.a] * b[t.b];
    }
    return out;
}

SymTensor outer_power(std::span<const double> u, int m)
{
    const int dim = static_cast<int>(u.size());
    SymTensor out(m, dim);
    for (int c = 0; c < out.size(); ++c)
    {
        const auto tup = out.index_tuple(c);
        double v       = 1.0;
        for (int p = 0; p < m; ++p)
        {
            v *= u[static_cast<std::size_t>(tup[p])];
        }
        out[c] = v;
    }
    return out;
}

SymTensor delta_power(int k, int dim)
{
    SymTensor out = SymTensor::scalar(1.0, dim);
    const SymTensor d = SymTensor::delta(dim);
    for (int i = 0; i < k; ++i)
    {
        out = sym_product(out, d);
    }
    return out;
}

const SymTensor& delta_power_ref(int k, int dim)
{
    static const auto cache = [] {
        std::array<std::array<SymTensor, 3>, SymTensor::kMaxDim + 1> c{};
        for (int d = 1; d <= SymTensor::kMaxDim; ++d)
        {
            for (int k = 0; k < 3; ++k)
            {
                c[d][k] = delta_power(k, d);
            }
        }
        return c;
    }();
    if (k < 0 || k > 2 || dim < 1 || dim > SymTensor::kMaxDim)
    {
        throw std::domain_error("delta_power_ref: unsupported rank or dimension");
    }
    return cache[static_cast<std::size_t>(dim)][static_cast<std::size_t>(k)];
}

SymTensor trace(const SymTensor& a)
{
    if (a.rank() < 2)
    {
        throw std::domain_error("trace: rank must be at least 2");
    }
    SymTensor out(a.rank() - 2, a.dim());
    for (const auto& e : detail::tables().traces[a.dim()][a.rank()])
    {
        out[e[0]] += a[e[1]];
    }
    return out;
}

double contract(const SymTensor& a, const SymTensor& b)
{
    if (a.rank() != b.rank() || a.dim() != b.dim())
    {
        throw std::invalid_argument("contract: rank/dimension mismatch");
    }
    const auto& mult = detail::tables().ranks[a.dim()][a.rank()].mult;
    double acc       = 0.0;
    for (int c = 0; c < a.size(); ++c)
    {
        acc += mult[static_cast<std::size_t>(c)] * a[c] * b[c];
    }
    return acc;
}

SymTensor rotate(const SymTensor& a, std::span<const double> rot)
{
    const int dim  = a.dim();
    const int rank = a.rank();
    if (static_cast<int>(rot.size()) != dim * dim)
    {
        throw std::invalid_argument("rotate: matrix size does not match dimension");
    }
    SymTensor out(rank, dim);
    int nflat = 1;
    for (int p = 0; p < rank; ++p)
    {
        nflat *= dim;
    }
    for (int c = 0; c < out.size(); ++c)
    {
        const auto oi = out.index_tuple(c);
        double acc    = 0.0;
        for (int flat = 0; flat < nflat; ++flat)
        {
            std::array<int, 4> idx{};
            int rem  = flat;
            double w = 1.0;
            for (int p = 0; p < rank; ++p)
            {
                idx[p] = rem % dim;
                rem /= dim;
                w *= rot[static_cast<std::size_t>(oi[p] * dim + idx[p])];
            }
            acc += w * a.at(std::span<const int>(idx.data(), static_cast<std::size_t>(rank)));
        }
        out[c] = acc;
    }
    return out;
}

}  // namespace hermrt
