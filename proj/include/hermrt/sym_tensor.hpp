#ifndef HERMRT_SYM_TENSOR_HPP
#define HERMRT_SYM_TENSOR_HPP

#include <array>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

namespace hermrt
{

namespace detail
{
// C(dim + rank - 1, rank) for dim 0..3, rank 0..4.
inline constexpr std::int8_t kSymSizes[4][5] = {{0, 0, 0, 0, 0}, {1, 1, 1, 1, 1}, {1, 2, 3, 4, 5}, {1, 3, 6, 10, 15}};
}  // namespace detail

///
/// Fully symmetric tensor of rank 0..4 in 1..3 dimensions.
///
/// Only the distinct components are stored, in lexicographic order of the
/// nondecreasing index tuples. For rank 2 in D=2 the layout is
/// (00, 01, 11). The full-index accessor sorts its argument, so any
/// permutation of an index tuple reads the same component.
///
class SymTensor
{
public:
    static constexpr int kMaxRank       = 4;
    static constexpr int kMaxDim        = 3;
    static constexpr int kMaxComponents = 15;  // C(3 + 4 - 1, 4)

    SymTensor() = default;
    SymTensor(int rank, int dim)
        : rank_(static_cast<std::int8_t>(rank)), dim_(static_cast<std::int8_t>(dim))
    {
        if (rank < 0 || rank > kMaxRank || dim < 1 || dim > kMaxDim)
        {
            throw_bad_shape(rank, dim);
        }
        size_ = detail::kSymSizes[dim][rank];
    }

    static SymTensor scalar(double value, int dim);
    static SymTensor vector(std::span<const double> v);
    static SymTensor delta(int dim);

    int rank() const noexcept { return rank_; }
    int dim() const noexcept { return dim_; }
    int size() const noexcept { return size_; }

    double& operator[](int c) noexcept { return data_[c]; }
    double operator[](int c) const noexcept { return data_[c]; }

    std::span<double> components() noexcept { return {data_.data(), static_cast<std::size_t>(size_)}; }
    std::span<const double> components() const noexcept
    {
        return {data_.data(), static_cast<std::size_t>(size_)};
    }

    /// Component addressed by a full index tuple (any order).
    double at(std::span<const int> idx) const;
    double operator()(std::initializer_list<int> idx) const
    {
        return at(std::span<const int>(idx.begin(), idx.size()));
    }
    void set(std::span<const int> idx, double value);
    void set(std::initializer_list<int> idx, double value)
    {
        set(std::span<const int>(idx.begin(), idx.size()), value);
    }

    /// Number of index permutations that map to compact slot `c`.
    int multiplicity(int c) const;
    /// Sorted index tuple of compact slot `c` (first rank() entries valid).
    std::array<int, 4> index_tuple(int c) const;
    /// Compact slot of an arbitrary index tuple.
    int compact_index(std::span<const int> idx) const;

    SymTensor& operator+=(const SymTensor& rhs)
    {
        check_same_shape(rhs);
        for (int c = 0; c < size_; ++c)
        {
            data_[c] += rhs.data_[c];
        }
        return *this;
    }
    SymTensor& operator-=(const SymTensor& rhs)
    {
        check_same_shape(rhs);
        for (int c = 0; c < size_; ++c)
        {
            data_[c] -= rhs.data_[c];
        }
        return *this;
    }
    SymTensor& operator*=(double s) noexcept
    {
        for (int c = 0; c < size_; ++c)
        {
            data_[c] *= s;
        }
        return *this;
    }
    /// this += s * rhs
    SymTensor& add_scaled(double s, const SymTensor& rhs)
    {
        check_same_shape(rhs);
        for (int c = 0; c < size_; ++c)
        {
            data_[c] += s * rhs.data_[c];
        }
        return *this;
    }

    /// Frobenius norm over the full (expanded) tensor.
    double norm() const;
    double max_abs() const noexcept;
    bool is_zero() const noexcept;

    friend SymTensor operator+(SymTensor a, const SymTensor& b) { return a += b; }
    friend SymTensor operator-(SymTensor a, const SymTensor& b) { return a -= b; }
    friend SymTensor operator*(SymTensor a, double s) { return a *= s; }
    friend SymTensor operator*(double s, SymTensor a) { return a *= s; }
    friend SymTensor operator-(SymTensor a) { return a *= -1.0; }

private:
    [[noreturn]] static void throw_bad_shape(int rank, int dim);
    void check_same_shape(const SymTensor& other) const
    {
        if (other.rank_ != rank_ || other.dim_ != dim_)
        {
            throw_shape_mismatch();
        }
    }
    [[noreturn]] static void throw_shape_mismatch();

    std::array<double, kMaxComponents> data_{};
    std::int8_t rank_ = 0;
    std::int8_t dim_  = 1;
    std::int8_t size_ = 1;
};

/// Number of distinct components, C(dim + rank - 1, rank).
int sym_size(int rank, int dim);

/// Normalized symmetrization of the outer product A (x) B: the average over
/// all index permutations. The rank of the result is rank(A) + rank(B) <= 4.
SymTensor sym_product(const SymTensor& a, const SymTensor& b);

/// Symmetric outer power u^m.
SymTensor outer_power(std::span<const double> u, int m);

/// Normalized symmetrization of delta^k (rank 2k).
SymTensor delta_power(int k, int dim);

/// Cached delta_power(k, dim) for 2k <= 4.
const SymTensor& delta_power_ref(int k, int dim);

/// Contraction of the first index pair: (tr A)_{I} = A_{pp I}.
SymTensor trace(const SymTensor& a);

/// Full contraction A : B of two tensors of equal rank.
double contract(const SymTensor& a, const SymTensor& b);

/// Applies the orthogonal map R (row-major dim x dim) to every index.
SymTensor rotate(const SymTensor& a, std::span<const double> rot);

}  // namespace hermrt

#endif  // HERMRT_SYM_TENSOR_HPP
