#ifndef HERMRT_FIT_HPP
#define HERMRT_FIT_HPP

#include <complex>
#include <span>
#include <vector>

namespace hermrt
{

using Complex = std::complex<double>;
using ComplexSeries = std::vector<Complex>;

struct FitOptions
{
    /// Decimation stride for the subspace fit; 0 picks one from the length.
    int stride = 0;
    /// Singular-value ratio or Vandermonde condition above this is flagged.
    double condition_limit = 1e10;
};

struct FitResult
{
    /// Complex frequencies per sample step, series ~ sum_j A_j exp(omega_j t).
    std::vector<Complex> omega;
    /// amplitudes[c][j]: weight of mode j in channel c.
    std::vector<std::vector<Complex>> amplitudes;
    /// ||y - model|| / ||y|| over all channels.
    double residual = 0.0;
    double condition = 1.0;
    bool ill_conditioned = false;
    int stride = 1;
};

/// Minimum series length accepted for `modes` exponentials.
int min_fit_length(int modes);

///
/// Single channel. modes == 1 uses a linear least-squares fit of log|y|
/// and the unwrapped phase; more modes use the subspace fit below.
///
FitResult fit_frequencies(std::span<const Complex> series, int modes, const FitOptions& opt = {});

///
/// Joint fit of several channels sharing the same exponentials: shift
/// invariance of the dominant left singular subspace of a block Hankel
/// matrix (ESPRIT). With stride s every offset sub-series is used.
///
FitResult fit_frequencies(const std::vector<ComplexSeries>& channels, int modes, const FitOptions& opt = {});

}  // namespace hermrt

#endif  // HERMRT_FIT_HPP
