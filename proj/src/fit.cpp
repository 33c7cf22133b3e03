#include "hermrt/fit.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace hermrt
{

namespace
{

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

void check_channels(const std::vector<ComplexSeries>& channels, int modes)
{
    if (modes < 1)
    {
        throw std::invalid_argument("fit: mode count must be positive");
    }
    if (channels.empty())
    {
        throw std::invalid_argument("fit: no channels");
    }
    const std::size_t len = channels.front().size();
    for (const auto& c : channels)
    {
        if (c.size() != len)
        {
            throw std::invalid_argument("fit: channels differ in length");
        }
    }
    if (static_cast<int>(len) < min_fit_length(modes))
    {
        throw std::invalid_argument("fit: series too short (" + std::to_string(len) + " samples, need " +
                                    std::to_string(min_fit_length(modes)) + ")");
    }
}

// Least-squares amplitudes for fixed poles and the relative residual.
void fit_amplitudes(const std::vector<ComplexSeries>& channels, FitResult& r)
{
    const auto len   = static_cast<Eigen::Index>(channels.front().size());
    const auto modes = static_cast<Eigen::Index>(r.omega.size());
    CMatrix V(len, modes);
    for (Eigen::Index j = 0; j < modes; ++j)
    {
        const Complex z = std::exp(r.omega[static_cast<std::size_t>(j)]);
        Complex p       = 1.0;
        for (Eigen::Index t = 0; t < len; ++t)
        {
            V(t, j) = p;
            p *= z;
        }
    }
    Eigen::JacobiSVD<CMatrix> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double vcond = sv(sv.size() - 1) > 0.0 ? sv(0) / sv(sv.size() - 1) : INFINITY;
    r.condition        = std::max(r.condition, vcond);

    double num = 0.0;
    double den = 0.0;
    r.amplitudes.clear();
    for (const auto& ch : channels)
    {
        const CVector y = Eigen::Map<const CVector>(ch.data(), len);
        const CVector c = svd.solve(y);
        r.amplitudes.emplace_back(c.data(), c.data() + c.size());
        num += (y - V * c).squaredNorm();
        den += y.squaredNorm();
    }
    r.residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
}

FitResult fit_single(std::span<const Complex> y, const FitOptions& opt)
{
    const std::size_t n = y.size();
    FitResult r;
    // Linear regression of log|y| and unwrapped arg(y) on t.
    double st = 0, stt = 0, sa = 0, sta = 0, sp = 0, stp = 0;
    double phase_prev = 0.0;
    double unwrap     = 0.0;
    bool degenerate   = false;
    for (std::size_t t = 0; t < n; ++t)
    {
        const double mag = std::abs(y[t]);
        if (!(mag > 0.0))
        {
            degenerate = true;
            break;
        }
        const double ph = std::arg(y[t]);
        if (t > 0)
        {
            double d = ph - phase_prev;
            d -= 2.0 * std::numbers::pi * std::round(d / (2.0 * std::numbers::pi));
            unwrap += d;
        }
        else
        {
            unwrap = ph;
        }
        phase_prev     = ph;
        const double x = static_cast<double>(t);
        const double a = std::log(mag);
        st += x;
        stt += x * x;
        sa += a;
        sta += x * a;
        sp += unwrap;
        stp += x * unwrap;
    }
    if (degenerate)
    {
        r.omega           = {Complex(0.0, 0.0)};
        r.ill_conditioned = true;
        r.condition       = INFINITY;
        r.residual        = 1.0;
        r.amplitudes      = {{Complex(0.0, 0.0)}};
        return r;
    }
    const double dn  = static_cast<double>(n);
    const double det = dn * stt - st * st;
    const double re  = (dn * sta - st * sa) / det;
    const double im  = (dn * stp - st * sp) / det;
    r.omega          = {Complex(re, im)};
    r.condition      = 1.0;
    fit_amplitudes({ComplexSeries(y.begin(), y.end())}, r);
    r.ill_conditioned = r.condition > opt.condition_limit;
    return r;
}

}  // namespace

int min_fit_length(int modes) { return 4 * modes + 4; }

FitResult fit_frequencies(std::span<const Complex> series, int modes, const FitOptions& opt)
{
    if (modes == 1)
    {
        check_channels({ComplexSeries(series.begin(), series.end())}, modes);
        return fit_single(series, opt);
    }
    return fit_frequencies(std::vector<ComplexSeries>{ComplexSeries(series.begin(), series.end())}, modes, opt);
}

FitResult fit_frequencies(const std::vector<ComplexSeries>& channels, int modes, const FitOptions& opt)
{
    check_channels(channels, modes);
    const int len = static_cast<int>(channels.front().size());
    int stride    = opt.stride > 0 ? opt.stride : std::max(1, len / 300);
    // Every decimated sub-series must still support the fit.
    while (stride > 1 && len / stride < min_fit_length(modes))
    {
        --stride;
    }

    // Sub-series y_c(o + s t), one per channel and offset.
    std::vector<ComplexSeries> subs;
    int sublen = len / stride;
    for (const auto& ch : channels)
    {
        for (int o = 0; o < stride; ++o)
        {
            ComplexSeries s;
            s.reserve(static_cast<std::size_t>(sublen));
            for (int t = 0; t < sublen; ++t)
            {
                s.push_back(ch[static_cast<std::size_t>(o + stride * t)]);
            }
            subs.push_back(std::move(s));
        }
    }

    const int rows = std::max(modes + 1, sublen / 2);
    const int cols = sublen - rows + 1;
    CMatrix H(rows, cols * static_cast<int>(subs.size()));
    for (std::size_t c = 0; c < subs.size(); ++c)
    {
        for (int j = 0; j < cols; ++j)
        {
            for (int i = 0; i < rows; ++i)
            {
                H(i, static_cast<Eigen::Index>(c) * cols + j) = subs[c][static_cast<std::size_t>(i + j)];
            }
        }
    }
    Eigen::BDCSVD<CMatrix> svd(H, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();

    FitResult r;
    r.stride = stride;
    if (!(sv(0) > 0.0))
    {
        r.omega.assign(static_cast<std::size_t>(modes), Complex(0.0, 0.0));
        r.ill_conditioned = true;
        r.condition       = INFINITY;
        r.residual        = 0.0;
        r.amplitudes.assign(channels.size(), std::vector<Complex>(static_cast<std::size_t>(modes)));
        return r;
    }
    r.condition = sv(modes - 1) > 0.0 ? sv(0) / sv(modes - 1) : INFINITY;

    const CMatrix U    = svd.matrixU().leftCols(modes);
    const CMatrix upper = U.topRows(rows - 1);
    const CMatrix lower = U.bottomRows(rows - 1);
    const CMatrix phi   = upper.completeOrthogonalDecomposition().solve(lower);
    Eigen::ComplexEigenSolver<CMatrix> eig(phi);
    for (int j = 0; j < modes; ++j)
    {
        const Complex z = eig.eigenvalues()(j);
        r.omega.push_back(z == Complex(0.0, 0.0) ? Complex(-INFINITY, 0.0) : std::log(z) / static_cast<double>(stride));
    }
    std::sort(r.omega.begin(), r.omega.end(), [](Complex a, Complex b) {
        return a.imag() != b.imag() ? a.imag() < b.imag() : a.real() < b.real();
    });
    bool finite = true;
    for (const Complex& w : r.omega)
    {
        finite = finite && std::isfinite(w.real()) && std::isfinite(w.imag());
    }
    if (finite)
    {
        fit_amplitudes(channels, r);
    }
    else
    {
        r.condition = INFINITY;
        r.residual  = 1.0;
    }
    r.ill_conditioned = !(r.condition <= opt.condition_limit);
    return r;
}

}  // namespace hermrt
