#include "hermrt/velocity_set.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include <Eigen/Dense>

namespace hermrt
{

namespace
{

double factorial_d(int n)
{
    double r = 1.0;
    for (int i = 2; i <= n; ++i)
    {
        r *= i;
    }
    return r;
}

}  // namespace

VelocitySet::VelocitySet(std::string name, int dim, std::vector<LatticeVector> cvecs, std::vector<double> weights,
                         double scale, int degree)
    : name_(std::move(name)),
      dim_(dim),
      cvecs_(std::move(cvecs)),
      weights_(std::move(weights)),
      scale_(scale),
      degree_(degree)
{
    if (dim_ < 1 || dim_ > SymTensor::kMaxDim)
    {
        throw std::invalid_argument("VelocitySet: dimension must be 1, 2 or 3");
    }
    if (cvecs_.empty() || cvecs_.size() != weights_.size())
    {
        throw std::invalid_argument("VelocitySet: vector and weight counts differ");
    }
    if (!(scale_ > 0.0) || !std::isfinite(scale_))
    {
        throw std::invalid_argument("VelocitySet: scale must be positive");
    }
    if (degree_ < 0)
    {
        throw std::invalid_argument("VelocitySet: degree must be nonnegative");
    }
    for (std::size_t i = 0; i < cvecs_.size(); ++i)
    {
        if (!(weights_[i] > 0.0) || !std::isfinite(weights_[i]))
        {
            throw std::invalid_argument("VelocitySet: weights must be positive");
        }
        for (int j = dim_; j < 3; ++j)
        {
            if (cvecs_[i][static_cast<std::size_t>(j)] != 0)
            {
                throw std::invalid_argument("VelocitySet: vector has components beyond its dimension");
            }
        }
    }

    const int q = count();
    xi_.resize(static_cast<std::size_t>(q * dim_));
    for (int i = 0; i < q; ++i)
    {
        for (int j = 0; j < dim_; ++j)
        {
            xi_[static_cast<std::size_t>(i * dim_ + j)] = scale_ * cvecs_[static_cast<std::size_t>(i)][j];
        }
    }

    const int nmax = max_order();
    hermite_.resize(static_cast<std::size_t>(q));
    for (int i = 0; i < q; ++i)
    {
        for (int n = 0; n <= nmax; ++n)
        {
            hermite_[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = hermite_eval(n, xi(i));
        }
    }

    for (int order = 0; order <= nmax; ++order)
    {
        HermiteBasis b;
        b.order     = order;
        b.offset[0] = 0;
        for (int n = 0; n <= order; ++n)
        {
            b.offset[static_cast<std::size_t>(n + 1)] = b.offset[static_cast<std::size_t>(n)] + sym_size(n, dim_);
        }
        b.ncoef = b.offset[static_cast<std::size_t>(order + 1)];
        b.project.assign(static_cast<std::size_t>(b.ncoef * q), 0.0);
        b.reconstruct.assign(static_cast<std::size_t>(b.ncoef * q), 0.0);
        for (int n = 0; n <= order; ++n)
        {
            const double inv_fact = 1.0 / factorial_d(n);
            for (int i = 0; i < q; ++i)
            {
                const SymTensor& h = hermite(i, n);
                for (int c = 0; c < h.size(); ++c)
                {
                    const int row = b.offset[static_cast<std::size_t>(n)] + c;
                    b.project[static_cast<std::size_t>(row * q + i)] = h[c];
                    b.reconstruct[static_cast<std::size_t>(i * b.ncoef + row)] =
                        weight(i) * h.multiplicity(c) * inv_fact * h[c];
                }
            }
        }
        balance_conserved(b);
        bases_.push_back(std::move(b));
    }
}

// The derived weights miss their moments by a few ulp, which biases the
// column sums of the reconstruction table and makes mass and energy drift
// linearly over many collisions. This restores, in extended precision,
//   sum_i R_ic = [c == 0],  sum_i xi_i R_ic = [c is the a^(1) slot],
//   sum_i |xi_i|^2 R_ic = D [c == 0] + [c is a diagonal a^(2) slot].
void VelocitySet::balance_conserved(HermiteBasis& b) const
{
    using MatL     = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
    const int q    = count();
    const int k    = dim_ + 2;
    const int ncol = b.ncoef;
    MatL A(k, q);
    for (int i = 0; i < q; ++i)
    {
        long double x2 = 0.0L;
        A(0, i)        = 1.0L;
        for (int j = 0; j < dim_; ++j)
        {
            const long double x = xi(i)[static_cast<std::size_t>(j)];
            A(1 + j, i)         = x;
            x2 += x * x;
        }
        A(k - 1, i) = x2;
    }
    MatL E = MatL::Zero(k, ncol);
    E(0, 0)     = 1.0L;
    E(k - 1, 0) = static_cast<long double>(dim_);
    if (b.order >= 1)
    {
        for (int j = 0; j < dim_; ++j)
        {
            E(1 + j, b.offset[1] + j) = 1.0L;
        }
    }
    if (b.order >= 2)
    {
        const SymTensor t(2, dim_);
        for (int c = 0; c < t.size(); ++c)
        {
            const auto idx = t.index_tuple(c);
            if (idx[0] == idx[1])
            {
                E(k - 1, b.offset[2] + c) = 1.0L;
            }
        }
    }
    MatL R(q, ncol);
    for (int i = 0; i < q; ++i)
    {
        for (int c = 0; c < ncol; ++c)
        {
            R(i, c) = b.reconstruct[static_cast<std::size_t>(i * ncol + c)];
        }
    }
    // weighted by w_i, the correction stays in the span of H^(0..2) and
    // leaves the projection identity intact
    MatL AW = A;
    for (int i = 0; i < q; ++i)
    {
        AW.col(i) *= static_cast<long double>(weight(i));
    }
    const MatL gram = A * AW.transpose();
    const MatL corr = AW.transpose() * gram.ldlt().solve(E - A * R);
    for (int i = 0; i < q; ++i)
    {
        for (int c = 0; c < ncol; ++c)
        {
            b.reconstruct[static_cast<std::size_t>(i * ncol + c)] = static_cast<double>(R(i, c) + corr(i, c));
        }
    }
}

int VelocitySet::max_order() const noexcept { return std::min(degree_ / 2, CoeffSet::kMaxOrder); }

const SymTensor& VelocitySet::hermite(int i, int n) const
{
    if (n < 0 || n > max_order())
    {
        throw std::invalid_argument("VelocitySet::hermite: order exceeds what the quadrature supports");
    }
    return hermite_[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)];
}

const HermiteBasis& VelocitySet::basis(int order) const
{
    if (order < 0 || order > max_order())
    {
        throw std::invalid_argument("velocity set " + name_ + " (degree " + std::to_string(degree_) +
                                    ") cannot represent Hermite order " + std::to_string(order));
    }
    return bases_[static_cast<std::size_t>(order)];
}

double gaussian_moment(std::span<const int> exponents)
{
    double m = 1.0;
    for (int e : exponents)
    {
        if (e % 2 != 0)
        {
            return 0.0;
        }
        for (int k = e - 1; k > 1; k -= 2)
        {
            m *= k;
        }
    }
    return m;
}

namespace
{

void enumerate_monomials(int dim, int total, int pos, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    if (pos == dim - 1)
    {
        cur[static_cast<std::size_t>(pos)] = total;
        out.push_back(cur);
        return;
    }
    for (int e = total; e >= 0; --e)
    {
        cur[static_cast<std::size_t>(pos)] = e;
        enumerate_monomials(dim, total - e, pos + 1, cur, out);
    }
}

}  // namespace

ValidationReport validate(const VelocitySet& set, int degree, double tol)
{
    ValidationReport rep;
    rep.degree    = degree < 0 ? set.degree() : degree;
    rep.tolerance = tol;
    const int dim = set.dim();
    std::vector<int> cur(static_cast<std::size_t>(dim));
    for (int total = 0; total <= rep.degree; ++total)
    {
        std::vector<std::vector<int>> monos;
        enumerate_monomials(dim, total, 0, cur, monos);
        for (const auto& e : monos)
        {
            long double sum = 0.0L;
            for (int i = 0; i < set.count(); ++i)
            {
                long double p = set.weight(i);
                const auto xi = set.xi(i);
                for (int j = 0; j < dim; ++j)
                {
                    for (int k = 0; k < e[static_cast<std::size_t>(j)]; ++k)
                    {
                        p *= xi[static_cast<std::size_t>(j)];
                    }
                }
                sum += p;
            }
            const double defect = static_cast<double>(std::fabs(sum - static_cast<long double>(gaussian_moment(e))));
            rep.max_defect      = std::max(rep.max_defect, defect);
            if (defect > tol && !rep.first_failure)
            {
                rep.passed               = false;
                rep.first_failure        = e;
                rep.first_failure_defect = defect;
            }
        }
    }
    return rep;
}

std::vector<LatticeVector> symmetry_orbit(const LatticeVector& rep, int dim)
{
    std::vector<int> perm(static_cast<std::size_t>(dim));
    for (int j = 0; j < dim; ++j)
    {
        perm[static_cast<std::size_t>(j)] = j;
    }
    std::set<LatticeVector> orbit;
    do
    {
        for (int signs = 0; signs < (1 << dim); ++signs)
        {
            LatticeVector v{0, 0, 0};
            for (int j = 0; j < dim; ++j)
            {
                const int s                      = (signs & (1 << j)) ? -1 : 1;
                v[static_cast<std::size_t>(j)] = s * rep[static_cast<std::size_t>(perm[static_cast<std::size_t>(j)])];
            }
            orbit.insert(v);
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return {orbit.begin(), orbit.end()};
}

namespace
{

// Even exponent patterns e_1 >= e_2 >= ... >= e_D with sum 2m.
void even_patterns(int dim, int remaining, int maxpart, std::vector<int>& cur, std::vector<std::vector<int>>& out)
{
    const auto pos = cur.size();
    if (static_cast<int>(pos) == dim)
    {
        if (remaining == 0)
        {
            out.push_back(cur);
        }
        return;
    }
    for (int e = std::min(remaining, maxpart); e >= 0; e -= 2)
    {
        if (e % 2 != 0)
        {
            continue;
        }
        cur.push_back(e);
        even_patterns(dim, remaining - e, e, cur, out);
        cur.pop_back();
    }
}

struct MomentSystem
{
    Eigen::MatrixXd A;            // group sums of c^e
    std::vector<double> moments;  // Gaussian moments
    std::vector<int> half_degree; // m for degree 2m
};

MomentSystem build_moment_system(std::span<const std::vector<LatticeVector>> groups, int dim, int degree)
{
    std::vector<std::vector<int>> patterns;
    for (int two_m = 0; two_m <= degree; two_m += 2)
    {
        std::vector<int> cur;
        const int maxpart = two_m % 2 == 0 ? two_m : two_m - 1;
        even_patterns(dim, two_m, maxpart, cur, patterns);
    }
    MomentSystem sys;
    sys.A.resize(static_cast<Eigen::Index>(patterns.size()), static_cast<Eigen::Index>(groups.size()));
    for (std::size_t r = 0; r < patterns.size(); ++r)
    {
        int total = 0;
        for (int e : patterns[r])
        {
            total += e;
        }
        sys.half_degree.push_back(total / 2);
        sys.moments.push_back(gaussian_moment(patterns[r]));
        for (std::size_t g = 0; g < groups.size(); ++g)
        {
            double s = 0.0;
            for (const auto& c : groups[g])
            {
                double p = 1.0;
                for (int j = 0; j < dim; ++j)
                {
                    for (int k = 0; k < patterns[r][static_cast<std::size_t>(j)]; ++k)
                    {
                        p *= c[static_cast<std::size_t>(j)];
                    }
                }
                s += p;
            }
            sys.A(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(g)) = s;
        }
    }
    return sys;
}

Eigen::VectorXd rhs_for(const MomentSystem& sys, double r)
{
    Eigen::VectorXd b(static_cast<Eigen::Index>(sys.moments.size()));
    for (std::size_t k = 0; k < sys.moments.size(); ++k)
    {
        b(static_cast<Eigen::Index>(k)) = sys.moments[k] / std::pow(r, 2 * sys.half_degree[k]);
    }
    return b;
}

double augmented_det(const MomentSystem& sys, double r)
{
    Eigen::MatrixXd M(sys.A.rows(), sys.A.cols() + 1);
    M << sys.A, rhs_for(sys, r);
    return M.fullPivLu().determinant();
}

}  // namespace

DerivedWeights derive_weights(std::span<const std::vector<LatticeVector>> groups, int dim, int degree)
{
    if (groups.empty())
    {
        throw std::invalid_argument("derive_weights: no groups given");
    }
    for (const auto& g : groups)
    {
        if (g.empty())
        {
            throw std::invalid_argument("derive_weights: empty group");
        }
        const std::set<LatticeVector> members(g.begin(), g.end());
        for (const auto& c : g)
        {
            for (const auto& img : symmetry_orbit(c, dim))
            {
                if (!members.count(img))
                {
                    throw std::invalid_argument("derive_weights: group is not closed under lattice symmetry");
                }
            }
        }
    }

    const MomentSystem sys = build_moment_system(groups, dim, degree);
    const auto rows        = sys.A.rows();
    const auto cols        = sys.A.cols();
    if (rows != cols + 1)
    {
        throw std::runtime_error("derive_weights: " + std::to_string(rows) + " moment conditions for " +
                                 std::to_string(cols) +
                                 " group weights; need exactly one more condition than groups to fix the scale");
    }

    auto solve_at = [&](double r) {
        DerivedWeights out;
        out.scale = r;
        const Eigen::VectorXd b = rhs_for(sys, r);
        const Eigen::VectorXd w = sys.A.colPivHouseholderQr().solve(b);
        out.residual             = (sys.A * w - b).cwiseAbs().maxCoeff();
        out.group_weights.assign(w.data(), w.data() + w.size());
        return out;
    };

    // Scan the scale for sign changes of det[A | b(r)] and refine by bisection.
    const double rmin  = 0.3;
    const double rmax  = 6.0;
    const int nscan    = 6000;
    double best_resid  = std::numeric_limits<double>::infinity();
    double prev_r      = rmin;
    double prev_det    = augmented_det(sys, prev_r);
    for (int s = 1; s <= nscan; ++s)
    {
        const double r   = rmin + (rmax - rmin) * s / nscan;
        const double det = augmented_det(sys, r);
        if ((prev_det < 0.0) != (det < 0.0) || det == 0.0)
        {
            double lo = prev_r;
            double hi = r;
            double dlo = prev_det;
            for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it)
            {
                const double mid = 0.5 * (lo + hi);
                const double dm  = augmented_det(sys, mid);
                if ((dm < 0.0) == (dlo < 0.0) && dm != 0.0)
                {
                    lo  = mid;
                    dlo = dm;
                }
                else
                {
                    hi = mid;
                }
            }
            DerivedWeights cand = solve_at(0.5 * (lo + hi));
            best_resid          = std::min(best_resid, cand.residual);
            const bool positive = std::all_of(cand.group_weights.begin(), cand.group_weights.end(),
                                              [](double w) { return w > 0.0; });
            if (positive && cand.residual < 1e-10)
            {
                return cand;
            }
        }
        prev_r   = r;
        prev_det = det;
    }
    std::ostringstream msg;
    msg << "derive_weights: no positive solution found (best residual " << best_resid << ")";
    throw std::runtime_error(msg.str());
}

VelocitySet make_velocity_set(std::string name, std::span<const std::vector<LatticeVector>> groups, int dim,
                              int degree)
{
    const DerivedWeights dw = derive_weights(groups, dim, degree);
    std::vector<LatticeVector> cvecs;
    std::vector<double> weights;
    for (std::size_t g = 0; g < groups.size(); ++g)
    {
        for (const auto& c : groups[g])
        {
            cvecs.push_back(c);
            weights.push_back(dw.group_weights[g]);
        }
    }
    return VelocitySet(std::move(name), dim, std::move(cvecs), std::move(weights), dw.scale, degree);
}

namespace
{

std::vector<std::vector<LatticeVector>> groups_from_reps(std::initializer_list<LatticeVector> reps, int dim)
{
    std::vector<std::vector<LatticeVector>> groups;
    for (const auto& r : reps)
    {
        groups.push_back(symmetry_orbit(r, dim));
    }
    return groups;
}

VelocitySetPtr make_builtin(const std::string& name)
{
    if (name == "D1Q3")
    {
        return std::make_shared<const VelocitySet>(
            "D1Q3", 1, std::vector<LatticeVector>{{0, 0, 0}, {1, 0, 0}, {-1, 0, 0}},
            std::vector<double>{2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0}, std::sqrt(3.0), 5);
    }
    if (name == "D2Q9")
    {
        // Tensor product of D1Q3.
        std::vector<LatticeVector> cvecs;
        std::vector<double> weights;
        const int c1[3]    = {0, 1, -1};
        const double w1[3] = {2.0 / 3.0, 1.0 / 6.0, 1.0 / 6.0};
        for (int a = 0; a < 3; ++a)
        {
            for (int b = 0; b < 3; ++b)
            {
                cvecs.push_back({c1[a], c1[b], 0});
                weights.push_back(w1[a] * w1[b]);
            }
        }
        return std::make_shared<const VelocitySet>("D2Q9", 2, std::move(cvecs), std::move(weights), std::sqrt(3.0),
                                                   5);
    }
    if (name == "D2Q37")
    {
        const auto groups = groups_from_reps(
            {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {2, 0, 0}, {2, 1, 0}, {2, 2, 0}, {3, 0, 0}, {3, 1, 0}}, 2);
        return std::make_shared<const VelocitySet>(make_velocity_set("D2Q37", groups, 2, 9));
    }
    return nullptr;
}

}  // namespace

std::vector<std::string> builtin_velocity_set_names() { return {"D1Q3", "D2Q9", "D2Q37"}; }

VelocitySetPtr builtin_velocity_set(const std::string& name)
{
    static std::mutex mu;
    static std::map<std::string, VelocitySetPtr> cache;
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(name);
    if (it != cache.end())
    {
        return it->second;
    }
    VelocitySetPtr set = make_builtin(name);
    if (!set)
    {
        throw std::invalid_argument("unknown built-in velocity set '" + name + "'");
    }
    cache.emplace(name, set);
    return set;
}

VelocitySetPtr load_velocity_set(const std::string& name_or_path)
{
    const auto names = builtin_velocity_set_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end())
    {
        return builtin_velocity_set(name_or_path);
    }
    return std::make_shared<const VelocitySet>(read_velocity_set_file(name_or_path));
}

VelocitySet read_velocity_set(std::istream& in, std::string name)
{
    std::string line;
    std::vector<std::string> rows;
    while (std::getline(in, line))
    {
        const auto hash = line.find('#');
        if (hash != std::string::npos)
        {
            line.erase(hash);
        }
        if (line.find_first_not_of(" \t\r") == std::string::npos)
        {
            continue;
        }
        rows.push_back(line);
    }
    if (rows.empty())
    {
        throw std::runtime_error("velocity-set file: missing header");
    }
    std::istringstream header(rows[0]);
    int dim   = 0;
    int count = 0;
    int deg   = 0;
    double r  = 0.0;
    if (!(header >> dim >> count >> deg >> r))
    {
        throw std::runtime_error("velocity-set file: malformed header (expected 'D d Q r')");
    }
    if (dim < 1 || dim > 3 || count < 1)
    {
        throw std::runtime_error("velocity-set file: invalid dimension or count in header");
    }
    if (static_cast<int>(rows.size()) - 1 != count)
    {
        throw std::runtime_error("velocity-set file: header declares " + std::to_string(count) + " vectors, found " +
                                 std::to_string(rows.size() - 1));
    }
    std::vector<LatticeVector> cvecs;
    std::vector<double> weights;
    for (int i = 0; i < count; ++i)
    {
        std::istringstream row(rows[static_cast<std::size_t>(i + 1)]);
        LatticeVector c{0, 0, 0};
        for (int j = 0; j < dim; ++j)
        {
            if (!(row >> c[static_cast<std::size_t>(j)]))
            {
                throw std::runtime_error("velocity-set file: malformed row " + std::to_string(i + 1));
            }
        }
        double w = 0.0;
        if (!(row >> w))
        {
            throw std::runtime_error("velocity-set file: missing weight in row " + std::to_string(i + 1));
        }
        cvecs.push_back(c);
        weights.push_back(w);
    }
    return VelocitySet(std::move(name), dim, std::move(cvecs), std::move(weights), r, deg);
}

VelocitySet read_velocity_set_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw std::runtime_error("cannot open velocity-set file '" + path + "'");
    }
    return read_velocity_set(in, path);
}

void write_velocity_set(std::ostream& out, const VelocitySet& set)
{
    out << "# " << set.name() << "\n";
    out << std::setprecision(17);
    out << set.dim() << ' ' << set.count() << ' ' << set.degree() << ' ' << set.scale() << '\n';
    for (int i = 0; i < set.count(); ++i)
    {
        for (int j = 0; j < set.dim(); ++j)
        {
            out << set.c(i)[static_cast<std::size_t>(j)] << ' ';
        }
        out << set.weight(i) << '\n';
    }
}

CoeffSet coeffs_from_populations(std::span<const double> f, const VelocitySet& set, int order)
{
    if (static_cast<int>(f.size()) != set.count())
    {
        throw std::invalid_argument("coeffs_from_populations: population count mismatch");
    }
    const HermiteBasis& b = set.basis(order);
    CoeffSet a(set.dim(), order);
    const int q = set.count();
    for (int n = 0; n <= order; ++n)
    {
        SymTensor& t = a[n];
        for (int c = 0; c < t.size(); ++c)
        {
            const double* row = b.project.data() + static_cast<std::size_t>((b.offset[n] + c) * q);
            double acc        = 0.0;
            for (int i = 0; i < q; ++i)
            {
                acc += row[i] * f[static_cast<std::size_t>(i)];
            }
            t[c] = acc;
        }
    }
    return a;
}

PopulationVector populations_from_coeffs(const CoeffSet& a, const VelocitySet& set)
{
    if (a.dim() != set.dim())
    {
        throw std::invalid_argument("populations_from_coeffs: dimension mismatch");
    }
    const HermiteBasis& b = set.basis(a.max_order());
    std::vector<double> flat(static_cast<std::size_t>(b.ncoef));
    for (int n = 0; n <= a.max_order(); ++n)
    {
        for (int c = 0; c < a[n].size(); ++c)
        {
            flat[static_cast<std::size_t>(b.offset[n] + c)] = a[n][c];
        }
    }
    PopulationVector f(static_cast<std::size_t>(set.count()), 0.0);
    for (int i = 0; i < set.count(); ++i)
    {
        const double* row = b.reconstruct.data() + static_cast<std::size_t>(i * b.ncoef);
        double acc        = 0.0;
        for (int c = 0; c < b.ncoef; ++c)
        {
            acc += row[c] * flat[static_cast<std::size_t>(c)];
        }
        f[static_cast<std::size_t>(i)] = acc;
    }
    return f;
}

}  // namespace hermrt
