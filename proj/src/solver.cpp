#include "hermrt/solver.hpp"

#include <algorithm>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "hermrt/error.hpp"

namespace hermrt
{

namespace
{

constexpr std::size_t kMaxQ = 256;

int wrap(int x, int n)
{
    const int r = x % n;
    return r < 0 ? r + n : r;
}

}  // namespace

void GasSpec::validate() const
{
    if (S < 0)
    {
        throw std::invalid_argument("gas: S must be nonnegative");
    }
    if (D < 1 || D > 3)
    {
        throw std::invalid_argument("gas: D must be 1, 2 or 3");
    }
    if (tau_g && !(*tau_g > 0.5))
    {
        throw std::invalid_argument("gas: tau_g must exceed 1/2");
    }
}

LatticeState::LatticeState(VelocitySetPtr set, std::array<int, 3> dims, int S)
    : set_(std::move(set)), dims_(dims), S_(S)
{
    if (!set_)
    {
        throw std::invalid_argument("lattice: null velocity set");
    }
    if (S < 0)
    {
        throw std::invalid_argument("lattice: S must be nonnegative");
    }
    if (set_->count() > static_cast<int>(kMaxQ))
    {
        throw std::invalid_argument("lattice: velocity set too large");
    }
    std::size_t n = 1;
    for (int j = 0; j < 3; ++j)
    {
        if (dims_[static_cast<std::size_t>(j)] < 1)
        {
            throw std::invalid_argument("lattice: extents must be positive");
        }
        if (j >= set_->dim() && dims_[static_cast<std::size_t>(j)] != 1)
        {
            throw std::invalid_argument("lattice: extents beyond the set dimension must be 1");
        }
        n *= static_cast<std::size_t>(dims_[static_cast<std::size_t>(j)]);
    }
    if (n > (std::size_t{1} << 31))
    {
        throw std::invalid_argument("lattice: grid too large");
    }
    cells_ = n;
    f_.assign(static_cast<std::size_t>(set_->count()) * cells_, 0.0);
    if (S_ > 0)
    {
        g_.assign(f_.size(), 0.0);
    }
}

std::size_t LatticeState::cell_index(int x, int y, int z) const
{
    return static_cast<std::size_t>(wrap(x, dims_[0])) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(wrap(y, dims_[1])) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(wrap(z, dims_[2])));
}

std::array<int, 3> LatticeState::coords(std::size_t cell) const
{
    const auto nx = static_cast<std::size_t>(dims_[0]);
    const auto ny = static_cast<std::size_t>(dims_[1]);
    return {static_cast<int>(cell % nx), static_cast<int>((cell / nx) % ny), static_cast<int>(cell / (nx * ny))};
}

std::size_t LatticeState::neighbor(std::size_t cell, int i) const
{
    const auto x = coords(cell);
    const auto& c = set_->c(i);
    return cell_index(x[0] + c[0], x[1] + c[1], x[2] + c[2]);
}

void LatticeState::gather(std::size_t cell, std::span<double> f_site, std::span<double> g_site) const
{
    const int nq = q();
    for (int i = 0; i < nq; ++i)
    {
        f_site[static_cast<std::size_t>(i)] = f_[static_cast<std::size_t>(i) * cells_ + cell];
    }
    if (!g_site.empty() && S_ > 0)
    {
        for (int i = 0; i < nq; ++i)
        {
            g_site[static_cast<std::size_t>(i)] = g_[static_cast<std::size_t>(i) * cells_ + cell];
        }
    }
}

void LatticeState::scatter(std::size_t cell, std::span<const double> f_site, std::span<const double> g_site)
{
    const int nq = q();
    for (int i = 0; i < nq; ++i)
    {
        f_[static_cast<std::size_t>(i) * cells_ + cell] = f_site[static_cast<std::size_t>(i)];
    }
    if (!g_site.empty() && S_ > 0)
    {
        for (int i = 0; i < nq; ++i)
        {
            g_[static_cast<std::size_t>(i) * cells_ + cell] = g_site[static_cast<std::size_t>(i)];
        }
    }
}

bool LatticeState::operator==(const LatticeState& o) const
{
    return set_->name() == o.set_->name() && dims_ == o.dims_ && S_ == o.S_ && time == o.time && f_ == o.f_ &&
           g_ == o.g_;
}

void stream(LatticeState& state)
{
    const std::size_t n = state.cells();
    std::vector<double> buf(n);
    auto shift = [&](std::vector<double>& data, int i) {
        double* src = data.data() + static_cast<std::size_t>(i) * n;
        for (std::size_t cell = 0; cell < n; ++cell)
        {
            buf[state.neighbor(cell, i)] = src[cell];
        }
        std::copy(buf.begin(), buf.end(), src);
    };
    for (int i = 0; i < state.q(); ++i)
    {
        shift(state.f(), i);
        if (state.has_g())
        {
            shift(state.g(), i);
        }
    }
    ++state.time;
}

Totals totals(const LatticeState& state)
{
    const VelocitySet& set = state.set();
    const int dim          = set.dim();
    Totals t;
    for (std::size_t cell = 0; cell < state.cells(); ++cell)
    {
        for (int i = 0; i < set.count(); ++i)
        {
            const double fi = state.f(i, cell);
            const auto xi   = set.xi(i);
            double x2       = 0.0;
            t.mass += fi;
            for (int j = 0; j < dim; ++j)
            {
                t.momentum[static_cast<std::size_t>(j)] += fi * xi[static_cast<std::size_t>(j)];
                x2 += xi[static_cast<std::size_t>(j)] * xi[static_cast<std::size_t>(j)];
            }
            t.energy += 0.5 * fi * x2;
            if (state.has_g())
            {
                t.internal_energy += state.g()[static_cast<std::size_t>(i) * state.cells() + cell];
            }
        }
    }
    t.energy += t.internal_energy;
    return t;
}

MacroFields macro_fields(const LatticeState& state, const GasSpec& gas)
{
    const std::size_t n = state.cells();
    const int q         = state.q();
    MacroFields out;
    out.rho.resize(n);
    out.theta.resize(n);
    for (auto& v : out.u)
    {
        v.assign(n, 0.0);
    }
    std::vector<double> f(static_cast<std::size_t>(q));
    std::vector<double> g(static_cast<std::size_t>(q));
    for (std::size_t cell = 0; cell < n; ++cell)
    {
        state.gather(cell, f, g);
        std::optional<double> eint;
        if (state.has_g())
        {
            double e = 0.0;
            for (double gi : g)
            {
                e += gi;
            }
            eint = e;
        }
        const MacroState m = macro_from_populations(f, state.set(), state.has_g() ? gas.S : 0, eint);
        out.rho[cell]      = m.rho;
        out.theta[cell]    = m.theta;
        for (int j = 0; j < state.set().dim(); ++j)
        {
            out.u[static_cast<std::size_t>(j)][cell] = m.u[static_cast<std::size_t>(j)];
        }
    }
    return out;
}

int default_jobs()
{
    if (const char* env = std::getenv("HERMRT_JOBS"))
    {
        char* end    = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0)
        {
            return static_cast<int>(std::min<long>(v, 1024));
        }
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

Solver::Solver(LatticeState state, const RelaxationSpec& spec, GasSpec gas, int order, int jobs)
    : state_(std::move(state)),
      gas_(gas),
      collider_(state_.set(), spec, order),
      tau_g_(gas.tau_g.value_or(spec.tau32)),
      jobs_(jobs > 0 ? jobs : default_jobs())
{
    gas_.validate();
    if (gas_.D != state_.set().dim())
    {
        throw std::invalid_argument("solver: gas dimension does not match the velocity set");
    }
    if (gas_.S != state_.S())
    {
        throw std::invalid_argument("solver: gas S does not match the lattice state");
    }
    jobs_ = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs_), state_.cells()));
    fnext_.resize(state_.f().size());
    gnext_.resize(state_.g().size());
    const std::size_t n = state_.cells();
    dest_.resize(static_cast<std::size_t>(state_.q()) * n);
    for (int i = 0; i < state_.q(); ++i)
    {
        for (std::size_t cell = 0; cell < n; ++cell)
        {
            dest_[static_cast<std::size_t>(i) * n + cell] = static_cast<std::uint32_t>(state_.neighbor(cell, i));
        }
    }
}

void Solver::sweep(std::size_t begin, std::size_t end)
{
    const std::size_t n = state_.cells();
    const int q         = state_.q();
    const bool with_g   = state_.has_g();
    const double* fsrc  = state_.f().data();
    const double* gsrc  = state_.g().data();
    double f[kMaxQ];
    double g[kMaxQ];
    const std::span<double> fs(f, static_cast<std::size_t>(q));
    const std::span<double> gs(g, static_cast<std::size_t>(q));
    for (std::size_t cell = begin; cell < end; ++cell)
    {
        for (int i = 0; i < q; ++i)
        {
            f[i] = fsrc[static_cast<std::size_t>(i) * n + cell];
        }
        try
        {
            if (with_g)
            {
                for (int i = 0; i < q; ++i)
                {
                    g[i] = gsrc[static_cast<std::size_t>(i) * n + cell];
                }
                collider_.collide(fs, gs, gas_.S, tau_g_);
            }
            else
            {
                collider_.collide(fs);
            }
        }
        catch (const SimulationError& e)
        {
            const auto x = state_.coords(cell);
            std::ostringstream msg;
            msg << "step " << state_.time << ", cell (" << x[0] << ", " << x[1] << ", " << x[2] << "): " << e.what();
            throw SimulationError(msg.str());
        }
        for (int i = 0; i < q; ++i)
        {
            const std::size_t k = static_cast<std::size_t>(i) * n;
            fnext_[k + dest_[k + cell]] = f[i];
        }
        if (with_g)
        {
            for (int i = 0; i < q; ++i)
            {
                const std::size_t k = static_cast<std::size_t>(i) * n;
                gnext_[k + dest_[k + cell]] = g[i];
            }
        }
    }
}

void Solver::step()
{
    const std::size_t n = state_.cells();
    if (jobs_ <= 1)
    {
        sweep(0, n);
    }
    else
    {
        std::vector<std::exception_ptr> errors(static_cast<std::size_t>(jobs_));
        std::vector<std::thread> workers;
        workers.reserve(static_cast<std::size_t>(jobs_ - 1));
        auto range = [&](int w) {
            return std::pair<std::size_t, std::size_t>{n * static_cast<std::size_t>(w) / static_cast<std::size_t>(jobs_),
                                                       n * static_cast<std::size_t>(w + 1) /
                                                           static_cast<std::size_t>(jobs_)};
        };
        auto work = [&](int w) {
            try
            {
                const auto [b, e] = range(w);
                sweep(b, e);
            }
            catch (...)
            {
                errors[static_cast<std::size_t>(w)] = std::current_exception();
            }
        };
        for (int w = 1; w < jobs_; ++w)
        {
            workers.emplace_back(work, w);
        }
        work(0);
        for (auto& t : workers)
        {
            t.join();
        }
        // Report the failure of the lowest cell range, independent of timing.
        for (auto& e : errors)
        {
            if (e)
            {
                std::rethrow_exception(e);
            }
        }
    }
    state_.f().swap(fnext_);
    state_.g().swap(gnext_);
    ++state_.time;
}

void Solver::run(std::int64_t steps)
{
    for (std::int64_t s = 0; s < steps; ++s)
    {
        step();
    }
}

void step(LatticeState& state, const RelaxationSpec& spec, const GasSpec& gas, int order)
{
    Solver solver(std::move(state), spec, gas, order, 1);
    solver.step();
    state = std::move(solver.state());
}

namespace
{

constexpr char kMagic[8] = {'H', 'R', 'M', 'T', 'C', 'K', 'P', '1'};

template <class T>
void put(std::ostream& out, T v)
{
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
    {
        std::reverse(buf, buf + sizeof(T));
    }
    out.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <class T>
T get(std::istream& in)
{
    unsigned char buf[sizeof(T)];
    in.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (!in)
    {
        throw std::runtime_error("checkpoint: truncated file");
    }
    if constexpr (std::endian::native == std::endian::big)
    {
        std::reverse(buf, buf + sizeof(T));
    }
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

}  // namespace

void write_checkpoint(std::ostream& out, const LatticeState& state, int order)
{
    out.write(kMagic, sizeof(kMagic));
    for (int j = 0; j < 3; ++j)
    {
        put<std::int32_t>(out, state.dims()[static_cast<std::size_t>(j)]);
    }
    put<std::int32_t>(out, state.set().dim());
    put<std::int32_t>(out, order);
    put<std::int32_t>(out, state.S());
    put<std::int32_t>(out, state.q());
    put<std::int64_t>(out, state.time);
    const std::string& name = state.set().name();
    put<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    out.write(name.data(), static_cast<std::streamsize>(name.size()));
    for (double v : state.f())
    {
        put<double>(out, v);
    }
    for (double v : state.g())
    {
        put<double>(out, v);
    }
    if (!out)
    {
        throw std::runtime_error("checkpoint: write failed");
    }
}

void write_checkpoint_file(const std::string& path, const LatticeState& state, int order)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("checkpoint: cannot open " + path);
    }
    write_checkpoint(out, state, order);
}

Checkpoint read_checkpoint(std::istream& in, VelocitySetPtr set)
{
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    {
        throw std::runtime_error("checkpoint: bad magic");
    }
    std::array<int, 3> dims{};
    for (auto& d : dims)
    {
        d = get<std::int32_t>(in);
    }
    const int dim   = get<std::int32_t>(in);
    const int order = get<std::int32_t>(in);
    const int S     = get<std::int32_t>(in);
    const int q     = get<std::int32_t>(in);
    const auto time = get<std::int64_t>(in);
    const auto len  = get<std::uint32_t>(in);
    if (len > 4096)
    {
        throw std::runtime_error("checkpoint: corrupt header");
    }
    std::string name(len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(len));
    if (!in)
    {
        throw std::runtime_error("checkpoint: truncated file");
    }
    if (!set || set->name() != name || set->dim() != dim || set->count() != q)
    {
        throw std::runtime_error("checkpoint: velocity set mismatch (file has " + name + ")");
    }
    LatticeState state(std::move(set), dims, S);
    state.time = time;
    for (double& v : state.f())
    {
        v = get<double>(in);
    }
    for (double& v : state.g())
    {
        v = get<double>(in);
    }
    return {std::move(state), order};
}

Checkpoint read_checkpoint_file(const std::string& path, VelocitySetPtr set)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
    {
        throw std::runtime_error("checkpoint: cannot open " + path);
    }
    return read_checkpoint(in, std::move(set));
}

}  // namespace hermrt
