#include "bll/strip_solver.hpp"

#include "bll/errors.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>
#include <numbers>

namespace bll {

namespace {

// FFTW planning is not thread-safe; execution with new-array calls is.
std::mutex& plan_mutex() {
    static std::mutex m;
    return m;
}

void require_finite(const ScalarField& f, const char* what) {
    if (!f.all_finite()) fail(ErrorKind::Domain, std::string(what) + ": non-finite input");
}

} // namespace

struct StripSolver::Fft {
    int n = 0;
    double* real = nullptr;
    fftw_complex* spectrum = nullptr;
    fftw_plan r2c = nullptr;
    fftw_plan c2r = nullptr;

    explicit Fft(int nx) : n(nx) {
        real = fftw_alloc_real(static_cast<std::size_t>(n));
        spectrum = fftw_alloc_complex(static_cast<std::size_t>(n / 2 + 1));
        std::lock_guard<std::mutex> lock(plan_mutex());
        r2c = fftw_plan_dft_r2c_1d(n, real, spectrum, FFTW_ESTIMATE);
        c2r = fftw_plan_dft_c2r_1d(n, spectrum, real, FFTW_ESTIMATE);
    }
    ~Fft() {
        {
            std::lock_guard<std::mutex> lock(plan_mutex());
            fftw_destroy_plan(r2c);
            fftw_destroy_plan(c2r);
        }
        fftw_free(real);
        fftw_free(spectrum);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;
};

StripSolver::StripSolver(const Grid& grid)
    : grid_(grid), fft_(std::make_unique<Fft>(grid.nx)),
      hat_(static_cast<std::size_t>(grid.nz + 1) * (grid.nx / 2 + 1)),
      rhs_(static_cast<std::size_t>(grid.nz + 1) * grid.nx) {}

StripSolver::~StripSolver() = default;
StripSolver::StripSolver(StripSolver&&) noexcept = default;
StripSolver& StripSolver::operator=(StripSolver&&) noexcept = default;

// Transforms rows row0..row0+nrows-1 of rhs_ into hat_ rows 0..nrows-1.
void StripSolver::forward(int row0, int nrows) {
    const int nx = grid_.nx;
    const int nm = nx / 2 + 1;
    for (int r = 0; r < nrows; ++r) {
        const double* src = rhs_.data() + static_cast<std::size_t>(row0 + r) * nx;
        std::copy(src, src + nx, fft_->real);
        fftw_execute_dft_r2c(fft_->r2c, fft_->real, fft_->spectrum);
        for (int m = 0; m < nm; ++m) hat_[static_cast<std::size_t>(r) * nm + m] = {fft_->spectrum[m][0], fft_->spectrum[m][1]};
    }
}

void StripSolver::backward(ScalarField& g, int row0, int nrows) {
    const int nx = grid_.nx;
    const int nm = nx / 2 + 1;
    const double scale = 1.0 / nx;
    for (int r = 0; r < nrows; ++r) {
        for (int m = 0; m < nm; ++m) {
            const auto v = hat_[static_cast<std::size_t>(r) * nm + m];
            fft_->spectrum[m][0] = v.real();
            fft_->spectrum[m][1] = v.imag();
        }
        fftw_execute_dft_c2r(fft_->c2r, fft_->spectrum, fft_->real);
        for (int i = 0; i < nx; ++i) g(i, row0 + r) = fft_->real[i] * scale;
    }
}

// Thomas sweep per Fourier mode. Off-diagonals are -b/dz^2; the diagonal
// picks up the wall closure: Dirichlet ghost 2v - g adds b/dz^2, Neumann
// reflection removes it, nodal rows keep the plain stencil.
void StripSolver::solve_modes(int nrows, double a, double b, bool nodal, bool neumann) {
    const int nx = grid_.nx;
    const int nm = nx / 2 + 1;
    const double off = -b / (grid_.dz * grid_.dz);
    std::vector<double> cp(static_cast<std::size_t>(nrows));
    std::vector<std::complex<double>> dp(static_cast<std::size_t>(nrows));
    for (int m = 0; m < nm; ++m) {
        const double kx = (2.0 - 2.0 * std::cos(2.0 * std::numbers::pi * m / nx)) / (grid_.dx * grid_.dx);
        const double base = a + b * kx - 2.0 * off;
        const double wall = nodal ? 0.0 : (neumann ? off : -off);
        const bool pin = neumann && a == 0.0 && m == 0;
        auto diag = [&](int k) {
            double d = base;
            if (k == 0) d += wall;
            if (k == nrows - 1) d += wall;
            return d;
        };
        auto rhs = [&](int k) { return hat_[static_cast<std::size_t>(k) * nm + m]; };

        double d0 = diag(0);
        double u0 = off;
        std::complex<double> r0 = rhs(0);
        if (pin) {
            d0 = 1.0;
            u0 = 0.0;
            r0 = 0.0;
        }
        cp[0] = u0 / d0;
        dp[0] = r0 / d0;
        for (int k = 1; k < nrows; ++k) {
            const double denom = diag(k) - off * cp[k - 1];
            cp[k] = off / denom;
            dp[k] = (rhs(k) - off * dp[k - 1]) / denom;
        }
        hat_[static_cast<std::size_t>(nrows - 1) * nm + m] = dp[nrows - 1];
        for (int k = nrows - 2; k >= 0; --k) {
            const auto next = hat_[static_cast<std::size_t>(k + 1) * nm + m];
            hat_[static_cast<std::size_t>(k) * nm + m] = dp[k] - cp[k] * next;
        }
    }
}

PoissonResult StripSolver::poisson(const ScalarField& rhs) {
    if (!(rhs.grid() == grid_) || rhs.staggering() != Staggering::Center)
        fail(ErrorKind::Shape, "poisson: rhs must be a centred field on the solver grid");
    require_finite(rhs, "poisson");
    PoissonResult out{ScalarField(grid_), mean(rhs)};
    const auto v = rhs.values();
    for (std::size_t n = 0; n < v.size(); ++n) rhs_[n] = v[n] - out.removed_mean;
    forward(0, grid_.nz);
    // Laplacian g = f is (0 - (-1) Laplacian) g = f.
    solve_modes(grid_.nz, 0.0, -1.0, false, true);
    backward(out.phi, 0, grid_.nz);
    const double m = mean(out.phi);
    for (double& x : out.phi.values()) x -= m;
    return out;
}

ScalarField StripSolver::helmholtz(const ScalarField& f, double c, const ZBoundary& bc) {
    if (!(c > 0.0) || !std::isfinite(c)) fail(ErrorKind::Parameter, "helmholtz: coefficient c must be positive");
    return shifted(f, 1.0, c, bc);
}

ScalarField StripSolver::shifted(const ScalarField& f, double a, double b, const ZBoundary& bc) {
    if (!(f.grid() == grid_)) fail(ErrorKind::Shape, "solver: field grid differs from solver grid");
    if (!(b > 0.0) || !(a >= 0.0) || !std::isfinite(a) || !std::isfinite(b))
        fail(ErrorKind::Parameter, "solver: need a >= 0 and b > 0");
    require_finite(f, "solver");
    const bool dir = bc.kind == ZBoundary::Kind::Dirichlet;
    if (dir && (static_cast<int>(bc.bottom.size()) != grid_.nx || static_cast<int>(bc.top.size()) != grid_.nx))
        fail(ErrorKind::Shape, "solver: Dirichlet data must have nx entries per wall");
    const bool nodal = f.staggering() == Staggering::ZFace;
    if (nodal && !dir) fail(ErrorKind::Parameter, "solver: z-face fields need Dirichlet wall rows");
    if (a == 0.0 && !dir) fail(ErrorKind::Parameter, "solver: a = 0 with Neumann walls is singular; use poisson");

    const int nx = grid_.nx;
    const double idz2 = 1.0 / (grid_.dz * grid_.dz);
    ScalarField g(grid_, f.staggering());
    const auto v = f.values();
    std::copy(v.begin(), v.end(), rhs_.begin());
    int row0 = 0;
    int nrows = grid_.nz;
    if (nodal) {
        row0 = 1;
        nrows = grid_.nz - 1;
        for (int i = 0; i < nx; ++i) {
            rhs_[static_cast<std::size_t>(1) * nx + i] += b * idz2 * bc.bottom[i];
            rhs_[static_cast<std::size_t>(grid_.nz - 1) * nx + i] += b * idz2 * bc.top[i];
            g(i, 0) = bc.bottom[i];
            g(i, grid_.nz) = bc.top[i];
        }
    } else if (dir) {
        for (int i = 0; i < nx; ++i) {
            rhs_[i] += 2.0 * b * idz2 * bc.bottom[i];
            rhs_[static_cast<std::size_t>(grid_.nz - 1) * nx + i] += 2.0 * b * idz2 * bc.top[i];
        }
    }
    forward(row0, nrows);
    solve_modes(nrows, a, b, nodal, !dir);
    backward(g, row0, nrows);
    return g;
}

PoissonResult poisson_solve(const ScalarField& rhs) { return StripSolver(rhs.grid()).poisson(rhs); }

ScalarField helmholtz_solve(const ScalarField& f, double c, const ZBoundary& bc) {
    return StripSolver(f.grid()).helmholtz(f, c, bc);
}

ScalarField harmonic_extension(const Grid& grid, const ZBoundary& bc) {
    if (bc.kind != ZBoundary::Kind::Dirichlet) fail(ErrorKind::Parameter, "harmonic extension needs Dirichlet data");
    return StripSolver(grid).shifted(ScalarField(grid), 0.0, 1.0, bc);
}

} // namespace bll
