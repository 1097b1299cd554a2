#pragma once

// Direct solvers for (a - b Laplacian) g = f on the periodic strip: a real FFT
// in x diagonalises the periodic direction, then every Fourier mode is a
// tridiagonal system in z solved by the Thomas algorithm.

#include "bll/grid.hpp"

#include <complex>
#include <memory>
#include <vector>

namespace bll {

struct PoissonResult {
    ScalarField phi;
    double removed_mean = 0.0; // mean subtracted from the rhs for compatibility
};

class StripSolver {
public:
    explicit StripSolver(const Grid& grid);
    ~StripSolver();
    StripSolver(StripSolver&&) noexcept;
    StripSolver& operator=(StripSolver&&) noexcept;
    StripSolver(const StripSolver&) = delete;
    StripSolver& operator=(const StripSolver&) = delete;

    const Grid& grid() const { return grid_; }

    // Laplacian(phi) = rhs - mean(rhs), homogeneous Neumann in z, mean(phi) = 0.
    PoissonResult poisson(const ScalarField& rhs);

    // (I - c Laplacian) g = f. Centre and x-face fields use cell-centred
    // ghosts; z-face fields are nodal and take bc as their wall-row values.
    ScalarField helmholtz(const ScalarField& f, double c, const ZBoundary& bc);

    // (a - b Laplacian) g = f with a >= 0, b > 0. a = 0 needs Dirichlet data.
    ScalarField shifted(const ScalarField& f, double a, double b, const ZBoundary& bc);

private:
    void forward(int row0, int nrows);
    void backward(ScalarField& g, int row0, int nrows);
    void solve_modes(int nrows, double a, double b, bool nodal, bool neumann);

    struct Fft;
    Grid grid_;
    std::unique_ptr<Fft> fft_;
    std::vector<std::complex<double>> hat_; // rows x (nx/2 + 1)
    std::vector<double> rhs_;                // real work rows
};

// Convenience wrappers that build a one-shot solver.
PoissonResult poisson_solve(const ScalarField& rhs);
ScalarField helmholtz_solve(const ScalarField& f, double c, const ZBoundary& bc);

// Discrete harmonic function with the given Dirichlet wall data.
ScalarField harmonic_extension(const Grid& grid, const ZBoundary& bc);

} // namespace bll
