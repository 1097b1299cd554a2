#pragma once

// Staggered (MAC) grid on the periodic strip T^1 x (0,1).
//
// Cell (i,k) has center ((i+1/2) dx, (k+1/2) dz). x-face (i,k) is the left
// face of cell (i,k); z-face (i,k) is the bottom face of cell (i,k), so z-faces
// run k = 0..nz with k = 0 and k = nz lying on the walls. Storage is row-major
// with x fastest: index = k * nx + i.

#include <cstddef>
#include <span>
#include <vector>

namespace bll {

struct Grid {
    int nx = 0;
    int nz = 0;
    double lx = 1.0;
    double dx = 0.0;
    double dz = 0.0;

    Grid() = default;
    // Throws ParameterError unless nx >= 4, nz >= 4, lx > 0.
    Grid(int nx, int nz, double lx = 1.0);

    double x_center(int i) const { return (i + 0.5) * dx; }
    double z_center(int k) const { return (k + 0.5) * dz; }
    double x_face(int i) const { return i * dx; }
    double z_face(int k) const { return k * dz; }
    double cell_volume() const { return dx * dz; }
    double area() const { return lx; }

    bool operator==(const Grid& o) const { return nx == o.nx && nz == o.nz && lx == o.lx; }
};

enum class Staggering : unsigned char { Center = 0, XFace = 1, ZFace = 2 };

const char* to_string(Staggering s);

class ScalarField {
public:
    ScalarField() = default;
    ScalarField(const Grid& grid, Staggering stag = Staggering::Center, double fill = 0.0);

    const Grid& grid() const { return grid_; }
    Staggering staggering() const { return stag_; }
    int rows() const { return rows_; }
    int cols() const { return grid_.nx; }
    std::size_t size() const { return data_.size(); }

    double& operator()(int i, int k) { return data_[static_cast<std::size_t>(k) * grid_.nx + i]; }
    double operator()(int i, int k) const { return data_[static_cast<std::size_t>(k) * grid_.nx + i]; }
    // Periodic access in x.
    double at_wrap(int i, int k) const { return (*this)(wrap(i), k); }
    int wrap(int i) const { return (i % grid_.nx + grid_.nx) % grid_.nx; }

    std::span<double> values() { return data_; }
    std::span<const double> values() const { return data_; }

    bool all_finite() const;
    double max_abs() const;

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);
    ScalarField& add_scaled(double s, const ScalarField& o);
    ScalarField& fill(double v);

    friend ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
    friend ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
    friend ScalarField operator*(double s, ScalarField a) { return a *= s; }

private:
    Grid grid_;
    Staggering stag_ = Staggering::Center;
    int rows_ = 0;
    std::vector<double> data_;
};

// MAC velocity: u on x-faces, w on z-faces. The wall rows of w hold the
// no-slip value 0; the tangential ghost value is the mirror -u.
struct VectorField {
    ScalarField u;
    ScalarField w;

    VectorField() = default;
    explicit VectorField(const Grid& grid);

    const Grid& grid() const { return u.grid(); }
    VectorField& add_scaled(double s, const VectorField& o);
    double max_abs() const;
};

// Wall boundary data for cell-centred fields.
struct ZBoundary {
    enum class Kind { Neumann, Dirichlet };
    Kind kind = Kind::Neumann;
    std::vector<double> bottom; // length nx, Dirichlet values on z = 0
    std::vector<double> top;    // length nx, Dirichlet values on z = 1

    static ZBoundary neumann() { return {}; }
    static ZBoundary dirichlet(const Grid& g, double bottom, double top);
    static ZBoundary dirichlet(std::vector<double> bottom, std::vector<double> top);
};

// Gradient of a centred field onto MAC faces. Wall z-faces carry the
// one-sided wall derivative for Dirichlet data and 0 for Neumann.
VectorField grad(const ScalarField& f, const ZBoundary& bc = ZBoundary::neumann());

// Divergence of a MAC field at cell centres.
ScalarField div(const VectorField& v);

// Five-point Laplacian. Centre and x-face fields are cell-centred in z and use
// ghost reflection (Neumann) or 2b - f (Dirichlet); z-face fields are nodal in
// z, take their own wall rows as boundary values (bc is ignored) and return 0
// on the wall rows.
ScalarField laplacian(const ScalarField& f, const ZBoundary& bc);

// Cell-volume weighted average of a centred field.
double mean(const ScalarField& f);

// Discrete L2 inner products weighted by cell/face volumes.
double inner(const ScalarField& a, const ScalarField& b);
double inner(const VectorField& a, const VectorField& b);

// Interpolation between staggerings.
ScalarField center_to_xface(const ScalarField& f);
ScalarField center_to_zface(const ScalarField& f, const ZBoundary& bc);
ScalarField xface_to_center(const ScalarField& u);
ScalarField zface_to_center(const ScalarField& w);

// Builds a centred field from a function of (x, z).
template <class F>
ScalarField sample(const Grid& g, F&& f) {
    ScalarField out(g);
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) out(i, k) = f(g.x_center(i), g.z_center(k));
    return out;
}

template <class F>
std::vector<double> sample_x(const Grid& g, F&& f) {
    std::vector<double> out(g.nx);
    for (int i = 0; i < g.nx; ++i) out[i] = f(g.x_center(i));
    return out;
}

// Throws ShapeError if the two fields differ in grid or staggering.
void require_compatible(const ScalarField& a, const ScalarField& b);

} // namespace bll
