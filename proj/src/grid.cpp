#include "bll/grid.hpp"

#include "bll/errors.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace bll {

Grid::Grid(int nx_, int nz_, double lx_) : nx(nx_), nz(nz_), lx(lx_) {
    if (nx < 4 || nz < 4) fail(ErrorKind::Parameter, "grid needs nx >= 4 and nz >= 4");
    if (!(lx > 0.0) || !std::isfinite(lx)) fail(ErrorKind::Parameter, "grid period lx must be positive");
    dx = lx / nx;
    dz = 1.0 / nz;
}

const char* to_string(Staggering s) {
    switch (s) {
    case Staggering::Center: return "center";
    case Staggering::XFace: return "x-face";
    case Staggering::ZFace: return "z-face";
    }
    return "unknown";
}

ScalarField::ScalarField(const Grid& grid, Staggering stag, double fill)
    : grid_(grid), stag_(stag), rows_(stag == Staggering::ZFace ? grid.nz + 1 : grid.nz),
      data_(static_cast<std::size_t>(rows_) * grid.nx, fill) {}

bool ScalarField::all_finite() const {
    return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
}

void require_compatible(const ScalarField& a, const ScalarField& b) {
    if (!(a.grid() == b.grid()) || a.staggering() != b.staggering()) {
        std::ostringstream os;
        os << "field mismatch: " << a.grid().nx << "x" << a.grid().nz << " " << to_string(a.staggering()) << " vs "
           << b.grid().nx << "x" << b.grid().nz << " " << to_string(b.staggering());
        fail(ErrorKind::Shape, os.str());
    }
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_compatible(*this, o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += o.data_[n];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_compatible(*this, o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] -= o.data_[n];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
}

ScalarField& ScalarField::add_scaled(double s, const ScalarField& o) {
    require_compatible(*this, o);
    for (std::size_t n = 0; n < data_.size(); ++n) data_[n] += s * o.data_[n];
    return *this;
}

ScalarField& ScalarField::fill(double v) {
    std::fill(data_.begin(), data_.end(), v);
    return *this;
}

VectorField::VectorField(const Grid& grid) : u(grid, Staggering::XFace), w(grid, Staggering::ZFace) {}

VectorField& VectorField::add_scaled(double s, const VectorField& o) {
    u.add_scaled(s, o.u);
    w.add_scaled(s, o.w);
    return *this;
}

double VectorField::max_abs() const { return std::max(u.max_abs(), w.max_abs()); }

ZBoundary ZBoundary::dirichlet(const Grid& g, double bottom, double top) {
    return dirichlet(std::vector<double>(g.nx, bottom), std::vector<double>(g.nx, top));
}

ZBoundary ZBoundary::dirichlet(std::vector<double> bottom, std::vector<double> top) {
    ZBoundary bc;
    bc.kind = Kind::Dirichlet;
    bc.bottom = std::move(bottom);
    bc.top = std::move(top);
    return bc;
}

namespace {

void require_stag(const ScalarField& f, Staggering s, const char* op) {
    if (f.staggering() != s) {
        fail(ErrorKind::Shape, std::string(op) + " expects a " + to_string(s) + " field, got " +
                                   to_string(f.staggering()));
    }
}

void require_bc(const ZBoundary& bc, const Grid& g) {
    if (bc.kind == ZBoundary::Kind::Dirichlet &&
        (static_cast<int>(bc.bottom.size()) != g.nx || static_cast<int>(bc.top.size()) != g.nx)) {
        fail(ErrorKind::Shape, "Dirichlet boundary data must have nx entries per wall");
    }
}

// Ghost values below row 0 and above row nz-1 for a cell-centred column.
double ghost_bottom(const ScalarField& f, int i, const ZBoundary& bc) {
    return bc.kind == ZBoundary::Kind::Dirichlet ? 2.0 * bc.bottom[i] - f(i, 0) : f(i, 0);
}

double ghost_top(const ScalarField& f, int i, const ZBoundary& bc) {
    const int k = f.grid().nz - 1;
    return bc.kind == ZBoundary::Kind::Dirichlet ? 2.0 * bc.top[i] - f(i, k) : f(i, k);
}

} // namespace

VectorField grad(const ScalarField& f, const ZBoundary& bc) {
    require_stag(f, Staggering::Center, "grad");
    const Grid& g = f.grid();
    require_bc(bc, g);
    VectorField out(g);
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) out.u(i, k) = (f(i, k) - f.at_wrap(i - 1, k)) / g.dx;
    for (int k = 1; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) out.w(i, k) = (f(i, k) - f(i, k - 1)) / g.dz;
    if (bc.kind == ZBoundary::Kind::Dirichlet) {
        for (int i = 0; i < g.nx; ++i) {
            out.w(i, 0) = (f(i, 0) - bc.bottom[i]) / (0.5 * g.dz);
            out.w(i, g.nz) = (bc.top[i] - f(i, g.nz - 1)) / (0.5 * g.dz);
        }
    }
    return out;
}

ScalarField div(const VectorField& v) {
    require_stag(v.u, Staggering::XFace, "div");
    require_stag(v.w, Staggering::ZFace, "div");
    const Grid& g = v.grid();
    if (!(v.w.grid() == g)) fail(ErrorKind::Shape, "velocity components live on different grids");
    ScalarField out(g);
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i)
            out(i, k) = (v.u.at_wrap(i + 1, k) - v.u(i, k)) / g.dx + (v.w(i, k + 1) - v.w(i, k)) / g.dz;
    return out;
}

ScalarField laplacian(const ScalarField& f, const ZBoundary& bc) {
    const Grid& g = f.grid();
    ScalarField out(g, f.staggering());
    const double idx2 = 1.0 / (g.dx * g.dx);
    const double idz2 = 1.0 / (g.dz * g.dz);
    if (f.staggering() == Staggering::ZFace) {
        for (int k = 1; k < g.nz; ++k)
            for (int i = 0; i < g.nx; ++i)
                out(i, k) = (f.at_wrap(i + 1, k) - 2.0 * f(i, k) + f.at_wrap(i - 1, k)) * idx2 +
                            (f(i, k + 1) - 2.0 * f(i, k) + f(i, k - 1)) * idz2;
        return out;
    }
    require_bc(bc, g);
    for (int k = 0; k < g.nz; ++k) {
        for (int i = 0; i < g.nx; ++i) {
            const double below = k > 0 ? f(i, k - 1) : ghost_bottom(f, i, bc);
            const double above = k < g.nz - 1 ? f(i, k + 1) : ghost_top(f, i, bc);
            out(i, k) = (f.at_wrap(i + 1, k) - 2.0 * f(i, k) + f.at_wrap(i - 1, k)) * idx2 +
                        (above - 2.0 * f(i, k) + below) * idz2;
        }
    }
    return out;
}

double mean(const ScalarField& f) {
    require_stag(f, Staggering::Center, "mean");
    double s = 0.0;
    for (double v : f.values()) s += v;
    return s / static_cast<double>(f.size());
}

double inner(const ScalarField& a, const ScalarField& b) {
    require_compatible(a, b);
    double s = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t n = 0; n < av.size(); ++n) s += av[n] * bv[n];
    return s * a.grid().cell_volume();
}

double inner(const VectorField& a, const VectorField& b) { return inner(a.u, b.u) + inner(a.w, b.w); }

ScalarField center_to_xface(const ScalarField& f) {
    require_stag(f, Staggering::Center, "center_to_xface");
    const Grid& g = f.grid();
    ScalarField out(g, Staggering::XFace);
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) out(i, k) = 0.5 * (f(i, k) + f.at_wrap(i - 1, k));
    return out;
}

ScalarField center_to_zface(const ScalarField& f, const ZBoundary& bc) {
    require_stag(f, Staggering::Center, "center_to_zface");
    const Grid& g = f.grid();
    require_bc(bc, g);
    ScalarField out(g, Staggering::ZFace);
    for (int k = 1; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) out(i, k) = 0.5 * (f(i, k) + f(i, k - 1));
    for (int i = 0; i < g.nx; ++i) {
        out(i, 0) = bc.kind == ZBoundary::Kind::Dirichlet ? bc.bottom[i] : f(i, 0);
        out(i, g.nz) = bc.kind == ZBoundary::Kind::Dirichlet ? bc.top[i] : f(i, g.nz - 1);
    }
    return out;
}

ScalarField xface_to_center(const ScalarField& u) {
    require_stag(u, Staggering::XFace, "xface_to_center");
    const Grid& g = u.grid();
    ScalarField out(g);
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) out(i, k) = 0.5 * (u(i, k) + u.at_wrap(i + 1, k));
    return out;
}

ScalarField zface_to_center(const ScalarField& w) {
    require_stag(w, Staggering::ZFace, "zface_to_center");
    const Grid& g = w.grid();
    ScalarField out(g);
    for (int k = 0; k < g.nz; ++k)
        for (int i = 0; i < g.nx; ++i) out(i, k) = 0.5 * (w(i, k) + w(i, k + 1));
    return out;
}

} // namespace bll
