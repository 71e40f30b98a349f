#include "mgres/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "mgres/errors.hpp"

namespace mgres {

namespace {

constexpr double kMaxFinestNodes = 1.5e8;

int axis_value(const Index3& n, int axis) { return axis == 0 ? n.i : (axis == 1 ? n.j : n.k); }

bool even_corners(const Box& b) {
    return b.lo.i % 2 == 0 && b.lo.j % 2 == 0 && b.lo.k % 2 == 0 && b.hi.i % 2 == 0 && b.hi.j % 2 == 0 &&
           b.hi.k % 2 == 0;
}

void require_same_layout(const Field& a, const Field& b, const char* what) {
    if (!(a.box() == b.box()) || a.spacing() != b.spacing()) {
        throw std::invalid_argument(std::string(what) + ": fields live on different boxes or levels");
    }
}

// Per-axis interpolation stencil of a fine node from its coarse parents.
struct Parents {
    int first;
    int second;
    double weight_first;
    double weight_second;
};

Parents parents_of(int fine_index) {
    if (fine_index % 2 == 0) return {fine_index / 2, fine_index / 2, 1.0, 0.0};
    return {(fine_index - 1) / 2, (fine_index + 1) / 2, 0.5, 0.5};
}

}  // namespace

int Box::extent(int axis) const { return axis_value(hi, axis) - axis_value(lo, axis) + 1; }

std::size_t Box::size() const {
    if (empty()) return 0;
    return static_cast<std::size_t>(extent(0)) * static_cast<std::size_t>(extent(1)) *
           static_cast<std::size_t>(extent(2));
}

bool Box::on_boundary(const Index3& n) const {
    return contains(n) &&
           (n.i == lo.i || n.i == hi.i || n.j == lo.j || n.j == hi.j || n.k == lo.k || n.k == hi.k);
}

Box Box::interior() const {
    return {{lo.i + 1, lo.j + 1, lo.k + 1}, {hi.i - 1, hi.j - 1, hi.k - 1}};
}

Box Box::intersect(const Box& other) const {
    return {{std::max(lo.i, other.lo.i), std::max(lo.j, other.lo.j), std::max(lo.k, other.lo.k)},
            {std::min(hi.i, other.hi.i), std::min(hi.j, other.hi.j), std::min(hi.k, other.hi.k)}};
}

Box Box::coarsened() const {
    if (!even_corners(*this)) throw std::invalid_argument("box corners must be even to coarsen");
    return {{lo.i / 2, lo.j / 2, lo.k / 2}, {hi.i / 2, hi.j / 2, hi.k / 2}};
}

Box Box::refined() const { return {{2 * lo.i, 2 * lo.j, 2 * lo.k}, {2 * hi.i, 2 * hi.j, 2 * hi.k}}; }

Box cube_box(int cells) { return {{0, 0, 0}, {cells, cells, cells}}; }

Field::Field(Box box, double spacing, double fill)
    : box_(box),
      h_(spacing),
      nx_(box.empty() ? 0 : static_cast<std::size_t>(box.extent(0))),
      ny_(box.empty() ? 0 : static_cast<std::size_t>(box.extent(1))),
      values_(box.size(), fill) {}

void Field::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

void Field::fill(const Box& region, double v) {
    if (region.empty()) return;
    for (int k = region.lo.k; k <= region.hi.k; ++k) {
        for (int j = region.lo.j; j <= region.hi.j; ++j) {
            double* row = values_.data() + index(region.lo.i, j, k);
            std::fill(row, row + region.extent(0), v);
        }
    }
}

void Field::copy_from(const Field& src, const Box& region) {
    if (region.empty()) return;
    for (int k = region.lo.k; k <= region.hi.k; ++k) {
        for (int j = region.lo.j; j <= region.hi.j; ++j) {
            const double* from = src.values_.data() + src.index(region.lo.i, j, k);
            std::copy(from, from + region.extent(0), values_.data() + index(region.lo.i, j, k));
        }
    }
}

BoundaryData BoundaryData::harmonic() {
    return {[](double x, double y, double z) {
        using std::numbers::pi;
        return std::sin(pi * (x + std::numbers::sqrt2 * y)) * std::sinh(std::numbers::sqrt3 * pi * z);
    }};
}

BoundaryData BoundaryData::homogeneous() {
    return {[](double, double, double) { return 0.0; }};
}

std::size_t Level::interior_count() const {
    const auto m = static_cast<std::size_t>(cells - 1);
    return m * m * m;
}

GridHierarchy::GridHierarchy(int coarse_cells, int finest_level, BoundaryData boundary)
    : boundary_(std::move(boundary)) {
    if (coarse_cells < 1 || finest_level < 0) throw ConfigError("grid hierarchy needs n0 >= 1 and L >= 0");
    int cells = coarse_cells;
    for (int l = 0; l <= finest_level; ++l) {
        levels_.push_back({l, cells, 1.0 / cells});
        cells *= 2;
    }
}

Field GridHierarchy::make_field(int l) const {
    const Level& lv = level(l);
    return Field(lv.box(), lv.spacing);
}

void GridHierarchy::apply_boundary(Field& f) const {
    const double h = f.spacing();
    const int cells = static_cast<int>(std::lround(1.0 / h));
    const Box cube = cube_box(cells);
    const Box& b = f.box();
    for (int k = b.lo.k; k <= b.hi.k; ++k) {
        for (int j = b.lo.j; j <= b.hi.j; ++j) {
            for (int i = b.lo.i; i <= b.hi.i; ++i) {
                if (cube.on_boundary({i, j, k})) f(i, j, k) = boundary_.g(i * h, j * h, k * h);
            }
        }
    }
}

Field GridHierarchy::restrict_field(const Field& fine, int fine_level) const {
    if (fine_level < 1 || fine_level > finest_level()) {
        throw ConfigError("cannot restrict from level " + std::to_string(fine_level));
    }
    return restrict_full_weighting(fine);
}

Field GridHierarchy::prolongate_field(const Field& coarse, int coarse_level) const {
    if (coarse_level < 0 || coarse_level >= finest_level()) {
        throw ConfigError("cannot prolongate from level " + std::to_string(coarse_level));
    }
    return prolongate(coarse);
}

GridHierarchy build_hierarchy(int coarse_cells, int finest_level, BoundaryData boundary) {
    if (coarse_cells < 2) throw ConfigError("n0 must be at least 2, got " + std::to_string(coarse_cells));
    if (finest_level < 1) throw ConfigError("L must be at least 1, got " + std::to_string(finest_level));
    const double nodes = std::pow(std::ldexp(static_cast<double>(coarse_cells), finest_level) + 1.0, 3);
    if (nodes > kMaxFinestNodes) {
        throw ConfigError("finest level would hold " + std::to_string(nodes) + " nodes, over the memory budget");
    }
    return GridHierarchy(coarse_cells, finest_level, std::move(boundary));
}

void gauss_seidel_sweep(Field& u, const Field& f, const Box& region) {
    if (region.empty()) return;
    const double h2 = u.spacing() * u.spacing();
    const std::ptrdiff_t sy = u.stride_y();
    const std::ptrdiff_t sz = u.stride_z();
    double* ud = u.values().data();
    const double* fd = f.values().data();
    const int nx = region.extent(0);
    for (int k = region.lo.k; k <= region.hi.k; ++k) {
        for (int j = region.lo.j; j <= region.hi.j; ++j) {
            double* p = ud + u.index(region.lo.i, j, k);
            const double* q = fd + f.index(region.lo.i, j, k);
            for (int n = 0; n < nx; ++n, ++p, ++q) {
                *p = (h2 * *q + p[-1] + p[1] + p[-sy] + p[sy] + p[-sz] + p[sz]) / 6.0;
            }
        }
    }
}

void compute_residual(Field& r, const Field& f, const Field& u, const Box& region) {
    if (region.empty()) return;
    const double inv_h2 = 1.0 / (u.spacing() * u.spacing());
    const std::ptrdiff_t sy = u.stride_y();
    const std::ptrdiff_t sz = u.stride_z();
    const int nx = region.extent(0);
    for (int k = region.lo.k; k <= region.hi.k; ++k) {
        for (int j = region.lo.j; j <= region.hi.j; ++j) {
            const double* p = u.values().data() + u.index(region.lo.i, j, k);
            const double* q = f.values().data() + f.index(region.lo.i, j, k);
            double* out = r.values().data() + r.index(region.lo.i, j, k);
            for (int n = 0; n < nx; ++n, ++p, ++q, ++out) {
                *out = *q - (6.0 * p[0] - p[-1] - p[1] - p[-sy] - p[sy] - p[-sz] - p[sz]) * inv_h2;
            }
        }
    }
}

void restrict_into(Field& coarse, const Field& fine, const Box& coarse_region) {
    if (coarse_region.empty()) return;
    static constexpr double w[3] = {0.25, 0.5, 0.25};
    const std::ptrdiff_t sy = fine.stride_y();
    const std::ptrdiff_t sz = fine.stride_z();
    const double* fd = fine.values().data();
    for (int k = coarse_region.lo.k; k <= coarse_region.hi.k; ++k) {
        for (int j = coarse_region.lo.j; j <= coarse_region.hi.j; ++j) {
            for (int i = coarse_region.lo.i; i <= coarse_region.hi.i; ++i) {
                const double* c = fd + fine.index(2 * i, 2 * j, 2 * k);
                double s = 0.0;
                for (int dk = -1; dk <= 1; ++dk) {
                    for (int dj = -1; dj <= 1; ++dj) {
                        const double* row = c + dk * sz + dj * sy;
                        const double wkj = w[dk + 1] * w[dj + 1];
                        s += wkj * 0.25 * row[-1] + wkj * 0.5 * row[0] + wkj * 0.25 * row[1];
                    }
                }
                coarse(i, j, k) = s;
            }
        }
    }
}

void prolongate_add(Field& fine, const Field& coarse, const Box& fine_region) {
    if (fine_region.empty()) return;
    for (int k = fine_region.lo.k; k <= fine_region.hi.k; ++k) {
        const Parents pk = parents_of(k);
        for (int j = fine_region.lo.j; j <= fine_region.hi.j; ++j) {
            const Parents pj = parents_of(j);
            double* out = fine.values().data() + fine.index(fine_region.lo.i, j, k);
            for (int i = fine_region.lo.i; i <= fine_region.hi.i; ++i, ++out) {
                const Parents pi = parents_of(i);
                double s = 0.0;
                const int ks[2] = {pk.first, pk.second};
                const double wk[2] = {pk.weight_first, pk.weight_second};
                const int js[2] = {pj.first, pj.second};
                const double wj[2] = {pj.weight_first, pj.weight_second};
                const int is[2] = {pi.first, pi.second};
                const double wi[2] = {pi.weight_first, pi.weight_second};
                for (int a = 0; a < 2; ++a) {
                    if (wk[a] == 0.0) continue;
                    for (int b = 0; b < 2; ++b) {
                        if (wj[b] == 0.0) continue;
                        for (int c = 0; c < 2; ++c) {
                            if (wi[c] == 0.0) continue;
                            s += wk[a] * wj[b] * wi[c] * coarse(is[c], js[b], ks[a]);
                        }
                    }
                }
                *out += s;
            }
        }
    }
}

double sum_of_squares(const Field& r, const Box& region) {
    double s = 0.0;
    if (region.empty()) return s;
    const int nx = region.extent(0);
    for (int k = region.lo.k; k <= region.hi.k; ++k) {
        for (int j = region.lo.j; j <= region.hi.j; ++j) {
            const double* p = r.values().data() + r.index(region.lo.i, j, k);
            for (int n = 0; n < nx; ++n) s += p[n] * p[n];
        }
    }
    return s;
}

Field apply_operator(const Field& u) {
    Field out = u;
    const Field zero(u.box(), u.spacing());
    const Box inner = u.box().interior();
    compute_residual(out, zero, u, inner);
    for (int k = inner.lo.k; k <= inner.hi.k; ++k) {
        for (int j = inner.lo.j; j <= inner.hi.j; ++j) {
            for (int i = inner.lo.i; i <= inner.hi.i; ++i) out(i, j, k) = -out(i, j, k);
        }
    }
    return out;
}

Field residual(const Field& f, const Field& u) {
    require_same_layout(f, u, "residual");
    Field r(u.box(), u.spacing());
    compute_residual(r, f, u, u.box().interior());
    return r;
}

double norm(const Field& r) {
    const double h = r.spacing();
    return std::sqrt(h * h * h * sum_of_squares(r, r.box().interior()));
}

Field restrict_full_weighting(const Field& fine) {
    const Box cb = fine.box().coarsened();
    Field coarse(cb, 2.0 * fine.spacing());
    for (int k = cb.lo.k; k <= cb.hi.k; ++k) {
        for (int j = cb.lo.j; j <= cb.hi.j; ++j) {
            for (int i = cb.lo.i; i <= cb.hi.i; ++i) {
                if (cb.on_boundary({i, j, k})) coarse(i, j, k) = fine(2 * i, 2 * j, 2 * k);
            }
        }
    }
    restrict_into(coarse, fine, cb.interior());
    return coarse;
}

Field prolongate(const Field& coarse) {
    Field fine(coarse.box().refined(), 0.5 * coarse.spacing());
    prolongate_add(fine, coarse, fine.box().interior());
    return fine;
}

double dot(const Field& a, const Field& b) {
    require_same_layout(a, b, "dot");
    double s = 0.0;
    const auto av = a.values();
    const auto bv = b.values();
    for (std::size_t n = 0; n < av.size(); ++n) s += av[n] * bv[n];
    return s;
}

}  // namespace mgres
