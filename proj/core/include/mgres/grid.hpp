#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace mgres {

struct Index3 {
    int i = 0;
    int j = 0;
    int k = 0;

    friend bool operator==(const Index3&, const Index3&) = default;
};

/// Inclusive range of node indices in the global index space of one level.
struct Box {
    Index3 lo;
    Index3 hi;

    [[nodiscard]] int extent(int axis) const;
    [[nodiscard]] bool empty() const { return hi.i < lo.i || hi.j < lo.j || hi.k < lo.k; }
    [[nodiscard]] std::size_t size() const;
    [[nodiscard]] bool contains(const Index3& n) const {
        return n.i >= lo.i && n.i <= hi.i && n.j >= lo.j && n.j <= hi.j && n.k >= lo.k && n.k <= hi.k;
    }
    [[nodiscard]] bool contains(const Box& b) const { return b.empty() || (contains(b.lo) && contains(b.hi)); }
    /// True if `n` lies on one of the six faces of the box.
    [[nodiscard]] bool on_boundary(const Index3& n) const;
    /// Shrink by one node on every side.
    [[nodiscard]] Box interior() const;
    [[nodiscard]] Box intersect(const Box& other) const;
    /// Same physical region on the next coarser level; requires even corners.
    [[nodiscard]] Box coarsened() const;
    [[nodiscard]] Box refined() const;

    friend bool operator==(const Box&, const Box&) = default;
};

/// Cube [0, cells]^3 of a level with `cells` cells per dimension.
Box cube_box(int cells);

/// Node-centered values over a box. Node (i,j,k) sits at (i*h, j*h, k*h); storage is
/// lexicographic with i fastest and k outermost.
class Field {
   public:
    Field() = default;
    Field(Box box, double spacing, double fill = 0.0);

    [[nodiscard]] const Box& box() const { return box_; }
    [[nodiscard]] double spacing() const { return h_; }

    [[nodiscard]] std::size_t index(int i, int j, int k) const {
        return (static_cast<std::size_t>(k - box_.lo.k) * ny_ + static_cast<std::size_t>(j - box_.lo.j)) * nx_ +
               static_cast<std::size_t>(i - box_.lo.i);
    }
    double& operator()(int i, int j, int k) { return values_[index(i, j, k)]; }
    double operator()(int i, int j, int k) const { return values_[index(i, j, k)]; }
    double& operator()(const Index3& n) { return (*this)(n.i, n.j, n.k); }
    double operator()(const Index3& n) const { return (*this)(n.i, n.j, n.k); }

    [[nodiscard]] std::span<double> values() { return values_; }
    [[nodiscard]] std::span<const double> values() const { return values_; }
    [[nodiscard]] std::ptrdiff_t stride_y() const { return static_cast<std::ptrdiff_t>(nx_); }
    [[nodiscard]] std::ptrdiff_t stride_z() const { return static_cast<std::ptrdiff_t>(nx_ * ny_); }

    void fill(double v);
    void fill(const Box& region, double v);
    /// Copy `src` values on `region`; the region must lie in both boxes.
    void copy_from(const Field& src, const Box& region);

   private:
    Box box_{{0, 0, 0}, {-1, -1, -1}};
    double h_ = 0.0;
    std::size_t nx_ = 0;
    std::size_t ny_ = 0;
    std::vector<double> values_;
};

using BoundaryFunction = std::function<double(double, double, double)>;

struct BoundaryData {
    BoundaryFunction g;

    /// g = sin(pi (x + sqrt(2) y)) sinh(sqrt(3) pi z), harmonic in R^3.
    static BoundaryData harmonic();
    static BoundaryData homogeneous();
};

struct Level {
    int index = 0;
    int cells = 0;
    double spacing = 0.0;

    [[nodiscard]] int nodes_per_dim() const { return cells + 1; }
    [[nodiscard]] Box box() const { return cube_box(cells); }
    /// Unknowns of the Dirichlet problem: (cells-1)^3.
    [[nodiscard]] std::size_t interior_count() const;
};

/// Nested uniform levels 0..L on the unit cube; level l has coarse_cells * 2^l cells per dimension.
class GridHierarchy {
   public:
    GridHierarchy(int coarse_cells, int finest_level, BoundaryData boundary);

    [[nodiscard]] int coarse_cells() const { return levels_.front().cells; }
    [[nodiscard]] int finest_level() const { return static_cast<int>(levels_.size()) - 1; }
    [[nodiscard]] const Level& level(int l) const { return levels_.at(static_cast<std::size_t>(l)); }
    [[nodiscard]] const Level& finest() const { return levels_.back(); }
    [[nodiscard]] const BoundaryData& boundary() const { return boundary_; }

    /// Zero field over the whole level.
    [[nodiscard]] Field make_field(int l) const;
    /// Write g at every node of `f` that lies on the boundary of the unit cube.
    void apply_boundary(Field& f) const;

    /// Full weighting of a level-`fine_level` field; throws ConfigError below level 0.
    [[nodiscard]] Field restrict_field(const Field& fine, int fine_level) const;
    /// Trilinear interpolation of a level-`coarse_level` field; throws ConfigError above level L.
    [[nodiscard]] Field prolongate_field(const Field& coarse, int coarse_level) const;

   private:
    std::vector<Level> levels_;
    BoundaryData boundary_;
};

/// Rejects n0 < 2 or L < 1 with ConfigError.
GridHierarchy build_hierarchy(int coarse_cells, int finest_level, BoundaryData boundary = BoundaryData::harmonic());

// Stencil kernels. All of them act on a sub-box `region` of their output field and read
// neighbours from the input fields, which must cover the region grown by one node where
// the stencil reaches. The operator is the 7-point Laplacian (6u - sum of axis neighbours)/h^2.

/// One lexicographic Gauss-Seidel sweep over `region`. Update order is i fastest, k slowest:
///   u = (h^2 f + u_w + u_e + u_s + u_n + u_b + u_t) / 6
void gauss_seidel_sweep(Field& u, const Field& f, const Box& region);

/// r = f - A u on `region`.
void compute_residual(Field& r, const Field& f, const Field& u, const Box& region);

/// Full weighting (27-point) of `fine` into `coarse` on the coarse nodes of `coarse_region`.
void restrict_into(Field& coarse, const Field& fine, const Box& coarse_region);

/// fine += trilinear interpolation of `coarse` on the fine nodes of `fine_region`.
void prolongate_add(Field& fine, const Field& coarse, const Box& fine_region);

double sum_of_squares(const Field& r, const Box& region);

// Whole-field operations. The boundary of the field's box is treated as a Dirichlet
// boundary: those rows are eliminated pointwise.

/// A u on the box interior; identity on the box boundary.
Field apply_operator(const Field& u);

/// f - A u on the interior, zero on the box boundary. Throws std::invalid_argument if
/// the two fields do not live on the same box and spacing.
Field residual(const Field& f, const Field& u);

/// Discrete L2 norm sqrt(h^3 sum r^2) over the box interior.
double norm(const Field& r);

/// Full weighting onto the next coarser level. Box-boundary values are injected, so a
/// field carrying g on its boundary keeps g there.
Field restrict_full_weighting(const Field& fine);

/// Trilinear interpolation onto the next finer level with zero injected on the box
/// boundary (correction scheme).
Field prolongate(const Field& coarse);

/// Euclidean inner product over all nodes; both fields must share a box.
double dot(const Field& a, const Field& b);

}  // namespace mgres
