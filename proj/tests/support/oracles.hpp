#pragma once

// Dense reference implementations. They share no code with the library kernels: every
// matrix is assembled from the textbook formulas node by node.

#include <functional>
#include <random>

#include <Eigen/Dense>

#include "mgres/grid.hpp"
#include "mgres/partition.hpp"

namespace oracle {

/// Interior nodes of `box`, lexicographic with i fastest.
std::vector<mgres::Index3> interior_nodes(const mgres::Box& box);

/// 7-point Dirichlet Laplacian on the interior of `box`, (6u - sum of neighbours)/h^2.
Eigen::MatrixXd laplacian(const mgres::Box& box, double h);

/// Solves A u = f on the box interior with the boundary values of `dirichlet`, by dense LU.
mgres::Field dense_solve(const mgres::Field& f, const mgres::Field& dirichlet);

/// Interior values of a field as a vector, in interior_nodes order.
Eigen::VectorXd interior_vector(const mgres::Field& u);
void set_interior(mgres::Field& u, const Eigen::VectorXd& v);

/// Trilinear interpolation from the interior of a level with `coarse_cells` cells to the
/// interior of the next finer level (zero Dirichlet data).
Eigen::MatrixXd prolongation(int coarse_cells);
/// 27-point full weighting, fine interior to coarse interior.
Eigen::MatrixXd restriction(int coarse_cells);

double spectral_radius(const Eigen::MatrixXd& m);

/// Field with i.i.d. uniform(-1, 1) values, optionally zero on the box boundary.
mgres::Field random_field(const mgres::Box& box, double h, std::mt19937_64& rng, bool zero_boundary);

/// Field holding fn(x, y, z) at every node.
mgres::Field sample(const mgres::Box& box, double h, const std::function<double(double, double, double)>& fn);

/// Global field assembled independently: value of the lowest-rank live copy.
mgres::Field assemble_reference(const mgres::Cluster& cluster, int level, mgres::FieldKind kind);

bool bit_equal(const mgres::Field& a, const mgres::Field& b);
double max_abs_diff(const mgres::Field& a, const mgres::Field& b);
double max_abs(const mgres::Field& a);

}  // namespace oracle
