#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mgres/grid.hpp"

namespace mgres {

/// Cholesky factorisation of a symmetric positive definite band matrix. Only the lower
/// band is stored: entry (row, col) with 0 <= row - col <= bandwidth.
class BandedCholesky {
   public:
    BandedCholesky(std::size_t order, std::size_t bandwidth);

    [[nodiscard]] std::size_t order() const { return order_; }
    [[nodiscard]] std::size_t bandwidth() const { return bandwidth_; }

    /// Lower-band entry; valid before factor().
    double& at(std::size_t row, std::size_t col) { return band_[row * (bandwidth_ + 1) + (bandwidth_ - (row - col))]; }

    /// In-place factorisation. Throws SimulationError on a non-positive pivot.
    void factor();
    /// Overwrites `rhs` with the solution.
    void solve(std::span<double> rhs) const;

   private:
    double lower(std::size_t row, std::size_t col) const {
        return band_[row * (bandwidth_ + 1) + (bandwidth_ - (row - col))];
    }

    std::size_t order_;
    std::size_t bandwidth_;
    std::vector<double> band_;
    bool factored_ = false;
};

/// Direct solver for the 7-point Dirichlet problem on the interior of a box. Unknowns are
/// the interior nodes in lexicographic order.
class BoxDirectSolver {
   public:
    BoxDirectSolver(const Box& box, double spacing);

    [[nodiscard]] const Box& box() const { return box_; }
    [[nodiscard]] std::size_t unknowns() const { return interior_.size(); }

    /// Solves A u = f on the interior with the boundary values of `u` as Dirichlet data.
    void solve(Field& u, const Field& f) const;

   private:
    Box box_;
    Box interior_;
    double h_;
    BandedCholesky factor_;
};

}  // namespace mgres
