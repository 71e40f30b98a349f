#include "mgres/banded_cholesky.hpp"

#include <algorithm>
#include <cmath>

#include "mgres/errors.hpp"

namespace mgres {

BandedCholesky::BandedCholesky(std::size_t order, std::size_t bandwidth)
    : order_(order), bandwidth_(bandwidth), band_(order * (bandwidth + 1), 0.0) {}

void BandedCholesky::factor() {
    for (std::size_t j = 0; j < order_; ++j) {
        const std::size_t first = j > bandwidth_ ? j - bandwidth_ : 0;
        double d = at(j, j);
        for (std::size_t k = first; k < j; ++k) d -= lower(j, k) * lower(j, k);
        if (!(d > 0.0)) throw SimulationError("band matrix is not positive definite");
        const double pivot = std::sqrt(d);
        at(j, j) = pivot;
        const std::size_t last = std::min(order_ - 1, j + bandwidth_);
        for (std::size_t i = j + 1; i <= last; ++i) {
            const std::size_t start = i > bandwidth_ ? i - bandwidth_ : 0;
            double s = at(i, j);
            for (std::size_t k = std::max(first, start); k < j; ++k) s -= lower(i, k) * lower(j, k);
            at(i, j) = s / pivot;
        }
    }
    factored_ = true;
}

void BandedCholesky::solve(std::span<double> rhs) const {
    if (!factored_) throw SimulationError("BandedCholesky::solve before factor");
    for (std::size_t i = 0; i < order_; ++i) {
        const std::size_t first = i > bandwidth_ ? i - bandwidth_ : 0;
        double s = rhs[i];
        for (std::size_t k = first; k < i; ++k) s -= lower(i, k) * rhs[k];
        rhs[i] = s / lower(i, i);
    }
    for (std::size_t i = order_; i-- > 0;) {
        const std::size_t last = std::min(order_ - 1, i + bandwidth_);
        double s = rhs[i];
        for (std::size_t k = i + 1; k <= last; ++k) s -= lower(k, i) * rhs[k];
        rhs[i] = s / lower(i, i);
    }
}

namespace {

std::size_t interior_bandwidth(const Box& interior) {
    if (interior.empty()) return 0;
    return static_cast<std::size_t>(interior.extent(0)) * static_cast<std::size_t>(interior.extent(1));
}

}  // namespace

BoxDirectSolver::BoxDirectSolver(const Box& box, double spacing)
    : box_(box), interior_(box.interior()), h_(spacing), factor_(interior_.size(), interior_bandwidth(interior_)) {
    if (interior_.empty()) return;
    const double inv_h2 = 1.0 / (h_ * h_);
    const std::size_t nx = static_cast<std::size_t>(interior_.extent(0));
    const std::size_t nxy = nx * static_cast<std::size_t>(interior_.extent(1));
    std::size_t row = 0;
    for (int k = interior_.lo.k; k <= interior_.hi.k; ++k) {
        for (int j = interior_.lo.j; j <= interior_.hi.j; ++j) {
            for (int i = interior_.lo.i; i <= interior_.hi.i; ++i, ++row) {
                factor_.at(row, row) = 6.0 * inv_h2;
                if (i > interior_.lo.i) factor_.at(row, row - 1) = -inv_h2;
                if (j > interior_.lo.j) factor_.at(row, row - nx) = -inv_h2;
                if (k > interior_.lo.k) factor_.at(row, row - nxy) = -inv_h2;
            }
        }
    }
    factor_.factor();
}

void BoxDirectSolver::solve(Field& u, const Field& f) const {
    if (interior_.empty()) return;
    // Move the Dirichlet data to the right-hand side: b = f + (sum of boundary neighbours)/h^2.
    const double inv_h2 = 1.0 / (h_ * h_);
    std::vector<double> rhs(interior_.size());
    std::size_t row = 0;
    for (int k = interior_.lo.k; k <= interior_.hi.k; ++k) {
        for (int j = interior_.lo.j; j <= interior_.hi.j; ++j) {
            for (int i = interior_.lo.i; i <= interior_.hi.i; ++i, ++row) {
                double b = f(i, j, k);
                if (i == interior_.lo.i) b += u(i - 1, j, k) * inv_h2;
                if (i == interior_.hi.i) b += u(i + 1, j, k) * inv_h2;
                if (j == interior_.lo.j) b += u(i, j - 1, k) * inv_h2;
                if (j == interior_.hi.j) b += u(i, j + 1, k) * inv_h2;
                if (k == interior_.lo.k) b += u(i, j, k - 1) * inv_h2;
                if (k == interior_.hi.k) b += u(i, j, k + 1) * inv_h2;
                rhs[row] = b;
            }
        }
    }
    factor_.solve(rhs);
    row = 0;
    for (int k = interior_.lo.k; k <= interior_.hi.k; ++k) {
        for (int j = interior_.lo.j; j <= interior_.hi.j; ++j) {
            for (int i = interior_.lo.i; i <= interior_.hi.i; ++i, ++row) u(i, j, k) = rhs[row];
        }
    }
}

}  // namespace mgres
