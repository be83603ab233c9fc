#include "kickdyn/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace kickdyn::spectral {

BesselBasis::BesselBasis(std::size_t n_modes, double rho_max) : n_(n_modes), rho_max_(rho_max)
{
    if (n_modes < 1) throw std::domain_error("BesselBasis: n_modes must be >= 1");
    if (!(rho_max > 0.0)) throw std::domain_error("BesselBasis: rho_max must be positive");

    zeros_ = bessel_j0_zeros(n_ + 1);
    const double j_last = zeros_[n_];

    points_.resize(n_);
    weights_.resize(n_);
    eigenvalues_.resize(n_);
    std::vector<double> j1_abs(n_);
    for (std::size_t m = 0; m < n_; ++m) {
        j1_abs[m] = std::abs(bessel_j1(zeros_[m]));
        points_[m] = zeros_[m] * rho_max_ / j_last;
        weights_[m] = 2.0 * rho_max_ * rho_max_ / (j_last * j_last * j1_abs[m] * j1_abs[m]);
        const double k = zeros_[m] / rho_max_;
        eigenvalues_[m] = k * k;
    }

    sampled_.resize(static_cast<Eigen::Index>(n_), static_cast<Eigen::Index>(n_));
    for (std::size_t m = 0; m < n_; ++m)
        for (std::size_t n = 0; n < n_; ++n)
            sampled_(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n)) =
                2.0 * bessel_j0(zeros_[n] * zeros_[m] / j_last) / (j_last * j1_abs[m] * j1_abs[n]);

    // Nearest orthogonal matrix to the symmetric T: V sign(D) V^T.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sampled_);
    if (eig.info() != Eigen::Success) throw std::runtime_error("BesselBasis: eigen-decomposition failed");
    const Eigen::VectorXd signs = eig.eigenvalues().unaryExpr([](double v) { return v < 0.0 ? -1.0 : 1.0; });
    transform_ = eig.eigenvectors() * signs.asDiagonal() * eig.eigenvectors().transpose();
    transform_ = 0.5 * (transform_ + transform_.transpose()).eval();
}

double BesselBasis::mode_function(std::size_t n, double rho) const
{
    if (n >= n_) throw std::out_of_range("BesselBasis::mode_function: mode index");
    return std::sqrt(2.0) * bessel_j0(zeros_[n] * rho / rho_max_) / (rho_max_ * std::abs(bessel_j1(zeros_[n])));
}

void BesselBasis::apply(const complex* in, complex* out, std::size_t columns) const
{
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const auto rows = static_cast<Eigen::Index>(n_);
    const auto cols = static_cast<Eigen::Index>(2 * columns);
    Eigen::Map<const RowMat> src(reinterpret_cast<const double*>(in), rows, cols);
    Eigen::Map<RowMat> dst(reinterpret_cast<double*>(out), rows, cols);
    dst.noalias() = transform_ * src;
}

void BesselBasis::to_modes(const complex* grid, complex* modes, std::size_t columns) const
{
    apply(grid, modes, columns);
}

void BesselBasis::to_grid(const complex* modes, complex* grid, std::size_t columns) const
{
    apply(modes, grid, columns);
}

} // namespace kickdyn::spectral
