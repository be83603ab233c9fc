#pragma once

#include "kickdyn/aligned.hpp"

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace kickdyn::spectral {

/// Uniform periodic grid: n points min + j*spacing, spacing = (max - min)/n.
/// The point `max` itself is the periodic image of `min`.
class UniformGrid {
public:
    UniformGrid(std::size_t n_points, double min, double max);

    std::size_t size() const noexcept { return n_; }
    double min() const noexcept { return min_; }
    double max() const noexcept { return max_; }
    double length() const noexcept { return max_ - min_; }
    double spacing() const noexcept { return spacing_; }
    double point(std::size_t j) const noexcept { return min_ + static_cast<double>(j) * spacing_; }
    std::vector<double> points() const;

    /// Angular wavenumbers in FFT order: 0, dk, ..., then negative frequencies.
    /// The Nyquist entry of an even-length grid is negative.
    std::vector<double> wavenumbers() const;

    friend bool operator==(const UniformGrid&, const UniformGrid&) = default;

private:
    std::size_t n_;
    double min_;
    double max_;
    double spacing_;
};

/// exp(-i * mass_factor * k^2 * dt) for each wavenumber of `grid`. A purely
/// imaginary dt = -i tau gives the real decay factors exp(-mass_factor k^2 tau).
cvector kinetic_phase_factors(const UniformGrid& grid, double mass_factor, complex dt);

/// In-place complex FFT over a strided batch, described FFTW-guru style.
/// Forward is unnormalized; backward() includes 1/N, backward_unscaled() does not.
/// backward() needs a gap-free layout (the batch covers every element it spans).
/// Plans are made with FFTW_ESTIMATE so the algorithm (and result bits) never
/// depends on timing. Execution is thread-safe; plan creation is serialized.
class FftPlan {
public:
    struct Dim {
        int n;
        long stride; ///< in complex elements
    };

    FftPlan(std::vector<Dim> dims, std::vector<Dim> loops);
    /// Single contiguous line of length n.
    explicit FftPlan(std::size_t n);

    ~FftPlan();
    FftPlan(const FftPlan&) = delete;
    FftPlan& operator=(const FftPlan&) = delete;
    FftPlan(FftPlan&&) noexcept;
    FftPlan& operator=(FftPlan&&) noexcept;

    /// Product of the transform lengths.
    std::size_t transform_size() const noexcept { return transform_size_; }

    void forward(complex* data) const;
    void backward(complex* data) const;
    void backward_unscaled(complex* data) const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
    std::size_t transform_size_ = 0;
    std::size_t span_ = 0;
    bool dense_ = false;
};

// Bessel functions of the first kind, orders 0 and 1.
double bessel_j0(double x);
double bessel_j1(double x);

/// First `count` positive zeros of J0, increasing.
std::vector<double> bessel_j0_zeros(std::size_t count);

/// Discrete Bessel-Fourier (order-0 Hankel) basis on [0, rho_max] with a hard
/// wall at rho_max.
///
/// Mode n (0-based) is phi_n(rho) = sqrt(2) J0(j_n rho / rho_max) / (rho_max |J1(j_n)|),
/// orthonormal under rho d rho. Grid values are taken at the collocation points
/// rho_m = j_m rho_max / j_N (j_N the (N+1)-th zero) and stored scaled by the
/// square root of the quadrature weight w_m = 2 rho_max^2 / (j_N^2 J1(j_m)^2), so
/// that sum_m |u_m|^2 approximates the integral of |psi|^2 rho d rho.
///
/// The sampled-mode matrix T_mn = sqrt(w_m) phi_n(rho_m) is symmetric and
/// orthogonal only up to ~1e-7 at N = 16. The transform used here is its
/// nearest orthogonal matrix (symmetric Loewdin orthogonalization), which is
/// symmetric and its own inverse, so forward and backward are the same matrix
/// and Parseval holds to rounding.
class BesselBasis {
public:
    BesselBasis(std::size_t n_modes, double rho_max);

    std::size_t size() const noexcept { return n_; }
    double rho_max() const noexcept { return rho_max_; }
    /// First N+1 zeros of J0.
    const std::vector<double>& zeros() const noexcept { return zeros_; }
    const std::vector<double>& points() const noexcept { return points_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    /// (j_n / rho_max)^2: minus the eigenvalue of the radial Laplacian for mode n.
    const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }

    /// Orthogonal transform matrix (grid <- modes and modes <- grid).
    const Eigen::MatrixXd& transform() const noexcept { return transform_; }
    /// Raw sampled-mode matrix T before orthogonalization.
    const Eigen::MatrixXd& sampled_modes() const noexcept { return sampled_; }

    /// Analytic phi_n(rho).
    double mode_function(std::size_t n, double rho) const;

    /// Transform a block of N rows by `columns` complex entries, row-major with
    /// row stride `columns`. Input and output must not alias.
    void to_modes(const complex* grid, complex* modes, std::size_t columns = 1) const;
    void to_grid(const complex* modes, complex* grid, std::size_t columns = 1) const;

    /// sqrt(w_m) f(rho_m) for a radial function f.
    template <class F>
    std::vector<complex> sample(F&& f) const
    {
        std::vector<complex> out(n_);
        for (std::size_t m = 0; m < n_; ++m) out[m] = std::sqrt(weights_[m]) * complex(f(points_[m]));
        return out;
    }

    friend bool operator==(const BesselBasis& a, const BesselBasis& b)
    {
        return a.n_ == b.n_ && a.rho_max_ == b.rho_max_;
    }

private:
    void apply(const complex* in, complex* out, std::size_t columns) const;

    std::size_t n_;
    double rho_max_;
    std::vector<double> zeros_;
    std::vector<double> points_;
    std::vector<double> weights_;
    std::vector<double> eigenvalues_;
    Eigen::MatrixXd sampled_;
    Eigen::MatrixXd transform_;
};

} // namespace kickdyn::spectral
