#include "kickdyn/spectral.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace kickdyn::spectral {

UniformGrid::UniformGrid(std::size_t n_points, double min, double max)
    : n_(n_points), min_(min), max_(max), spacing_(0.0)
{
    if (n_points < 2) throw std::domain_error("UniformGrid: need at least 2 points");
    if (!(max > min)) throw std::domain_error("UniformGrid: max must exceed min");
    spacing_ = (max - min) / static_cast<double>(n_points);
}

std::vector<double> UniformGrid::points() const
{
    std::vector<double> x(n_);
    for (std::size_t j = 0; j < n_; ++j) x[j] = point(j);
    return x;
}

std::vector<double> UniformGrid::wavenumbers() const
{
    std::vector<double> k(n_);
    const double dk = 2.0 * std::numbers::pi / length();
    const auto n = static_cast<long>(n_);
    for (long j = 0; j < n; ++j) {
        const long m = (j < (n + 1) / 2) ? j : j - n;
        k[static_cast<std::size_t>(j)] = dk * static_cast<double>(m);
    }
    return k;
}

cvector kinetic_phase_factors(const UniformGrid& grid, double mass_factor, complex dt)
{
    const auto k = grid.wavenumbers();
    cvector out(k.size());
    const complex minus_i(0.0, -1.0);
    for (std::size_t j = 0; j < k.size(); ++j)
        out[j] = std::exp(minus_i * mass_factor * k[j] * k[j] * dt);
    return out;
}

} // namespace kickdyn::spectral
