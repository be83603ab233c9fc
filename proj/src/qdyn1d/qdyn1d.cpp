#include "kickdyn/qdyn1d.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace kickdyn::qdyn1d {

using spectral::UniformGrid;

void SoftCoreParams::validate() const
{
    if (!(a > 0.0)) throw std::domain_error("softcore: a must be positive");
}

double MorseParams::omega() const noexcept { return alpha * std::sqrt(2.0 * D / reduced_mass); }

double MorseParams::lambda() const noexcept { return std::sqrt(2.0 * reduced_mass * D) / alpha; }

std::size_t MorseParams::bound_state_count() const noexcept
{
    return static_cast<std::size_t>(std::floor(lambda() + 0.5));
}

void MorseParams::validate() const
{
    if (!(D > 0.0)) throw std::domain_error("morse: D must be positive");
    if (!(alpha > 0.0)) throw std::domain_error("morse: alpha must be positive");
    if (!(mu0 > 0.0)) throw std::domain_error("morse: mu0 must be positive");
    if (!(reduced_mass > 0.0)) throw std::domain_error("morse: reduced_mass must be positive");
    if (!(2.0 * D / omega() > 1.0)) throw std::domain_error("morse: parameters support no bound state");
}

double softcore_potential(double x, const SoftCoreParams& p) noexcept { return -1.0 / std::sqrt(x * x + p.a); }

double morse_potential(double x, const MorseParams& p) noexcept
{
    const double u = 1.0 - std::exp(-p.alpha * x);
    return p.D * u * u;
}

double morse_eigenenergy(std::size_t n, const MorseParams& p)
{
    p.validate();
    if (n >= p.bound_state_count())
        throw std::domain_error("morse_eigenenergy: n = " + std::to_string(n) + " is not a bound state");
    const double w = p.omega() * (static_cast<double>(n) + 0.5);
    return w - w * w / (4.0 * p.D);
}

double Wavefunction1D::norm() const
{
    double s = 0.0;
    for (const auto& a : amplitudes) s += std::norm(a);
    return s * grid.spacing();
}

void Wavefunction1D::normalize()
{
    const double n = norm();
    if (!(n > 0.0)) throw NumericalError("normalize: zero or invalid norm");
    const double f = 1.0 / std::sqrt(n);
    for (auto& a : amplitudes) a *= f;
}

complex overlap(const Wavefunction1D& a, const Wavefunction1D& b)
{
    if (!(a.grid == b.grid)) throw std::invalid_argument("overlap: grids differ");
    complex s = 0.0;
    for (std::size_t j = 0; j < a.amplitudes.size(); ++j) s += std::conj(a.amplitudes[j]) * b.amplitudes[j];
    return s * a.grid.spacing();
}

Wavefunction1D morse_eigenfunction(std::size_t n, const MorseParams& p, const UniformGrid& grid)
{
    p.validate();
    if (n >= p.bound_state_count()) throw std::domain_error("morse_eigenfunction: not a bound state");
    // psi_n ~ z^s exp(-z/2) L_n^(2s)(z), z = 2 lambda exp(-alpha x), s = lambda - n - 1/2.
    const double lam = p.lambda();
    const double s = lam - static_cast<double>(n) - 0.5;
    const double a = 2.0 * s;
    std::vector<double> logmag(grid.size());
    std::vector<double> sign(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double z = 2.0 * lam * std::exp(-p.alpha * grid.point(j));
        double l_prev = 1.0;
        double l = 1.0;
        if (n >= 1) {
            l = 1.0 + a - z;
            for (std::size_t k = 1; k < n; ++k) {
                const auto kk = static_cast<double>(k);
                const double next = ((2.0 * kk + 1.0 + a - z) * l - (kk + a) * l_prev) / (kk + 1.0);
                l_prev = l;
                l = next;
            }
        }
        sign[j] = (l < 0.0) ? -1.0 : 1.0;
        logmag[j] = s * std::log(z) - 0.5 * z + std::log(std::abs(l) + std::numeric_limits<double>::min());
    }
    const double shift = *std::max_element(logmag.begin(), logmag.end());
    Wavefunction1D psi(grid);
    for (std::size_t j = 0; j < grid.size(); ++j) psi.amplitudes[j] = sign[j] * std::exp(logmag[j] - shift);
    psi.normalize();
    return psi;
}

std::vector<double> Absorber::profile(const UniformGrid& grid) const
{
    std::vector<double> w(grid.size(), 0.0);
    if (strength <= 0.0) return w;
    const double width = fraction * grid.length();
    const double left_onset = grid.min() + width;
    const double right_onset = grid.max() - width;
    for (std::size_t j = 0; j < grid.size(); ++j) {
        const double x = grid.point(j);
        if (right && x > right_onset) {
            const double u = (x - right_onset) / width;
            w[j] = strength * u * u;
        } else if (left && x < left_onset) {
            const double u = (left_onset - x) / width;
            w[j] = strength * u * u;
        }
    }
    return w;
}

Hamiltonian1D::Hamiltonian1D(UniformGrid g, const std::function<double(double)>& v, double mf)
    : grid(g), potential(g.size()), mass_factor(mf), plan(std::make_shared<spectral::FftPlan>(g.size()))
{
    if (!(mf > 0.0)) throw std::domain_error("Hamiltonian1D: mass_factor must be positive");
    for (std::size_t j = 0; j < g.size(); ++j) potential[j] = v(g.point(j));
}

double Hamiltonian1D::energy(const Wavefunction1D& psi) const
{
    cvector k_space = psi.amplitudes;
    plan->forward(k_space.data());
    const auto k = grid.wavenumbers();
    double kinetic = 0.0;
    double kn = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) {
        kinetic += mass_factor * k[j] * k[j] * std::norm(k_space[j]);
        kn += std::norm(k_space[j]);
    }
    double pot = 0.0;
    double n = 0.0;
    for (std::size_t j = 0; j < potential.size(); ++j) {
        pot += potential[j] * std::norm(psi.amplitudes[j]);
        n += std::norm(psi.amplitudes[j]);
    }
    return kinetic / kn + pot / n;
}

namespace {

// Split-operator stepping for a complex step length s: real s is real time,
// s = -i tau is imaginary time. Phase tables for the standard step are cached.
class Stepper {
public:
    Stepper(const Hamiltonian1D& h, const std::vector<double>& absorber, complex step)
        : h_(h), absorber_(absorber), plan_(h.grid.size()), k_(h.grid.wavenumbers()), step_(step)
    {
        build(step_, half_v_, kin_);
    }

    void advance(cvector& psi, complex s)
    {
        if (s == step_) {
            apply(psi, half_v_, kin_);
        } else {
            build(s, tmp_v_, tmp_k_);
            apply(psi, tmp_v_, tmp_k_);
        }
    }

private:
    void build(complex s, cvector& half_v, cvector& kin) const
    {
        const complex minus_i(0.0, -1.0);
        const std::size_t n = h_.grid.size();
        half_v.resize(n);
        kin.resize(n);
        const double inv_n = 1.0 / static_cast<double>(n);
        for (std::size_t j = 0; j < n; ++j) {
            const complex v(h_.potential[j], -absorber_[j]);
            half_v[j] = std::exp(minus_i * v * (0.5 * s));
            kin[j] = std::exp(minus_i * h_.mass_factor * k_[j] * k_[j] * s) * inv_n;
        }
    }

    void apply(cvector& psi, const cvector& half_v, const cvector& kin) const
    {
        const std::size_t n = psi.size();
        for (std::size_t j = 0; j < n; ++j) psi[j] *= half_v[j];
        plan_.forward(psi.data());
        for (std::size_t j = 0; j < n; ++j) psi[j] *= kin[j];
        plan_.backward_unscaled(psi.data());
        for (std::size_t j = 0; j < n; ++j) psi[j] *= half_v[j];
    }

    const Hamiltonian1D& h_;
    const std::vector<double>& absorber_;
    spectral::FftPlan plan_;
    std::vector<double> k_;
    complex step_;
    cvector half_v_, kin_, tmp_v_, tmp_k_;
};

Wavefunction1D harmonic_guess(const Hamiltonian1D& h)
{
    const auto& v = h.potential;
    const std::size_t n = v.size();
    const auto jmin = static_cast<std::size_t>(std::min_element(v.begin(), v.end()) - v.begin());
    const double dx = h.grid.spacing();
    double curvature = 0.0;
    if (jmin > 0 && jmin + 1 < n) curvature = (v[jmin + 1] - 2.0 * v[jmin] + v[jmin - 1]) / (dx * dx);
    // Ground state of -c d2/dx2 + k x^2/2: exp(-x^2 / (4 sigma^2)), sigma^2 = sqrt(c / (2k)).
    double sigma2 = (curvature > 0.0) ? std::sqrt(h.mass_factor / (2.0 * curvature)) : 1.0;
    sigma2 = std::clamp(sigma2, (2.0 * dx) * (2.0 * dx), 0.01 * h.grid.length() * h.grid.length());
    Wavefunction1D psi(h.grid);
    const double x0 = h.grid.point(jmin);
    for (std::size_t j = 0; j < n; ++j) {
        const double d = h.grid.point(j) - x0;
        psi.amplitudes[j] = std::exp(-d * d / (4.0 * sigma2));
    }
    psi.normalize();
    return psi;
}

} // namespace

RelaxResult relax_ground_state(const Hamiltonian1D& h, double dt_imag, double tol, std::size_t max_iterations)
{
    if (!(dt_imag > 0.0)) throw std::domain_error("relax_ground_state: dt_imag must be positive");
    if (!(tol > 0.0)) throw std::domain_error("relax_ground_state: tol must be positive");
    const std::vector<double> no_absorber(h.grid.size(), 0.0);
    const complex step(0.0, -dt_imag);
    Stepper stepper(h, no_absorber, step);

    Wavefunction1D psi = harmonic_guess(h);
    double energy = h.energy(psi);
    for (std::size_t it = 1; it <= max_iterations; ++it) {
        stepper.advance(psi.amplitudes, step);
        psi.normalize();
        const double next = h.energy(psi);
        if (!std::isfinite(next)) throw NumericalError("relax_ground_state: energy is not finite");
        const double change = std::abs(next - energy);
        energy = next;
        if (change < tol) return {std::move(psi), energy, it};
    }
    throw ConvergenceError("relax_ground_state: no convergence within iteration cap", energy);
}

void apply_kick(Wavefunction1D& psi, double strength, double coupling)
{
    if (strength == 0.0) return;
    const double q = coupling * strength;
    for (std::size_t j = 0; j < psi.amplitudes.size(); ++j) {
        const double x = psi.grid.point(j);
        psi.amplitudes[j] *= complex(std::cos(q * x), -std::sin(q * x));
    }
}

ObservableSeries1D propagate_kicked(Wavefunction1D& psi, const Hamiltonian1D& h,
                                   const shotnoise::KickSequence& kicks, const PropagationOptions& options,
                                   const Wavefunction1D& reference)
{
    if (!(options.dt > 0.0)) throw std::domain_error("propagate_kicked: dt must be positive");
    if (options.record_every == 0) throw std::domain_error("propagate_kicked: record_every must be >= 1");
    if (!(psi.grid == h.grid) || !(reference.grid == h.grid))
        throw std::invalid_argument("propagate_kicked: grid mismatch");

    const std::vector<double> absorber = options.absorber.profile(h.grid);
    Stepper stepper(h, absorber, complex(options.dt, 0.0));
    const double t0 = psi.time;
    const double t_end = kicks.horizon;
    if (t_end < t0) throw std::domain_error("propagate_kicked: horizon lies before the current time");

    ObservableSeries1D out;
    auto record = [&](double t) {
        const double s = std::norm(overlap(reference, psi));
        out.records.push_back({t, psi.norm(), s, h.energy(psi)});
        if (!std::isfinite(out.records.back().norm))
            throw NumericalError("propagate_kicked: non-finite norm at t = " + std::to_string(t));
    };

    auto next_kick = std::lower_bound(kicks.kicks.begin(), kicks.kicks.end(), t0,
                                      [](const shotnoise::Kick& k, double t) { return k.time <= t; });
    record(t0);
    const auto n_steps = static_cast<std::size_t>(std::ceil((t_end - t0) / options.dt - 1e-9));
    double t = t0;
    for (std::size_t step = 1; step <= n_steps; ++step) {
        const double t_next = (step == n_steps) ? t_end : t0 + static_cast<double>(step) * options.dt;
        while (next_kick != kicks.kicks.end() && next_kick->time <= t_next) {
            if (next_kick->time > t) stepper.advance(psi.amplitudes, complex(next_kick->time - t, 0.0));
            t = next_kick->time;
            apply_kick(psi, next_kick->strength, options.coupling);
            ++next_kick;
        }
        if (t_next > t) stepper.advance(psi.amplitudes, complex(t_next - t, 0.0));
        t = t_next;
        psi.time = t;
        if (step % options.record_every == 0 || step == n_steps) record(t);
    }
    return out;
}

void write_csv(std::ostream& out, const ObservableSeries1D& series)
{
    out << "time_au,norm,survival,energy_au\n";
    out << std::setprecision(17);
    for (const auto& r : series.records) out << r.time << ',' << r.norm << ',' << r.survival << ',' << r.energy << '\n';
}

UniformGrid default_atom_grid() { return UniformGrid(2048, -200.0, 200.0); }
UniformGrid default_morse_grid() { return UniformGrid(1024, -2.0, 12.0); }

} // namespace kickdyn::qdyn1d
