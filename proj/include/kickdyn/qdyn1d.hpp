#pragma once

// One-dimensional kicked TDSE solvers: the soft-core hydrogen atom and the
// Morse model of HF. Second-order split-operator propagation on a periodic
// Fourier grid, imaginary-time ground-state relaxation, and ground-state
// survival tracking under a kick sequence.

#include "kickdyn/aligned.hpp"
#include "kickdyn/shotnoise.hpp"
#include "kickdyn/spectral.hpp"

#include <functional>
#include <memory>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

namespace kickdyn::qdyn1d {

struct SoftCoreParams {
    double a = 2.0; ///< softening (a.u. length^2)
    void validate() const;
};

struct MorseParams {
    double D = 0.225;              ///< dissociation energy (a.u.)
    double alpha = 1.1741;         ///< range parameter (1/a.u.)
    double mu0 = 3.54076;          ///< dipole gradient (a.u.)
    double reduced_mass = 1744.59; ///< HF reduced mass (electron masses)

    /// Harmonic frequency alpha * sqrt(2 D / m).
    double omega() const noexcept;
    /// sqrt(2 m D) / alpha; the number of bound states is floor(lambda + 1/2).
    double lambda() const noexcept;
    std::size_t bound_state_count() const noexcept;
    void validate() const;
};

double softcore_potential(double x, const SoftCoreParams& p) noexcept;
double morse_potential(double x, const MorseParams& p) noexcept;

/// E_n = omega (n + 1/2) - [omega (n + 1/2)]^2 / (4 D). Throws std::domain_error
/// past the last bound state.
double morse_eigenenergy(std::size_t n, const MorseParams& p);

struct Wavefunction1D {
    spectral::UniformGrid grid;
    cvector amplitudes;
    double time = 0.0;

    explicit Wavefunction1D(spectral::UniformGrid g) : grid(g), amplitudes(g.size()) {}

    /// Riemann sum of |psi|^2 times the spacing.
    double norm() const;
    void normalize();
};

/// <a|b> on the common grid.
complex overlap(const Wavefunction1D& a, const Wavefunction1D& b);

/// Analytic Morse eigenfunction sampled on `grid` and normalized there.
Wavefunction1D morse_eigenfunction(std::size_t n, const MorseParams& p, const spectral::UniformGrid& grid);

/// Quadratic imaginary absorber -i eta ((d - onset)/(edge - onset))^2 on the
/// outer `fraction` of the box at the selected sides.
struct Absorber {
    double fraction = 0.15;
    double strength = 0.0; ///< eta (a.u. energy); 0 disables
    bool left = true;
    bool right = true;

    /// W(x) >= 0 such that the absorbing potential is -i W(x).
    std::vector<double> profile(const spectral::UniformGrid& grid) const;
};

/// H = -mass_factor d^2/dx^2 + V(x) (- i W(x) during propagation).
struct Hamiltonian1D {
    spectral::UniformGrid grid;
    std::vector<double> potential;
    double mass_factor;
    std::shared_ptr<const spectral::FftPlan> plan;

    Hamiltonian1D(spectral::UniformGrid g, const std::function<double(double)>& v, double mass_factor);

    /// <psi|H|psi> / <psi|psi>, without any absorber.
    double energy(const Wavefunction1D& psi) const;
};

class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double last_energy)
        : std::runtime_error(what), last_energy_(last_energy) {}
    double last_energy() const noexcept { return last_energy_; }

private:
    double last_energy_;
};

class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RelaxResult {
    Wavefunction1D state;
    double energy;
    std::size_t iterations;
};

/// Imaginary-time split-operator relaxation with renormalization after every
/// step, from a harmonic Gaussian guess at the potential minimum. Stops when
/// the energy changes by less than `tol` over one step.
RelaxResult relax_ground_state(const Hamiltonian1D& h, double dt_imag, double tol,
                               std::size_t max_iterations = 200000);

/// psi(x) <- exp(-i coupling strength x) psi(x).
void apply_kick(Wavefunction1D& psi, double strength, double coupling);

struct Record1D {
    double time;
    double norm;
    double survival;
    double energy;
};

struct ObservableSeries1D {
    std::vector<Record1D> records;
};

struct PropagationOptions {
    double dt = 0.05;
    std::size_t record_every = 20;
    double coupling = 1.0;        ///< kick phase is exp(-i coupling gamma_i x)
    Absorber absorber{};          ///< strength 0 turns it off
};

/// Real-time propagation from psi.time to kicks.horizon. Steps end at
/// t_n = n dt (the last one possibly shorter); a kick at t_i is applied at
/// exactly t_i by splitting the step that contains it. Records are taken at
/// t = 0, every record_every steps and at the end; survival is measured
/// against `reference`. psi is advanced in place.
ObservableSeries1D propagate_kicked(Wavefunction1D& psi, const Hamiltonian1D& h,
                                   const shotnoise::KickSequence& kicks, const PropagationOptions& options,
                                   const Wavefunction1D& reference);

/// CSV with header time_au,norm,survival,energy_au and 17 significant digits.
void write_csv(std::ostream& out, const ObservableSeries1D& series);

/// Default grids.
spectral::UniformGrid default_atom_grid();  // [-200, 200], 2048 points
spectral::UniformGrid default_morse_grid(); // [-2, 12], 1024 points

} // namespace kickdyn::qdyn1d
