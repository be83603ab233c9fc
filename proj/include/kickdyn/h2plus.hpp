#pragma once

// Non-Born-Oppenheimer H2+ in a field along the molecular axis. The electron
// is described in cylindrical coordinates (rho, z) relative to the nuclear
// centre of mass, R is the internuclear distance. Psi(R, rho, z) is stored as
// a tensor indexed (R point, rho index, z point), z fastest; the rho index is
// either a Bessel mode or a collocation point, see Representation.

#include "kickdyn/aligned.hpp"
#include "kickdyn/shotnoise.hpp"
#include "kickdyn/spectral.hpp"

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kickdyn::h2plus {

struct H2Params {
    double proton_mass = 1836.152673; ///< electron masses

    /// 1/2 + 1/(4 M_p): coefficient of -Laplacian for the electron.
    double beta() const noexcept { return 0.5 + 0.25 / proton_mass; }
    /// 1 + 1/(2 M_p + 1): dipole coupling of the electron coordinate.
    double kappa() const noexcept { return 1.0 + 1.0 / (2.0 * proton_mass + 1.0); }
    /// 1/M_p: coefficient of -d^2/dR^2.
    double nuclear_factor() const noexcept { return 1.0 / proton_mass; }

    void validate() const;
};

struct AbsorberParams {
    double z_onset = 40.0;   ///< |z| beyond which -i eta_z ((|z|-z_a)/(z_max-z_a))^2 acts
    double z_strength = 0.5;
    double r_onset = 21.0;
    double r_strength = 0.2;
    bool enabled = true;
};

struct GeometrySpec {
    std::size_t z_points = 1024;
    double z_min = -50.0;
    double z_max = 50.0;
    std::size_t r_points = 256;
    double r_min = 0.38;
    double r_max = 24.0;
    std::size_t bessel_modes = 16;
    double rho_max = 8.0;
    double z_ionization = 32.0;
    double r_dissociation = 9.5;
    AbsorberParams absorber{};
};

class H2Geometry {
public:
    explicit H2Geometry(const GeometrySpec& spec = {});

    const GeometrySpec& spec() const noexcept { return spec_; }
    const spectral::UniformGrid& z() const noexcept { return z_; }
    const spectral::UniformGrid& r() const noexcept { return r_; }
    const spectral::BesselBasis& rho() const noexcept { return rho_; }
    double z_ionization() const noexcept { return spec_.z_ionization; }
    double r_dissociation() const noexcept { return spec_.r_dissociation; }
    const AbsorberParams& absorber() const noexcept { return spec_.absorber; }

    std::size_t nz() const noexcept { return z_.size(); }
    std::size_t nr() const noexcept { return r_.size(); }
    std::size_t nm() const noexcept { return rho_.size(); }
    std::size_t size() const noexcept { return nz() * nr() * nm(); }
    std::size_t index(std::size_t ir, std::size_t m, std::size_t iz) const noexcept
    {
        return (ir * nm() + m) * nz() + iz;
    }
    /// Volume element for sum |c|^2 (dR dz); the rho measure is in the basis.
    double cell() const noexcept { return r_.spacing() * z_.spacing(); }

    /// W >= 0 with the absorbing potential -i W at (R, z).
    double absorber_z(double z) const noexcept;
    double absorber_r(double r) const noexcept;

    /// Stable 64-bit digest of every parameter, for checkpoint compatibility.
    std::uint64_t hash() const;

private:
    GeometrySpec spec_;
    spectral::UniformGrid z_;
    spectral::UniformGrid r_;
    spectral::BesselBasis rho_;
};

/// Two-centre Coulomb attraction plus nuclear repulsion, unsoftened.
/// Throws std::domain_error at a nucleus or for R <= 0.
double coulomb_potential(double rho, double z, double r);

enum class Representation { modes, grid };

struct WavefunctionH2 {
    std::shared_ptr<const H2Geometry> geometry;
    cvector data;
    Representation rep = Representation::modes;
    double time = 0.0;

    explicit WavefunctionH2(std::shared_ptr<const H2Geometry> g,
                            Representation r = Representation::modes);

    double norm() const;
    void normalize();
    void to_grid();
    void to_modes();
    /// Max |psi(z) - psi(-z)| / max |psi|, using the periodic mirror j -> (N - j) mod N.
    double parity_defect() const;
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
    NumericalError(const std::string& what, std::uint64_t seed, std::size_t step)
        : std::runtime_error(what + " (seed " + std::to_string(seed) + ", step " + std::to_string(step) + ")"),
          seed_(seed), step_(step) {}
    std::uint64_t seed() const noexcept { return seed_; }
    std::size_t step() const noexcept { return step_; }

private:
    std::uint64_t seed_;
    std::size_t step_;
};

/// Time-independent tables shared read-only by every realization on one
/// geometry: potential, absorber and the kinetic spectrum.
class H2Operators {
public:
    H2Operators(std::shared_ptr<const H2Geometry> geometry, const H2Params& params);

    const H2Geometry& geometry() const noexcept { return *geometry_; }
    std::shared_ptr<const H2Geometry> geometry_ptr() const noexcept { return geometry_; }
    const H2Params& params() const noexcept { return params_; }

    /// V(R, rho_m, z) in tensor order.
    const rvector& potential() const noexcept { return potential_; }
    /// Absorber W = W_r[ir] + W_z[iz] (all zero when disabled).
    const std::vector<double>& absorber_r() const noexcept { return absorber_r_; }
    const std::vector<double>& absorber_z() const noexcept { return absorber_z_; }
    /// Kinetic spectrum factors: T = kr2[ir] + km[m] + kz2[iz].
    const std::vector<double>& kinetic_r() const noexcept { return kin_r_; }
    const std::vector<double>& kinetic_m() const noexcept { return kin_m_; }
    const std::vector<double>& kinetic_z() const noexcept { return kin_z_; }

    /// Batched 2D FFT over (R, z) for every rho index.
    const spectral::FftPlan& fft() const noexcept { return *fft_; }

    /// exp(-i (V - i W) dt / 2) for real dt, built once per dt and cached.
    std::shared_ptr<const cvector> half_potential_phase(double dt) const;

    /// <H> / <psi|psi> without absorber.
    double energy(const WavefunctionH2& psi) const;
    /// <p_z> = sum k_z |psi(k_z)|^2 / norm.
    double mean_pz(const WavefunctionH2& psi) const;

private:
    std::shared_ptr<const H2Geometry> geometry_;
    H2Params params_;
    rvector potential_;
    std::vector<double> absorber_r_, absorber_z_;
    mutable std::mutex cache_mutex_;
    mutable std::vector<std::pair<double, std::shared_ptr<const cvector>>> half_cache_;
    std::vector<double> kin_r_, kin_m_, kin_z_;
    std::shared_ptr<spectral::FftPlan> fft_;
};

/// f1(R) = 2 pi int rho d rho int_{-(z_I+R/2)}^{z_I+R/2} dz |Psi|^2, per a.u. of R.
/// The window edge takes the overlapping fraction of its z cell.
std::vector<double> f1_profile(const WavefunctionH2& psi);

/// 1 - int f1 dR over the full R grid.
double ionization_probability(std::span<const double> f1, const H2Geometry& geometry);
/// int_{R_D}^{R_max} f1 dR, the edge cell counted fractionally.
double dissociation_probability(std::span<const double> f1, const H2Geometry& geometry);

struct RelaxOptions {
    double dt_imag = 0.05;
    double tol = 1e-10;        ///< energy change per step
    /// Optional first stage with a larger step, run until its per-step change
    /// drops below coarse_tol. It settles the slow vibrational profile; the
    /// dt_imag stage then removes its splitting bias. 0 disables it.
    double dt_coarse = 0.0;
    double coarse_tol = 1e-7;
    /// When nonzero (and below z_points), the coarse stage runs on a copy of
    /// the geometry with this many z points and its result is interpolated
    /// onto the full grid. Must be even and divide z_points.
    std::size_t prerelax_z_points = 0;
    std::size_t check_every = 10;
    std::size_t max_steps = 20000;
    double r_center = 2.0;     ///< initial Gaussian in R
    double r_width = 0.25;
    double electron_width = 1.0;
    /// Called after every energy check with (steps so far, energy).
    std::function<void(std::size_t, double)> progress;
};

struct H2RelaxResult {
    WavefunctionH2 state;
    double energy;
    std::size_t steps;
};

/// Imaginary-time relaxation from a product guess, renormalizing each step.
/// Returns the state in the mode representation.
H2RelaxResult relax_h2_ground_state(const H2Operators& ops, const RelaxOptions& options = {});

/// Filter psi towards the stationary state of the real-time split step
/// (absorbers off): sum_n w(t_n) e^{i E t_n} U^n psi over a Gaussian window of
/// length `window`, renormalized. The imaginary-time and real-time splittings
/// have slightly different fixed points (an O(dt^2) difference concentrated
/// near the nuclei); this removes the resulting fast <H> oscillation.
WavefunctionH2 refine_stationary(const H2Operators& ops, const WavefunctionH2& psi, double energy, double dt,
                                 double window);

struct H2Record {
    double time;
    double norm;
    double p_ionization;
    double p_dissociation;
    double absorbed_r;        ///< cumulative norm removed at R > R_a
    double energy;            ///< NaN unless requested
    std::vector<double> f1;   ///< empty unless requested
};

struct ObservableSeriesH2 {
    std::vector<H2Record> records;
};

struct H2PropagationOptions {
    double dt = 0.05;
    std::size_t record_every = 20;
    bool record_energy = false;
    bool record_f1 = false;
    std::uint64_t seed = 0; ///< echoed in diagnostics only
};

/// Split-operator propagation of one realization. Owns its wavefunction;
/// shares H2Operators read-only. Steps end at t_n = t_start + n dt; kicks are
/// applied at their exact times.
class H2Propagator {
public:
    H2Propagator(std::shared_ptr<const H2Operators> ops, WavefunctionH2 psi, shotnoise::KickSequence kicks,
                 H2PropagationOptions options);

    /// Advance to `final_time` (at most the kick horizon), recording as configured.
    void run(double final_time);
    /// Advance by exactly n steps.
    void advance_steps(std::size_t n);

    const ObservableSeriesH2& series() const noexcept { return series_; }
    double time() const noexcept;
    std::size_t step_index() const noexcept { return step_; }
    std::size_t kick_cursor() const noexcept { return cursor_; }
    /// The current wavefunction (converted to the mode representation).
    WavefunctionH2 state() const;

    /// Binary checkpoint: header (JSON) + raw tensor. Resuming from it
    /// reproduces the uninterrupted run bit for bit.
    void save_checkpoint(std::ostream& out) const;
    static H2Propagator load_checkpoint(std::istream& in, std::shared_ptr<const H2Operators> ops,
                                        shotnoise::KickSequence kicks);

private:
    std::size_t total_steps() const noexcept;
    double boundary(std::size_t n) const noexcept;
    void step_once();
    void split_step(double h, bool full);
    void kick(double strength);
    void record();

    std::shared_ptr<const H2Operators> ops_;
    WavefunctionH2 psi_; // kept in the grid representation
    shotnoise::KickSequence kicks_;
    H2PropagationOptions options_;
    ObservableSeriesH2 series_;
    double t_start_ = 0.0;
    std::size_t step_ = 0;
    std::size_t cursor_ = 0;
    double absorbed_r_ = 0.0;
    cvector scratch_;
    cvector partial_v_;
    std::shared_ptr<const cvector> half_v_;
    std::vector<complex> kin_r_, kin_m_, kin_z_;
};

/// Propagate one realization from psi0 to kicks.horizon.
ObservableSeriesH2 propagate_h2_realization(const WavefunctionH2& psi0, std::shared_ptr<const H2Operators> ops,
                                            const shotnoise::KickSequence& kicks,
                                            const H2PropagationOptions& options);

/// CSV: time_au,time_fs,norm,p_ionization,p_dissociation,absorbed_r,energy_au.
void write_csv(std::ostream& out, const ObservableSeriesH2& series);

} // namespace kickdyn::h2plus
