#include "kickdyn/h2plus.hpp"

#include "kickdyn/units.hpp"

#include "json.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

namespace kickdyn::h2plus {

using spectral::BesselBasis;
using spectral::FftPlan;
using spectral::UniformGrid;

void H2Params::validate() const
{
    if (!(proton_mass > 0.0) || !std::isfinite(proton_mass))
        throw std::domain_error("h2plus: proton_mass must be positive and finite");
}

namespace {

void require(bool ok, const char* what)
{
    if (!ok) throw std::domain_error(std::string("h2plus geometry: ") + what);
}

const GeometrySpec& checked(const GeometrySpec& s)
{
    require(s.z_points >= 8 && s.r_points >= 4 && s.bessel_modes >= 1, "too few grid points");
    require(s.z_max > s.z_min, "z_max must exceed z_min");
    require(s.r_min > 0.0 && s.r_max > s.r_min, "need 0 < r_min < r_max");
    require(s.rho_max > 0.0, "rho_max must be positive");
    require(s.z_ionization > 0.0 && s.z_ionization < s.z_max, "z_ionization must lie in (0, z_max)");
    require(s.r_dissociation > s.r_min && s.r_dissociation < s.r_max, "r_dissociation must lie in (r_min, r_max)");
    const auto& a = s.absorber;
    require(a.z_strength >= 0.0 && a.r_strength >= 0.0, "absorber strengths must be >= 0");
    require(a.z_onset > 0.0 && a.z_onset < s.z_max && -a.z_onset > s.z_min, "z absorber onset outside the grid");
    require(a.r_onset > s.r_min && a.r_onset < s.r_max, "R absorber onset outside the grid");
    return s;
}

constexpr std::uint64_t fnv_offset = 0xcbf29ce484222325ULL;

std::uint64_t fnv1a(std::uint64_t h, const void* data, std::size_t n)
{
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ULL;
    }
    return h;
}

template <class T>
std::uint64_t fnv1a(std::uint64_t h, T v)
{
    return fnv1a(h, &v, sizeof v);
}

// Fraction of the cell [x - h/2, x + h/2] inside [lo, hi].
double cell_overlap(double x, double h, double lo, double hi)
{
    const double a = std::max(x - 0.5 * h, lo);
    const double b = std::min(x + 0.5 * h, hi);
    return std::clamp((b - a) / h, 0.0, 1.0);
}

double sum_norm(const complex* p, std::size_t n)
{
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += std::norm(p[i]);
    return s;
}

// Exponentials of -i s T along each kinetic axis; 1/(nr nz) folded into z.
void kinetic_factors(const H2Operators& ops, complex s, std::vector<complex>& er, std::vector<complex>& em,
                     std::vector<complex>& ez)
{
    const complex minus_i(0.0, -1.0);
    const auto& g = ops.geometry();
    const double scale = 1.0 / static_cast<double>(g.nr() * g.nz());
    er.resize(g.nr());
    em.resize(g.nm());
    ez.resize(g.nz());
    for (std::size_t i = 0; i < g.nr(); ++i) er[i] = std::exp(minus_i * s * ops.kinetic_r()[i]);
    for (std::size_t i = 0; i < g.nm(); ++i) em[i] = std::exp(minus_i * s * ops.kinetic_m()[i]);
    for (std::size_t i = 0; i < g.nz(); ++i) ez[i] = std::exp(minus_i * s * ops.kinetic_z()[i]) * scale;
}

void fill_half_phase(const H2Operators& ops, complex s, bool absorb, cvector& out)
{
    const auto& g = ops.geometry();
    const complex minus_i(0.0, -1.0);
    out.resize(g.size());
    const double* v = ops.potential().data();
    if (s.imag() != 0.0) {
        for (std::size_t ir = 0; ir < g.nr(); ++ir)
            for (std::size_t m = 0; m < g.nm(); ++m)
                for (std::size_t iz = 0; iz < g.nz(); ++iz) {
                    const std::size_t k = g.index(ir, m, iz);
                    const double w = absorb ? ops.absorber_r()[ir] + ops.absorber_z()[iz] : 0.0;
                    out[k] = std::exp(minus_i * complex(v[k], -w) * (0.5 * s));
                }
        return;
    }
    // Real step: a pure phase times the separable absorber decay.
    const double h = 0.5 * s.real();
    std::vector<double> dz(g.nz(), 1.0);
    if (absorb)
        for (std::size_t iz = 0; iz < g.nz(); ++iz) dz[iz] = std::exp(-ops.absorber_z()[iz] * h);
    for (std::size_t ir = 0; ir < g.nr(); ++ir) {
        const double dr = absorb ? std::exp(-ops.absorber_r()[ir] * h) : 1.0;
        for (std::size_t m = 0; m < g.nm(); ++m)
            for (std::size_t iz = 0; iz < g.nz(); ++iz) {
                const std::size_t k = g.index(ir, m, iz);
                const double a = dr * dz[iz];
                out[k] = complex(a * std::cos(v[k] * h), -a * std::sin(v[k] * h));
            }
    }
}

cvector half_phase(const H2Operators& ops, complex s, bool absorb)
{
    cvector out;
    fill_half_phase(ops, s, absorb, out);
    return out;
}

void to_modes(const H2Geometry& g, const complex* in, complex* out)
{
    const std::size_t block = g.nm() * g.nz();
    for (std::size_t ir = 0; ir < g.nr(); ++ir) g.rho().to_modes(in + ir * block, out + ir * block, g.nz());
}

void to_grid(const H2Geometry& g, const complex* in, complex* out)
{
    const std::size_t block = g.nm() * g.nz();
    for (std::size_t ir = 0; ir < g.nr(); ++ir) g.rho().to_grid(in + ir * block, out + ir * block, g.nz());
}

// One Strang step on grid-representation data; `scratch` is clobbered.
void strang(const H2Operators& ops, cvector& psi, cvector& scratch, const cvector& half_v,
            const std::vector<complex>& er, const std::vector<complex>& em, const std::vector<complex>& ez)
{
    const auto& g = ops.geometry();
    const std::size_t n = psi.size();
    for (std::size_t k = 0; k < n; ++k) psi[k] *= half_v[k];
    to_modes(g, psi.data(), scratch.data());
    ops.fft().forward(scratch.data());
    for (std::size_t ir = 0; ir < g.nr(); ++ir)
        for (std::size_t m = 0; m < g.nm(); ++m) {
            const complex c = er[ir] * em[m];
            complex* row = scratch.data() + g.index(ir, m, 0);
            for (std::size_t iz = 0; iz < g.nz(); ++iz) row[iz] *= c * ez[iz];
        }
    ops.fft().backward_unscaled(scratch.data());
    to_grid(g, scratch.data(), psi.data());
    for (std::size_t k = 0; k < n; ++k) psi[k] *= half_v[k];
}

} // namespace

H2Geometry::H2Geometry(const GeometrySpec& spec)
    : spec_(checked(spec)),
      z_(spec.z_points, spec.z_min, spec.z_max),
      r_(spec.r_points, spec.r_min, spec.r_max),
      rho_(spec.bessel_modes, spec.rho_max)
{
}

double H2Geometry::absorber_z(double z) const noexcept
{
    const auto& a = spec_.absorber;
    if (!a.enabled) return 0.0;
    const double d = std::abs(z) - a.z_onset;
    if (d <= 0.0) return 0.0;
    const double edge = (z >= 0.0 ? spec_.z_max : -spec_.z_min) - a.z_onset;
    const double x = d / edge;
    return a.z_strength * x * x;
}

double H2Geometry::absorber_r(double r) const noexcept
{
    const auto& a = spec_.absorber;
    if (!a.enabled) return 0.0;
    const double d = r - a.r_onset;
    if (d <= 0.0) return 0.0;
    const double x = d / (spec_.r_max - a.r_onset);
    return a.r_strength * x * x;
}

std::uint64_t H2Geometry::hash() const
{
    const auto& s = spec_;
    const auto& a = s.absorber;
    std::uint64_t h = fnv_offset;
    h = fnv1a(h, static_cast<std::uint64_t>(s.z_points));
    h = fnv1a(h, static_cast<std::uint64_t>(s.r_points));
    h = fnv1a(h, static_cast<std::uint64_t>(s.bessel_modes));
    for (double v : {s.z_min, s.z_max, s.r_min, s.r_max, s.rho_max, s.z_ionization, s.r_dissociation, a.z_onset,
                     a.z_strength, a.r_onset, a.r_strength})
        h = fnv1a(h, v);
    return fnv1a(h, static_cast<std::uint8_t>(a.enabled));
}

double coulomb_potential(double rho, double z, double r)
{
    if (!(r > 0.0)) throw std::domain_error("coulomb_potential: R must be positive");
    const double a = std::sqrt(rho * rho + (z - 0.5 * r) * (z - 0.5 * r));
    const double b = std::sqrt(rho * rho + (z + 0.5 * r) * (z + 0.5 * r));
    if (a == 0.0 || b == 0.0) throw std::domain_error("coulomb_potential: evaluated at a nucleus");
    return -1.0 / a - 1.0 / b + 1.0 / r;
}

// ---- wavefunction ----

WavefunctionH2::WavefunctionH2(std::shared_ptr<const H2Geometry> g, Representation r)
    : geometry(std::move(g)), rep(r)
{
    if (!geometry) throw std::invalid_argument("WavefunctionH2: null geometry");
    data.assign(geometry->size(), complex(0.0));
}

// The rho transform is orthogonal, so the norm is the same in either representation.
double WavefunctionH2::norm() const { return sum_norm(data.data(), data.size()) * geometry->cell(); }

void WavefunctionH2::normalize()
{
    const double n = norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw std::domain_error("WavefunctionH2::normalize: zero or non-finite norm");
    const double s = 1.0 / std::sqrt(n);
    for (auto& c : data) c *= s;
}

void WavefunctionH2::to_grid()
{
    if (rep == Representation::grid) return;
    cvector out(data.size());
    h2plus::to_grid(*geometry, data.data(), out.data());
    data.swap(out);
    rep = Representation::grid;
}

void WavefunctionH2::to_modes()
{
    if (rep == Representation::modes) return;
    cvector out(data.size());
    h2plus::to_modes(*geometry, data.data(), out.data());
    data.swap(out);
    rep = Representation::modes;
}

double WavefunctionH2::parity_defect() const
{
    const auto& g = *geometry;
    const std::size_t nz = g.nz();
    double peak = 0.0, defect = 0.0;
    for (std::size_t ir = 0; ir < g.nr(); ++ir)
        for (std::size_t m = 0; m < g.nm(); ++m) {
            const complex* row = data.data() + g.index(ir, m, 0);
            for (std::size_t iz = 0; iz < nz; ++iz) {
                peak = std::max(peak, std::abs(row[iz]));
                defect = std::max(defect, std::abs(row[iz] - row[(nz - iz) % nz]));
            }
        }
    return peak > 0.0 ? defect / peak : 0.0;
}

// ---- operators ----

H2Operators::H2Operators(std::shared_ptr<const H2Geometry> geometry, const H2Params& params)
    : geometry_(std::move(geometry)), params_(params)
{
    if (!geometry_) throw std::invalid_argument("H2Operators: null geometry");
    params_.validate();
    const auto& g = *geometry_;
    potential_.resize(g.size());
    const auto& rho = g.rho().points();
    for (std::size_t ir = 0; ir < g.nr(); ++ir)
        for (std::size_t m = 0; m < g.nm(); ++m)
            for (std::size_t iz = 0; iz < g.nz(); ++iz)
                potential_[g.index(ir, m, iz)] = coulomb_potential(rho[m], g.z().point(iz), g.r().point(ir));

    absorber_r_.resize(g.nr());
    absorber_z_.resize(g.nz());
    for (std::size_t i = 0; i < g.nr(); ++i) absorber_r_[i] = g.absorber_r(g.r().point(i));
    for (std::size_t i = 0; i < g.nz(); ++i) absorber_z_[i] = g.absorber_z(g.z().point(i));

    const auto kr = g.r().wavenumbers();
    const auto kz = g.z().wavenumbers();
    for (double k : kr) kin_r_.push_back(params_.nuclear_factor() * k * k);
    for (double l : g.rho().eigenvalues()) kin_m_.push_back(params_.beta() * l);
    for (double k : kz) kin_z_.push_back(params_.beta() * k * k);

    const long nz = static_cast<long>(g.nz());
    const long nm = static_cast<long>(g.nm());
    fft_ = std::make_shared<FftPlan>(
        std::vector<FftPlan::Dim>{{static_cast<int>(g.nr()), nm * nz}, {static_cast<int>(nz), 1}},
        std::vector<FftPlan::Dim>{{static_cast<int>(nm), nz}});
}

std::shared_ptr<const cvector> H2Operators::half_potential_phase(double dt) const
{
    std::lock_guard lock(cache_mutex_);
    for (const auto& [key, table] : half_cache_)
        if (key == dt) return table;
    auto table = std::make_shared<const cvector>(half_phase(*this, complex(dt, 0.0), true));
    half_cache_.emplace_back(dt, table);
    return table;
}

double H2Operators::energy(const WavefunctionH2& psi) const
{
    const auto& g = *geometry_;
    cvector grid(psi.data.size()), modes(psi.data.size());
    if (psi.rep == Representation::grid) {
        grid = psi.data;
        to_modes(g, grid.data(), modes.data());
    } else {
        modes = psi.data;
        to_grid(g, modes.data(), grid.data());
    }
    double norm = 0.0, v = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double p = std::norm(grid[k]);
        norm += p;
        v += potential_[k] * p;
    }
    fft_->forward(modes.data());
    double t = 0.0;
    for (std::size_t ir = 0; ir < g.nr(); ++ir)
        for (std::size_t m = 0; m < g.nm(); ++m) {
            const complex* row = modes.data() + g.index(ir, m, 0);
            const double base = kin_r_[ir] + kin_m_[m];
            for (std::size_t iz = 0; iz < g.nz(); ++iz) t += (base + kin_z_[iz]) * std::norm(row[iz]);
        }
    t /= static_cast<double>(g.nr() * g.nz());
    return (t + v) / norm;
}

double H2Operators::mean_pz(const WavefunctionH2& psi) const
{
    const auto& g = *geometry_;
    cvector work = psi.data;
    fft_->forward(work.data());
    const auto kz = g.z().wavenumbers();
    double num = 0.0, den = 0.0;
    for (std::size_t ir = 0; ir < g.nr(); ++ir)
        for (std::size_t m = 0; m < g.nm(); ++m) {
            const complex* row = work.data() + g.index(ir, m, 0);
            for (std::size_t iz = 0; iz < g.nz(); ++iz) {
                const double p = std::norm(row[iz]);
                num += kz[iz] * p;
                den += p;
            }
        }
    return num / den;
}

// ---- observables ----

std::vector<double> f1_profile(const WavefunctionH2& psi)
{
    const auto& g = *psi.geometry;
    const double dz = g.z().spacing();
    std::vector<double> out(g.nr(), 0.0);
    std::vector<double> column(g.nz());
    for (std::size_t ir = 0; ir < g.nr(); ++ir) {
        std::fill(column.begin(), column.end(), 0.0);
        for (std::size_t m = 0; m < g.nm(); ++m) {
            const complex* row = psi.data.data() + g.index(ir, m, 0);
            for (std::size_t iz = 0; iz < g.nz(); ++iz) column[iz] += std::norm(row[iz]);
        }
        const double half = g.z_ionization() + 0.5 * g.r().point(ir);
        double s = 0.0;
        for (std::size_t iz = 0; iz < g.nz(); ++iz) {
            const double w = cell_overlap(g.z().point(iz), dz, -half, half);
            if (w > 0.0) s += w * column[iz];
        }
        out[ir] = s * dz;
    }
    return out;
}

double ionization_probability(std::span<const double> f1, const H2Geometry& geometry)
{
    double s = 0.0;
    for (double v : f1) s += v;
    return std::clamp(1.0 - s * geometry.r().spacing(), 0.0, 1.0);
}

double dissociation_probability(std::span<const double> f1, const H2Geometry& geometry)
{
    const auto& r = geometry.r();
    const double inf = std::numeric_limits<double>::infinity();
    double s = 0.0;
    for (std::size_t i = 0; i < f1.size(); ++i)
        s += cell_overlap(r.point(i), r.spacing(), geometry.r_dissociation(), inf) * f1[i];
    return std::clamp(s * r.spacing(), 0.0, 1.0);
}

// ---- relaxation ----

namespace {

WavefunctionH2 product_guess(const H2Operators& ops, const RelaxOptions& o)
{
    const auto& g = ops.geometry();
    WavefunctionH2 psi(ops.geometry_ptr(), Representation::grid);
    const auto& rho = g.rho().points();
    const auto& w = g.rho().weights();
    const double s2 = 2.0 * o.electron_width * o.electron_width;
    const double c = 0.5 * o.r_center;
    for (std::size_t ir = 0; ir < g.nr(); ++ir) {
        const double dr = g.r().point(ir) - o.r_center;
        const double fr = std::exp(-dr * dr / (2.0 * o.r_width * o.r_width));
        for (std::size_t m = 0; m < g.nm(); ++m)
            for (std::size_t iz = 0; iz < g.nz(); ++iz) {
                const double z = g.z().point(iz);
                const double p2 = rho[m] * rho[m];
                const double fe = std::exp(-(p2 + (z - c) * (z - c)) / s2) + std::exp(-(p2 + (z + c) * (z + c)) / s2);
                psi.data[g.index(ir, m, iz)] = fr * fe * std::sqrt(w[m]);
            }
    }
    psi.normalize();
    return psi;
}

// Band-limited interpolation in z onto a finer grid over the same box.
WavefunctionH2 refine_z(const WavefunctionH2& coarse, const H2Operators& ops)
{
    const auto& gc = *coarse.geometry;
    const auto& g = ops.geometry();
    const std::size_t nc = gc.nz(), n = g.nz();
    WavefunctionH2 psi(ops.geometry_ptr(), Representation::grid);
    FftPlan small(nc), large(n);
    cvector row(nc), wide(n);
    for (std::size_t ir = 0; ir < g.nr(); ++ir)
        for (std::size_t m = 0; m < g.nm(); ++m) {
            const complex* src = coarse.data.data() + gc.index(ir, m, 0);
            std::copy(src, src + nc, row.begin());
            small.forward(row.data());
            std::fill(wide.begin(), wide.end(), complex(0.0));
            const std::size_t half = nc / 2;
            for (std::size_t k = 0; k < half; ++k) wide[k] = row[k];
            for (std::size_t k = half + 1; k < nc; ++k) wide[n - nc + k] = row[k];
            wide[half] = 0.5 * row[half];
            wide[n - half] = 0.5 * row[half];
            large.backward(wide.data());
            std::copy(wide.begin(), wide.end(), psi.data.begin() + static_cast<std::ptrdiff_t>(g.index(ir, m, 0)));
        }
    psi.normalize();
    return psi;
}

} // namespace

H2RelaxResult relax_h2_ground_state(const H2Operators& ops, const RelaxOptions& o)
{
    if (!(o.dt_imag > 0.0)) throw std::domain_error("relax_h2_ground_state: dt_imag must be positive");
    if (!(o.tol > 0.0)) throw std::domain_error("relax_h2_ground_state: tol must be positive");
    if (o.check_every == 0) throw std::domain_error("relax_h2_ground_state: check_every must be >= 1");
    const auto& g = ops.geometry();
    const bool prerelax = o.prerelax_z_points > 0 && o.prerelax_z_points < g.nz();
    if (prerelax && (g.nz() % o.prerelax_z_points != 0 || o.prerelax_z_points % 2 != 0))
        throw std::domain_error("relax_h2_ground_state: prerelax_z_points must be even and divide z_points");

    WavefunctionH2 psi = product_guess(ops, o);
    std::size_t steps = 0;
    double energy = 0.0;

    // Returns true once the per-step energy change drops below `tol`.
    auto stage = [&](const H2Operators& on, WavefunctionH2& state, double dt, double tol) {
        const complex s(0.0, -dt);
        const cvector half_v = half_phase(on, s, false);
        std::vector<complex> er, em, ez;
        kinetic_factors(on, s, er, em, ez);
        cvector scratch(state.data.size());
        energy = on.energy(state);
        while (steps < o.max_steps) {
            for (std::size_t i = 0; i < o.check_every; ++i) {
                strang(on, state.data, scratch, half_v, er, em, ez);
                state.normalize();
            }
            steps += o.check_every;
            const double next = on.energy(state);
            if (!std::isfinite(next)) throw NumericalError("relax_h2_ground_state: energy is not finite", 0, steps);
            const double change = std::abs(next - energy) / static_cast<double>(o.check_every);
            energy = next;
            if (o.progress) o.progress(steps, energy);
            if (change < tol) return true;
        }
        return false;
    };

    if (prerelax) {
        GeometrySpec spec = g.spec();
        spec.z_points = o.prerelax_z_points;
        const H2Operators coarse(std::make_shared<const H2Geometry>(spec), ops.params());
        WavefunctionH2 c = product_guess(coarse, o);
        const double dt = o.dt_coarse > 0.0 ? o.dt_coarse : o.dt_imag;
        if (!stage(coarse, c, dt, o.coarse_tol))
            throw ConvergenceError("relax_h2_ground_state: coarse stage hit the step cap", energy);
        psi = refine_z(c, ops);
    } else if (o.dt_coarse > 0.0 && !stage(ops, psi, o.dt_coarse, o.coarse_tol)) {
        throw ConvergenceError("relax_h2_ground_state: coarse stage hit the step cap", energy);
    }
    if (stage(ops, psi, o.dt_imag, o.tol)) {
        psi.to_modes();
        return {std::move(psi), energy, steps};
    }
    throw ConvergenceError("relax_h2_ground_state: no convergence within step cap", energy);
}

WavefunctionH2 refine_stationary(const H2Operators& ops, const WavefunctionH2& psi0, double energy, double dt,
                                 double window)
{
    if (!(dt > 0.0) || !(window >= dt)) throw std::domain_error("refine_stationary: need 0 < dt <= window");
    WavefunctionH2 psi = psi0;
    psi.to_grid();
    const cvector half_v = half_phase(ops, complex(dt, 0.0), false);
    std::vector<complex> er, em, ez;
    kinetic_factors(ops, complex(dt, 0.0), er, em, ez);
    cvector scratch(psi.data.size());

    WavefunctionH2 acc(psi.geometry, Representation::grid);
    const auto steps = static_cast<std::size_t>(std::round(window / dt));
    const double centre = 0.5 * static_cast<double>(steps) * dt;
    const double width = window / 6.0;
    for (std::size_t n = 0; n <= steps; ++n) {
        const double t = static_cast<double>(n) * dt;
        const double x = (t - centre) / width;
        const complex w = std::polar(std::exp(-0.5 * x * x), energy * t);
        for (std::size_t k = 0; k < acc.data.size(); ++k) acc.data[k] += w * psi.data[k];
        if (n < steps) strang(ops, psi.data, scratch, half_v, er, em, ez);
    }
    acc.normalize();
    acc.to_modes();
    acc.time = psi0.time;
    return acc;
}

// ---- propagation ----

H2Propagator::H2Propagator(std::shared_ptr<const H2Operators> ops, WavefunctionH2 psi, shotnoise::KickSequence kicks,
                           H2PropagationOptions options)
    : ops_(std::move(ops)), psi_(std::move(psi)), kicks_(std::move(kicks)), options_(options)
{
    if (!ops_) throw std::invalid_argument("H2Propagator: null operators");
    if (!(options_.dt > 0.0)) throw std::domain_error("H2Propagator: dt must be positive");
    if (options_.record_every == 0) throw std::domain_error("H2Propagator: record_every must be >= 1");
    if (!psi_.geometry || psi_.geometry->hash() != ops_->geometry().hash())
        throw std::invalid_argument("H2Propagator: wavefunction geometry differs from the operators'");
    t_start_ = psi_.time;
    if (kicks_.horizon < t_start_) throw std::domain_error("H2Propagator: horizon lies before the start time");
    psi_.to_grid();
    cursor_ = static_cast<std::size_t>(
        std::lower_bound(kicks_.kicks.begin(), kicks_.kicks.end(), t_start_,
                         [](const shotnoise::Kick& k, double t) { return k.time <= t; }) -
        kicks_.kicks.begin());
    scratch_.resize(psi_.data.size());
    half_v_ = ops_->half_potential_phase(options_.dt);
    kinetic_factors(*ops_, complex(options_.dt, 0.0), kin_r_, kin_m_, kin_z_);
    record();
}

std::size_t H2Propagator::total_steps() const noexcept
{
    return static_cast<std::size_t>(std::ceil((kicks_.horizon - t_start_) / options_.dt - 1e-9));
}

double H2Propagator::boundary(std::size_t n) const noexcept
{
    if (n >= total_steps()) return kicks_.horizon;
    return t_start_ + static_cast<double>(n) * options_.dt;
}

double H2Propagator::time() const noexcept { return boundary(step_); }

WavefunctionH2 H2Propagator::state() const
{
    WavefunctionH2 out = psi_;
    out.to_modes();
    return out;
}

void H2Propagator::split_step(double h, bool full)
{
    const auto& g = ops_->geometry();
    const cvector* hv = half_v_.get();
    const std::vector<complex>* er = &kin_r_;
    const std::vector<complex>* em = &kin_m_;
    const std::vector<complex>* ez = &kin_z_;
    std::vector<complex> pr, pm, pz;
    if (!full) {
        fill_half_phase(*ops_, complex(h, 0.0), g.absorber().enabled, partial_v_);
        kinetic_factors(*ops_, complex(h, 0.0), pr, pm, pz);
        hv = &partial_v_;
        er = &pr;
        em = &pm;
        ez = &pz;
    }

    // Norm removed at R > R_a, measured around both potential half-steps.
    const bool track = g.absorber().enabled;
    std::size_t first_row = g.nr();
    for (std::size_t ir = 0; track && ir < g.nr(); ++ir)
        if (ops_->absorber_r()[ir] > 0.0) {
            first_row = ir;
            break;
        }
    const std::size_t offset = g.index(first_row, 0, 0);
    auto tail_norm = [&] {
        return track ? sum_norm(psi_.data.data() + offset, psi_.data.size() - offset) * g.cell() : 0.0;
    };
    auto half_potential = [&] {
        const double before = tail_norm();
        const std::size_t n = psi_.data.size();
        for (std::size_t k = 0; k < n; ++k) psi_.data[k] *= (*hv)[k];
        absorbed_r_ += before - tail_norm();
    };

    half_potential();
    to_modes(g, psi_.data.data(), scratch_.data());
    ops_->fft().forward(scratch_.data());
    for (std::size_t ir = 0; ir < g.nr(); ++ir)
        for (std::size_t m = 0; m < g.nm(); ++m) {
            const complex c = (*er)[ir] * (*em)[m];
            complex* row = scratch_.data() + g.index(ir, m, 0);
            for (std::size_t iz = 0; iz < g.nz(); ++iz) row[iz] *= c * (*ez)[iz];
        }
    ops_->fft().backward_unscaled(scratch_.data());
    to_grid(g, scratch_.data(), psi_.data.data());
    half_potential();
}

void H2Propagator::kick(double strength)
{
    const auto& g = ops_->geometry();
    const double q = ops_->params().kappa() * strength;
    std::vector<complex> phase(g.nz());
    for (std::size_t iz = 0; iz < g.nz(); ++iz) {
        const double z = g.z().point(iz);
        phase[iz] = complex(std::cos(q * z), -std::sin(q * z));
    }
    for (std::size_t ir = 0; ir < g.nr(); ++ir)
        for (std::size_t m = 0; m < g.nm(); ++m) {
            complex* row = psi_.data.data() + g.index(ir, m, 0);
            for (std::size_t iz = 0; iz < g.nz(); ++iz) row[iz] *= phase[iz];
        }
}

void H2Propagator::step_once()
{
    double t = boundary(step_);
    const double t_next = boundary(step_ + 1);
    while (cursor_ < kicks_.kicks.size() && kicks_.kicks[cursor_].time <= t_next) {
        const auto& k = kicks_.kicks[cursor_];
        if (k.time > t) split_step(k.time - t, false);
        t = k.time;
        kick(k.strength);
        ++cursor_;
    }
    if (t_next > t) {
        // Untouched steps reuse the cached dt tables; only kick-split or final short steps build fresh ones.
        const bool full = t == boundary(step_) && std::abs((t_next - t) - options_.dt) <= 1e-9 * options_.dt;
        split_step(full ? options_.dt : t_next - t, full);
    }
    ++step_;
    psi_.time = t_next;
    if (step_ % options_.record_every == 0 || step_ == total_steps()) record();
}

void H2Propagator::record()
{
    const double n = psi_.norm();
    if (!std::isfinite(n)) throw NumericalError("h2plus propagation: non-finite norm", options_.seed, step_);
    auto f1 = f1_profile(psi_);
    H2Record r{psi_.time,
               n,
               ionization_probability(f1, ops_->geometry()),
               dissociation_probability(f1, ops_->geometry()),
               absorbed_r_,
               options_.record_energy ? ops_->energy(psi_) : std::numeric_limits<double>::quiet_NaN(),
               {}};
    if (options_.record_f1) r.f1 = std::move(f1);
    series_.records.push_back(std::move(r));
}

void H2Propagator::advance_steps(std::size_t n)
{
    for (std::size_t i = 0; i < n && step_ < total_steps(); ++i) step_once();
}

void H2Propagator::run(double final_time)
{
    while (step_ < total_steps() && boundary(step_) < final_time - 1e-12) step_once();
}

// ---- checkpoint ----

namespace {

constexpr char kMagic[8] = {'K', 'D', 'C', 'H', 'K', '0', '0', '1'};

std::uint64_t kick_digest(const shotnoise::KickSequence& k)
{
    std::uint64_t h = fnv1a(fnv_offset, k.horizon);
    for (const auto& e : k.kicks) h = fnv1a(fnv1a(h, e.time), e.strength);
    return h;
}

nlohmann::json geometry_json(const GeometrySpec& s)
{
    return {{"z_points", s.z_points},
            {"z_min", s.z_min},
            {"z_max", s.z_max},
            {"r_points", s.r_points},
            {"r_min", s.r_min},
            {"r_max", s.r_max},
            {"bessel_modes", s.bessel_modes},
            {"rho_max", s.rho_max},
            {"z_ionization", s.z_ionization},
            {"r_dissociation", s.r_dissociation},
            {"absorber",
             {{"enabled", s.absorber.enabled},
              {"z_onset", s.absorber.z_onset},
              {"z_strength", s.absorber.z_strength},
              {"r_onset", s.absorber.r_onset},
              {"r_strength", s.absorber.r_strength}}}};
}

} // namespace

void H2Propagator::save_checkpoint(std::ostream& out) const
{
    static_assert(std::endian::native == std::endian::little, "checkpoint tensor is stored little-endian");
    nlohmann::json records = nlohmann::json::array();
    for (const auto& r : series_.records)
        records.push_back({r.time, r.norm, r.p_ionization, r.p_dissociation, r.absorbed_r,
                           std::isnan(r.energy) ? nlohmann::json(nullptr) : nlohmann::json(r.energy), r.f1});
    const nlohmann::json header{
        {"format", 1},
        {"geometry_hash", ops_->geometry().hash()},
        {"geometry", geometry_json(ops_->geometry().spec())},
        {"proton_mass", ops_->params().proton_mass},
        {"dt", options_.dt},
        {"record_every", options_.record_every},
        {"record_energy", options_.record_energy},
        {"record_f1", options_.record_f1},
        {"seed", options_.seed},
        {"t_start", t_start_},
        {"time", psi_.time},
        {"step", step_},
        {"kick_cursor", cursor_},
        {"kick_count", kicks_.kicks.size()},
        {"kick_digest", kick_digest(kicks_)},
        {"absorbed_r", absorbed_r_},
        {"tensor_size", psi_.data.size()},
        {"records", records}};
    const std::string text = header.dump();
    const std::uint64_t len = text.size();
    out.write(kMagic, sizeof kMagic);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(len));
    out.write(reinterpret_cast<const char*>(psi_.data.data()),
              static_cast<std::streamsize>(psi_.data.size() * sizeof(complex)));
    if (!out) throw std::runtime_error("save_checkpoint: write failed");
}

H2Propagator H2Propagator::load_checkpoint(std::istream& in, std::shared_ptr<const H2Operators> ops,
                                           shotnoise::KickSequence kicks)
{
    char magic[sizeof kMagic];
    std::uint64_t len = 0;
    in.read(magic, sizeof magic);
    in.read(reinterpret_cast<char*>(&len), sizeof len);
    if (!in || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error("load_checkpoint: not a checkpoint");
    std::string text(len, '\0');
    in.read(text.data(), static_cast<std::streamsize>(len));
    const auto h = nlohmann::json::parse(text);
    if (h.at("format").get<int>() != 1) throw std::runtime_error("load_checkpoint: unsupported format");
    if (h.at("geometry_hash").get<std::uint64_t>() != ops->geometry().hash())
        throw std::runtime_error("load_checkpoint: geometry hash mismatch");
    if (h.at("proton_mass").get<double>() != ops->params().proton_mass)
        throw std::runtime_error("load_checkpoint: proton mass mismatch");
    if (h.at("kick_digest").get<std::uint64_t>() != kick_digest(kicks))
        throw std::runtime_error("load_checkpoint: kick sequence differs from the checkpointed run");

    WavefunctionH2 psi(ops->geometry_ptr(), Representation::grid);
    if (h.at("tensor_size").get<std::size_t>() != psi.data.size())
        throw std::runtime_error("load_checkpoint: tensor size mismatch");
    in.read(reinterpret_cast<char*>(psi.data.data()), static_cast<std::streamsize>(psi.data.size() * sizeof(complex)));
    if (!in) throw std::runtime_error("load_checkpoint: truncated tensor");
    psi.time = h.at("t_start").get<double>();

    H2PropagationOptions options;
    options.dt = h.at("dt").get<double>();
    options.record_every = h.at("record_every").get<std::size_t>();
    options.record_energy = h.at("record_energy").get<bool>();
    options.record_f1 = h.at("record_f1").get<bool>();
    options.seed = h.at("seed").get<std::uint64_t>();

    H2Propagator p(std::move(ops), std::move(psi), std::move(kicks), options);
    p.psi_.time = h.at("time").get<double>();
    p.step_ = h.at("step").get<std::size_t>();
    p.cursor_ = h.at("kick_cursor").get<std::size_t>();
    p.absorbed_r_ = h.at("absorbed_r").get<double>();
    p.series_.records.clear();
    for (const auto& r : h.at("records")) {
        const double e = r.at(5).is_null() ? std::numeric_limits<double>::quiet_NaN() : r.at(5).get<double>();
        p.series_.records.push_back({r.at(0).get<double>(), r.at(1).get<double>(), r.at(2).get<double>(),
                                     r.at(3).get<double>(), r.at(4).get<double>(), e,
                                     r.at(6).get<std::vector<double>>()});
    }
    return p;
}

ObservableSeriesH2 propagate_h2_realization(const WavefunctionH2& psi0, std::shared_ptr<const H2Operators> ops,
                                            const shotnoise::KickSequence& kicks, const H2PropagationOptions& options)
{
    const double n = psi0.norm();
    if (!(std::abs(n - 1.0) < 1e-6)) throw std::domain_error("propagate_h2_realization: psi0 is not normalized");
    for (std::size_t i = 1; i < kicks.kicks.size(); ++i)
        if (!(kicks.kicks[i].time > kicks.kicks[i - 1].time))
            throw std::domain_error("propagate_h2_realization: kicks are not sorted");
    H2Propagator p(std::move(ops), psi0, kicks, options);
    p.run(kicks.horizon);
    return p.series();
}

void write_csv(std::ostream& out, const ObservableSeriesH2& series)
{
    out << "time_au,time_fs,norm,p_ionization,p_dissociation,absorbed_r,energy_au\n";
    out << std::setprecision(17);
    for (const auto& r : series.records) {
        out << r.time << ',' << units::au_to_fs(r.time) << ',' << r.norm << ',' << r.p_ionization << ','
            << r.p_dissociation << ',' << r.absorbed_r << ',';
        if (!std::isnan(r.energy)) out << r.energy;
        out << '\n';
    }
}

} // namespace kickdyn::h2plus
