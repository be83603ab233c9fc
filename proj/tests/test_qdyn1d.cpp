#include "kickdyn/qdyn1d.hpp"
#include "kickdyn/random.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

using namespace kickdyn;
using namespace kickdyn::qdyn1d;
using spectral::UniformGrid;

namespace {

Hamiltonian1D atom_hamiltonian()
{
    const SoftCoreParams p{};
    return Hamiltonian1D(default_atom_grid(), [p](double x) { return softcore_potential(x, p); }, 0.5);
}

Hamiltonian1D morse_hamiltonian(const MorseParams& p = {})
{
    return Hamiltonian1D(default_morse_grid(), [p](double x) { return morse_potential(x, p); },
                         0.5 / p.reduced_mass);
}

// <p> = sum k |psi_k|^2 / sum |psi_k|^2 through the FFT.
double mean_momentum(const Wavefunction1D& psi)
{
    spectral::FftPlan plan(psi.grid.size());
    cvector k_space = psi.amplitudes;
    plan.forward(k_space.data());
    const auto k = psi.grid.wavenumbers();
    double num = 0.0, den = 0.0;
    for (std::size_t j = 0; j < k.size(); ++j) {
        num += k[j] * std::norm(k_space[j]);
        den += std::norm(k_space[j]);
    }
    return num / den;
}

} // namespace

TEST_CASE("soft-core potential")
{
    const SoftCoreParams p{2.0};
    CHECK(softcore_potential(0.0, p) == doctest::Approx(-1.0 / std::sqrt(2.0)));
    CHECK(softcore_potential(0.0, p) == doctest::Approx(-0.70711).epsilon(1e-5));
    CHECK(softcore_potential(3.7, p) == softcore_potential(-3.7, p));
    CHECK(softcore_potential(1e8, p) < 0.0);
    CHECK(softcore_potential(1e8, p) > -1e-7);
    CHECK_THROWS_AS(SoftCoreParams{0.0}.validate(), std::domain_error);
}

TEST_CASE("Morse potential and spectrum")
{
    const MorseParams p{};
    CHECK(morse_potential(0.0, p) == 0.0);
    CHECK(morse_potential(50.0, p) == doctest::Approx(0.225));
    CHECK(morse_potential(1.0 / p.alpha, p) == doctest::Approx(0.225 * std::pow(1.0 - std::exp(-1.0), 2)));
    CHECK(morse_potential(1.0 / p.alpha, p) == doctest::Approx(0.0899).epsilon(1e-3));

    // Closed form with the decided reduced mass 1744.59.
    CHECK(morse_eigenenergy(0, p) == doctest::Approx(9.329557105581587e-3).epsilon(1e-12));
    CHECK(morse_eigenenergy(0, p) == doctest::Approx(9.33e-3).epsilon(1e-3));
    CHECK(morse_eigenenergy(1, p) == doctest::Approx(0.027396048919791895).epsilon(1e-12));

    // Anharmonic: spacings shrink; energies peak at the last bound level.
    const std::size_t count = p.bound_state_count();
    CHECK(count == 24);
    double prev_gap = 1e9;
    for (std::size_t n = 1; n < count; ++n) {
        const double gap = morse_eigenenergy(n, p) - morse_eigenenergy(n - 1, p);
        CHECK(gap > 0.0);
        CHECK(gap < prev_gap);
        prev_gap = gap;
    }
    const double n_star = 2.0 * p.D / p.omega() - 0.5;
    CHECK(static_cast<double>(count - 1) <= n_star);
    CHECK(morse_eigenenergy(count - 1, p) < p.D);
    CHECK_THROWS_AS(morse_eigenenergy(count, p), std::domain_error);

    MorseParams bad = p;
    bad.reduced_mass = -1.0;
    CHECK_THROWS_AS(bad.validate(), std::domain_error);
}

TEST_CASE("harmonic oscillator relaxes to 1/2")
{
    const Hamiltonian1D h(UniformGrid(256, -12.0, 12.0), [](double x) { return 0.5 * x * x; }, 0.5);
    const auto r = relax_ground_state(h, 0.05, 1e-13);
    CHECK(std::abs(r.energy - 0.5) < 1e-6);
    CHECK(r.state.norm() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("soft-core atom ground state is -0.5")
{
    const auto r = relax_ground_state(atom_hamiltonian(), 0.05, 1e-13);
    CHECK(std::abs(r.energy + 0.5) < 1e-3);
    CHECK(std::abs(r.state.norm() - 1.0) < 1e-10);
}

TEST_CASE("Morse ground state matches the analytic eigenstate")
{
    const MorseParams p{};
    const auto h = morse_hamiltonian(p);
    const auto r = relax_ground_state(h, 0.5, 1e-14);
    CHECK(std::abs(r.energy - morse_eigenenergy(0, p)) < 1e-5);

    const auto exact = morse_eigenfunction(0, p, h.grid);
    CHECK(std::norm(overlap(exact, r.state)) > 1.0 - 1e-8);
    CHECK(std::abs(h.energy(exact) - morse_eigenenergy(0, p)) < 1e-8);

    const auto first = morse_eigenfunction(1, p, h.grid);
    CHECK(std::abs(overlap(exact, first)) < 1e-8);
    CHECK(std::abs(h.energy(first) - morse_eigenenergy(1, p)) < 1e-8);
}

TEST_CASE("relaxation reports non-convergence")
{
    const Hamiltonian1D h(UniformGrid(128, -10.0, 10.0), [](double x) { return 0.5 * x * x; }, 0.5);
    CHECK_THROWS_AS(relax_ground_state(h, 0.01, 1e-15, 3), ConvergenceError);
    CHECK_THROWS_AS(relax_ground_state(h, -0.01, 1e-15), std::domain_error);
}

TEST_CASE("kicks are pure phases")
{
    const UniformGrid g(512, -40.0, 40.0);
    Wavefunction1D psi(g);
    for (std::size_t j = 0; j < g.size(); ++j) psi.amplitudes[j] = std::exp(-0.5 * g.point(j) * g.point(j));
    psi.normalize();

    Wavefunction1D same = psi;
    apply_kick(same, 0.0, 3.0);
    CHECK(same.amplitudes == psi.amplitudes);

    const double p0 = mean_momentum(psi);
    Wavefunction1D kicked = psi;
    apply_kick(kicked, 0.37, 2.0);
    CHECK(std::abs(kicked.norm() - psi.norm()) < 1e-14);
    CHECK(std::abs(mean_momentum(kicked) - p0 - (-0.74)) < 1e-10);
}

TEST_CASE("stationary state survives unkicked propagation")
{
    const auto h = atom_hamiltonian();
    const auto r = relax_ground_state(h, 0.05, 1e-14);
    Wavefunction1D psi = r.state;
    const shotnoise::KickSequence none{{}, 1000 * 0.05};
    const auto series = propagate_kicked(psi, h, none, {0.05, 100, 1.0, {}}, r.state);
    REQUIRE(series.records.size() == 11);
    CHECK(series.records.front().survival == doctest::Approx(1.0).epsilon(1e-12));
    for (const auto& rec : series.records) {
        CHECK(std::abs(rec.survival - 1.0) < 1e-8);
        CHECK(std::abs(rec.norm - 1.0) < 1e-10);
    }
    CHECK(series.records.back().time == doctest::Approx(50.0));
}

TEST_CASE("kicked propagation without absorber is unitary")
{
    const auto h = atom_hamiltonian();
    const auto r = relax_ground_state(h, 0.05, 1e-14);
    Wavefunction1D psi = r.state;
    const auto kicks = shotnoise::sample_kicks({0.3, 2.0, 1000 * 0.05, 4});
    REQUIRE(kicks.size() > 10);
    const auto series = propagate_kicked(psi, h, kicks, {0.05, 1, 1.0, {}}, r.state);
    CHECK(series.records.size() == 1001);
    for (const auto& rec : series.records) {
        CHECK(std::abs(rec.norm - 1.0) < 1e-10);
        CHECK(rec.survival >= 0.0);
        CHECK(rec.survival <= 1.0 + 1e-12);
    }
}

TEST_CASE("energy between kicks: conserved for eigenstates, O(dt^2) bounded otherwise")
{
    const auto h = atom_hamiltonian();
    const auto r = relax_ground_state(h, 0.05, 1e-14);

    // Stationary state, 1000 kick-free steps.
    {
        Wavefunction1D psi = r.state;
        const auto series = propagate_kicked(psi, h, {{}, 1000 * 0.05}, {0.05, 10, 1.0, {}}, r.state);
        const double e0 = series.records.front().energy;
        for (const auto& rec : series.records) CHECK(std::abs(rec.energy - e0) < 1e-8 * std::abs(e0));
    }

    // After kicks the split-step energy oscillates around a constant with an
    // amplitude that shrinks like dt^2 (no secular drift).
    const shotnoise::KickSequence kicks{{{0.3, 0.2}, {1.0, 0.1}, {2.5, 0.3}}, 3.0 + 50.0};
    auto spread = [&](double dt) {
        Wavefunction1D psi = r.state;
        const auto series = propagate_kicked(psi, h, kicks, {dt, 1, 1.0, {}}, r.state);
        double lo = 1e300, hi = -1e300;
        for (const auto& rec : series.records) {
            if (rec.time <= 3.0) continue;
            lo = std::min(lo, rec.energy);
            hi = std::max(hi, rec.energy);
        }
        return hi - lo;
    };
    const double coarse = spread(0.05);
    const double fine = spread(0.025);
    CHECK(coarse < 1e-5);
    CHECK(coarse / fine == doctest::Approx(4.0).epsilon(0.25));
}

TEST_CASE("kicks land at their exact times, independent of dt")
{
    // Free particle: split-operator propagation is exact, so any dependence on
    // dt would come from kick placement.
    const UniformGrid g(1024, -60.0, 60.0);
    const Hamiltonian1D h(g, [](double) { return 0.0; }, 0.5);
    Wavefunction1D start(g);
    for (std::size_t j = 0; j < g.size(); ++j) start.amplitudes[j] = std::exp(-0.25 * g.point(j) * g.point(j));
    start.normalize();
    const shotnoise::KickSequence kicks{{{0.013, 0.4}, {0.77, 0.25}, {1.2345, 0.5}, {2.0, 0.1}}, 3.0};

    auto run = [&](double dt) {
        Wavefunction1D psi = start;
        propagate_kicked(psi, h, kicks, {dt, 1000000, 1.0, {}}, start);
        return psi;
    };
    const auto coarse = run(0.1);
    const auto fine = run(0.05);
    double diff = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j)
        diff = std::max(diff, std::abs(coarse.amplitudes[j] - fine.amplitudes[j]));
    CHECK(diff < 1e-8);

    // Snapping the kicks onto the step grid is detectably different.
    shotnoise::KickSequence snapped = kicks;
    for (auto& k : snapped.kicks) k.time = std::ceil(k.time / 0.1) * 0.1;
    Wavefunction1D psi = start;
    propagate_kicked(psi, h, snapped, {0.1, 1000000, 1.0, {}}, start);
    double snap_diff = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) snap_diff = std::max(snap_diff, std::abs(psi.amplitudes[j] - fine.amplitudes[j]));
    CHECK(snap_diff > 1e-4);
}

TEST_CASE("survival converges under halving dt")
{
    const auto h = atom_hamiltonian();
    const auto r = relax_ground_state(h, 0.05, 1e-14);
    const auto kicks = shotnoise::sample_kicks({0.1, 2.0 * std::numbers::pi, 100.0, 17});
    auto final_survival = [&](double dt) {
        Wavefunction1D psi = r.state;
        return propagate_kicked(psi, h, kicks, {dt, 1000000, 1.0, {0.15, 0.02, true, true}}, r.state)
            .records.back()
            .survival;
    };
    CHECK(std::abs(final_survival(0.05) - final_survival(0.025)) < 1e-4);
}

TEST_CASE("absorber removes norm monotonically")
{
    const UniformGrid g(512, -50.0, 50.0);
    const Hamiltonian1D h(g, [](double) { return 0.0; }, 0.5);
    Wavefunction1D psi(g);
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double x = g.point(j);
        psi.amplitudes[j] = std::exp(-0.25 * x * x) * std::exp(complex(0.0, 2.0 * x));
    }
    psi.normalize();
    const Wavefunction1D ref = psi;
    const auto series = propagate_kicked(psi, h, {{}, 60.0}, {0.05, 10, 1.0, {0.15, 1.0, true, true}}, ref);
    for (std::size_t i = 1; i < series.records.size(); ++i)
        CHECK(series.records[i].norm <= series.records[i - 1].norm * (1.0 + 1e-14));
    CHECK(series.records.back().norm < 0.01);
}

TEST_CASE("Morse absorber profile can be one-sided")
{
    const auto g = default_morse_grid();
    const auto w = Absorber{0.15, 0.1, false, true}.profile(g);
    CHECK(w.front() == 0.0);
    CHECK(w.back() > 0.09);
    CHECK(w[g.size() / 2] == 0.0);
}

TEST_CASE("CSV export")
{
    ObservableSeries1D s;
    s.records.push_back({0.0, 1.0, 1.0, -0.5});
    s.records.push_back({0.1, 0.99999999999999989, 0.75, -0.49});
    std::ostringstream out;
    write_csv(out, s);
    CHECK(out.str() == "time_au,norm,survival,energy_au\n0,1,1,-0.5\n0.10000000000000001,0.99999999999999989,0.75,-0.48999999999999999\n");
}
