// Acceptance checks. One line per criterion:
//   criterion N PASS|FAIL|SKIP  <title>: <measured values>
//
// usage: acceptance [--long] [N ...]
// With no numbers every criterion runs; 9 is skipped unless --long is given.
// Exit status is 0 when every criterion that ran passed.

#include "born_oppenheimer.hpp"
#include "kickdyn/cli.hpp"
#include "kickdyn/h2plus.hpp"
#include "kickdyn/qdyn1d.hpp"
#include "kickdyn/shotnoise.hpp"
#include "kickdyn/spectral.hpp"
#include "kickdyn/units.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

using namespace kickdyn;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

// ---- 1 ----

Outcome noise_moments()
{
    cli::SimConfig c = cli::parse_config("noise: {gamma_mean: 0.5, spacing: 1.0}\n"
                                         "validate_noise: {samples: 10000, horizon: 1000}\n");
    const auto report = cli::cmd_validate_noise(c);
    std::string d;
    for (const auto& chk : report.checks)
        d += fmt("%s %.6g vs %.6g (tol %.3g); ", chk.name.c_str(), chk.empirical, chk.analytic, chk.tolerance);
    return {report.pass(), d};
}

// ---- 2 ----

double bisect_j0_zero(std::size_t s)
{
    double lo = (static_cast<double>(s) - 0.25) * std::numbers::pi - 0.5;
    double hi = lo + 1.0;
    double flo = std::cyl_bessel_j(0.0, lo);
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = std::cyl_bessel_j(0.0, mid);
        if ((fm < 0) == (flo < 0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

Outcome transform_exactness()
{
    const spectral::BesselBasis b(16, 8.0);
    std::mt19937_64 rng(7);
    std::normal_distribution<double> nd;
    double round_trip = 0.0, parseval = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const std::size_t cols = 8;
        std::vector<complex> c(16 * cols), g(16 * cols), back(16 * cols);
        for (auto& v : c) v = complex(nd(rng), nd(rng));
        b.to_grid(c.data(), g.data(), cols);
        b.to_modes(g.data(), back.data(), cols);
        double nc = 0.0, ng = 0.0;
        for (std::size_t i = 0; i < c.size(); ++i) {
            round_trip = std::max(round_trip, std::abs(back[i] - c[i]));
            nc += std::norm(c[i]);
            ng += std::norm(g[i]);
        }
        parseval = std::max(parseval, std::abs(nc - ng) / nc);
    }
    const auto zeros = spectral::bessel_j0_zeros(32);
    double zero_err = 0.0;
    for (std::size_t i = 0; i < zeros.size(); ++i) zero_err = std::max(zero_err, std::abs(zeros[i] - bisect_j0_zero(i + 1)));
    const bool pass = round_trip < 1e-12 && parseval < 1e-12 && zero_err < 1e-12;
    return {pass, fmt("round trip %.2e, Parseval %.2e, J0 zeros %.2e (limit 1e-12)", round_trip, parseval, zero_err)};
}

// ---- 3 ----

Outcome free_packet()
{
    const spectral::UniformGrid g(2048, -200.0, 200.0);
    const double s0 = 2.0, c = 0.5, dt = 0.05;
    const std::size_t steps = 1000;
    cvector psi(g.size());
    for (std::size_t j = 0; j < g.size(); ++j) psi[j] = std::exp(-g.point(j) * g.point(j) / (4 * s0 * s0));
    spectral::FftPlan plan(g.size());
    const auto phase = spectral::kinetic_phase_factors(g, c, complex(dt, 0.0));
    for (std::size_t s = 0; s < steps; ++s) {
        plan.forward(psi.data());
        for (std::size_t j = 0; j < psi.size(); ++j) psi[j] *= phase[j];
        plan.backward(psi.data());
    }
    double n = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
        const double p = std::norm(psi[j]);
        n += p;
        m1 += p * g.point(j);
        m2 += p * g.point(j) * g.point(j);
    }
    const double var = m2 / n - (m1 / n) * (m1 / n);
    const double t = dt * steps;
    const double expected = s0 * s0 + (c * t / s0) * (c * t / s0);
    const double rel = std::abs(std::sqrt(var / expected) - 1.0);
    return {rel < 1e-6, fmt("width %.12f vs %.12f, relative %.2e (limit 1e-6)", std::sqrt(var), std::sqrt(expected), rel)};
}

// ---- 4, 5 ----

Outcome morse_oracle()
{
    const auto c = cli::parse_config("model: morse1d\n");
    const auto r = cli::cmd_relax(c);
    const double e0 = qdyn1d::morse_eigenenergy(0, c.morse1d.params);
    const double err = std::abs(r.energy - e0);
    return {err < 1e-5, fmt("E0 %.10f vs closed form %.10f, |diff| %.2e (limit 1e-5)", r.energy, e0, err)};
}

Outcome softcore_benchmark()
{
    const auto r = cli::cmd_relax(cli::parse_config("model: atom1d\n"));
    const double err = std::abs(r.energy + 0.5);
    return {err < 1e-3, fmt("E0 %.8f, |E0 + 0.5| %.2e (limit 1e-3)", r.energy, err)};
}

// ---- 6 ----

Outcome atom_versus_molecule()
{
    const double final_au = 500.0;
    std::string d;
    bool any = false;
    for (const double gamma : {0.3, 0.5, 0.9}) {
        auto survival = [&](const char* model) {
            std::ostringstream y;
            y << "model: " << model << "\nnoise: {gamma_mean: " << gamma << ", spacing: 1.0}\n"
              << "run: {final_time_fs: " << units::au_to_fs(final_au) << ", record_every: 20}\n"
              << "ensemble: {realizations: 20, master_seed: 1}\n";
            const auto r = cli::cmd_ensemble(cli::parse_config(y.str()));
            return r.mean.values[r.mean.column("survival")];
        };
        const auto atom = survival("atom1d");
        const auto morse = survival("morse1d");
        std::size_t first_violation = atom.size();
        for (std::size_t i = 1; i < atom.size() && first_violation == atom.size(); ++i)
            if (!(atom[i] > morse[i])) first_violation = i;
        const bool throughout = first_violation == atom.size();
        const bool ok = atom.back() > 0.5 && morse.back() < 0.5 && throughout;
        any = any || ok;
        d += fmt("gamma %.1f: atom %.3f, Morse %.3f at %.0f a.u., atom > Morse throughout %s; ", gamma, atom.back(),
                 morse.back(), final_au, throughout ? "yes" : fmt("no (from record %zu)", first_violation).c_str());
    }
    return {any, d};
}

// ---- 7 ----

Outcome h2_ground_state()
{
    const auto c = cli::parse_config("model: h2plus\n");
    const auto start = std::chrono::steady_clock::now();
    const auto r = cli::cmd_relax(c);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const h2plus::H2Geometry g(c.h2plus.geometry);
    const auto bo = oracle::born_oppenheimer_ground(g, c.h2plus.params, 4.0);
    const double err = std::abs(r.energy - bo.energy);
    const bool pass = err < 2e-3 && r.parity_defect < 1e-8 && r.p_ionization < 1e-4 && r.p_dissociation < 1e-4;
    return {pass, fmt("E %.6f vs BO+ZPE %.6f, |diff| %.2e (limit 2e-3); parity %.1e; P_I %.1e; P_D %.1e; relax %.0f s",
                      r.energy, bo.energy, err, r.parity_defect, r.p_ionization, r.p_dissociation, secs)};
}

// ---- 8 ----

h2plus::GeometrySpec reduced_spec(bool absorber)
{
    h2plus::GeometrySpec s;
    s.z_points = 256;
    s.r_points = 64;
    s.r_max = 12.38;
    s.bessel_modes = 8;
    s.absorber.r_onset = 10.5;
    s.absorber.enabled = absorber;
    return s;
}

Outcome conservation()
{
    const auto ops = std::make_shared<const h2plus::H2Operators>(
        std::make_shared<const h2plus::H2Geometry>(reduced_spec(false)), h2plus::H2Params{});
    h2plus::RelaxOptions ro;
    ro.dt_coarse = 0.5;
    ro.coarse_tol = 1e-8;
    ro.dt_imag = 0.05;
    ro.tol = 1e-10;
    ro.r_width = 0.32;
    const auto ground = h2plus::relax_h2_ground_state(*ops, ro);
    const double dt = 0.05;
    const auto psi0 = h2plus::refine_stationary(*ops, ground.state, ground.energy, dt, 30.0);

    h2plus::H2PropagationOptions o;
    o.dt = dt;
    o.record_every = 10;
    o.record_energy = true;
    h2plus::H2Propagator free(ops, psi0, {{}, 1000 * dt}, o);
    free.run(1e9);
    double dn = 0.0, de = 0.0;
    const auto& rec = free.series().records;
    for (const auto& r : rec) {
        dn = std::max(dn, std::abs(r.norm - 1.0));
        de = std::max(de, std::abs(r.energy - rec.front().energy));
    }

    shotnoise::NoiseParams np;
    np.gamma_mean = 0.9;
    np.horizon = 1000 * dt;
    np.seed = 3;
    const auto kicks = shotnoise::sample_kicks(np);
    o.record_every = 1;
    o.record_energy = false;
    h2plus::H2Propagator kicked(ops, ground.state, kicks, o);
    kicked.run(1e9);
    double dk = 0.0;
    for (const auto& r : kicked.series().records) dk = std::max(dk, std::abs(r.norm - 1.0));

    const bool pass = dn < 1e-8 && de < 1e-8 && dk < 1e-10 && free.step_index() == 1000;
    return {pass, fmt("kick-free over %zu steps: |norm - 1| %.1e, |dE| %.1e a.u. (limit 1e-8); %zu kicks: |norm - 1| %.1e "
                      "(limit 1e-10)",
                      free.step_index(), dn, de, kicks.size(), dk)};
}

// ---- 9 ----

std::string source_path(const char* rel) { return std::string(KICKDYN_SOURCE_DIR) + "/" + rel; }

Outcome full_scale()
{
    auto single = cli::load_config(source_path("configs/h2plus.yaml"));
    single.ensemble.workers = std::max(1u, std::thread::hardware_concurrency());
    const auto r = cli::cmd_ensemble(single);
    const auto& pd = r.mean.values[r.mean.column("p_dissociation")];
    const double peak4c = *std::max_element(pd.begin(), pd.end());

    auto sweep = cli::load_config(source_path("configs/spacing_sweep.yaml"));
    sweep.ensemble.workers = single.ensemble.workers;
    const auto table = cli::cmd_sweep(sweep);
    const auto ipd = std::find(table.columns.begin(), table.columns.end(), "p_dissociation") - table.columns.begin();
    const auto ipi = std::find(table.columns.begin(), table.columns.end(), "p_ionization") - table.columns.begin();
    double best = -1.0, at = 0.0, pi_far = 0.0;
    for (const auto& row : table.rows) {
        if (row.mean[ipd] > best) {
            best = row.mean[ipd];
            at = row.value;
        }
        if (row.value > 1.5) pi_far = std::max(pi_far, row.mean[ipi]);
    }
    const bool pass = std::abs(peak4c - 0.25) <= 0.10 && at >= 0.3 && at <= 1.0 && std::abs(best - 0.30) <= 0.10 &&
                      pi_far < 0.05;
    return {pass, fmt("gamma 0.9 spacing 1: peak P_D %.3f (0.25 +- 0.10); gamma 0.5 sweep: P_D max %.3f at spacing %.2f "
                      "(0.30 +- 0.10 in [0.3, 1.0]); max P_I beyond 1.5: %.3f (< 0.05)",
                      peak4c, best, at, pi_far)};
}

// ---- 10 ----

Outcome trend_surrogate()
{
    auto c = cli::load_config(source_path("configs/h2plus_reduced.yaml"));
    c.sweep.axis = "spacing";
    c.sweep.values = {0.05, 1.0};
    const auto table = cli::cmd_sweep(c);
    const auto ipi = std::find(table.columns.begin(), table.columns.end(), "p_ionization") - table.columns.begin();
    const double dense = table.rows[0].mean[ipi], sparse = table.rows[1].mean[ipi];
    return {dense >= 2.0 * sparse,
            fmt("P_I %.4f (+- %.4f) at spacing 0.05, %.4f (+- %.4f) at 1.0, ratio %.3f (need >= 2)", dense,
                table.rows[0].standard_error[ipi], sparse, table.rows[1].standard_error[ipi], dense / sparse)};
}

// ---- 11 ----

Outcome determinism()
{
    auto morse = cli::parse_config("model: morse1d\n"
                                   "noise: {gamma_mean: 0.5, spacing: 0.5}\n"
                                   "run: {final_time_fs: 5.0}\n"
                                   "ensemble: {realizations: 16, master_seed: 2024}\n");
    auto h2 = cli::parse_config("model: h2plus\n"
                                "noise: {gamma_mean: 0.9}\n"
                                "run: {final_time_fs: 0.5, dt: 0.1, record_every: 5}\n"
                                "ensemble: {realizations: 8, master_seed: 2024}\n"
                                "h2plus:\n"
                                "  grid: {z_points: 128, z_min: -16, z_max: 16, r_points: 32, r_max: 5.18,\n"
                                "         bessel_modes: 8, rho_max: 6}\n"
                                "  z_ionization: 10\n"
                                "  r_dissociation: 4\n"
                                "  absorber: {z_onset: 12, r_onset: 4.5}\n"
                                "  relax: {dt_coarse: 0.5, coarse_tol: 1e-7, dt_imag: 0.1, tol: 1e-8}\n");
    std::string d;
    bool pass = true;
    for (auto* c : {&morse, &h2}) {
        c->ensemble.workers = 1;
        const auto one = cli::cmd_ensemble(*c);
        c->ensemble.workers = 8;
        const auto eight = cli::cmd_ensemble(*c);
        const bool same = one == eight;
        pass = pass && same;
        d += fmt("%s: %zu realizations, 1 vs 8 workers %s; ", cli::to_string(c->model).c_str(), one.n,
                 same ? "identical" : "DIFFER");
    }
    return {pass, d};
}

struct Criterion {
    int id;
    const char* title;
    std::function<Outcome()> run;
    bool long_running = false;
};

} // namespace

int main(int argc, char** argv)
{
    const std::vector<Criterion> all = {
        {1, "noise moments", noise_moments},
        {2, "transform exactness", transform_exactness},
        {3, "free-packet oracle", free_packet},
        {4, "Morse analytic oracle", morse_oracle},
        {5, "soft-core benchmark", softcore_benchmark},
        {6, "atom versus molecule under matched forcing", atom_versus_molecule},
        {7, "H2+ ground state", h2_ground_state},
        {8, "conservation", conservation},
        {9, "full-scale reference numbers", full_scale, true},
        {10, "desk-scale trend surrogate", trend_surrogate},
        {11, "ensemble determinism", determinism},
    };

    bool run_long = false;
    std::vector<int> wanted;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--long") {
            run_long = true;
        } else {
            char* end = nullptr;
            const long n = std::strtol(a.c_str(), &end, 10);
            if (*end != '\0' || n < 1 || n > 11) {
                std::fprintf(stderr, "usage: acceptance [--long] [1-11 ...]\n");
                return 2;
            }
            wanted.push_back(static_cast<int>(n));
        }
    }

    bool ok = true;
    for (const auto& c : all) {
        const bool selected = wanted.empty() || std::find(wanted.begin(), wanted.end(), c.id) != wanted.end();
        if (!selected) continue;
        if (c.long_running && !run_long) {
            std::printf("criterion %d SKIP  %s: long-running, run with --long\n", c.id, c.title);
            continue;
        }
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out = {false, std::string("error: ") + e.what()};
        }
        while (!out.detail.empty() && (out.detail.back() == ' ' || out.detail.back() == ';')) out.detail.pop_back();
        ok = ok && out.pass;
        std::printf("criterion %d %s  %s: %s\n", c.id, out.pass ? "PASS" : "FAIL", c.title, out.detail.c_str());
        std::fflush(stdout);
    }
    return ok ? 0 : 1;
}
