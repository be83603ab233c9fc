#include "kickdyn/ensemble.hpp"
#include "kickdyn/random.hpp"

#include <doctest.h>

#include <chrono>
#include <cmath>
#include <set>
#include <sstream>
#include <thread>

using namespace kickdyn;
using namespace kickdyn::ensemble;

namespace {

// A noisy series whose values depend only on the seed.
Series synthetic(std::size_t, std::uint64_t seed)
{
    Xoshiro256pp rng(seed);
    Series s{{0.0, 1.0, 2.0}, {"a", "b"}, {{}, {}}};
    for (std::size_t t = 0; t < 3; ++t) {
        s.values[0].push_back(rng.canonical());
        s.values[1].push_back(rng.exponential(2.0));
    }
    return s;
}

} // namespace

TEST_CASE("single realization is its own average")
{
    EnsembleSpec spec;
    spec.n_realizations = 1;
    spec.master_seed = 5;
    const auto r = run_ensemble(spec, synthetic);
    CHECK(r.n == 1);
    CHECK(r.mean == synthetic(0, realization_seed(spec, 0)));
    CHECK(std::isnan(r.standard_error.values[0][0]));
    CHECK_THROWS_AS(convergence_report(r, {1.0, 1.0}), std::invalid_argument);
}

TEST_CASE("worker count does not change the result")
{
    EnsembleSpec spec;
    spec.n_realizations = 37;
    spec.master_seed = 2024;
    spec.retain_realizations = true;
    auto slow = [](std::size_t i, std::uint64_t seed) {
        // Uneven run times so completion order differs from index order.
        std::this_thread::sleep_for(std::chrono::microseconds((seed % 7) * 200));
        return synthetic(i, seed);
    };
    const auto one = run_ensemble(spec, slow);
    spec.workers = 8;
    const auto many = run_ensemble(spec, slow);
    CHECK(one == many);
    spec.master_seed = 2025;
    CHECK(!(run_ensemble(spec, slow).mean == one.mean));
}

TEST_CASE("mean and standard error are the textbook estimators")
{
    EnsembleSpec spec;
    spec.n_realizations = 5;
    spec.retain_realizations = true;
    auto solver = [](std::size_t i, std::uint64_t) {
        return Series{{0.0}, {"x"}, {{static_cast<double>(i * i)}}};
    };
    const auto r = run_ensemble(spec, solver);
    // 0, 1, 4, 9, 16: mean 6, sample variance 43.5.
    CHECK(r.mean.values[0][0] == doctest::Approx(6.0));
    CHECK(r.standard_error.values[0][0] == doctest::Approx(std::sqrt(43.5 / 5.0)));
    REQUIRE(r.realizations.size() == 5);
    CHECK(r.realizations[3].values[0][0] == 9.0);
}

TEST_CASE("standard error falls as N^-1/2")
{
    auto se_for = [](std::size_t n) {
        EnsembleSpec spec;
        spec.n_realizations = n;
        spec.master_seed = 77;
        return run_ensemble(spec, synthetic).standard_error.values[0][1];
    };
    const double ratio = se_for(400) / se_for(6400);
    CHECK(ratio == doctest::Approx(4.0).epsilon(0.1));
}

TEST_CASE("seeds are distinct and reproducible from the master seed")
{
    EnsembleSpec spec;
    spec.n_realizations = 10000;
    spec.master_seed = 3;
    std::set<std::uint64_t> seen;
    for (std::size_t i = 0; i < spec.n_realizations; ++i) seen.insert(realization_seed(spec, i));
    CHECK(seen.size() == spec.n_realizations);
    CHECK(realization_seed(spec, 17) == derive_seed(3, 17));
}

TEST_CASE("failed realizations are reported by seed with a partial result")
{
    EnsembleSpec spec;
    spec.n_realizations = 6;
    spec.workers = 3;
    auto flaky = [](std::size_t i, std::uint64_t seed) {
        if (i == 2 || i == 4) throw std::runtime_error("boom");
        return synthetic(i, seed);
    };
    try {
        run_ensemble(spec, flaky);
        FAIL("expected PartialEnsembleError");
    } catch (const PartialEnsembleError& e) {
        REQUIRE(e.failed().size() == 2);
        CHECK(e.failed()[0].index == 2);
        CHECK(e.failed()[1].seed == realization_seed(spec, 4));
        CHECK(e.partial().n == 4);
        CHECK(std::string(e.what()).find(std::to_string(realization_seed(spec, 2))) != std::string::npos);
    }
}

TEST_CASE("inconsistent record grids are rejected")
{
    EnsembleSpec spec;
    spec.n_realizations = 3;
    auto ragged = [](std::size_t i, std::uint64_t) {
        return Series{{0.0, i == 1 ? 1.5 : 1.0}, {"x"}, {{0.0, 1.0}}};
    };
    CHECK_THROWS_AS(run_ensemble(spec, ragged), std::invalid_argument);
    spec.n_realizations = 0;
    CHECK_THROWS_AS(run_ensemble(spec, synthetic), std::domain_error);
}

TEST_CASE("convergence report")
{
    EnsembleSpec spec;
    spec.n_realizations = 8;
    const auto same = run_ensemble(spec, [](std::size_t, std::uint64_t) { return synthetic(0, 1); });
    auto report = convergence_report(same, {0.0, 0.0});
    CHECK(report.pass);
    CHECK(report.columns[0].max_standard_error == 0.0);

    const auto noisy = run_ensemble(spec, synthetic);
    report = convergence_report(noisy, {0.0, 0.0});
    CHECK(!report.pass);
    CHECK(report.columns[1].flagged == 3);
    report = convergence_report(noisy, {1.0, 10.0});
    CHECK(report.pass);
    CHECK(report.columns[0].max_standard_error > 0.0);
    CHECK_THROWS_AS(convergence_report(noisy, {1.0}), std::invalid_argument);
}

TEST_CASE("seed manifest and CSV")
{
    const std::vector<std::uint64_t> seeds{1, 18446744073709551615ULL, 42};
    std::stringstream buffer;
    write_seed_manifest(buffer, seeds);
    CHECK(buffer.str().rfind("# realization seed\n0 1\n", 0) == 0);
    CHECK(read_seed_manifest(buffer) == seeds);
    std::istringstream bad("0 1\n2 5\n");
    CHECK_THROWS(read_seed_manifest(bad));

    EnsembleSpec spec;
    spec.n_realizations = 2;
    std::ostringstream out;
    write_csv(out, run_ensemble(spec, synthetic));
    CHECK(out.str().rfind("time_au,mean_a,se_a,mean_b,se_b\n", 0) == 0);
}
