#include "eastlab/constants.hpp"
#include "eastlab/dynamics.hpp"
#include "eastlab/fpp.hpp"
#include "eastlab/percolation.hpp"
#include "eastlab/stats.hpp"

#include <doctest.h>
#include <stdexcept>

#include <cmath>
#include <limits>

using namespace eastlab;

TEST_CASE("oracle equals the simulator at p = 0")
{
    for (Flavor flavor : {Flavor::East, Flavor::ModifiedEast}) {
        const ModelParams params{2, flavor, 0.0, 15};
        const Box box = params.box();
        SimulateOptions opts;
        opts.tracked = all_vertices(box);
        opts.stop_when_tracked_infected = true;
        for (int s = 0; s < 10; ++s) {
            const RandomSource src = RandomSource(2).replica(s);
            const auto stats = simulate(params, Configuration::all_healthy(box), src, opts);
            const auto oracle = fpp_times(params, src);
            for (VertexIndex v = 0; v < box.size(); ++v)
                REQUIRE(stats.infection_time[v] == oracle[v]);
        }
    }
    CHECK_THROWS_AS(fpp_times({2, Flavor::East, 0.1, 3}, RandomSource(1)), std::invalid_argument);
}

TEST_CASE("recursion structure")
{
    for (Flavor flavor : {Flavor::East, Flavor::ModifiedEast}) {
        const ModelParams params{3, flavor, 0.0, 6};
        const Box box = params.box();
        const auto field = passage_field(params, RandomSource(7));
        CHECK(field.times[0] == field.origin_delay);
        for (VertexIndex v = 1; v < box.size(); ++v) {
            double best = std::numeric_limits<double>::infinity();
            for (int i = 0; i < 3; ++i)
                if (const VertexIndex u = box.predecessor(v, i); u >= 0)
                    best = std::min(best, field.times[u]);
            REQUIRE(field.times[v] > best);
        }
        for (std::size_t k = 0; k < field.weights.size(); ++k)
            if (field.has_object(k))
                REQUIRE(field.weights[k] > 0.0);
    }
}

TEST_CASE("d = 1: chain of exponentials, and site and bond coincide")
{
    const int n = 30;
    const ModelParams site{1, Flavor::East, 0.0, n};
    const ModelParams bond{1, Flavor::ModifiedEast, 0.0, n};
    RunningStats s;
    for (int r = 0; r < 5000; ++r) {
        const RandomSource src = RandomSource(3).replica(r);
        const auto a = fpp_times(site, src);
        const auto b = fpp_times(bond, src.with_edge_site_bijection());
        REQUIRE(a == b);
        s.add(a[n]);
    }
    CHECK(std::abs(s.mean() - (n + 1)) < 3 * s.standard_error());
}

TEST_CASE("origin delay is Exp(1)")
{
    std::vector<double> y;
    for (int r = 0; r < 10000; ++r)
        y.push_back(passage_field({2, Flavor::ModifiedEast, 0.0, 1}, RandomSource(5).replica(r)).origin_delay);
    CHECK(ks_test_exponential(y).p_value > 0.01);
}

TEST_CASE("open / closed decomposition")
{
    const ModelParams params{2, Flavor::ModifiedEast, 0.0, 230};
    const auto field = passage_field(params, RandomSource(10));
    const auto all = decompose_open(field, std::numeric_limits<double>::infinity());
    CHECK(all.open_count() == all.object_count());

    const auto open = decompose_open(field, 1.0);
    const auto n = open.object_count();
    REQUIRE(n > 100000);
    const auto e = EstimateCI::from_proportion(open.open_count(), n);
    CHECK(std::abs(e.estimate - (1 - std::exp(-1.0))) < 3 * e.std_error);

    RunningStats below;
    for (std::size_t k = 0; k < field.weights.size(); ++k)
        if (open.present[k] && open.open[k])
            below.add(field.weights[k]);
    CHECK(std::abs(below.mean() - beta_T(1.0)) < 3 * below.standard_error());
    CHECK_THROWS_AS(decompose_open(field, 0.0), std::invalid_argument);
}

TEST_CASE("two-stage sampling reproduces Exp(1)")
{
    const RandomSource src(8);
    const ClockKey a{1}, b{2};
    std::vector<double> xs;
    std::int64_t open = 0;
    for (std::uint64_t k = 0; k < 20000; ++k) {
        const double x = two_stage_passage_time(0.7, src.uniform(a, k), src.uniform(b, k));
        open += x < 0.7;
        xs.push_back(x);
    }
    CHECK(ks_test_exponential(xs).p_value > 0.01);
    const auto e = EstimateCI::from_proportion(open, 20000);
    CHECK(std::abs(e.estimate - (1 - std::exp(-0.7))) < 3 * e.std_error);
}

TEST_CASE("exponential moment diagnostic")
{
    ExpMomentOptions gamma;
    gamma.dim = 1;
    gamma.scale = 2;
    gamma.flavor = Flavor::East;
    gamma.reps = 200000;
    // tau(2 e1) ~ Gamma(3, 1), so E[e^{tau/2}] = (1 - 1/2)^{-3} = 8.
    const auto g = exp_moment_diagnostic(gamma, RandomSource(4));
    CHECK(g.moment.estimate == doctest::Approx(8.0).epsilon(0.10));

    ExpMomentOptions heavy;
    heavy.dim = 1;
    heavy.scale = 1;
    heavy.flavor = Flavor::East;
    heavy.reps = 100000;
    CHECK(exp_moment_diagnostic(heavy, RandomSource(4)).diverging);
}

TEST_CASE("exponential moment at desk scale sits below the bound")
{
    ExpMomentOptions o;
    o.dim = 2;
    o.scale = 40;
    o.flavor = Flavor::ModifiedEast;
    o.reps = 300;
    const double pc = estimate_pc(2, PercolationKind::Bond, 128, 400, 1e-4, RandomSource(61)).p_c.estimate;
    o.T = threshold_time(pc) + 0.1;
    o.epsilon = 0.2;
    const auto r = exp_moment_diagnostic(o, RandomSource(6));
    REQUIRE(r.bound.has_value());
    CHECK(*r.below_bound);
    CHECK_FALSE(r.diverging);
}

TEST_CASE("Chernoff tail decays in n")
{
    const auto report = chernoff_tail(2, Flavor::ModifiedEast, 0.8, {5, 10, 15, 20}, 2000, RandomSource(9));
    REQUIRE(report.fit.has_value());
    CHECK(report.fit->slope < 0.0);
    CHECK(report.points.front().probability.estimate > report.points.back().probability.estimate);
}
