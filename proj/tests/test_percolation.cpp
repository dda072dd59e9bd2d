#include "eastlab/percolation.hpp"

#include <doctest.h>
#include <stdexcept>

#include <cmath>

using namespace eastlab;

namespace
{

Vertex v2(int a, int b)
{
    Vertex x(2);
    x << a, b;
    return x;
}

PercSample with_p(PercSample s, double p)
{
    s.p = p;
    return s;
}

} // namespace

TEST_CASE("crossing at the extremes")
{
    const Box box(2, 6);
    for (auto kind : {PercolationKind::Bond, PercolationKind::Site}) {
        const auto sample = sample_percolation(kind, 0.0, box, RandomSource(1));
        const auto full = with_p(sample, 1.0);
        CHECK(crossing(full, {v2(1, 1)}, {v2(4, 5)}));
        CHECK_FALSE(crossing(full, {v2(3, 1)}, {v2(1, 5)}));
        CHECK_FALSE(crossing(sample, {v2(1, 1)}, {v2(4, 5)}));
        CHECK(crossing(sample, {v2(1, 1), v2(2, 2)}, {v2(2, 2)}));
        CHECK(crossing_threshold(sample, {v2(2, 2)}, {v2(2, 2)}) < 0.0);
        CHECK(std::isinf(crossing_threshold(sample, {v2(3, 1)}, {v2(1, 5)})));
    }
    CHECK_THROWS_AS(sample_percolation(PercolationKind::Bond, 1.5, box, RandomSource(1)), std::invalid_argument);
    CHECK_THROWS_AS(crossing(sample_percolation(PercolationKind::Bond, 0.5, box, RandomSource(1)), {v2(7, 0)},
                             {v2(1, 1)}),
                    std::invalid_argument);
}

TEST_CASE("reachability sweep agrees with the bottleneck threshold")
{
    for (auto kind : {PercolationKind::Bond, PercolationKind::Site})
        for (int d : {2, 3}) {
            const Box box(d, d == 2 ? 20 : 8);
            const auto sources = hyperplane_in_box(1, box);
            const auto targets = hyperplane_in_box(d * box.side_length() - 2, box);
            for (int s = 0; s < 25; ++s) {
                const auto sample = sample_percolation(kind, 0.0, box, RandomSource(2).replica(s));
                const double threshold = crossing_threshold(sample, sources, targets);
                for (int k = 0; k <= 40; ++k) {
                    const double p = k / 40.0;
                    REQUIRE(crossing(with_p(sample, p), sources, targets) == (threshold < p));
                }
                // Right at the threshold the path is still blocked; just above it is open.
                if (threshold > 0.0 && threshold < 1.0) {
                    CHECK_FALSE(crossing(with_p(sample, threshold), sources, targets));
                    CHECK(crossing(with_p(sample, std::nextafter(threshold, 2.0)), sources, targets));
                }
            }
        }
}

TEST_CASE("crossing is monotone in p on a fixed sample")
{
    const Box box(2, 30);
    const auto sample = sample_percolation(PercolationKind::Site, 0.0, box, RandomSource(3));
    const auto A = hyperplane_in_box(0, box);
    const auto B = hyperplane_in_box(60, box);
    bool seen = false;
    for (int k = 0; k <= 100; ++k) {
        const bool now = crossing(with_p(sample, k / 100.0), A, B);
        CHECK((now || !seen));
        seen = seen || now;
    }
    CHECK(seen);
}

TEST_CASE("crossing probability at the extremes and monotone on a grid")
{
    CHECK(crossing_probability(2, PercolationKind::Bond, 1.0, 20, 0.2, 50, RandomSource(1)).estimate == 1.0);
    CHECK(crossing_probability(2, PercolationKind::Bond, 0.0, 20, 0.2, 50, RandomSource(1)).estimate == 0.0);
    CHECK(crossing_probability(2, PercolationKind::Site, 1.0, 20, 0.2, 50, RandomSource(1)).estimate == 1.0);
    std::vector<EstimateCI> curve;
    for (int k = 0; k <= 10; ++k)
        curve.push_back(crossing_probability(2, PercolationKind::Bond, 0.5 + 0.03 * k, 48, 0.2, 300,
                                             RandomSource(5).replica(k)));
    for (std::size_t k = 0; k + 1 < curve.size(); ++k)
        CHECK(leq_within_ci(curve[k], curve[k + 1]));
    CHECK(curve.front().estimate < 0.2);
    CHECK(curve.back().estimate > 0.8);
}

TEST_CASE("slab geometry")
{
    const auto g = slab_geometry(2, 10, 0.2);
    CHECK(g.box.side_length() == 14);
    CHECK(g.sources.size() == 5);
    for (std::size_t k = 0; k < g.sources.size(); ++k) {
        CHECK(g.sources[k].sum() == 4);
        CHECK(g.targets[k] == g.sources[k] + diagonal(2, 10));
        CHECK(g.box.contains(g.targets[k]));
    }
    CHECK_THROWS_AS(slab_geometry(2, 10, 1.0), std::invalid_argument);
}

TEST_CASE("open path between hyperplane slices")
{
    const Box box(2, 40);
    const auto sample = sample_percolation(PercolationKind::Bond, 0.0, box, RandomSource(7));
    CHECK(slab_crossing_open_path(with_p(sample, 1.0), 40, 0.1));
    CHECK_FALSE(slab_crossing_open_path(sample, 40, 0.1));
    CHECK_THROWS_AS(slab_crossing_open_path(sample, 40, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(slab_crossing_open_path(sample, 39, 0.1), std::invalid_argument);
}

TEST_CASE("open path above the threshold at desk scale")
{
    const double pc = estimate_pc(2, PercolationKind::Bond, 128, 400, 1e-4, RandomSource(61)).p_c.estimate;
    const double p = pc + 0.05;
    const Box box(2, 100);
    std::int64_t hits = 0;
    for (int r = 0; r < 500; ++r)
        hits += slab_crossing_open_path(sample_percolation(PercolationKind::Bond, p, box, RandomSource(8).replica(r)),
                                        100, 0.1);
    CHECK(hits >= 450);
}

TEST_CASE("finite-size thresholds")
{
    const auto bond = estimate_pc(2, PercolationKind::Bond, 32, 400, 1e-4, RandomSource(9));
    const auto site = estimate_pc(2, PercolationKind::Site, 32, 400, 1e-4, RandomSource(9));
    CHECK(bond.p_c.lower <= bond.p_c.estimate);
    CHECK(bond.p_c.estimate <= bond.p_c.upper);
    CHECK(bond.p_c.flagged());
    CHECK(leq_within_ci(bond.p_c, site.p_c));
    CHECK(bond.p_c.estimate < site.p_c.estimate);
    CHECK_THROWS_AS(estimate_pc(2, PercolationKind::Bond, 32, 400, 0.0, RandomSource(9)), std::invalid_argument);

    const auto scaling = estimate_pc_scaling(2, PercolationKind::Bond, {32, 64}, 200, 1e-4, RandomSource(1));
    CHECK(scaling.estimates.size() == 2);
    CHECK(scaling.last_width > 0.0);
}

TEST_CASE("hyperplane seed sets")
{
    const auto seeds = hyperplane_seed_set(3, 5);
    CHECK(seeds.size() == 5);
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        CHECK(seeds[i].sum() == 0);
        for (std::size_t j = 0; j < i; ++j)
            CHECK(seeds[i] != seeds[j]);
    }
    CHECK_THROWS_AS(hyperplane_seed_set(1, 2), std::invalid_argument);
}

TEST_CASE("truncated survival")
{
    CHECK(survival_probability(2, PercolationKind::Bond, 1.0, 3, 20, 20, RandomSource(1)).estimate == 1.0);
    CHECK(survival_probability(2, PercolationKind::Bond, 0.0, 3, 20, 20, RandomSource(1)).estimate == 0.0);

    const double pc = estimate_pc(2, PercolationKind::Bond, 128, 400, 1e-4, RandomSource(61)).p_c.estimate;
    std::vector<double> sizes, log_extinction;
    for (int a : {1, 2, 4, 8}) {
        const auto e = survival_probability(2, PercolationKind::Bond, pc + 0.1, a, 200, 2000, RandomSource(2));
        if (e.estimate < 1.0) {
            sizes.push_back(a);
            log_extinction.push_back(std::log(1.0 - e.estimate));
        }
    }
    REQUIRE(sizes.size() >= 2);
    CHECK(fit_line(sizes, log_extinction).slope < 0.0);
}
