#include "eastlab/stats.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace eastlab;

TEST_CASE("running statistics match the two-pass formulas")
{
    const std::vector<double> xs{1.5, -2.0, 3.25, 8.0, 0.0, 4.5};
    RunningStats s;
    for (double x : xs)
        s.add(x);
    double mean = 0.0;
    for (double x : xs)
        mean += x;
    mean /= xs.size();
    double ss = 0.0;
    for (double x : xs)
        ss += (x - mean) * (x - mean);
    CHECK(s.count() == 6);
    CHECK(s.mean() == doctest::Approx(mean).epsilon(1e-14));
    CHECK(s.variance() == doctest::Approx(ss / 5).epsilon(1e-14));
    CHECK(s.standard_error() == doctest::Approx(std::sqrt(ss / 5 / 6)).epsilon(1e-14));
}

TEST_CASE("merging is independent of the split")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> normal(3.0, 2.0);
    std::vector<double> xs(1000);
    for (auto& x : xs)
        x = normal(rng);
    RunningStats all;
    for (double x : xs)
        all.add(x);
    for (std::size_t cut : {0, 1, 333, 999, 1000}) {
        RunningStats a, b;
        for (std::size_t k = 0; k < xs.size(); ++k)
            (k < cut ? a : b).add(xs[k]);
        a.merge(b);
        CHECK(a.count() == all.count());
        CHECK(a.mean() == doctest::Approx(all.mean()).epsilon(1e-12));
        CHECK(a.variance() == doctest::Approx(all.variance()).epsilon(1e-12));
    }
}

TEST_CASE("proportion estimates")
{
    const auto e = EstimateCI::from_proportion(30, 100);
    CHECK(e.estimate == doctest::Approx(0.3));
    CHECK(e.std_error == doctest::Approx(std::sqrt(0.3 * 0.7 / 100)));
    CHECK(e.lower < 0.3);
    CHECK(e.upper > 0.3);
    const auto all = EstimateCI::from_proportion(100, 100);
    CHECK(all.estimate == 1.0);
    CHECK(all.upper == doctest::Approx(1.0));
    CHECK(all.lower < 1.0);
}

TEST_CASE("least squares recovers an exact line")
{
    const std::vector<double> x{1, 2, 3, 4, 5};
    std::vector<double> y;
    for (double v : x)
        y.push_back(2.5 * v - 1.0);
    const auto fit = fit_line(x, y);
    CHECK(fit.slope == doctest::Approx(2.5));
    CHECK(fit.intercept == doctest::Approx(-1.0));
    CHECK(fit.residual_rms == doctest::Approx(0.0).epsilon(1e-12));
    const std::vector<double> flat{2, 2};
    CHECK_THROWS(fit_line(flat, std::vector<double>{1, 3}));
}

TEST_CASE("Kolmogorov-Smirnov test against Exp(1)")
{
    std::mt19937_64 rng(11);
    std::exponential_distribution<double> exp1(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> good(5000), bad(5000);
    for (auto& x : good)
        x = exp1(rng);
    for (auto& x : bad)
        x = unif(rng);
    CHECK(ks_test_exponential(good).p_value > 0.01);
    CHECK(ks_test_exponential(bad).p_value < 1e-6);
    CHECK(kolmogorov_survival(0.0) == doctest::Approx(1.0));
    // Tabulated 5% critical value of the Kolmogorov distribution.
    CHECK(kolmogorov_survival(1.3581) == doctest::Approx(0.05).epsilon(1e-3));
}

TEST_CASE("comparison within confidence")
{
    EstimateCI a, b;
    a.estimate = 1.05;
    a.std_error = 0.02;
    b.estimate = 1.0;
    b.std_error = 0.02;
    CHECK(leq_within_ci(a, b));
    a.estimate = 1.2;
    CHECK_FALSE(leq_within_ci(a, b));
}
