#include "eastlab/constants.hpp"

#include <doctest.h>
#include <stdexcept>

#include <cmath>

using namespace eastlab;

// Reference values below were evaluated at 40 significant digits.

TEST_CASE("beta_c")
{
    CHECK(beta_c(0.5) == doctest::Approx(1.0 + std::log(0.5)).epsilon(1e-15));
    CHECK(beta_c(0.5) == doctest::Approx(0.306853).epsilon(1e-6));
    CHECK(beta_c(0.05) == doctest::Approx(0.02542740663653986490).epsilon(1e-14));
    CHECK(beta_c(1e-6) == doctest::Approx(5.000001666667500e-7).epsilon(1e-13));
    CHECK(beta_c(1e-12) / 1e-12 == doctest::Approx(0.5).epsilon(1e-10));
    CHECK(beta_c(1.0 - 1e-12) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK_THROWS_AS(beta_c(0.0), std::invalid_argument);
    CHECK_THROWS_AS(beta_c(1.0), std::invalid_argument);
    CHECK_THROWS_AS(beta_c(std::nan("")), std::invalid_argument);
}

TEST_CASE("beta_c is strictly increasing")
{
    double previous = 0.0;
    for (int k = 1; k < 1000; ++k) {
        const double b = beta_c(k / 1000.0);
        CHECK(b > previous);
        CHECK(b < 1.0);
        previous = b;
    }
    // Continuity across the switch to the series form.
    CHECK(beta_c(std::nextafter(0.1, 0.0)) == doctest::Approx(beta_c(0.1)).epsilon(1e-14));
}

TEST_CASE("beta_T at the threshold time equals beta_c")
{
    for (int k = 1; k <= 9; ++k) {
        const double p = 0.1 * k;
        CHECK(std::abs(beta_T(threshold_time(p)) - beta_c(p)) < 1e-12);
    }
    CHECK(threshold_time(0.5) == doctest::Approx(std::log(2.0)));
}

TEST_CASE("beta_T values and limits")
{
    CHECK(beta_T(0.01) == doctest::Approx(0.004991666680555522487).epsilon(1e-13));
    CHECK(beta_T(1e-5) == doctest::Approx(4.999991666666666681e-6).epsilon(1e-13));
    CHECK(beta_T(50.0) == doctest::Approx(1.0).epsilon(1e-12));
    double previous = 0.0;
    for (int k = 1; k <= 400; ++k) {
        const double b = beta_T(0.05 * k);
        CHECK(b > previous);
        previous = b;
    }
    CHECK(beta_T(std::nextafter(0.1, 0.0)) == doctest::Approx(beta_T(0.1)).epsilon(1e-14));
    CHECK_THROWS_AS(beta_T(0.0), std::invalid_argument);
}

TEST_CASE("alpha_T")
{
    CHECK(alpha_T(2.0, 0.5) == doctest::Approx(1.46211715726000975850).epsilon(1e-13));
    CHECK(alpha_T(3.0, 0.999999) == doctest::Approx(3.157182353697869422).epsilon(1e-9));
    for (double T : {0.05, 0.5, 1.0, 3.0, 10.0}) {
        CHECK(alpha_T(T, 0.0) == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(alpha_T(T, 1.0) == doctest::Approx(T * std::exp(T) / std::expm1(T)).epsilon(1e-14));
        // Second-order one-sided difference at t = 0, since alpha_T is defined only for t >= 0.
        const double h = 1e-4;
        const double slope = (-3.0 * alpha_T(T, 0.0) + 4.0 * alpha_T(T, h) - alpha_T(T, 2 * h)) / (2 * h);
        CHECK(std::abs(slope - beta_T(T)) < 1e-6);
        for (int k = 0; k < 100; ++k) {
            const double t = k / 100.0;
            CHECK(alpha_T(T, t) >= 1.0 + beta_T(T) * t - 1e-15);
        }
    }
    CHECK_THROWS_AS(alpha_T(1.0, 1.5), std::invalid_argument);
    CHECK_THROWS_AS(alpha_T(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("lambda and the condition report")
{
    CHECK(chernoff_lambda(2, 0.43) == doctest::Approx(0.93));
    for (double db : {0.2, 0.86, 0.999, 1.0, 1.2})
        CHECK((chernoff_lambda(1, db) < 1.0) == (db < 1.0));

    const auto r = condition_report({2, 0.5, "user", std::nullopt, 1.1, 40});
    CHECK(r.beta_c == doctest::Approx(0.306853).epsilon(1e-6));
    CHECK(r.condition_holds);
    CHECK(r.condition_margin == doctest::Approx(1.0 - 2 * r.beta_c));
    CHECK(*r.T_L == doctest::Approx(1.1 * 40 + 2 * std::pow(40.0, 2.0 / 3.0)));
    CHECK(*r.window == doctest::Approx(std::pow(40.0, 2.0 / 3.0)));
    CHECK_FALSE(r.lambda.has_value());

    const auto low = condition_report({2, 0.6, "estimated", 0.5, std::nullopt, std::nullopt});
    CHECK_FALSE(low.lambda.has_value());
    CHECK_FALSE(low.lambda_note.empty());

    const double T = threshold_time(0.6) + 0.1;
    const auto high = condition_report({2, 0.6, "estimated", T, std::nullopt, std::nullopt});
    REQUIRE(high.lambda.has_value());
    CHECK(*high.lambda == doctest::Approx((1 + 2 * beta_T(T)) / 2));
    CHECK(*high.lambda < 1.0);
}
