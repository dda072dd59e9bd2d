#include "eastlab/mixing.hpp"

#include <doctest.h>
#include <stdexcept>

#include <cmath>
#include <map>

using namespace eastlab;

namespace
{

ModelParams model(int d, int L, double p, Flavor flavor = Flavor::East)
{
    ModelParams m;
    m.dim = d;
    m.side = L;
    m.p = p;
    m.flavor = flavor;
    return m;
}

// Constraint read directly off the bit pattern, independent of transition_rate.
int brute_rate(const ModelParams& m, std::int64_t state, VertexIndex v)
{
    const Box box = m.box();
    if (v == 0)
        return 1;
    int infected = 0;
    for (int i = 0; i < m.dim; ++i) {
        const VertexIndex u = box.predecessor(v, i);
        if (u >= 0 && ((state >> u) & 1) == 0)
            ++infected;
    }
    return m.flavor == Flavor::East ? (infected > 0 ? 1 : 0) : infected;
}

} // namespace

TEST_CASE("single-site generator")
{
    const auto g = build_generator(model(1, 0, 0.3));
    CHECK(g.states == 2);
    const Eigen::MatrixXd Q(g.Q);
    CHECK(Q(0, 1) == doctest::Approx(0.3));
    CHECK(Q(1, 0) == doctest::Approx(0.7));
    CHECK(Q(0, 0) == doctest::Approx(-0.3));
    CHECK(Q(1, 1) == doctest::Approx(-0.7));
    CHECK(g.stationary()(1) == doctest::Approx(0.3));
}

TEST_CASE("generator entries match the constraint")
{
    for (auto flavor : {Flavor::East, Flavor::ModifiedEast})
        for (auto [d, L] : {std::pair{1, 4}, std::pair{2, 2}}) {
            const auto m = model(d, L, 0.35, flavor);
            const auto g = build_generator(m);
            const Eigen::MatrixXd Q(g.Q);
            for (std::int64_t s = 0; s < g.states; ++s)
                for (VertexIndex v = 0; v < g.sites; ++v) {
                    const std::int64_t t = s ^ (std::int64_t{1} << v);
                    const double target = ((t >> v) & 1) ? m.p : 1 - m.p;
                    REQUIRE(Q(s, t) == doctest::Approx(brute_rate(m, s, v) * target));
                }
        }
}

TEST_CASE("healthy predecessors freeze a site")
{
    const auto g = build_generator(model(1, 2, 0.5));
    const Eigen::MatrixXd Q(g.Q);
    // Sites 0 and 1 healthy, site 2 infected: site 2 cannot heal.
    const std::int64_t s = 0b011;
    CHECK(Q(s, s | 0b100) == 0.0);
    CHECK(Q(s, s & ~std::int64_t{0b001}) == doctest::Approx(0.5));
}

TEST_CASE("reversibility and conservation")
{
    for (auto flavor : {Flavor::East, Flavor::ModifiedEast})
        for (double p : {0.2, 0.5, 0.8})
            for (auto [d, L] : {std::pair{2, 1}, std::pair{1, 3}, std::pair{3, 1}}) {
                const auto g = build_generator(model(d, L, p, flavor));
                CHECK(detailed_balance_violation(g) < 1e-12);
                CHECK(stationarity_residual(g) < 1e-12);
                CHECK(row_sum_residual(g) < 1e-12);
            }
}

TEST_CASE("flavors coincide in one dimension")
{
    for (int L = 0; L <= 6; ++L) {
        const auto a = build_generator(model(1, L, 0.4, Flavor::East));
        const auto b = build_generator(model(1, L, 0.4, Flavor::ModifiedEast));
        CHECK((Eigen::MatrixXd(a.Q) - Eigen::MatrixXd(b.Q)).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("state cap")
{
    CHECK_THROWS_AS(build_generator(model(2, 4, 0.5)), std::invalid_argument);
    CHECK_THROWS_AS(build_generator(model(1, 10, 0.5), 1 << 10), std::invalid_argument);
    CHECK_NOTHROW(build_generator(model(1, 9, 0.5), 1 << 10));
}

TEST_CASE("uniformization matches the dense exponential")
{
    const auto g = build_generator(model(2, 1, 0.3));
    Eigen::MatrixXd rows = Eigen::MatrixXd::Identity(g.states, g.states);
    Uniformizer u(g);
    u.advance(rows, 2.5);
    // Taylor series of exp(Q t) with scaling and squaring.
    Eigen::MatrixXd A = Eigen::MatrixXd(g.Q) * (2.5 / 64);
    Eigen::MatrixXd E = Eigen::MatrixXd::Identity(g.states, g.states);
    Eigen::MatrixXd term = E;
    for (int k = 1; k < 30; ++k) {
        term = term * A / k;
        E += term;
    }
    for (int k = 0; k < 6; ++k)
        E = E * E;
    CHECK((rows - E).cwiseAbs().maxCoeff() < 1e-10);
    CHECK(u.truncated_mass() < 1e-11);
}

TEST_CASE("closed form for a single site")
{
    for (int d = 1; d <= 3; ++d)
        for (double p : {0.1, 0.5, 0.75}) {
            std::vector<double> times;
            for (int k = 0; k <= 20; ++k)
                times.push_back(0.25 * k);
            const auto curve = tv_curve(model(d, 0, p), times);
            CHECK(curve.exhaustive);
            for (std::size_t k = 0; k < times.size(); ++k)
                CHECK(curve.values[k] == doctest::Approx(std::exp(-times[k]) * std::max(p, 1 - p)).epsilon(1e-9));
            CHECK(t_mix(model(d, 0, p)).time == doctest::Approx(std::log(4 * std::max(p, 1 - p))).epsilon(1e-5));
        }
}

TEST_CASE("distance curves are non-increasing")
{
    std::vector<double> times;
    for (int k = 0; k <= 40; ++k)
        times.push_back(0.5 * k);
    for (auto [d, L] : {std::pair{1, 3}, std::pair{2, 1}, std::pair{2, 2}, std::pair{1, 8}})
        for (auto flavor : {Flavor::East, Flavor::ModifiedEast}) {
            const auto curve = tv_curve(model(d, L, 0.4, flavor), times);
            CHECK(curve.non_increasing());
        }
}

TEST_CASE("mixing slows with size and dimension")
{
    const double base = t_mix(model(1, 0, 0.5)).time;
    const double line = t_mix(model(1, 3, 0.5)).time;
    const double square = t_mix(model(2, 3, 0.5)).time;
    CHECK(line > base);
    CHECK(square >= line);
}

TEST_CASE("candidate set is a lower bound on the exhaustive maximum")
{
    const auto m = model(2, 2, 0.3);
    MixingOptions restricted;
    restricted.exhaustive_limit = 2;
    const std::vector<double> times{0.5, 2.0, 5.0};
    const auto full = tv_curve(m, times);
    const auto partial = tv_curve(m, times, restricted);
    CHECK_FALSE(partial.exhaustive);
    for (std::size_t k = 0; k < times.size(); ++k)
        CHECK(partial.values[k] <= full.values[k] + 1e-12);
}

TEST_CASE("coalescence of a single site")
{
    const auto s = coalescence_statistics(model(2, 0, 0.3), 4000, RandomSource(4));
    CHECK(s.exact);
    CHECK(s.censored == 0);
    CHECK(std::abs(s.mean.estimate - 1.0) < 3 * s.mean.std_error);
}

TEST_CASE("coalescence time of two sites matches the set chain")
{
    // Grand coupling on {0, 1}: the origin rings at rate 1 and every copy
    // takes the shared coin; site 1 rings at rate 1 and the copies whose
    // origin is infected take the coin. Track the set of occupied states.
    const double p = 0.5;
    std::map<int, int> index;
    std::vector<int> sets;
    for (int set = 1; set < 16; ++set)
        if (__builtin_popcount(set) > 1) {
            index[set] = static_cast<int>(sets.size());
            sets.push_back(set);
        }
    const int n = static_cast<int>(sets.size());
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd b = Eigen::VectorXd::Ones(n);
    auto image = [](int set, auto map) {
        int out = 0;
        for (int s = 0; s < 4; ++s)
            if ((set >> s) & 1)
                out |= 1 << map(s);
        return out;
    };
    for (int i = 0; i < n; ++i) {
        const int set = sets[i];
        A(i, i) += 2.0;
        for (int coin = 0; coin <= 1; ++coin) {
            const double weight = coin ? p : 1 - p;
            const int origin = image(set, [&](int s) { return (s & ~1) | coin; });
            const int second = image(set, [&](int s) { return (s & 1) ? s : ((s & ~2) | (coin << 1)); });
            for (int next : {origin, second})
                if (__builtin_popcount(next) > 1)
                    A(i, index[next]) -= weight;
        }
    }
    const Eigen::VectorXd expected = A.partialPivLu().solve(b);
    const auto s = coalescence_statistics(model(1, 1, p), 20000, RandomSource(11));
    CHECK(s.exact);
    CHECK(std::abs(s.mean.estimate - expected(index[15])) < 3.5 * s.mean.std_error);
}

TEST_CASE("coupling inequality")
{
    const auto m = model(1, 3, 0.4);
    const std::vector<double> times{1.0, 2.0, 4.0, 8.0};
    const auto curve = tv_curve(m, times);
    const auto s = coalescence_statistics(m, 3000, RandomSource(12));
    for (std::size_t k = 0; k < times.size(); ++k) {
        const double q = 1.0 - s.coalesced_by(times[k]);
        const double se = std::sqrt(std::max(q * (1 - q), 1e-4) / 3000);
        CHECK(q >= curve.values[k] - 3 * se);
    }
}

TEST_CASE("coalescence by the mixing time in two dimensions" * doctest::may_fail())
{
    const auto m = model(2, 3, 0.5);
    const double t = t_mix(m).time;
    const auto s = coalescence_statistics(m, 200, RandomSource(13));
    CHECK(s.coalesced_by(t) >= 0.5);
}

TEST_CASE("front speed at p = 0")
{
    const auto r = estimate_rho(0.0, {50, 100, 200}, 100, RandomSource(14));
    CHECK(r.rho.lower <= 1.0);
    CHECK(r.rho.upper >= 1.0);
    CHECK(r.censored == 0);

    FrontOptions f;
    f.p = 0.0;
    f.n = 100;
    f.reps = 50;
    const auto profile = front_profile(f, RandomSource(15));
    CHECK(profile.diagonal.estimate < profile.axis.estimate);
    CHECK(std::abs(profile.axis.estimate - 1.0) < 0.1);
}
