#include "eastlab/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace eastlab
{

void RunningStats::add(double x)
{
    ++count_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(count_);
    m2_ += delta * (x - mean_);
}

void RunningStats::merge(const RunningStats& other)
{
    if (other.count_ == 0)
        return;
    if (count_ == 0) {
        *this = other;
        return;
    }
    const double n_a = static_cast<double>(count_);
    const double n_b = static_cast<double>(other.count_);
    const double n = n_a + n_b;
    const double delta = other.mean_ - mean_;
    mean_ += delta * n_b / n;
    m2_ += other.m2_ + delta * delta * n_a * n_b / n;
    count_ += other.count_;
}

double RunningStats::variance() const
{
    return count_ > 1 ? m2_ / static_cast<double>(count_ - 1) : 0.0;
}

double RunningStats::stddev() const
{
    return std::sqrt(variance());
}

double RunningStats::standard_error() const
{
    return count_ > 0 ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
}

EstimateCI EstimateCI::from_stats(const RunningStats& s)
{
    EstimateCI e;
    e.estimate = s.mean();
    e.std_error = s.standard_error();
    e.reps = s.count();
    e.lower = e.estimate - kZ95 * e.std_error;
    e.upper = e.estimate + kZ95 * e.std_error;
    return e;
}

EstimateCI EstimateCI::from_proportion(std::int64_t successes, std::int64_t trials)
{
    if (trials <= 0)
        throw std::invalid_argument("proportion needs at least one trial");
    EstimateCI e;
    const double n = static_cast<double>(trials);
    const double q = static_cast<double>(successes) / n;
    e.estimate = q;
    e.std_error = std::sqrt(q * (1.0 - q) / n);
    e.reps = trials;
    // Wilson score interval; stays inside [0, 1] at q = 0 or 1.
    const double z2 = kZ95 * kZ95;
    const double centre = (q + z2 / (2 * n)) / (1 + z2 / n);
    const double half = kZ95 * std::sqrt(q * (1 - q) / n + z2 / (4 * n * n)) / (1 + z2 / n);
    e.lower = std::max(0.0, centre - half);
    e.upper = std::min(1.0, centre + half);
    return e;
}

bool leq_within_ci(const EstimateCI& a, const EstimateCI& b, double z)
{
    return a.estimate - b.estimate <= z * std::hypot(a.std_error, b.std_error);
}

LinearFit fit_line(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("fit_line needs two equally sized samples of length >= 2");
    const double n = static_cast<double>(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx <= 0)
        throw std::invalid_argument("fit_line needs at least two distinct abscissae");

    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - fit.slope * x[i] - fit.intercept;
        rss += r * r;
    }
    fit.residual_rms = std::sqrt(rss / n);
    if (x.size() > 2) {
        const double s2 = rss / (n - 2);
        fit.slope_stderr = std::sqrt(s2 / sxx);
        fit.intercept_stderr = std::sqrt(s2 * (1.0 / n + mx * mx / sxx));
    }
    return fit;
}

double kolmogorov_survival(double lambda)
{
    if (lambda <= 0)
        return 1.0;
    if (lambda < 0.3)
        return 1.0;
    double sum = 0;
    for (int k = 1; k <= 100; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18)
            break;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_exponential(std::vector<double> samples, double rate)
{
    if (samples.empty())
        throw std::invalid_argument("ks test needs samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const double cdf = -std::expm1(-rate * std::max(0.0, samples[i]));
        d = std::max({d, (i + 1) / n - cdf, cdf - i / n});
    }
    const double sqn = std::sqrt(n);
    // Stephens' finite-n correction.
    return {d, kolmogorov_survival((sqn + 0.12 + 0.11 / sqn) * d)};
}

} // namespace eastlab
