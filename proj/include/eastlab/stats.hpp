#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace eastlab
{

// Two-sided 95% normal quantile.
inline constexpr double kZ95 = 1.959963984540054;

// Count / mean / M2 accumulator with an associative merge.
class RunningStats
{
public:
    void add(double x);
    void merge(const RunningStats& other);

    std::int64_t count() const { return count_; }
    double mean() const { return mean_; }
    double variance() const;
    double stddev() const;
    double standard_error() const;

private:
    std::int64_t count_ = 0;
    double mean_ = 0.0;
    double m2_ = 0.0;
};

// Monte Carlo point estimate with its standard error.
struct EstimateCI
{
    double estimate = 0.0;
    double std_error = 0.0;
    std::int64_t reps = 0;
    double lower = 0.0;
    double upper = 0.0;
    // Free-form warnings (censoring, instability, finite-size caveats).
    std::vector<std::string> flags;

    static EstimateCI from_stats(const RunningStats& s);
    static EstimateCI from_proportion(std::int64_t successes, std::int64_t trials);

    bool flagged() const { return !flags.empty(); }
};

// a <= b up to z combined standard errors.
bool leq_within_ci(const EstimateCI& a, const EstimateCI& b, double z = kZ95);

struct LinearFit
{
    double slope = 0.0;
    double intercept = 0.0;
    double slope_stderr = 0.0;
    double intercept_stderr = 0.0;
    double residual_rms = 0.0;
};

// Ordinary least squares y = slope * x + intercept. Needs at least two distinct x.
LinearFit fit_line(std::span<const double> x, std::span<const double> y);

// Asymptotic Kolmogorov distribution: P(sqrt(n) D > lambda).
double kolmogorov_survival(double lambda);

struct KsResult
{
    double statistic = 0.0;
    double p_value = 0.0;
};

// One-sample Kolmogorov-Smirnov test of `samples` against Exp(rate).
KsResult ks_test_exponential(std::vector<double> samples, double rate = 1.0);

} // namespace eastlab
