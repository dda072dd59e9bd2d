#include "eastlab/constants.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace eastlab
{

namespace
{

// sum_{k>=2} p^{k-1} / (k (k-1)), the cancellation-free form of beta_c.
double beta_c_series(double p)
{
    double sum = 0.0;
    double power = 1.0;
    for (int k = 2; k < 200; ++k) {
        power *= p;
        const double term = power / (static_cast<double>(k) * (k - 1));
        sum += term;
        if (term < 1e-18 * sum)
            break;
    }
    return sum;
}

// 1 - e^{-T}(1 + T) = sum_{k>=2} (-1)^k T^k / (k (k-2)!).
double numerator_series(double T)
{
    double sum = 0.0;
    double term = T * T / 2.0; // T^k / k! at k = 2
    for (int k = 2; k < 60; ++k) {
        const double contribution = (k % 2 == 0 ? 1.0 : -1.0) * term * (k - 1);
        sum += contribution;
        if (std::abs(contribution) < 1e-18 * std::abs(sum))
            break;
        term *= T / (k + 1);
    }
    return sum;
}

} // namespace

double beta_c(double p_c)
{
    if (!(p_c > 0.0 && p_c < 1.0))
        throw std::invalid_argument("beta_c: p_c must lie in (0, 1)");
    if (p_c < 0.1)
        return beta_c_series(p_c);
    return 1.0 + (1.0 - p_c) * std::log1p(-p_c) / p_c;
}

double threshold_time(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("threshold_time: p must lie in (0, 1)");
    return -std::log1p(-p);
}

double beta_T(double T)
{
    if (!(T > 0.0))
        throw std::invalid_argument("beta_T: T must be positive");
    const double open = -std::expm1(-T);
    if (T < 0.1)
        return numerator_series(T) / open;
    return (open - T * std::exp(-T)) / open;
}

double alpha_T(double T, double t)
{
    if (!(T > 0.0))
        throw std::invalid_argument("alpha_T: T must be positive");
    if (!(t >= 0.0 && t <= 1.0))
        throw std::invalid_argument("alpha_T: t must lie in [0, 1]");
    const double open = -std::expm1(-T);
    const double s = 1.0 - t;
    if (s == 0.0)
        return T / open;
    // (e^T - e^{tT}) / ((1 - t)(e^T - 1)) with e^T divided out.
    return -std::expm1(-s * T) / (s * open);
}

double chernoff_lambda(int dim, double beta_t)
{
    return (1.0 + dim * beta_t) / 2.0;
}

double cutoff_center(double rho, int dim, double side)
{
    return rho * side + dim * cutoff_window(side);
}

double cutoff_window(double side)
{
    return std::pow(side, 2.0 / 3.0);
}

ConstantsReport condition_report(const ConditionInputs& in)
{
    if (in.dim < 1)
        throw std::invalid_argument("condition_report: dimension must be >= 1");
    ConstantsReport r;
    r.dim = in.dim;
    r.p_c = in.p_c;
    r.p_c_source = in.p_c_source;
    r.T_c = threshold_time(in.p_c);
    r.beta_c = beta_c(in.p_c);
    r.d_beta_c = in.dim * r.beta_c;
    r.condition_holds = r.d_beta_c < 1.0;
    r.condition_margin = 1.0 - r.d_beta_c;

    if (in.T) {
        r.T = in.T;
        r.beta_T = beta_T(*in.T);
        r.d_beta_T = in.dim * *r.beta_T;
        if (*in.T <= r.T_c) {
            r.lambda_note = "T must exceed T_c for the open-path construction; lambda omitted";
        } else if (*r.d_beta_T >= 1.0) {
            r.lambda_note = "d beta_T >= 1, so lambda >= 1; lambda omitted";
        } else {
            r.lambda = chernoff_lambda(in.dim, *r.beta_T);
        }
    }

    if (in.side) {
        if (*in.side < 0)
            throw std::invalid_argument("condition_report: L must be >= 0");
        r.side = in.side;
        r.window = cutoff_window(*in.side);
        if (in.rho) {
            r.rho = in.rho;
            r.T_L = cutoff_center(*in.rho, in.dim, *in.side);
        }
    }
    return r;
}

} // namespace eastlab
