#pragma once

#include <optional>
#include <string>

namespace eastlab
{

// 1 + (1 - p) log(1 - p) / p: mean of an Exp(1) passage time conditioned to
// be below the threshold time at which the open probability equals p.
// Throws std::invalid_argument unless 0 < p < 1.
double beta_c(double p_c);

// Threshold time T with 1 - e^{-T} = p.
double threshold_time(double p);

// E[X | X < T] for X ~ Exp(1).
double beta_T(double T);

// E[e^{tX} | X <= T] for X ~ Exp(1), 0 <= t <= 1 (t = 1 by continuity).
double alpha_T(double T, double t);

// (1 + d beta_T) / 2.
double chernoff_lambda(int dim, double beta_t);

// T_L = rho L + d L^{2/3}.
double cutoff_center(double rho, int dim, double side);
// L^{2/3}.
double cutoff_window(double side);

struct ConstantsReport
{
    int dim = 2;
    double p_c = 0.0;
    std::string p_c_source = "user";
    double T_c = 0.0;
    double beta_c = 0.0;
    double d_beta_c = 0.0;
    bool condition_holds = false;
    double condition_margin = 0.0;

    std::optional<double> T;
    std::optional<double> beta_T;
    std::optional<double> d_beta_T;
    std::optional<double> lambda;
    std::string lambda_note;

    std::optional<double> rho;
    std::optional<int> side;
    std::optional<double> T_L;
    std::optional<double> window;
};

struct ConditionInputs
{
    int dim = 2;
    double p_c = 0.0;
    std::string p_c_source = "user";
    std::optional<double> T;
    std::optional<double> rho;
    std::optional<int> side;
};

ConstantsReport condition_report(const ConditionInputs& inputs);

} // namespace eastlab
