#pragma once

#include "eastlab/dynamics.hpp"
#include "eastlab/random.hpp"
#include "eastlab/stats.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace eastlab
{

using SparseGenerator = Eigen::SparseMatrix<double, Eigen::RowMajor>;

// Generator of the chain on all 2^N configurations of the box. State index
// bit v holds the state of vertex v (1 = healthy). Off-diagonal entries are
// single-site flips at rate c_x(omega) * p (to healthy) or c_x(omega) * (1 - p)
// (to infected); the diagonal is minus the row sum.
struct GeneratorMatrix
{
    ModelParams params;
    int sites = 0;
    std::int64_t states = 0;
    SparseGenerator Q;

    // Product Bernoulli measure pi(omega) = prod p^{omega_x} (1 - p)^{1 - omega_x}.
    Eigen::VectorXd stationary() const;
    // Largest exit rate over states, a valid uniformization rate.
    double max_exit_rate() const;
};

inline constexpr std::int64_t kDefaultStateCap = std::int64_t{1} << 20;

GeneratorMatrix build_generator(const ModelParams& params, std::int64_t state_cap = kDefaultStateCap);

// max |pi(w) q(w, w') - pi(w') q(w', w)| over all pairs.
double detailed_balance_violation(const GeneratorMatrix& generator);
// max_j |(pi Q)_j|.
double stationarity_residual(const GeneratorMatrix& generator);
// max_i |sum_j Q_ij|.
double row_sum_residual(const GeneratorMatrix& generator);

// Propagates row distributions forward in time, rows <- rows * exp(Q dt), by
// uniformization with rate N * (max per-vertex rate) and Poisson tail
// truncation.
class Uniformizer
{
public:
    explicit Uniformizer(const GeneratorMatrix& generator, double tail_mass = 1e-13);

    void advance(Eigen::MatrixXd& rows, double dt);
    // Total Poisson mass dropped so far; bounds the accumulated L1 error per row.
    double truncated_mass() const { return truncated_; }

private:
    SparseGenerator kernel_;
    double rate_;
    double tail_mass_;
    double truncated_ = 0.0;
};

struct TVCurve
{
    std::vector<double> times;
    std::vector<double> values;
    // True when the maximum runs over every initial state; otherwise the
    // curve is a lower bound taken over the candidate set.
    bool exhaustive = true;
    double truncation_error = 0.0;
    std::vector<std::string> flags;

    // First grid time with value <= threshold.
    std::optional<double> first_below(double threshold) const;
    bool non_increasing(double slack = 1e-12) const;
};

struct MixingOptions
{
    std::int64_t state_cap = kDefaultStateCap;
    // Maximise over every initial state below this many states.
    std::int64_t exhaustive_limit = std::int64_t{1} << 12;
};

// Initial states used for the maximum: all of them below the exhaustive
// limit, otherwise {all healthy, all infected, single infection at the far corner}.
std::vector<std::int64_t> initial_states(const GeneratorMatrix& generator, const MixingOptions& options);

// d_L(t) = max_eta ||P_eta(omega_t = .) - pi||_TV on a sorted time grid.
TVCurve tv_curve(const ModelParams& params, std::vector<double> times,
                 const MixingOptions& options = {});

struct MixingTime
{
    double time = 0.0;
    bool exhaustive = true;
    double truncation_error = 0.0;
};

// inf{t : d_L(t) <= threshold}, bisected to relative tolerance 1e-6.
MixingTime t_mix(const ModelParams& params, double threshold = 0.25, const MixingOptions& options = {});

struct CoalescenceOptions
{
    double horizon = 1000.0;
    // Track every initial state when the box has at most this many vertices.
    int exact_vertex_limit = 20;
    // Extra uniformly sampled initial states in the heuristic regime.
    int sampled_states = 16;
};

struct CoalescenceResult
{
    CensoredTime time;
    bool exact = true;
    std::int64_t copies = 0;
};

// Grand coupling: every tracked initial state is driven by the same clocks
// and coins; returns the first time all copies agree.
CoalescenceResult coalescence_time(const ModelParams& params, const RandomSource& source,
                                   const CoalescenceOptions& options = {});

struct CoalescenceSummary
{
    EstimateCI mean; // over uncensored replicas
    std::vector<double> times;
    std::int64_t censored = 0;
    bool exact = true;

    double quantile(double q) const;
    // Empirical P(coalesced by t), censored replicas counted as not coalesced.
    double coalesced_by(double t) const;
};

CoalescenceSummary coalescence_statistics(const ModelParams& params, std::int64_t reps,
                                          const RandomSource& source,
                                          const CoalescenceOptions& options = {}, int jobs = 1);

struct RhoEstimate
{
    double p = 0.0;
    // Slope of E[tau(n)] = rho n + c, averaged over per-replica fits.
    EstimateCI rho;
    EstimateCI intercept;
    std::vector<int> n_values;
    std::vector<EstimateCI> mean_times;
    std::int64_t censored = 0;
    bool nonlinear = false;
    std::vector<std::string> flags;
};

std::vector<int> default_rho_scales();

// Inverse front speed of the one-dimensional chain started all healthy.
RhoEstimate estimate_rho(double p, const std::vector<int>& n_values, std::int64_t reps,
                         const RandomSource& source, int jobs = 1);

struct FrontProfile
{
    int n = 0;
    // tau(n e*) / n and tau(n e_1) / n.
    EstimateCI diagonal;
    EstimateCI axis;
    std::int64_t censored_diagonal = 0;
    std::int64_t censored_axis = 0;
    // Frequency of tau(n e*) >= rho |x|_inf + d (|x|_inf v L)^{2/3}, when rho was given.
    std::optional<EstimateCI> slow_event;
    std::optional<double> slow_threshold;
};

struct FrontOptions
{
    int dim = 2;
    Flavor flavor = Flavor::East;
    double p = 0.0;
    int n = 50;
    std::int64_t reps = 100;
    std::optional<double> rho;
    // Box side entering the slow-event threshold; defaults to n.
    std::optional<int> side;
    int jobs = 1;
};

// Diagonal vs axis infection times from the all-healthy state. The axis time
// is computed on the one-dimensional projection, which realises the same path.
FrontProfile front_profile(const FrontOptions& options, const RandomSource& source);

} // namespace eastlab
