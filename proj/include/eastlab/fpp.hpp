#pragma once

#include "eastlab/dynamics.hpp"
#include "eastlab/lattice.hpp"
#include "eastlab/random.hpp"
#include "eastlab/stats.hpp"

#include <optional>
#include <vector>

namespace eastlab
{

// Passage times of the p = 0 dynamics started from the all-healthy state.
//
// Object layout follows the simulator: East has one weight per vertex
// (index v, the origin's slot holds Y), ModifiedEast one weight per edge
// (index v * d + axis for the edge into v along axis; entries for edges that
// would leave the box are NaN).
struct PassageField
{
    Flavor flavor = Flavor::East;
    int dim = 1;
    int side = 0;
    // Infection delay of the origin.
    double origin_delay = 0.0;
    // Waiting time of each clock after its tail (or first neighbour) is infected.
    std::vector<double> weights;
    // First-passage (infection) time of every vertex, indexed like Box.
    std::vector<double> times;

    Box box() const { return Box(dim, side); }
    bool has_object(std::size_t object) const;
};

// Oriented first passage percolation on Lambda_L driven by the same clocks as
// the simulator: tau(0) = Y and
//   site:  tau(v) = min_{u in U_v} tau(u) + X(v)
//   bond:  tau(v) = min_{u in U_v} (tau(u) + X(u -> v)).
// Throws std::invalid_argument unless params.p == 0.
PassageField passage_field(const ModelParams& params, const RandomSource& source);
std::vector<double> fpp_times(const ModelParams& params, const RandomSource& source);

struct OpennessField
{
    double threshold = 0.0;
    // 1 open, 0 closed, per weight slot; slots without an object are 0 and
    // excluded by `present`.
    std::vector<std::uint8_t> open;
    std::vector<std::uint8_t> present;

    std::int64_t object_count() const;
    std::int64_t open_count() const;
    double open_fraction() const;
};

// An object is open when its passage time is below T. T = +inf opens everything.
OpennessField decompose_open(const PassageField& field, double T);

// Exp(1) sampled in two stages: open with probability 1 - e^{-T}, then a
// value conditioned below (open) or above (closed) T. `u_state` and `u_value`
// are independent uniforms in (0, 1).
double two_stage_passage_time(double T, double u_state, double u_value);

struct ExpMomentReport
{
    // E[e^{tau(l e*) / l}] with its standard error.
    EstimateCI moment;
    // log of the sample mean, computed by log-sum-exp.
    double log_moment = 0.0;
    // Largest single sample's share of the sum; near 1/n for a light tail.
    double max_share = 0.0;
    bool diverging = false;
    // e^{d beta_T + epsilon} when a threshold was supplied.
    std::optional<double> bound;
    std::optional<bool> below_bound;
};

struct ExpMomentOptions
{
    int dim = 2;
    int scale = 1;
    Flavor flavor = Flavor::ModifiedEast;
    std::int64_t reps = 1000;
    std::optional<double> T;
    double epsilon = 0.0;
    int jobs = 1;
    // Samples whose largest term exceeds this share of the sum are reported as diverging.
    double divergence_share = 0.05;
};

ExpMomentReport exp_moment_diagnostic(const ExpMomentOptions& options, const RandomSource& source);

struct TailPoint
{
    int n = 0;
    EstimateCI probability;
};

struct TailDecayReport
{
    double lambda = 0.0;
    std::vector<TailPoint> points;
    // Fit of log P(tau(n e*) >= lambda n) against n over the points with a positive estimate.
    std::optional<LinearFit> fit;
};

// Empirical P(tau(n e*) >= lambda n) at p = 0 for each n, with the fitted
// exponential decay rate.
TailDecayReport chernoff_tail(int dim, Flavor flavor, double lambda, const std::vector<int>& n_values,
                              std::int64_t reps, const RandomSource& source, int jobs = 1);

} // namespace eastlab
