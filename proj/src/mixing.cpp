#include "eastlab/mixing.hpp"

#include "eastlab/parallel.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <queue>
#include <stdexcept>
#include <string>

namespace eastlab
{

namespace
{

int max_vertex_rate(const ModelParams& params)
{
    return params.flavor == Flavor::East ? 1 : params.dim;
}

// c_x for the state encoded in `bits` (bit v set <=> v healthy).
int rate_in_state(const Box& box, Flavor flavor, std::uint64_t bits, VertexIndex v)
{
    if (v == 0)
        return 1;
    int infected = 0;
    for (int i = 0; i < box.dim(); ++i) {
        const VertexIndex u = box.predecessor(v, i);
        if (u >= 0 && ((bits >> u) & 1U) == 0)
            ++infected;
    }
    return flavor == Flavor::East ? std::min(infected, 1) : infected;
}

double total_variation(const Eigen::Ref<const Eigen::RowVectorXd>& row, const Eigen::RowVectorXd& pi)
{
    return 0.5 * (row - pi).lpNorm<1>();
}

double max_total_variation(const Eigen::MatrixXd& rows, const Eigen::RowVectorXd& pi)
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < rows.rows(); ++i)
        worst = std::max(worst, total_variation(rows.row(i), pi));
    return worst;
}

Eigen::MatrixXd point_masses(const std::vector<std::int64_t>& states, std::int64_t size)
{
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(states.size()), size);
    for (std::size_t k = 0; k < states.size(); ++k)
        rows(static_cast<Eigen::Index>(k), states[k]) = 1.0;
    return rows;
}

} // namespace

Eigen::VectorXd GeneratorMatrix::stationary() const
{
    Eigen::VectorXd pi(states);
    const double p = params.p;
    for (std::int64_t s = 0; s < states; ++s) {
        const int healthy = std::popcount(static_cast<std::uint64_t>(s));
        pi[s] = std::pow(p, healthy) * std::pow(1.0 - p, sites - healthy);
    }
    return pi;
}

double GeneratorMatrix::max_exit_rate() const
{
    double worst = 0.0;
    for (Eigen::Index i = 0; i < Q.outerSize(); ++i)
        worst = std::max(worst, -Q.coeff(i, i));
    return worst;
}

GeneratorMatrix build_generator(const ModelParams& params, std::int64_t state_cap)
{
    params.validate();
    const Box box = params.box();
    if (box.size() > 62 || (std::int64_t{1} << box.size()) > state_cap)
        throw std::invalid_argument("state space 2^" + std::to_string(box.size()) +
                                    " exceeds the cap of " + std::to_string(state_cap) +
                                    " states; reduce L or d, or raise the cap");

    GeneratorMatrix g;
    g.params = params;
    g.sites = static_cast<int>(box.size());
    g.states = std::int64_t{1} << box.size();

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(g.states * (g.sites + 1)));
    for (std::int64_t s = 0; s < g.states; ++s) {
        double exit = 0.0;
        for (VertexIndex v = 0; v < box.size(); ++v) {
            const int c = rate_in_state(box, params.flavor, static_cast<std::uint64_t>(s), v);
            if (c == 0)
                continue;
            const bool healthy = (s >> v) & 1;
            const double rate = c * (healthy ? 1.0 - params.p : params.p);
            if (rate == 0.0)
                continue;
            triplets.emplace_back(s, s ^ (std::int64_t{1} << v), rate);
            exit += rate;
        }
        triplets.emplace_back(s, s, -exit);
    }
    g.Q.resize(g.states, g.states);
    g.Q.setFromTriplets(triplets.begin(), triplets.end());
    g.Q.makeCompressed();
    return g;
}

double detailed_balance_violation(const GeneratorMatrix& g)
{
    const Eigen::VectorXd pi = g.stationary();
    double worst = 0.0;
    for (Eigen::Index i = 0; i < g.Q.outerSize(); ++i)
        for (SparseGenerator::InnerIterator it(g.Q, i); it; ++it) {
            const Eigen::Index j = it.col();
            if (j == i)
                continue;
            worst = std::max(worst, std::abs(pi[i] * it.value() - pi[j] * g.Q.coeff(j, i)));
        }
    return worst;
}

double stationarity_residual(const GeneratorMatrix& g)
{
    const Eigen::RowVectorXd pi = g.stationary().transpose();
    const Eigen::RowVectorXd flow = pi * g.Q;
    return flow.cwiseAbs().maxCoeff();
}

double row_sum_residual(const GeneratorMatrix& g)
{
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(g.states);
    const Eigen::VectorXd sums = g.Q * ones;
    return sums.cwiseAbs().maxCoeff();
}

Uniformizer::Uniformizer(const GeneratorMatrix& g, double tail_mass)
    : rate_(static_cast<double>(g.sites) * max_vertex_rate(g.params)), tail_mass_(tail_mass)
{
    SparseGenerator identity(g.states, g.states);
    identity.setIdentity();
    kernel_ = identity + g.Q / rate_;
    kernel_.makeCompressed();
}

void Uniformizer::advance(Eigen::MatrixXd& rows, double dt)
{
    if (!(dt >= 0.0))
        throw std::invalid_argument("Uniformizer::advance: dt must be non-negative");
    if (dt == 0.0)
        return;
    // Keep the Poisson mean per chunk small enough that e^{-lambda} does not underflow.
    const auto chunks = static_cast<std::int64_t>(std::ceil(rate_ * dt / 32.0));
    const double lambda = rate_ * dt / static_cast<double>(chunks);
    for (std::int64_t c = 0; c < chunks; ++c) {
        double weight = std::exp(-lambda);
        double mass = weight;
        Eigen::MatrixXd term = rows;
        Eigen::MatrixXd result = weight * rows;
        for (int k = 1; 1.0 - mass > tail_mass_ && k < 10000; ++k) {
            term = term * kernel_;
            weight *= lambda / k;
            result.noalias() += weight * term;
            mass += weight;
        }
        truncated_ += std::max(0.0, 1.0 - mass);
        rows.swap(result);
    }
}

std::optional<double> TVCurve::first_below(double threshold) const
{
    for (std::size_t k = 0; k < values.size(); ++k)
        if (values[k] <= threshold)
            return times[k];
    return std::nullopt;
}

bool TVCurve::non_increasing(double slack) const
{
    for (std::size_t k = 1; k < values.size(); ++k)
        if (values[k] > values[k - 1] + slack)
            return false;
    return true;
}

std::vector<std::int64_t> initial_states(const GeneratorMatrix& g, const MixingOptions& options)
{
    std::vector<std::int64_t> states;
    if (g.states <= options.exhaustive_limit) {
        states.resize(static_cast<std::size_t>(g.states));
        for (std::int64_t s = 0; s < g.states; ++s)
            states[s] = s;
        return states;
    }
    const std::int64_t all_healthy = g.states - 1;
    const std::int64_t far_corner_infected = all_healthy & ~(std::int64_t{1} << (g.sites - 1));
    return {all_healthy, 0, far_corner_infected};
}

TVCurve tv_curve(const ModelParams& params, std::vector<double> times, const MixingOptions& options)
{
    std::sort(times.begin(), times.end());
    if (!times.empty() && times.front() < 0.0)
        throw std::invalid_argument("tv_curve: times must be non-negative");

    const GeneratorMatrix g = build_generator(params, options.state_cap);
    const Eigen::RowVectorXd pi = g.stationary().transpose();
    const auto starts = initial_states(g, options);
    Eigen::MatrixXd rows = point_masses(starts, g.states);

    TVCurve curve;
    curve.exhaustive = g.states <= options.exhaustive_limit;
    if (!curve.exhaustive)
        curve.flags.push_back("lower bound on d_L: maximum over the candidate initial states only");

    Uniformizer propagator(g);
    double now = 0.0;
    for (double t : times) {
        propagator.advance(rows, t - now);
        now = t;
        curve.times.push_back(t);
        curve.values.push_back(max_total_variation(rows, pi));
    }
    curve.truncation_error = propagator.truncated_mass();
    if (curve.truncation_error > 1e-10)
        curve.flags.push_back("uniformization truncation error above 1e-10");
    return curve;
}

MixingTime t_mix(const ModelParams& params, double threshold, const MixingOptions& options)
{
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("t_mix: threshold must lie in (0, 1)");
    const GeneratorMatrix g = build_generator(params, options.state_cap);
    const Eigen::RowVectorXd pi = g.stationary().transpose();
    const auto starts = initial_states(g, options);
    Uniformizer propagator(g);

    Eigen::MatrixXd at_lo = point_masses(starts, g.states);
    double lo = 0.0;
    if (max_total_variation(at_lo, pi) <= threshold)
        return {0.0, g.states <= options.exhaustive_limit, 0.0};

    double hi = 1.0;
    Eigen::MatrixXd at_hi = at_lo;
    propagator.advance(at_hi, hi);
    while (max_total_variation(at_hi, pi) > threshold) {
        if (hi > 1e7)
            throw std::runtime_error("t_mix: distance to stationarity does not reach the threshold");
        lo = hi;
        at_lo = at_hi;
        propagator.advance(at_hi, hi);
        hi *= 2.0;
    }
    while (hi - lo > 1e-6 * hi) {
        const double mid = 0.5 * (lo + hi);
        Eigen::MatrixXd at_mid = at_lo;
        propagator.advance(at_mid, mid - lo);
        if (max_total_variation(at_mid, pi) > threshold) {
            lo = mid;
            at_lo.swap(at_mid);
        } else {
            hi = mid;
        }
    }
    return {hi, g.states <= options.exhaustive_limit, propagator.truncated_mass()};
}

namespace
{

// Clock layout shared with the simulator: East one per vertex, ModifiedEast
// the origin (0) plus the edge into v along axis (1 + v d + axis).
struct CouplingClock
{
    ClockKey key;
    VertexIndex target;
    VertexIndex tail; // -1 for site clocks and the origin
};

std::vector<CouplingClock> coupling_clocks(const ModelParams& params, const Box& box,
                                           const RandomSource& source)
{
    std::vector<CouplingClock> clocks;
    if (params.flavor == Flavor::East) {
        for (VertexIndex v = 0; v < box.size(); ++v)
            clocks.push_back({source.site_key(box.decode(v)), v, -1});
        return clocks;
    }
    clocks.push_back({source.site_key(box.origin()), 0, -1});
    for (VertexIndex v = 0; v < box.size(); ++v) {
        const Vertex head = box.decode(v);
        for (int i = 0; i < box.dim(); ++i) {
            const VertexIndex u = box.predecessor(v, i);
            if (u >= 0)
                clocks.push_back({source.edge_key(head, i), v, u});
        }
    }
    return clocks;
}

struct QueuedRing
{
    double time;
    std::size_t clock;
    Ring ring;

    bool operator>(const QueuedRing& o) const
    {
        return time != o.time ? time > o.time : clock > o.clock;
    }
};

} // namespace

CoalescenceResult coalescence_time(const ModelParams& params, const RandomSource& source,
                                   const CoalescenceOptions& options)
{
    params.validate();
    const Box box = params.box();
    const auto clocks = coupling_clocks(params, box, source);
    std::priority_queue<QueuedRing, std::vector<QueuedRing>, std::greater<>> queue;
    for (std::size_t c = 0; c < clocks.size(); ++c) {
        const Ring r = source.next_ring(clocks[c].key, 0.0);
        queue.push({r.time, c, r});
    }
    auto next_event = [&](QueuedRing& out) {
        out = queue.top();
        queue.pop();
        const Ring r = source.next_ring(clocks[out.clock].key, out.time);
        queue.push({r.time, out.clock, r});
    };

    CoalescenceResult result;
    const int d = box.dim();
    if (box.size() <= options.exact_vertex_limit) {
        result.exact = true;
        const VertexIndex n = box.size();
        std::vector<std::uint32_t> behind(static_cast<std::size_t>(n), 0);
        for (VertexIndex v = 0; v < n; ++v)
            for (int i = 0; i < d; ++i)
                if (const VertexIndex u = box.predecessor(v, i); u >= 0)
                    behind[v] |= 1U << u;

        std::vector<std::uint32_t> copies(std::size_t{1} << n);
        for (std::size_t s = 0; s < copies.size(); ++s)
            copies[s] = static_cast<std::uint32_t>(s);
        result.copies = static_cast<std::int64_t>(copies.size());
        std::vector<std::uint64_t> seen((copies.size() + 63) / 64, 0);
        std::vector<std::uint32_t> next;

        QueuedRing event{};
        while (copies.size() > 1) {
            next_event(event);
            if (event.time > options.horizon) {
                result.time = {options.horizon, true};
                return result;
            }
            const auto& clock = clocks[event.clock];
            const bool healthy = source.coin_healthy(clock.key, event.ring, params.p);
            const std::uint32_t bit = 1U << clock.target;
            next.clear();
            for (std::uint32_t s : copies) {
                bool eligible;
                if (clock.tail >= 0)
                    eligible = ((s >> clock.tail) & 1U) == 0;
                else
                    eligible = clock.target == 0 || (~s & behind[clock.target]) != 0;
                const std::uint32_t t = eligible ? (healthy ? (s | bit) : (s & ~bit)) : s;
                auto& word = seen[t >> 6];
                const std::uint64_t mask = std::uint64_t{1} << (t & 63);
                if (!(word & mask)) {
                    word |= mask;
                    next.push_back(t);
                }
            }
            for (std::uint32_t t : next)
                seen[t >> 6] &= ~(std::uint64_t{1} << (t & 63));
            copies.swap(next);
        }
        result.time = {event.time, false};
        return result;
    }

    // Heuristic regime: extremes plus sampled states.
    result.exact = false;
    std::vector<Configuration> copies{Configuration::all_healthy(box), Configuration::all_infected(box),
                                      Configuration::single_infection(box, box.far_corner())};
    const ClockKey sample_key{0x53414D504C454453ULL};
    for (int k = 0; k < options.sampled_states; ++k) {
        Configuration c = Configuration::all_healthy(box);
        for (VertexIndex v = 0; v < box.size(); ++v)
            c.state[v] = source.uniform(sample_key, static_cast<std::uint64_t>(k * box.size() + v)) < 0.5
                             ? kInfected
                             : kHealthy;
        copies.push_back(std::move(c));
    }
    auto dedupe = [&] {
        std::sort(copies.begin(), copies.end(),
                  [](const Configuration& a, const Configuration& b) { return a.state < b.state; });
        copies.erase(std::unique(copies.begin(), copies.end()), copies.end());
    };
    dedupe();
    result.copies = static_cast<std::int64_t>(copies.size());

    QueuedRing event{};
    while (copies.size() > 1) {
        next_event(event);
        if (event.time > options.horizon) {
            result.time = {options.horizon, true};
            return result;
        }
        const auto& clock = clocks[event.clock];
        const std::uint8_t state =
            source.coin_healthy(clock.key, event.ring, params.p) ? kHealthy : kInfected;
        bool changed = false;
        for (auto& c : copies) {
            bool eligible;
            if (clock.tail >= 0) {
                eligible = c.infected(clock.tail);
            } else {
                eligible = clock.target == 0;
                for (int i = 0; i < d && !eligible; ++i) {
                    const VertexIndex u = box.predecessor(clock.target, i);
                    eligible = u >= 0 && c.infected(u);
                }
            }
            if (eligible && c.state[clock.target] != state) {
                c.state[clock.target] = state;
                changed = true;
            }
        }
        if (changed)
            dedupe();
    }
    result.time = {event.time, false};
    return result;
}

double CoalescenceSummary::quantile(double q) const
{
    if (times.empty())
        throw std::logic_error("quantile of an empty sample");
    std::vector<double> sorted = times;
    std::sort(sorted.begin(), sorted.end());
    const auto k = static_cast<std::size_t>(std::clamp(q, 0.0, 1.0) * (sorted.size() - 1));
    return sorted[k];
}

double CoalescenceSummary::coalesced_by(double t) const
{
    const auto total = static_cast<double>(times.size()) + static_cast<double>(censored);
    if (total == 0)
        return 0.0;
    const auto hits = std::count_if(times.begin(), times.end(), [t](double x) { return x <= t; });
    return static_cast<double>(hits) / total;
}

CoalescenceSummary coalescence_statistics(const ModelParams& params, std::int64_t reps,
                                          const RandomSource& source, const CoalescenceOptions& options,
                                          int jobs)
{
    const auto results = run_replicas(reps, jobs, [&](std::int64_t r) {
        return coalescence_time(params, source.replica(static_cast<std::uint64_t>(r)), options);
    });
    CoalescenceSummary summary;
    RunningStats stats;
    for (const auto& r : results) {
        summary.exact = summary.exact && r.exact;
        if (r.time.censored) {
            ++summary.censored;
            continue;
        }
        summary.times.push_back(r.time.time);
        stats.add(r.time.time);
    }
    summary.mean = EstimateCI::from_stats(stats);
    if (summary.censored > 0)
        summary.mean.flags.push_back(std::to_string(summary.censored) + " replicas censored at the horizon");
    return summary;
}

std::vector<int> default_rho_scales()
{
    return {200, 400, 600, 800, 1000, 1200, 1400, 1600};
}

RhoEstimate estimate_rho(double p, const std::vector<int>& n_values, std::int64_t reps,
                         const RandomSource& source, int jobs)
{
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("estimate_rho: p must lie in [0, 1)");
    if (n_values.size() < 2 || reps < 2)
        throw std::invalid_argument("estimate_rho: need at least two scales and two replicas");
    std::vector<int> scales = n_values;
    std::sort(scales.begin(), scales.end());
    if (scales.front() < 1)
        throw std::invalid_argument("estimate_rho: scales must be positive");

    const ModelParams params{1, Flavor::East, p, scales.back()};
    SimulateOptions sim;
    sim.stop_when_tracked_infected = true;
    sim.horizon = default_censoring_cap(params, Vertex::Constant(1, scales.back()));
    for (int n : scales)
        sim.tracked.push_back(Vertex::Constant(1, n));
    const Configuration start = Configuration::all_healthy(params.box());

    const auto runs = run_replicas(reps, jobs, [&](std::int64_t r) {
        return simulate(params, start, source.replica(static_cast<std::uint64_t>(r)), sim).infection_time;
    });

    RhoEstimate out;
    out.p = p;
    out.n_values = scales;
    std::vector<double> xs(scales.begin(), scales.end());
    RunningStats slope, intercept;
    std::vector<RunningStats> per_scale(scales.size());
    for (const auto& times : runs) {
        if (std::any_of(times.begin(), times.end(), [](double t) { return std::isinf(t); })) {
            ++out.censored;
            continue;
        }
        const LinearFit fit = fit_line(xs, times);
        slope.add(fit.slope);
        intercept.add(fit.intercept);
        for (std::size_t k = 0; k < scales.size(); ++k)
            per_scale[k].add(times[k]);
    }
    if (slope.count() < 2)
        throw std::runtime_error("estimate_rho: too many censored replicas");

    out.rho = EstimateCI::from_stats(slope);
    out.intercept = EstimateCI::from_stats(intercept);
    std::vector<double> means;
    double worst_se = 0.0;
    for (const auto& s : per_scale) {
        out.mean_times.push_back(EstimateCI::from_stats(s));
        means.push_back(s.mean());
        worst_se = std::max(worst_se, s.standard_error());
    }
    const LinearFit mean_fit = fit_line(xs, means);
    out.nonlinear = mean_fit.residual_rms > 3.0 * worst_se;
    if (out.nonlinear)
        out.flags.push_back("mean infection times deviate from a straight line beyond noise");
    if (out.censored > 0)
        out.flags.push_back(std::to_string(out.censored) + " replicas censored");
    return out;
}

FrontProfile front_profile(const FrontOptions& options, const RandomSource& source)
{
    if (options.n < 1 || options.reps < 2)
        throw std::invalid_argument("front_profile: need n >= 1 and at least two replicas");
    const ModelParams diag_params{options.dim, options.flavor, options.p, options.n};
    const ModelParams axis_params{1, options.flavor, options.p, options.n};
    diag_params.validate();
    const Vertex diag_target = diagonal(options.dim, options.n);
    const Vertex axis_target = Vertex::Constant(1, options.n);
    const Configuration diag_start = Configuration::all_healthy(diag_params.box());
    const Configuration axis_start = Configuration::all_healthy(axis_params.box());

    struct Sample
    {
        CensoredTime diag, axis;
    };
    const auto samples = run_replicas(options.reps, options.jobs, [&](std::int64_t r) {
        const RandomSource rep = source.replica(static_cast<std::uint64_t>(r));
        return Sample{infection_time(diag_params, diag_start, diag_target, rep),
                      infection_time(axis_params, axis_start, axis_target, rep)};
    });

    FrontProfile out;
    out.n = options.n;
    const double n = options.n;
    const int side = options.side.value_or(options.n);
    std::optional<double> threshold;
    if (options.rho) {
        threshold = *options.rho * n + options.dim * std::pow(std::max(n, static_cast<double>(side)), 2.0 / 3.0);
        out.slow_threshold = threshold;
    }
    RunningStats diag, axis;
    std::int64_t slow = 0;
    for (const auto& s : samples) {
        if (s.diag.censored)
            ++out.censored_diagonal;
        else
            diag.add(s.diag.time / n);
        if (s.axis.censored)
            ++out.censored_axis;
        else
            axis.add(s.axis.time / n);
        if (threshold && s.diag.time >= *threshold)
            ++slow;
    }
    out.diagonal = EstimateCI::from_stats(diag);
    out.axis = EstimateCI::from_stats(axis);
    if (threshold)
        out.slow_event = EstimateCI::from_proportion(slow, options.reps);
    return out;
}

} // namespace eastlab
