#include "eastlab/fpp.hpp"

#include "eastlab/constants.hpp"
#include "eastlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eastlab
{

namespace
{

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

} // namespace

bool PassageField::has_object(std::size_t object) const
{
    return object < weights.size() && !std::isnan(weights[object]);
}

PassageField passage_field(const ModelParams& params, const RandomSource& source)
{
    params.validate();
    if (params.p != 0.0)
        throw std::invalid_argument("the first-passage oracle is exact only at p = 0");

    const Box box = params.box();
    const int d = box.dim();
    PassageField field;
    field.flavor = params.flavor;
    field.dim = d;
    field.side = params.side;
    field.times.assign(static_cast<std::size_t>(box.size()), kInfinity);

    const Ring first = source.next_ring(source.site_key(box.origin()), 0.0);
    field.origin_delay = first.time;
    field.times[0] = first.time;

    if (params.flavor == Flavor::East) {
        field.weights.assign(static_cast<std::size_t>(box.size()), kNaN);
        field.weights[0] = field.origin_delay;
        // Ascending index order is a topological order of the oriented lattice.
        for (VertexIndex v = 1; v < box.size(); ++v) {
            double reached = kInfinity;
            for (int i = 0; i < d; ++i) {
                const VertexIndex u = box.predecessor(v, i);
                if (u >= 0)
                    reached = std::min(reached, field.times[u]);
            }
            const double t = source.next_ring(source.site_key(box.decode(v)), reached).time;
            field.times[v] = t;
            field.weights[v] = t - reached;
        }
        return field;
    }

    field.weights.assign(static_cast<std::size_t>(box.size() * d), kNaN);
    for (VertexIndex v = 1; v < box.size(); ++v) {
        const Vertex head = box.decode(v);
        double best = kInfinity;
        for (int i = 0; i < d; ++i) {
            const VertexIndex u = box.predecessor(v, i);
            if (u < 0)
                continue;
            const double t = source.next_ring(source.edge_key(head, i), field.times[u]).time;
            field.weights[v * d + i] = t - field.times[u];
            best = std::min(best, t);
        }
        field.times[v] = best;
    }
    return field;
}

std::vector<double> fpp_times(const ModelParams& params, const RandomSource& source)
{
    return passage_field(params, source).times;
}

std::int64_t OpennessField::object_count() const
{
    return std::count(present.begin(), present.end(), std::uint8_t{1});
}

std::int64_t OpennessField::open_count() const
{
    return std::count(open.begin(), open.end(), std::uint8_t{1});
}

double OpennessField::open_fraction() const
{
    const auto n = object_count();
    return n > 0 ? static_cast<double>(open_count()) / static_cast<double>(n) : 0.0;
}

OpennessField decompose_open(const PassageField& field, double T)
{
    if (!(T > 0.0))
        throw std::invalid_argument("decompose_open: T must be positive");
    OpennessField out;
    out.threshold = T;
    out.open.assign(field.weights.size(), 0);
    out.present.assign(field.weights.size(), 0);
    for (std::size_t k = 0; k < field.weights.size(); ++k) {
        // The origin's slot in the site layout holds Y, which is not a passage weight.
        if (!field.has_object(k) || (field.flavor == Flavor::East && k == 0))
            continue;
        out.present[k] = 1;
        out.open[k] = field.weights[k] < T ? 1 : 0;
    }
    return out;
}

double two_stage_passage_time(double T, double u_state, double u_value)
{
    if (!(T > 0.0))
        throw std::invalid_argument("two_stage_passage_time: T must be positive");
    const double open_probability = -std::expm1(-T);
    if (u_state < open_probability)
        return -std::log1p(-u_value * open_probability); // Exp(1) truncated to [0, T)
    return T - std::log(u_value);                        // Exp(1) shifted past T
}

ExpMomentReport exp_moment_diagnostic(const ExpMomentOptions& options, const RandomSource& source)
{
    if (options.scale < 1)
        throw std::invalid_argument("exp_moment_diagnostic: scale must be >= 1");
    if (options.reps < 2)
        throw std::invalid_argument("exp_moment_diagnostic: need at least two replicas");

    ModelParams params{options.dim, options.flavor, 0.0, options.scale};
    const VertexIndex target = params.box().encode(diagonal(options.dim, options.scale));
    const auto exponents = run_replicas(options.reps, options.jobs, [&](std::int64_t r) {
        return fpp_times(params, source.replica(static_cast<std::uint64_t>(r)))[target] / options.scale;
    });

    const double top = *std::max_element(exponents.begin(), exponents.end());
    RunningStats scaled;
    double largest = 0.0;
    for (double e : exponents) {
        const double w = std::exp(e - top);
        scaled.add(w);
        largest = std::max(largest, w);
    }

    ExpMomentReport report;
    const double n = static_cast<double>(exponents.size());
    const double sum = scaled.mean() * n;
    report.log_moment = top + std::log(scaled.mean());
    report.max_share = largest / sum;
    report.diverging = report.max_share > options.divergence_share;

    const double factor = std::exp(top);
    report.moment.estimate = std::exp(report.log_moment);
    report.moment.std_error = factor * scaled.standard_error();
    report.moment.reps = options.reps;
    report.moment.lower = report.moment.estimate - kZ95 * report.moment.std_error;
    report.moment.upper = report.moment.estimate + kZ95 * report.moment.std_error;
    if (report.diverging)
        report.moment.flags.push_back("empirical moment not stabilised: largest sample dominates the sum");

    if (options.T) {
        report.bound = std::exp(options.dim * beta_T(*options.T) + options.epsilon);
        report.below_bound = report.moment.estimate < *report.bound;
    }
    return report;
}

TailDecayReport chernoff_tail(int dim, Flavor flavor, double lambda, const std::vector<int>& n_values,
                              std::int64_t reps, const RandomSource& source, int jobs)
{
    if (reps < 1)
        throw std::invalid_argument("chernoff_tail: reps must be >= 1");
    TailDecayReport report;
    report.lambda = lambda;
    std::vector<double> xs, ys;
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        const int n = n_values[k];
        ModelParams params{dim, flavor, 0.0, n};
        const VertexIndex target = params.box().encode(diagonal(dim, n));
        const RandomSource scale_source = source.replica(0x7A11ULL + k);
        const auto hits = run_replicas(reps, jobs, [&](std::int64_t r) {
            const auto times = fpp_times(params, scale_source.replica(static_cast<std::uint64_t>(r)));
            return times[target] >= lambda * n ? 1 : 0;
        });
        std::int64_t count = 0;
        for (int h : hits)
            count += h;
        report.points.push_back({n, EstimateCI::from_proportion(count, reps)});
        if (count > 0) {
            xs.push_back(n);
            ys.push_back(std::log(static_cast<double>(count) / static_cast<double>(reps)));
        }
    }
    if (xs.size() >= 2)
        report.fit = fit_line(xs, ys);
    return report;
}

} // namespace eastlab
