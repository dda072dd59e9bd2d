#include "eastlab/percolation.hpp"

#include "eastlab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace eastlab
{

namespace
{

constexpr ClockKey kPercolationKey{0x5045524353414D50ULL};
constexpr double kNever = std::numeric_limits<double>::infinity();

std::vector<VertexIndex> encode_all(const Box& box, const std::vector<Vertex>& vertices)
{
    std::vector<VertexIndex> out;
    out.reserve(vertices.size());
    for (const auto& x : vertices) {
        if (!box.contains(x))
            throw std::invalid_argument("percolation: vertex outside the sampled region");
        out.push_back(box.encode(x));
    }
    return out;
}

// Bottleneck sweep: value[v] = min over open-path candidates from A of the
// largest uniform used. Ascending index order is topological.
std::vector<double> bottleneck_values(const PercSample& sample, const std::vector<VertexIndex>& sources)
{
    const Box& box = sample.box;
    const int d = box.dim();
    std::vector<double> value(static_cast<std::size_t>(box.size()), kNever);
    std::vector<std::uint8_t> is_source(static_cast<std::size_t>(box.size()), 0);
    for (auto a : sources)
        is_source[a] = 1;

    for (VertexIndex v = 0; v < box.size(); ++v) {
        if (is_source[v]) {
            value[v] = -1.0;
            continue;
        }
        double best = kNever;
        for (int i = 0; i < d; ++i) {
            const VertexIndex u = box.predecessor(v, i);
            if (u < 0 || value[u] == kNever)
                continue;
            const double through = sample.kind == PercolationKind::Bond
                                       ? std::max(value[u], sample.uniforms[v * d + i])
                                       : value[u];
            best = std::min(best, through);
        }
        if (sample.kind == PercolationKind::Site && best != kNever)
            best = std::max(best, sample.uniforms[v]);
        value[v] = best;
    }
    return value;
}

std::vector<double> fresh_uniforms(PercolationKind kind, const Box& box, const RandomSource& source)
{
    const auto count = kind == PercolationKind::Bond ? box.size() * box.dim() : box.size();
    std::vector<double> u(static_cast<std::size_t>(count));
    for (std::int64_t k = 0; k < count; ++k)
        u[k] = source.uniform(kPercolationKey, static_cast<std::uint64_t>(k));
    return u;
}

void check_probability(double p)
{
    if (!(p >= 0.0 && p <= 1.0))
        throw std::invalid_argument("percolation parameter must lie in [0, 1]");
}

} // namespace

std::string_view to_string(PercolationKind kind)
{
    return kind == PercolationKind::Bond ? "bond" : "site";
}

PercolationKind parse_percolation_kind(std::string_view text)
{
    if (text == "bond" || text == "b" || text == "modified")
        return PercolationKind::Bond;
    if (text == "site" || text == "s" || text == "east")
        return PercolationKind::Site;
    throw std::invalid_argument("unknown percolation kind '" + std::string(text) + "'");
}

PercSample sample_percolation(PercolationKind kind, double p, const Box& box, const RandomSource& source)
{
    check_probability(p);
    return {kind, p, box, fresh_uniforms(kind, box, source)};
}

bool crossing(const PercSample& sample, const std::vector<Vertex>& A, const std::vector<Vertex>& B)
{
    const Box& box = sample.box;
    const int d = box.dim();
    const auto sources = encode_all(box, A);
    const auto targets = encode_all(box, B);

    std::vector<std::uint8_t> reached(static_cast<std::size_t>(box.size()), 0);
    for (auto a : sources)
        reached[a] = 1;
    for (VertexIndex v = 0; v < box.size(); ++v) {
        if (reached[v])
            continue;
        if (sample.kind == PercolationKind::Site && !sample.open_site(v))
            continue;
        for (int i = 0; i < d && !reached[v]; ++i) {
            const VertexIndex u = box.predecessor(v, i);
            if (u < 0 || !reached[u])
                continue;
            if (sample.kind == PercolationKind::Site || sample.open_edge(v, i))
                reached[v] = 1;
        }
    }
    return std::any_of(targets.begin(), targets.end(), [&](VertexIndex b) { return reached[b] != 0; });
}

double crossing_threshold(const PercSample& sample, const std::vector<Vertex>& A,
                          const std::vector<Vertex>& B)
{
    const auto value = bottleneck_values(sample, encode_all(sample.box, A));
    double best = kNever;
    for (auto b : encode_all(sample.box, B))
        best = std::min(best, value[b]);
    return best;
}

SlabGeometry slab_geometry(int dim, int n, double delta)
{
    if (dim < 1 || n < 1)
        throw std::invalid_argument("slab_geometry: need d >= 1 and n >= 1");
    if (!(delta > 0.0 && delta < 1.0))
        throw std::invalid_argument("slab_geometry: delta must lie in (0, 1)");
    const int r = static_cast<int>(std::floor(delta * n));
    SlabGeometry g{Box(dim, n + 2 * r), {}, {}};

    // Vertices of [0, 2r]^d with coordinate sum d r, i.e. H_0 cap [-r, r]^d shifted by r e*.
    const Box window(dim, 2 * r);
    for (VertexIndex v = 0; v < window.size(); ++v) {
        Vertex y = window.decode(v);
        if (y.sum() != dim * r)
            continue;
        g.sources.push_back(y);
        g.targets.push_back(y + diagonal(dim, n));
    }
    return g;
}

std::vector<double> slab_thresholds(int dim, PercolationKind kind, int n, double delta,
                                    std::int64_t reps, const RandomSource& source, int jobs)
{
    if (reps < 1)
        throw std::invalid_argument("slab_thresholds: reps must be >= 1");
    const SlabGeometry g = slab_geometry(dim, n, delta);
    return run_replicas(reps, jobs, [&](std::int64_t r) {
        const auto sample = sample_percolation(kind, 0.0, g.box, source.replica(static_cast<std::uint64_t>(r)));
        return crossing_threshold(sample, g.sources, g.targets);
    });
}

EstimateCI crossing_probability(int dim, PercolationKind kind, double p, int n, double delta,
                                std::int64_t reps, const RandomSource& source, int jobs)
{
    check_probability(p);
    const auto thresholds = slab_thresholds(dim, kind, n, delta, reps, source, jobs);
    const auto hits = std::count_if(thresholds.begin(), thresholds.end(), [p](double t) { return t < p; });
    return EstimateCI::from_proportion(hits, reps);
}

bool slab_crossing_open_path(const PercSample& sample, int scale, double delta)
{
    const Box& box = sample.box;
    if (box.side_length() != scale)
        throw std::invalid_argument("slab_crossing_open_path: sample box must be Lambda_l");
    if (!(delta > 0.0 && delta < 0.5))
        throw std::invalid_argument("slab_crossing_open_path: delta must lie in (0, 1/2)");
    const int d = box.dim();
    const int lower = static_cast<int>(std::floor(delta * d * scale));
    const int upper = static_cast<int>(std::floor((1.0 - delta) * d * scale));
    return crossing(sample, hyperplane_in_box(lower, box), hyperplane_in_box(upper, box));
}

PcEstimate estimate_pc(int dim, PercolationKind kind, int n, std::int64_t reps, double tol,
                       const RandomSource& source, int jobs, double delta)
{
    if (!(tol > 0.0))
        throw std::invalid_argument("estimate_pc: tol must be positive");
    if (reps < 4)
        throw std::invalid_argument("estimate_pc: need at least four replicas");
    auto thresholds = slab_thresholds(dim, kind, n, delta, reps, source, jobs);
    std::sort(thresholds.begin(), thresholds.end());

    const auto crossing_fraction = [&](double p) {
        const auto hits = std::lower_bound(thresholds.begin(), thresholds.end(), p) - thresholds.begin();
        return static_cast<double>(hits) / static_cast<double>(reps);
    };
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        (crossing_fraction(mid) < 0.5 ? lo : hi) = mid;
    }

    PcEstimate out;
    out.dim = dim;
    out.kind = kind;
    out.n = n;
    out.delta = delta;
    out.p_c.estimate = 0.5 * (lo + hi);
    out.p_c.reps = reps;

    // Distribution-free interval for the median from binomial order statistics.
    const double R = static_cast<double>(reps);
    const double half = kZ95 * std::sqrt(R) / 2.0;
    const auto k_lo = static_cast<std::int64_t>(std::clamp(std::floor(R / 2.0 - half), 0.0, R - 1));
    const auto k_hi = static_cast<std::int64_t>(std::clamp(std::ceil(R / 2.0 + half), 0.0, R - 1));
    out.p_c.lower = std::min(thresholds[k_lo], out.p_c.estimate);
    out.p_c.upper = std::max(thresholds[k_hi], out.p_c.estimate);
    out.p_c.std_error = (out.p_c.upper - out.p_c.lower) / (2.0 * kZ95);
    out.p_c.flags.push_back("finite-size threshold at n = " + std::to_string(n) +
                            "; approaches the infinite-volume threshold only as n grows");
    return out;
}

PcScaling estimate_pc_scaling(int dim, PercolationKind kind, const std::vector<int>& n_values,
                              std::int64_t reps, double tol, const RandomSource& source, int jobs,
                              double delta)
{
    if (n_values.size() < 2)
        throw std::invalid_argument("estimate_pc_scaling: need at least two scales");
    PcScaling out;
    for (std::size_t k = 0; k < n_values.size(); ++k)
        out.estimates.push_back(
            estimate_pc(dim, kind, n_values[k], reps, tol, source.replica(0x5CA1EULL + k), jobs, delta));
    const auto& last = out.estimates.back().p_c;
    const auto& prev = out.estimates[out.estimates.size() - 2].p_c;
    out.drift = std::abs(last.estimate - prev.estimate);
    out.last_width = last.upper - last.lower;
    out.stable = out.drift < out.last_width;
    return out;
}

std::vector<Vertex> hyperplane_seed_set(int dim, int count)
{
    if (dim < 2 && count > 1)
        throw std::invalid_argument("hyperplane_seed_set: H_0 holds a single vertex when d = 1");
    std::vector<Vertex> seeds;
    for (int k = 0; k < count; ++k) {
        Vertex z = Vertex::Zero(dim);
        if (dim >= 2) {
            z[0] = k;
            z[1] = -k;
        }
        seeds.push_back(z);
    }
    return seeds;
}

EstimateCI survival_probability(int dim, PercolationKind kind, double p, int seed_count,
                                int generations, std::int64_t reps, const RandomSource& source, int jobs)
{
    check_probability(p);
    if (generations < 1 || seed_count < 1 || reps < 1)
        throw std::invalid_argument("survival_probability: need s >= 1, |A| >= 1 and reps >= 1");

    // Shift by (count - 1) e_2 so every vertex reachable within s generations lies in the box.
    const int shift = seed_count - 1;
    const Box box(dim, shift + generations);
    std::vector<Vertex> sources;
    for (Vertex z : hyperplane_seed_set(dim, seed_count)) {
        if (dim >= 2)
            z[1] += shift;
        sources.push_back(z);
    }
    const int level = dim >= 2 ? shift : 0;
    const auto targets = hyperplane_in_box(level + generations, box);

    const auto thresholds = run_replicas(reps, jobs, [&](std::int64_t r) {
        const auto sample = sample_percolation(kind, 0.0, box, source.replica(static_cast<std::uint64_t>(r)));
        return crossing_threshold(sample, sources, targets);
    });
    const auto alive = std::count_if(thresholds.begin(), thresholds.end(), [p](double t) { return t < p; });
    return EstimateCI::from_proportion(alive, reps);
}

} // namespace eastlab
