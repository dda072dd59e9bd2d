#include "eastlab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace eastlab
{

std::string_view to_string(Flavor flavor)
{
    return flavor == Flavor::East ? "east" : "modified";
}

Flavor parse_flavor(std::string_view text)
{
    if (text == "east" || text == "site" || text == "s")
        return Flavor::East;
    if (text == "modified" || text == "modified-east" || text == "bond" || text == "b")
        return Flavor::ModifiedEast;
    throw std::invalid_argument("unknown flavor '" + std::string(text) + "'");
}

void ModelParams::validate() const
{
    if (dim < 1)
        throw std::invalid_argument("dimension must be >= 1");
    if (side < 0)
        throw std::invalid_argument("box side must be >= 0");
    if (!(p >= 0.0 && p < 1.0))
        throw std::invalid_argument("healthy probability p must lie in [0, 1)");
}

Configuration Configuration::all_healthy(const Box& box)
{
    return {std::vector<std::uint8_t>(static_cast<std::size_t>(box.size()), kHealthy)};
}

Configuration Configuration::all_infected(const Box& box)
{
    return {std::vector<std::uint8_t>(static_cast<std::size_t>(box.size()), kInfected)};
}

Configuration Configuration::single_infection(const Box& box, const Vertex& x)
{
    auto config = all_healthy(box);
    config.state[static_cast<std::size_t>(box.encode(x))] = kInfected;
    return config;
}

void Configuration::validate(const Box& box) const
{
    if (static_cast<VertexIndex>(state.size()) != box.size())
        throw std::invalid_argument("configuration size does not match the box");
    for (auto s : state)
        if (s != kInfected && s != kHealthy)
            throw std::invalid_argument("configuration states must be 0 or 1");
}

Configuration Configuration::restricted(const Box& from, const Box& to) const
{
    if (from.dim() != to.dim() || to.side_length() > from.side_length())
        throw std::invalid_argument("restriction target must be a sub-box");
    Configuration out;
    out.state.resize(static_cast<std::size_t>(to.size()));
    for (VertexIndex v = 0; v < to.size(); ++v) {
        VertexIndex w = 0;
        for (int i = 0; i < to.dim(); ++i)
            w += from.stride(i) * to.coordinate(v, i);
        out.state[static_cast<std::size_t>(v)] = state[static_cast<std::size_t>(w)];
    }
    return out;
}

int transition_rate(const ModelParams& params, const Configuration& config, const Vertex& x)
{
    params.validate();
    const Box box = params.box();
    config.validate(box);
    if (!box.contains(x))
        throw std::invalid_argument("transition_rate: vertex outside the box");
    const VertexIndex v = box.encode(x);
    if (v == 0)
        return 1;
    int infected = 0;
    for (int i = 0; i < box.dim(); ++i) {
        const VertexIndex u = box.predecessor(v, i);
        if (u >= 0 && config.infected(u))
            ++infected;
    }
    return params.flavor == Flavor::East ? std::min(infected, 1) : infected;
}

Simulator::Simulator(const ModelParams& params, Configuration initial, const RandomSource& source)
    : params_(params), box_(params.box()), config_(std::move(initial)), source_(source)
{
    params_.validate();
    config_.validate(box_);

    const std::int64_t clocks = clock_count();
    keys_.resize(static_cast<std::size_t>(clocks));
    pending_ring_.resize(static_cast<std::size_t>(clocks));
    generation_.assign(static_cast<std::size_t>(clocks), 0);
    scheduled_.assign(static_cast<std::size_t>(clocks), 0);

    const int d = box_.dim();
    if (params_.flavor == Flavor::East) {
        for (VertexIndex v = 0; v < box_.size(); ++v)
            keys_[v] = source_.site_key(box_.decode(v));
        infected_behind_.assign(static_cast<std::size_t>(box_.size()), 0);
        for (VertexIndex v = 0; v < box_.size(); ++v)
            for (int i = 0; i < d; ++i) {
                const VertexIndex u = box_.predecessor(v, i);
                if (u >= 0 && config_.infected(u))
                    ++infected_behind_[v];
            }
    } else {
        keys_[0] = source_.site_key(box_.origin());
        for (VertexIndex v = 0; v < box_.size(); ++v) {
            const Vertex head = box_.decode(v);
            for (int i = 0; i < d; ++i)
                if (head[i] > 0)
                    keys_[1 + v * d + i] = source_.edge_key(head, i);
        }
    }

    for (std::int64_t c = 0; c < clocks; ++c)
        refresh_clock(c, 0.0);
}

std::int64_t Simulator::clock_count() const
{
    return params_.flavor == Flavor::East ? box_.size() : 1 + box_.size() * box_.dim();
}

VertexIndex Simulator::clock_target(std::int64_t clock) const
{
    if (params_.flavor == Flavor::East || clock == 0)
        return clock;
    return (clock - 1) / box_.dim();
}

bool Simulator::clock_eligible(std::int64_t clock) const
{
    const VertexIndex target = clock_target(clock);
    if (params_.p == 0.0 && config_.infected(target))
        return false;
    if (params_.flavor == Flavor::East)
        return target == 0 || infected_behind_[target] > 0;
    if (clock == 0)
        return true;
    const int axis = static_cast<int>((clock - 1) % box_.dim());
    const VertexIndex tail = box_.predecessor(target, axis);
    return tail >= 0 && config_.infected(tail);
}

void Simulator::refresh_clock(std::int64_t clock, double now)
{
    const bool eligible = clock_eligible(clock);
    auto& scheduled = scheduled_[clock];
    if (eligible && !scheduled) {
        scheduled = 1;
        ++generation_[clock];
        pending_ring_[clock] = source_.next_ring(keys_[clock], now);
        queue_.push({pending_ring_[clock].time, clock, generation_[clock]});
    } else if (!eligible && scheduled) {
        scheduled = 0;
        ++generation_[clock];
    }
}

void Simulator::apply_flip(VertexIndex v, std::uint8_t state, double now)
{
    config_.state[static_cast<std::size_t>(v)] = state;
    ++flips_;
    const int d = box_.dim();
    if (params_.flavor == Flavor::East) {
        refresh_clock(v, now);
        for (int i = 0; i < d; ++i) {
            const VertexIndex w = box_.successor(v, i);
            if (w < 0)
                continue;
            if (state == kInfected)
                ++infected_behind_[w];
            else
                --infected_behind_[w];
            refresh_clock(w, now);
        }
        return;
    }
    if (v == 0)
        refresh_clock(0, now);
    for (int i = 0; i < d; ++i) {
        if (box_.predecessor(v, i) >= 0)
            refresh_clock(1 + v * d + i, now);
        const VertexIndex w = box_.successor(v, i);
        if (w >= 0)
            refresh_clock(1 + w * d + i, now);
    }
}

std::optional<RingOutcome> Simulator::step(double horizon)
{
    while (!queue_.empty()) {
        const Pending top = queue_.top();
        if (top.generation != generation_[top.clock]) {
            queue_.pop();
            continue;
        }
        if (top.time > horizon)
            break;
        queue_.pop();

        const std::int64_t clock = top.clock;
        const Ring ring = pending_ring_[clock];
        time_ = top.time;
        ++rings_;

        const VertexIndex target = clock_target(clock);
        const std::uint8_t state =
            source_.coin_healthy(keys_[clock], ring, params_.p) ? kHealthy : kInfected;

        pending_ring_[clock] = source_.next_ring(keys_[clock], time_);
        queue_.push({pending_ring_[clock].time, clock, ++generation_[clock]});

        RingOutcome outcome{time_, target, state, config_.state[target] != state};
        if (outcome.changed)
            apply_flip(target, state, time_);
        return outcome;
    }
    time_ = std::max(time_, horizon);
    return std::nullopt;
}

namespace
{

// Incremental count of axis-parallel windows of `length` vertices that hold no infection.
class GoodSetTracker
{
public:
    GoodSetTracker(const Box& box, int length, const Configuration& config)
        : box_(box), length_(length), last_start_(box.side_length() + 1 - length)
    {
        if (length < 1 || length > box.side_length() + 1)
            throw std::invalid_argument("good-set interval length must lie in [1, L + 1]");
        counts_.assign(static_cast<std::size_t>(box.dim()),
                       std::vector<std::int32_t>(static_cast<std::size_t>(box.size()), 0));
        for (int axis = 0; axis < box.dim(); ++axis)
            for (VertexIndex v = 0; v < box.size(); ++v)
                if (box.coordinate(v, axis) <= last_start_)
                    ++empty_;
        for (VertexIndex v = 0; v < box.size(); ++v)
            if (config.infected(v))
                update(v, +1);
    }

    void on_flip(VertexIndex v, std::uint8_t state) { update(v, state == kInfected ? +1 : -1); }
    bool good() const { return empty_ == 0; }

private:
    void update(VertexIndex v, int delta)
    {
        for (int axis = 0; axis < box_.dim(); ++axis) {
            const int c = box_.coordinate(v, axis);
            const int lo = std::max(0, c - length_ + 1);
            const int hi = std::min(c, last_start_);
            auto& counts = counts_[axis];
            for (int s = lo; s <= hi; ++s) {
                auto& n = counts[v - (c - s) * box_.stride(axis)];
                if (n == 0 && delta > 0)
                    --empty_;
                n += delta;
                if (n == 0)
                    ++empty_;
            }
        }
    }

    const Box& box_;
    int length_;
    int last_start_;
    std::int64_t empty_ = 0;
    std::vector<std::vector<std::int32_t>> counts_;
};

} // namespace

std::vector<Vertex> all_vertices(const Box& box)
{
    std::vector<Vertex> out;
    out.reserve(static_cast<std::size_t>(box.size()));
    for (VertexIndex v = 0; v < box.size(); ++v)
        out.push_back(box.decode(v));
    return out;
}

TrajectoryStats simulate(const ModelParams& params, const Configuration& initial,
                         const RandomSource& source, const SimulateOptions& options)
{
    params.validate();
    const Box box = params.box();
    initial.validate(box);
    if (!(options.horizon >= 0.0))
        throw std::invalid_argument("horizon must be non-negative");
    if (std::isinf(options.horizon) && !options.stop_when_tracked_infected)
        throw std::invalid_argument("an infinite horizon needs a stop rule");

    TrajectoryStats stats;
    stats.tracked = options.tracked;
    const std::size_t n = options.tracked.size();
    stats.infection_time.assign(n, kInfinity);
    stats.occupation_time.assign(n, 0.0);

    // Vertex -> tracked slots (a vertex may be listed more than once).
    std::vector<std::int32_t> first_slot(static_cast<std::size_t>(box.size()), -1);
    std::vector<std::int32_t> next_slot(n, -1);
    std::vector<double> infected_since(n, 0.0);
    std::size_t remaining = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!box.contains(options.tracked[k]))
            throw std::invalid_argument("tracked vertex outside the box");
        const VertexIndex v = box.encode(options.tracked[k]);
        next_slot[k] = first_slot[v];
        first_slot[v] = static_cast<std::int32_t>(k);
        if (initial.infected(v))
            stats.infection_time[k] = 0.0;
        else
            ++remaining;
    }

    Simulator sim(params, initial, source);
    std::optional<GoodSetTracker> good;
    if (options.good_set_length) {
        good.emplace(box, *options.good_set_length, initial);
        if (good->good())
            stats.good_set_time = 0.0;
    }

    const bool stop_rule = options.stop_when_tracked_infected;
    while (!(stop_rule && remaining == 0)) {
        const auto outcome = sim.step(options.horizon);
        if (!outcome)
            break;
        if (!outcome->changed)
            continue;
        const VertexIndex v = outcome->vertex;
        const double t = outcome->time;
        for (auto k = first_slot[v]; k >= 0; k = next_slot[k]) {
            if (outcome->new_state == kInfected) {
                infected_since[k] = t;
                if (std::isinf(stats.infection_time[k])) {
                    stats.infection_time[k] = t;
                    --remaining;
                }
            } else {
                stats.occupation_time[k] += t - infected_since[k];
            }
        }
        if (good) {
            good->on_flip(v, outcome->new_state);
            if (!stats.good_set_time && good->good())
                stats.good_set_time = t;
        }
    }

    stats.end_time = std::min(sim.time(), options.horizon);
    const auto& final_config = sim.configuration();
    for (std::size_t k = 0; k < n; ++k)
        if (final_config.infected(box.encode(options.tracked[k])))
            stats.occupation_time[k] += stats.end_time - infected_since[k];
    stats.rings = sim.ring_count();
    stats.flips = sim.flip_count();
    stats.final_configuration = final_config;
    return stats;
}

double default_censoring_cap(const ModelParams& params, const Vertex& x)
{
    const double reach = std::max(sup_norm(x), 1);
    return 10.0 * (4.0 * reach + params.dim * std::pow(static_cast<double>(params.side), 2.0 / 3.0));
}

CensoredTime infection_time(const ModelParams& params, const Configuration& initial,
                            const Vertex& x, const RandomSource& source, std::optional<double> cap)
{
    params.validate();
    const Box box = params.box();
    initial.validate(box);
    if (!box.contains(x))
        throw std::invalid_argument("infection_time: vertex outside the box");
    if (initial.infected(box.encode(x)))
        return {0.0, false};

    ModelParams local = params;
    local.side = sup_norm(x);
    const Box sub = local.box();
    const VertexIndex target = sub.encode(x);
    const double limit = cap.value_or(default_censoring_cap(params, x));

    Simulator sim(local, initial.restricted(box, sub), source);
    while (auto outcome = sim.step(limit))
        if (outcome->changed && outcome->vertex == target)
            return {outcome->time, false};
    return {limit, true};
}

double occupation_time(const ModelParams& params, const Configuration& initial, const Vertex& v,
                       double t, const RandomSource& source)
{
    params.validate();
    const Box box = params.box();
    initial.validate(box);
    if (!box.contains(v))
        throw std::invalid_argument("occupation_time: vertex outside the box");
    if (!(t >= 0.0) || std::isinf(t))
        throw std::invalid_argument("occupation_time: t must be finite and non-negative");

    ModelParams local = params;
    local.side = sup_norm(v);
    SimulateOptions options;
    options.horizon = t;
    options.tracked = {v};
    const auto stats = simulate(local, initial.restricted(box, local.box()), source, options);
    return stats.occupation_time.front();
}

int good_set_length(int side)
{
    if (side < 2)
        return std::max(side + 1, 1);
    const double l = std::floor(std::pow(std::log(static_cast<double>(side)), 4));
    return static_cast<int>(std::clamp(l, 1.0, static_cast<double>(side + 1)));
}

bool in_good_set(const Box& box, const Configuration& config, int length)
{
    if (length < 1 || length > box.side_length() + 1)
        throw std::invalid_argument("good-set interval length must lie in [1, L + 1]");
    for (int axis = 0; axis < box.dim(); ++axis)
        for (VertexIndex start = 0; start < box.size(); ++start) {
            if (box.coordinate(start, axis) + length > box.side_length() + 1)
                continue;
            bool hit = false;
            for (int k = 0; k < length && !hit; ++k)
                hit = config.infected(start + k * box.stride(axis));
            if (!hit)
                return false;
        }
    return true;
}

CensoredTime good_set_hitting_time(const ModelParams& params, const Configuration& initial,
                                   int length, const RandomSource& source, std::optional<double> cap)
{
    params.validate();
    const Box box = params.box();
    initial.validate(box);
    GoodSetTracker good(box, length, initial);
    if (good.good())
        return {0.0, false};
    const double limit = cap.value_or(default_censoring_cap(params, box.far_corner()));
    Simulator sim(params, initial, source);
    while (auto outcome = sim.step(limit)) {
        if (!outcome->changed)
            continue;
        good.on_flip(outcome->vertex, outcome->new_state);
        if (good.good())
            return {outcome->time, false};
    }
    return {limit, true};
}

} // namespace eastlab
