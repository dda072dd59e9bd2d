#pragma once

#include "eastlab/lattice.hpp"
#include "eastlab/random.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <queue>
#include <string>
#include <string_view>
#include <vector>

namespace eastlab
{

// East: one clock per vertex, rate max_i 1{x - e_i infected}.
// ModifiedEast: one clock per positively oriented edge, rate sum_i 1{x - e_i infected}.
enum class Flavor
{
    East,
    ModifiedEast,
};

std::string_view to_string(Flavor flavor);
// Accepts "east"/"site"/"s" and "modified"/"modified-east"/"bond"/"b".
Flavor parse_flavor(std::string_view text);

inline constexpr std::uint8_t kInfected = 0;
inline constexpr std::uint8_t kHealthy = 1;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct ModelParams
{
    int dim = 1;
    Flavor flavor = Flavor::East;
    // Probability that a resampled vertex is healthy. p = 0 is allowed.
    double p = 0.0;
    int side = 0;

    Box box() const { return Box(dim, side); }
    void validate() const;
};

struct Configuration
{
    std::vector<std::uint8_t> state;

    static Configuration all_healthy(const Box& box);
    static Configuration all_infected(const Box& box);
    static Configuration single_infection(const Box& box, const Vertex& x);

    std::size_t size() const { return state.size(); }
    bool infected(VertexIndex v) const { return state[static_cast<std::size_t>(v)] == kInfected; }
    void validate(const Box& box) const;

    // Copy of the states on `to`, a sub-box of `from` sharing its origin.
    Configuration restricted(const Box& from, const Box& to) const;

    friend bool operator==(const Configuration&, const Configuration&) = default;
};

// c_x(omega): 1 at the origin, otherwise the East or Modified East constraint.
// Vertices of U_x outside the positive orthant count as healthy.
int transition_rate(const ModelParams& params, const Configuration& config, const Vertex& x);

struct RingOutcome
{
    double time = 0.0;
    // Vertex whose state was resampled. Only eligible clocks are queued, so
    // every ring that fires is an update.
    VertexIndex vertex = -1;
    std::uint8_t new_state = kHealthy;
    bool changed = false;
};

// Event-driven graphical construction on the box Lambda_L.
//
// Only clocks whose constraint currently holds are kept in the queue. A clock
// that becomes eligible at time t is scheduled at its first ring after t,
// which is read from the shared RandomSource, so dormant rings are skipped
// without altering the realisation. At p = 0 a clock whose target is already
// infected is also dormant, since nothing can happen there.
class Simulator
{
public:
    Simulator(const ModelParams& params, Configuration initial, const RandomSource& source);

    const ModelParams& params() const { return params_; }
    const Box& box() const { return box_; }
    double time() const { return time_; }
    const Configuration& configuration() const { return config_; }
    std::int64_t ring_count() const { return rings_; }
    std::int64_t flip_count() const { return flips_; }

    // Fires the next ring at time <= horizon. Returns nullopt, with time()
    // advanced to the horizon, when there is none.
    std::optional<RingOutcome> step(double horizon = kInfinity);

private:
    struct Pending
    {
        double time;
        std::int64_t clock;
        std::uint32_t generation;

        bool operator>(const Pending& other) const
        {
            return time != other.time ? time > other.time : clock > other.clock;
        }
    };

    std::int64_t clock_count() const;
    bool clock_eligible(std::int64_t clock) const;
    void refresh_clock(std::int64_t clock, double now);
    void apply_flip(VertexIndex v, std::uint8_t state, double now);
    VertexIndex clock_target(std::int64_t clock) const;

    ModelParams params_;
    Box box_;
    Configuration config_;
    RandomSource source_;
    double time_ = 0.0;
    std::int64_t rings_ = 0;
    std::int64_t flips_ = 0;

    std::vector<ClockKey> keys_;
    std::vector<Ring> pending_ring_;
    std::vector<std::uint32_t> generation_;
    std::vector<std::uint8_t> scheduled_;
    // East: number of infected vertices in U_x inside the box.
    std::vector<std::uint8_t> infected_behind_;
    std::priority_queue<Pending, std::vector<Pending>, std::greater<>> queue_;
};

struct SimulateOptions
{
    double horizon = kInfinity;
    std::vector<Vertex> tracked;
    // Track the hitting time of the good set with this interval length.
    std::optional<int> good_set_length;
    // Stop as soon as every tracked vertex has been infected at least once.
    bool stop_when_tracked_infected = false;
};

struct TrajectoryStats
{
    std::vector<Vertex> tracked;
    // First infection time per tracked vertex; +inf when not reached.
    std::vector<double> infection_time;
    // Time spent infected during [0, end_time] per tracked vertex.
    std::vector<double> occupation_time;
    std::optional<double> good_set_time;
    double end_time = 0.0;
    std::int64_t rings = 0;
    std::int64_t flips = 0;
    Configuration final_configuration;
};

// Runs the dynamics until the horizon (or the stop rule). Requires a finite
// horizon unless stop_when_tracked_infected is set.
TrajectoryStats simulate(const ModelParams& params, const Configuration& initial,
                         const RandomSource& source, const SimulateOptions& options);

std::vector<Vertex> all_vertices(const Box& box);

struct CensoredTime
{
    double time = 0.0;
    bool censored = false;
};

// 10 * (4 * max(|x|_inf, 1) + d L^{2/3}).
double default_censoring_cap(const ModelParams& params, const Vertex& x);

// inf{t : omega_t(x) = 0}, simulated on Lambda_{|x|_inf}, which realises the
// same path as the full box. Censored at `cap` (default_censoring_cap if unset).
CensoredTime infection_time(const ModelParams& params, const Configuration& initial,
                            const Vertex& x, const RandomSource& source,
                            std::optional<double> cap = std::nullopt);

// Lebesgue time in [0, t] during which v is infected.
double occupation_time(const ModelParams& params, const Configuration& initial, const Vertex& v,
                       double t, const RandomSource& source);

// floor(log(L)^4) clamped to [1, L + 1].
int good_set_length(int side);

// Every axis-parallel run of `length` consecutive box vertices holds an infection.
bool in_good_set(const Box& box, const Configuration& config, int length);

// Hitting time of the good set; censored at `cap` (default: the censoring cap of L e*).
CensoredTime good_set_hitting_time(const ModelParams& params, const Configuration& initial,
                                   int length, const RandomSource& source,
                                   std::optional<double> cap = std::nullopt);

} // namespace eastlab
