#pragma once

#include "eastlab/lattice.hpp"

#include <cstdint>

namespace eastlab
{

// Identity of a Poisson clock (or any other random object). Keys are built
// from coordinates with trailing zeros stripped, so a vertex of the
// hyperplane {x_d = 0} and its (d-1)-dimensional image share a key, and keys
// never depend on the box size.
struct ClockKey
{
    std::uint64_t value = 0;

    friend bool operator==(ClockKey a, ClockKey b) { return a.value == b.value; }
};

// One ring of a clock. A ring is addressed by its unit-time bin and its slot
// inside the bin; the coin tossed at the ring is addressed the same way, so
// every coupled copy driven by the same source sees the same coin.
struct Ring
{
    double time = 0.0;
    std::int64_t bin = 0;
    int slot = 0;
};

std::uint64_t mix64(std::uint64_t z);

// Seeded, stateless source of Poisson clocks and coins.
//
// A rate-one Poisson clock is realised bin by bin: the number of rings in
// [k, k+1) is Poisson(1) and their positions are uniform, all drawn from a
// counter-based hash of (seed, key, k, slot). That gives random access to
// "first ring after time a", which both the event-driven simulator and the
// first-passage oracle use, so the two agree bit for bit.
class RandomSource
{
public:
    explicit RandomSource(std::uint64_t seed = 0) : seed_(seed) {}

    std::uint64_t seed() const { return seed_; }

    // Independent source for replica `replica` of a batch.
    RandomSource replica(std::uint64_t replica) const;

    // Makes edge (x - e_1, x) use the clock of site x. Only a bijection in d = 1.
    RandomSource with_edge_site_bijection() const;
    bool edge_site_bijection() const { return edge_as_site_; }

    ClockKey site_key(const Vertex& x) const;
    ClockKey edge_key(const Vertex& head, int axis) const;

    // First ring strictly after `after` (after >= 0).
    Ring next_ring(ClockKey key, double after) const;

    double coin_uniform(ClockKey key, const Ring& ring) const;
    // True when the resampled state is healthy (probability p).
    bool coin_healthy(ClockKey key, const Ring& ring, double p) const
    {
        return coin_uniform(key, ring) < p;
    }

    // Generic addressable draws in (0, 1) and Exp(1).
    double uniform(ClockKey key, std::uint64_t counter) const;
    double exponential(ClockKey key, std::uint64_t counter) const;

private:
    double bin_uniform(ClockKey key, std::int64_t bin, int slot) const;
    int bin_count(ClockKey key, std::int64_t bin) const;

    std::uint64_t seed_;
    bool edge_as_site_ = false;
};

} // namespace eastlab
