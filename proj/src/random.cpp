#include "eastlab/random.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace eastlab
{

namespace
{

constexpr std::uint64_t kSiteTag = 0x5349544500000001ULL;
constexpr std::uint64_t kEdgeTag = 0x4544474500000002ULL;
constexpr std::uint64_t kCoinSalt = 0xC01A5A17C01A5A17ULL;
constexpr std::uint64_t kCountSlot = 0;
constexpr std::uint64_t kGenericSalt = 0x6E6E657269630003ULL;
constexpr int kMaxRingsPerBin = 24;

double to_open_unit(std::uint64_t h)
{
    return (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t hash_coordinates(std::uint64_t tag, const Vertex& x)
{
    int last = static_cast<int>(x.size());
    while (last > 0 && x[last - 1] == 0)
        --last;
    std::uint64_t h = mix64(tag);
    for (int i = 0; i < last; ++i)
        h = mix64(h ^ static_cast<std::uint64_t>(static_cast<std::int64_t>(x[i])));
    return mix64(h ^ static_cast<std::uint64_t>(last));
}

// Cumulative Poisson(1) distribution, P(N <= k).
const std::array<double, kMaxRingsPerBin>& poisson_cdf()
{
    static const std::array<double, kMaxRingsPerBin> table = [] {
        std::array<double, kMaxRingsPerBin> cdf{};
        double term = std::exp(-1.0);
        double sum = 0.0;
        for (int k = 0; k < kMaxRingsPerBin; ++k) {
            sum += term;
            cdf[k] = sum;
            term /= (k + 1);
        }
        return cdf;
    }();
    return table;
}

} // namespace

std::uint64_t mix64(std::uint64_t z)
{
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

RandomSource RandomSource::replica(std::uint64_t replica) const
{
    RandomSource r(mix64(seed_ ^ mix64(replica + 0x7265706CULL)));
    r.edge_as_site_ = edge_as_site_;
    return r;
}

RandomSource RandomSource::with_edge_site_bijection() const
{
    RandomSource r(*this);
    r.edge_as_site_ = true;
    return r;
}

ClockKey RandomSource::site_key(const Vertex& x) const
{
    return {hash_coordinates(kSiteTag, x)};
}

ClockKey RandomSource::edge_key(const Vertex& head, int axis) const
{
    if (edge_as_site_)
        return site_key(head);
    return {mix64(hash_coordinates(kEdgeTag, head) ^ static_cast<std::uint64_t>(axis + 1))};
}

double RandomSource::bin_uniform(ClockKey key, std::int64_t bin, int slot) const
{
    std::uint64_t h = mix64(seed_ ^ key.value);
    h = mix64(h ^ static_cast<std::uint64_t>(bin));
    h = mix64(h + static_cast<std::uint64_t>(slot) * 0xD1B54A32D192ED03ULL);
    return to_open_unit(h);
}

int RandomSource::bin_count(ClockKey key, std::int64_t bin) const
{
    const double u = bin_uniform(key, bin, kCountSlot);
    const auto& cdf = poisson_cdf();
    int k = 0;
    while (k < kMaxRingsPerBin - 1 && u > cdf[k])
        ++k;
    return k;
}

Ring RandomSource::next_ring(ClockKey key, double after) const
{
    if (!(after >= 0.0))
        throw std::invalid_argument("next_ring: time must be non-negative");
    auto bin = static_cast<std::int64_t>(std::floor(after));
    for (;; ++bin) {
        const int count = bin_count(key, bin);
        Ring best{std::numeric_limits<double>::infinity(), bin, 0};
        for (int slot = 1; slot <= count; ++slot) {
            const double t = static_cast<double>(bin) + bin_uniform(key, bin, slot);
            if (t > after && t < best.time) {
                best.time = t;
                best.slot = slot;
            }
        }
        if (best.slot != 0)
            return best;
    }
}

double RandomSource::coin_uniform(ClockKey key, const Ring& ring) const
{
    return bin_uniform({key.value ^ kCoinSalt}, ring.bin, ring.slot);
}

double RandomSource::uniform(ClockKey key, std::uint64_t counter) const
{
    std::uint64_t h = mix64(seed_ ^ key.value ^ kGenericSalt);
    h = mix64(h ^ counter);
    return to_open_unit(h);
}

double RandomSource::exponential(ClockKey key, std::uint64_t counter) const
{
    return -std::log(uniform(key, counter));
}

} // namespace eastlab
