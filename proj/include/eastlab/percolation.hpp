#pragma once

#include "eastlab/lattice.hpp"
#include "eastlab/random.hpp"
#include "eastlab/stats.hpp"

#include <string_view>
#include <vector>

namespace eastlab
{

enum class PercolationKind
{
    Bond,
    Site,
};

std::string_view to_string(PercolationKind kind);
// Accepts "bond"/"b" and "site"/"s".
PercolationKind parse_percolation_kind(std::string_view text);

// Oriented percolation on a box. Every object keeps its uniform, and
// open(o) <=> uniform(o) < p, so one sample realises the monotone coupling
// over all p. Bond uniforms are indexed v * d + axis for the edge into v.
//
// Site convention: vertices of the seed set A are treated as open.
struct PercSample
{
    PercolationKind kind = PercolationKind::Bond;
    double p = 0.0;
    Box box{1, 0};
    std::vector<double> uniforms;

    bool open_site(VertexIndex v) const { return uniforms[static_cast<std::size_t>(v)] < p; }
    bool open_edge(VertexIndex head, int axis) const
    {
        return uniforms[static_cast<std::size_t>(head * box.dim() + axis)] < p;
    }
};

PercSample sample_percolation(PercolationKind kind, double p, const Box& box,
                              const RandomSource& source);

// A ~> B: an open oriented path from some a in A to some b in B.
bool crossing(const PercSample& sample, const std::vector<Vertex>& A, const std::vector<Vertex>& B);

// Smallest p at which A ~> B on this sample's uniforms: min over oriented
// paths of the largest uniform on the path (-1 when A and B intersect,
// +inf when no oriented path exists). crossing(p) <=> threshold < p.
double crossing_threshold(const PercSample& sample, const std::vector<Vertex>& A,
                          const std::vector<Vertex>& B);

// Slab geometry: A = H_0 cap [-r, r]^d and B = A + n e*, r = floor(delta n),
// translated by r e* into the box Lambda_{n + 2r}.
struct SlabGeometry
{
    Box box{1, 0};
    std::vector<Vertex> sources;
    std::vector<Vertex> targets;
};

SlabGeometry slab_geometry(int dim, int n, double delta);

// Per-replica crossing thresholds of the slab geometry.
std::vector<double> slab_thresholds(int dim, PercolationKind kind, int n, double delta,
                                    std::int64_t reps, const RandomSource& source, int jobs = 1);

EstimateCI crossing_probability(int dim, PercolationKind kind, double p, int n, double delta,
                                std::int64_t reps, const RandomSource& source, int jobs = 1);

// Open oriented path inside Lambda_l from H_{floor(delta d l)} to
// H_{floor((1 - delta) d l)}. The sample's box must be Lambda_l.
bool slab_crossing_open_path(const PercSample& sample, int scale, double delta);

struct PcEstimate
{
    int dim = 2;
    PercolationKind kind = PercolationKind::Bond;
    int n = 0;
    double delta = 0.2;
    // Point estimate, standard error and order-statistic 95% interval.
    EstimateCI p_c;
};

// Finite-size threshold: the p at which the slab crossing probability at
// scale n equals 1/2, found by bisection to `tol` on the coupled empirical curve.
PcEstimate estimate_pc(int dim, PercolationKind kind, int n, std::int64_t reps, double tol,
                       const RandomSource& source, int jobs = 1, double delta = 0.2);

struct PcScaling
{
    std::vector<PcEstimate> estimates;
    // |p(n_last) - p(n_prev)| against the last interval width.
    double drift = 0.0;
    double last_width = 0.0;
    bool stable = false;
};

PcScaling estimate_pc_scaling(int dim, PercolationKind kind, const std::vector<int>& n_values,
                              std::int64_t reps, double tol, const RandomSource& source,
                              int jobs = 1, double delta = 0.2);

// Seed set of `count` vertices on H_0: (k, -k, 0, ..., 0), k = 0..count-1.
std::vector<Vertex> hyperplane_seed_set(int dim, int count);

// P(xi_s^A != empty): some vertex of H_s is reached from A by an open oriented path.
EstimateCI survival_probability(int dim, PercolationKind kind, double p, int seed_count,
                                int generations, std::int64_t reps, const RandomSource& source,
                                int jobs = 1);

} // namespace eastlab
