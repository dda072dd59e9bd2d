#include "eastlab/acceptance.hpp"

#include "eastlab/cli.hpp"
#include "eastlab/constants.hpp"
#include "eastlab/dynamics.hpp"
#include "eastlab/fpp.hpp"
#include "eastlab/mixing.hpp"
#include "eastlab/parallel.hpp"
#include "eastlab/percolation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <ostream>
#include <random>
#include <sstream>

namespace eastlab
{

namespace
{

std::string fixed(double x, int digits = 4)
{
    std::ostringstream os;
    os << std::setprecision(digits) << std::fixed << x;
    return os.str();
}

std::string sci(double x)
{
    std::ostringstream os;
    os << std::setprecision(2) << std::scientific << x;
    return os.str();
}

std::string with_se(const EstimateCI& e)
{
    return fixed(e.estimate) + " +/- " + fixed(e.std_error);
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Check
{
    bool passed = true;
    std::string detail;
};

// Values shared between criteria; computed on first use.
class Suite
{
public:
    Suite(const AcceptanceOptions& options) : opt_(options), root_(options.seed) {}

    Check oracle_equivalence() const
    {
        std::int64_t mismatches = 0, compared = 0;
        for (Flavor flavor : {Flavor::East, Flavor::ModifiedEast}) {
            const ModelParams params{2, flavor, 0.0, 15};
            const Box box = params.box();
            SimulateOptions sim;
            sim.tracked = all_vertices(box);
            sim.stop_when_tracked_infected = true;
            const Configuration start = Configuration::all_healthy(box);
            const auto counts = run_replicas(100, opt_.jobs, [&](std::int64_t s) {
                const RandomSource src = source(1).replica(static_cast<std::uint64_t>(s));
                const auto stats = simulate(params, start, src, sim);
                const auto oracle = fpp_times(params, src);
                std::int64_t bad = 0;
                for (std::size_t k = 0; k < sim.tracked.size(); ++k)
                    bad += stats.infection_time[k] != oracle[box.encode(sim.tracked[k])];
                return bad;
            });
            for (auto c : counts)
                mismatches += c;
            compared += 100 * box.size();
        }
        return {mismatches == 0, std::to_string(compared) + " vertex times compared over 2 flavors x 100 seeds, " +
                                     std::to_string(mismatches) + " mismatches"};
    }

    Check one_dimensional_closed_form() const
    {
        const int n = 100;
        const ModelParams params{1, Flavor::East, 0.0, n};
        const Configuration start = Configuration::all_healthy(params.box());
        const Vertex x = Vertex::Constant(1, n);
        const auto times = run_replicas(10000, opt_.jobs, [&](std::int64_t r) {
            return infection_time(params, start, x, source(2).replica(static_cast<std::uint64_t>(r))).time;
        });
        RunningStats s;
        for (double t : times)
            s.add(t);
        const double gap = std::abs(s.mean() - (n + 1));
        return {gap <= 3.0 * s.standard_error(),
                "mean tau(100 e1) = " + fixed(s.mean()) + " +/- " + fixed(s.standard_error()) +
                    " vs n + 1 = 101 (|gap| = " + fixed(gap) + ", 3 se = " + fixed(3.0 * s.standard_error()) + ")"};
    }

    Check reversibility() const
    {
        double worst = 0.0;
        int count = 0;
        for (auto [d, L] : {std::pair{2, 1}, std::pair{1, 3}})
            for (Flavor flavor : {Flavor::East, Flavor::ModifiedEast})
                for (double p : {0.2, 0.5, 0.8}) {
                    worst = std::max(worst, detailed_balance_violation(build_generator({d, flavor, p, L})));
                    ++count;
                }
        return {worst < 1e-12, std::to_string(count) + " generators, max detailed-balance violation " + sci(worst) +
                                   " (< 1e-12)"};
    }

    Check tv_exactness() const
    {
        std::vector<double> grid;
        for (int k = 0; k < 50; ++k)
            grid.push_back(10.0 * k / 49.0);
        double worst = 0.0;
        bool monotone = true;
        for (int d : {1, 2, 3})
            for (double p : {0.2, 0.5, 0.8}) {
                const auto curve = tv_curve({d, Flavor::East, p, 0}, grid);
                monotone = monotone && curve.non_increasing();
                for (std::size_t k = 0; k < grid.size(); ++k)
                    worst = std::max(worst, std::abs(curve.values[k] - std::exp(-grid[k]) * std::max(p, 1.0 - p)));
            }
        for (auto [d, L] : {std::pair{1, 3}, std::pair{2, 1}})
            for (Flavor flavor : {Flavor::East, Flavor::ModifiedEast})
                for (double p : {0.2, 0.5, 0.8})
                    monotone = monotone && tv_curve({d, flavor, p, L}, grid).non_increasing();
        return {worst < 1e-8 && monotone, "L = 0 max |d(t) - e^-t max(p, 1-p)| = " + sci(worst) +
                                              " (< 1e-8); all exact curves non-increasing: " +
                                              (monotone ? "yes" : "no")};
    }

    Check flavor_identity() const
    {
        bool generators_equal = true;
        for (int L = 0; L <= 10; ++L) {
            const auto east = build_generator({1, Flavor::East, 0.3, L});
            const auto modified = build_generator({1, Flavor::ModifiedEast, 0.3, L});
            generators_equal = generators_equal && east.Q.nonZeros() == modified.Q.nonZeros() &&
                               SparseGenerator(east.Q - modified.Q).norm() == 0.0;
        }
        const ModelParams east{1, Flavor::East, 0.3, 30};
        const ModelParams modified{1, Flavor::ModifiedEast, 0.3, 30};
        const Configuration start = Configuration::all_healthy(east.box());
        const auto diverged = run_replicas(100, opt_.jobs, [&](std::int64_t s) {
            const RandomSource src = source(5).replica(static_cast<std::uint64_t>(s));
            Simulator a(east, start, src);
            Simulator b(modified, start, src.with_edge_site_bijection());
            for (;;) {
                const auto ra = a.step(50.0);
                const auto rb = b.step(50.0);
                if (ra.has_value() != rb.has_value())
                    return 1;
                if (!ra)
                    return a.configuration() == b.configuration() ? 0 : 1;
                if (ra->time != rb->time || ra->vertex != rb->vertex || ra->new_state != rb->new_state)
                    return 1;
            }
        });
        const auto bad = std::count(diverged.begin(), diverged.end(), 1);
        return {generators_equal && bad == 0,
                std::string("generators equal for L = 0..10: ") + (generators_equal ? "yes" : "no") +
                    "; trajectories diverging under the clock bijection: " + std::to_string(bad) + " / 100"};
    }

    Check thresholds()
    {
        const auto& bond = pc(PercolationKind::Bond);
        const auto& site = pc(PercolationKind::Site);
        const bool bond_ok = bond.estimate >= 0.60 && bond.estimate <= 0.69;
        const bool site_ok = site.estimate >= 0.66 && site.estimate <= 0.75;

        bool monotone = true;
        for (auto kind : {PercolationKind::Bond, PercolationKind::Site}) {
            std::vector<EstimateCI> curve;
            for (int k = 0; k <= 10; ++k)
                curve.push_back(crossing_probability(2, kind, 0.5 + 0.03 * k, 128, 0.2, 400,
                                                     source(60 + k + (kind == PercolationKind::Site ? 20 : 0)),
                                                     opt_.jobs));
            for (std::size_t k = 0; k + 1 < curve.size(); ++k)
                monotone = monotone && leq_within_ci(curve[k], curve[k + 1]);
        }

        std::string gate;
        for (auto kind : {PercolationKind::Bond, PercolationKind::Site}) {
            const auto s = estimate_pc_scaling(2, kind, {32, 64, 128}, 400, 1e-4, source(66), opt_.jobs);
            gate += std::string(gate.empty() ? "" : "; ") + std::string(to_string(kind)) + " drift " + fixed(s.drift) + " vs width " + fixed(s.last_width) +
                    (s.stable ? " stable" : " not stable");
        }
        return {bond_ok && site_ok && monotone,
                "p_c(bond, n=128) = " + fixed(bond.estimate) + " [" + fixed(bond.lower) + ", " + fixed(bond.upper) +
                    "] in [0.60, 0.69]; p_c(site, n=128) = " + fixed(site.estimate) + " [" + fixed(site.lower) +
                    ", " + fixed(site.upper) + "] in [0.66, 0.75]; crossing curves monotone within CI: " +
                    (monotone ? "yes" : "no") + "; scale gate 32/64/128 (informational): " + gate};
    }

    Check condition()
    {
        const double bond = 2.0 * beta_c(pc(PercolationKind::Bond).estimate);
        const double site = 2.0 * beta_c(pc(PercolationKind::Site).estimate);
        double worst = 0.0;
        std::vector<double> probes{pc(PercolationKind::Bond).estimate, pc(PercolationKind::Site).estimate};
        for (int k = 1; k <= 9; ++k)
            probes.push_back(0.1 * k);
        for (double p : probes)
            worst = std::max(worst, std::abs(beta_T(threshold_time(p)) - beta_c(p)));
        return {bond < 0.92 && site < 1.0 && worst < 1e-12,
                "2 beta_c(bond) = " + fixed(bond) + " (< 0.92), 2 beta_c(site) = " + fixed(site) +
                    " (< 1.0), max |beta_T(T_c) - beta_c| = " + sci(worst)};
    }

    Check speed_separation() const
    {
        FrontOptions f;
        f.dim = 2;
        f.flavor = Flavor::East;
        f.p = 0.02;
        f.n = 200;
        f.reps = 500;
        f.jobs = opt_.jobs;
        const auto profile = front_profile(f, source(8));
        const bool sim_ok = profile.diagonal.estimate <= 0.95 && profile.axis.estimate >= 0.98 &&
                            profile.axis.estimate <= 1.1 && profile.censored_diagonal == 0 &&
                            profile.censored_axis == 0;

        const int n = 400;
        const ModelParams params{2, Flavor::East, 0.0, n};
        const Box box = params.box();
        const VertexIndex diag = box.encode(diagonal(2, n));
        const VertexIndex axis = box.encode(unit_vector(2, 0) * n);
        const auto pairs = run_replicas(200, opt_.jobs, [&](std::int64_t r) {
            const auto t = fpp_times(params, source(80).replica(static_cast<std::uint64_t>(r)));
            return std::pair{t[diag] / n, t[axis] / n};
        });
        RunningStats d_stats, a_stats;
        for (auto [d, a] : pairs) {
            d_stats.add(d);
            a_stats.add(a);
        }
        const bool oracle_ok = d_stats.mean() <= 0.95 && a_stats.mean() >= 0.98 && a_stats.mean() <= 1.1;
        return {sim_ok && oracle_ok,
                "p = 0.02, n = 200: tau(n e*)/n = " + with_se(profile.diagonal) + " (<= 0.95), tau(n e1)/n = " +
                    with_se(profile.axis) + " (in [0.98, 1.1]); p = 0 oracle, n = 400: " + fixed(d_stats.mean()) +
                    " vs " + fixed(a_stats.mean())};
    }

    Check tail() const
    {
        const int ell = 20;
        const ModelParams params{2, Flavor::East, 0.05, ell};
        const Box box = params.box();
        const Vertex x = diagonal(2, ell);
        const std::int64_t reps = 2000;
        // Adversarial starts: all healthy, and a lone infection at the origin.
        std::vector<double> worst;
        double worst_mean = -1.0;
        for (const auto& start : {Configuration::all_healthy(box), Configuration::single_infection(box, box.origin())}) {
            auto times = run_replicas(reps, opt_.jobs, [&](std::int64_t r) {
                const auto t = infection_time(params, start, x, source(9).replica(static_cast<std::uint64_t>(r)));
                return t.censored ? kInfinity : t.time;
            });
            RunningStats s;
            for (double t : times)
                s.add(std::min(t, 1e9));
            if (s.mean() > worst_mean) {
                worst_mean = s.mean();
                worst = std::move(times);
            }
        }
        std::sort(worst.begin(), worst.end());

        auto survival_fit = [&](double from, double step) {
            std::vector<double> ts, logs;
            for (double t = from;; t += step) {
                const auto above = worst.end() - std::upper_bound(worst.begin(), worst.end(), t);
                if (above == 0)
                    break;
                ts.push_back(t);
                logs.push_back(std::log(static_cast<double>(above) / static_cast<double>(reps)));
            }
            return std::pair{ts.size(), ts.size() >= 3 ? std::optional(fit_line(ts, logs)) : std::nullopt};
        };

        const double start = 3.0 * ell;
        const auto beyond = worst.end() - std::upper_bound(worst.begin(), worst.end(), start);
        const auto [points, fit] = survival_fit(start, ell / 4.0);
        const double c0 = worst[worst.size() / 2] / ell;
        const auto [diag_points, diag_fit] = survival_fit(c0 * ell, ell / 10.0);
        std::string diagnostic = "; fitted c0 = median/l = " + fixed(c0, 3);
        if (diag_fit)
            diagnostic += ", slope beyond c0 l = " + fixed(diag_fit->slope) + " +/- " + fixed(diag_fit->slope_stderr) +
                          " over " + std::to_string(diag_points) + " grid points";
        diagnostic += "; largest sample " + fixed(worst.back(), 2);

        if (!fit)
            return {false, std::to_string(beyond) + " of " + std::to_string(reps) +
                               " samples exceed 3l = " + fixed(start, 0) +
                               ": too few survivors to fit a log-survival slope beyond 3l" + diagnostic};
        const bool negative = fit->slope + kZ95 * fit->slope_stderr < 0.0;
        return {negative, "slope beyond 3l = " + fixed(fit->slope) + " +/- " + fixed(fit->slope_stderr) + " over " +
                              std::to_string(points) + " grid points" + diagnostic};
    }

    Check rho_ordering()
    {
        const auto& r0 = rho(0.0);
        const auto& r02 = rho(0.02);
        const auto& r05 = rho(0.05);
        const auto& r3 = rho(0.3);
        const bool unit = std::abs(r0.estimate - 1.0) <= kZ95 * r0.std_error;
        const bool ordered = leq_within_ci(r02, r05) && leq_within_ci(r05, r3);
        return {unit && ordered, "rho(0) = " + with_se(r0) + ", rho(0.02) = " + with_se(r02) + ", rho(0.05) = " +
                                     with_se(r05) + ", rho(0.3) = " + with_se(r3)};
    }

    Check good_set()
    {
        const int L = 40;
        const ModelParams params{2, Flavor::East, 0.05, L};
        const double window = cutoff_window(L);
        const double T_L = cutoff_center(rho(0.05).estimate, 2, L);
        const double threshold = T_L + 0.25 * window;
        const int length = good_set_length(L);
        const Configuration start = Configuration::all_healthy(params.box());
        const auto times = run_replicas(200, opt_.jobs, [&](std::int64_t r) {
            return good_set_hitting_time(params, start, length, source(11).replica(static_cast<std::uint64_t>(r)));
        });
        std::int64_t late = 0;
        double longest = 0.0;
        for (const auto& t : times) {
            late += t.censored || t.time > threshold;
            longest = std::max(longest, t.time);
        }
        const double freq = static_cast<double>(late) / 200.0;
        return {freq <= 0.05, "l = " + std::to_string(length) + ", T_L + L^(2/3)/4 = " + fixed(threshold, 2) +
                                  ", P(tau > threshold) = " + fixed(freq, 3) + " (<= 0.05), longest " +
                                  fixed(longest, 2)};
    }

    Check appendix_crossing()
    {
        const double p = pc(PercolationKind::Bond).estimate + 0.1;
        const auto e = crossing_probability(2, PercolationKind::Bond, p, 200, 0.2, 500, source(12), opt_.jobs);
        return {e.estimate >= 0.95, "p = " + fixed(p) + ", crossing probability " + with_se(e) + " (>= 0.95)"};
    }

    Check determinism() const
    {
        namespace fs = std::filesystem;
        const fs::path dir = fs::temp_directory_path() /
                             ("eastlab-accept-" + std::to_string(std::random_device{}()) + "-" +
                              std::to_string(opt_.seed));
        fs::create_directories(dir);
        auto run_to = [&](std::vector<std::string> args, const std::string& name) {
            const std::string path = (dir / name).string();
            args.insert(args.end(), {"--out", path});
            std::ostringstream out, err;
            if (cli::run(args, out, err) != 0)
                throw std::runtime_error("cli run failed: " + err.str());
            std::ifstream in(path, std::ios::binary);
            return std::string(std::istreambuf_iterator<char>(in), {});
        };
        const std::string seed = std::to_string(opt_.seed);
        const std::vector<std::string> fpp{"fpp", "--d", "2", "--L", "15", "--flavor", "bond", "--seed", seed};
        const bool fpp_same = run_to(fpp, "fpp1.csv") == run_to(fpp, "fpp2.csv");

        const std::vector<std::string> cross{"perc-crossing", "--n", "48", "--reps", "300", "--p",
                                             "0.55,0.6,0.65,0.7", "--seed", seed};
        auto with_jobs = [](std::vector<std::string> a, int j) {
            a.insert(a.end(), {"--jobs", std::to_string(j)});
            return a;
        };
        const bool cross_same = run_to(with_jobs(cross, 1), "c1.csv") == run_to(with_jobs(cross, 4), "c4.csv");

        const std::vector<std::string> rho{"rho", "--p", "0.05", "--n", "50,100,150", "--reps", "24", "--seed", seed};
        const bool rho_same = run_to(with_jobs(rho, 1), "r1.json") == run_to(with_jobs(rho, 3), "r3.json");

        const std::vector<std::string> front{"front", "--p", "0.05", "--n", "20", "--reps", "40", "--seed", seed};
        const bool front_same = run_to(with_jobs(front, 1), "f1.csv") == run_to(with_jobs(front, 5), "f5.csv");

        std::error_code ec;
        fs::remove_all(dir, ec);
        auto yn = [](bool b) { return b ? "identical" : "DIFFERENT"; };
        return {fpp_same && cross_same && rho_same && front_same,
                std::string("fpp rerun ") + yn(fpp_same) + "; perc-crossing jobs 1 vs 4 " + yn(cross_same) +
                    "; rho jobs 1 vs 3 " + yn(rho_same) + "; front jobs 1 vs 5 " + yn(front_same)};
    }

    // Time spent computing shared inputs (p_c, rho) so far.
    double prerequisite_seconds() const { return prerequisite_seconds_; }

private:
    RandomSource source(std::uint64_t criterion) const { return root_.replica(0xACCE000ULL + criterion); }

    const EstimateCI& pc(PercolationKind kind)
    {
        auto& slot = kind == PercolationKind::Bond ? pc_bond_ : pc_site_;
        if (!slot) {
            const auto t0 = std::chrono::steady_clock::now();
            slot = estimate_pc(2, kind, 128, 1000, 1e-4, source(kind == PercolationKind::Bond ? 61 : 62), opt_.jobs)
                       .p_c;
            prerequisite_seconds_ += seconds_since(t0);
        }
        return *slot;
    }

    EstimateCI rho(double p)
    {
        for (const auto& [q, e] : rho_)
            if (q == p)
                return e;
        const auto t0 = std::chrono::steady_clock::now();
        rho_.emplace_back(p, estimate_rho(p, default_rho_scales(), 100, source(100), opt_.jobs).rho);
        prerequisite_seconds_ += seconds_since(t0);
        return rho_.back().second;
    }

    AcceptanceOptions opt_;
    RandomSource root_;
    std::optional<EstimateCI> pc_bond_, pc_site_;
    std::vector<std::pair<double, EstimateCI>> rho_;
    double prerequisite_seconds_ = 0.0;
};

struct Criterion
{
    int id;
    const char* name;
    double budget;
    // Budget counts only the work beyond the shared p_c / rho inputs.
    bool beyond_prerequisites;
    std::function<Check(Suite&)> run;
};

} // namespace

std::string format_result(const CriterionResult& r)
{
    std::ostringstream os;
    os << (r.passed ? "[PASS] " : "[FAIL] ") << std::setw(2) << std::setfill('0') << r.id << std::setfill(' ') << " "
       << r.name << " (" << fixed(r.seconds, 1) << " s of " << fixed(r.budget_seconds, 0) << " s): " << r.detail;
    return os.str();
}

std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options, std::ostream& out)
{
    const std::vector<Criterion> criteria{
        {1, "oracle-equivalence", 30, false, [](Suite& s) { return s.oracle_equivalence(); }},
        {2, "one-dimensional-closed-form", 10, false, [](Suite& s) { return s.one_dimensional_closed_form(); }},
        {3, "reversibility", 5, false, [](Suite& s) { return s.reversibility(); }},
        {4, "tv-exactness", 5, false, [](Suite& s) { return s.tv_exactness(); }},
        {5, "flavor-identity-d1", 30, false, [](Suite& s) { return s.flavor_identity(); }},
        {6, "percolation-thresholds", 600, false, [](Suite& s) { return s.thresholds(); }},
        {7, "condition-check", 1, true, [](Suite& s) { return s.condition(); }},
        {8, "speed-separation", 600, false, [](Suite& s) { return s.speed_separation(); }},
        {9, "tail-behavior", 600, false, [](Suite& s) { return s.tail(); }},
        {10, "rho-estimation", 600, false, [](Suite& s) { return s.rho_ordering(); }},
        {11, "good-set-hitting", 900, true, [](Suite& s) { return s.good_set(); }},
        {12, "appendix-crossing", 300, true, [](Suite& s) { return s.appendix_crossing(); }},
        {13, "determinism", 60, false, [](Suite& s) { return s.determinism(); }},
    };
    auto selected = [&](int id) {
        return options.only.empty() || std::find(options.only.begin(), options.only.end(), id) != options.only.end();
    };

    Suite suite(options);
    std::vector<CriterionResult> results;
    for (const auto& c : criteria) {
        if (!selected(c.id))
            continue;
        CriterionResult r;
        r.id = c.id;
        r.name = c.name;
        r.budget_seconds = c.budget;
        const auto t0 = std::chrono::steady_clock::now();
        const double prerequisites_before = suite.prerequisite_seconds();
        try {
            const Check check = c.run(suite);
            r.passed = check.passed;
            r.detail = check.detail;
        } catch (const std::exception& e) {
            r.passed = false;
            r.detail = std::string("exception: ") + e.what();
        }
        r.seconds = seconds_since(t0);
        if (c.beyond_prerequisites)
            r.seconds -= suite.prerequisite_seconds() - prerequisites_before;
        if (r.seconds > r.budget_seconds) {
            r.passed = false;
            r.detail += "; over the time budget";
        }
        out << format_result(r) << std::endl;
        results.push_back(std::move(r));
    }
    return results;
}

} // namespace eastlab
