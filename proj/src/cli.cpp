#include "eastlab/cli.hpp"

#include "eastlab/acceptance.hpp"
#include "eastlab/constants.hpp"
#include "eastlab/dynamics.hpp"
#include "eastlab/fpp.hpp"
#include "eastlab/mixing.hpp"
#include "eastlab/parallel.hpp"
#include "eastlab/percolation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace eastlab::cli
{

using Json = nlohmann::ordered_json;

std::string fnv1a_hex(std::string_view text)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::ostringstream os;
    os << std::hex << std::setw(16) << std::setfill('0') << h;
    return os.str();
}

std::uint64_t default_seed()
{
    if (const char* env = std::getenv("EASTLAB_SEED")) {
        std::uint64_t seed = 0;
        const std::string_view text(env);
        const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), seed);
        if (ec == std::errc() && end == text.data() + text.size())
            return seed;
        throw std::invalid_argument("EASTLAB_SEED must be an unsigned integer");
    }
    return 1;
}

namespace
{

std::string num(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

Json time_json(double t)
{
    return std::isfinite(t) ? Json(t) : Json(nullptr);
}

Json estimate_json(const EstimateCI& e)
{
    return Json{{"estimate", e.estimate}, {"std_error", e.std_error}, {"reps", e.reps},
                {"ci_lower", e.lower},    {"ci_upper", e.upper},      {"flags", e.flags}};
}

Vertex parse_vertex(const std::string& text)
{
    std::vector<int> coords;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, ',')) {
        int value = 0;
        const auto [end, ec] = std::from_chars(part.data(), part.data() + part.size(), value);
        if (ec != std::errc() || end != part.data() + part.size())
            throw std::invalid_argument("malformed vertex '" + text + "' (expected comma-separated integers)");
        coords.push_back(value);
    }
    Vertex x(static_cast<Eigen::Index>(coords.size()));
    for (std::size_t i = 0; i < coords.size(); ++i)
        x[static_cast<Eigen::Index>(i)] = coords[i];
    return x;
}

Json vertex_json(const Vertex& x)
{
    return Json(std::vector<int>(x.data(), x.data() + x.size()));
}

// Options every subcommand shares.
struct Common
{
    std::uint64_t seed = 1;
    int jobs = 1;
    std::string out = "-";
};

void add_common(CLI::App* sub, Common& c)
{
    sub->add_option("--seed", c.seed, "Master seed (default: $EASTLAB_SEED or 1)");
    sub->add_option("--jobs", c.jobs, "Replica workers (results do not depend on this)")
        ->check(CLI::PositiveNumber);
    sub->add_option("--out", c.out, "Output path, '-' for standard output");
}

// Buffered output with a provenance header; written in one go at the end.
class Emitter
{
public:
    Emitter(const Common& c, Json spec) : common_(c), spec_(std::move(spec))
    {
        spec_["seed"] = c.seed;
        hash_ = fnv1a_hex(spec_.dump());
    }

    Json json_header() const
    {
        return Json{{"tool", "eastlab"}, {"version", kVersion}, {"runspec_hash", hash_},
                    {"seed", common_.seed}, {"runspec", spec_}};
    }

    std::string csv_header() const
    {
        return "# eastlab " + std::string(kVersion) + " runspec=" + hash_ + " seed=" +
               std::to_string(common_.seed) + "\n";
    }

    void json(Json body, std::ostream& out) const
    {
        Json doc;
        doc["header"] = json_header();
        for (auto& [k, v] : body.items())
            doc[k] = v;
        write(doc.dump(2) + "\n", common_.out, out);
    }

    void csv(const std::string& rows, std::ostream& out) const { write(csv_header() + rows, common_.out, out); }

    static void write(const std::string& text, const std::string& path, std::ostream& out)
    {
        if (path == "-" || path.empty()) {
            out << text;
            return;
        }
        std::ofstream file(path, std::ios::binary | std::ios::trunc);
        if (!file)
            throw std::runtime_error("cannot open output file '" + path + "' for writing");
        file << text;
        if (!file)
            throw std::runtime_error("failed writing output file '" + path + "'");
    }

private:
    Common common_;
    Json spec_;
    std::string hash_;
};

// Fails early, before any long computation, when the output cannot be created.
void check_writable(const std::string& path)
{
    if (path == "-" || path.empty())
        return;
    std::ofstream probe(path, std::ios::app);
    if (!probe)
        throw std::runtime_error("cannot open output file '" + path + "' for writing");
}

struct ModelFlags
{
    int d = 2;
    int L = 10;
    double p = 0.1;
    std::string flavor = "east";

    void add(CLI::App* sub, bool with_p = true)
    {
        sub->add_option("--d", d, "Dimension")->check(CLI::Range(1, 16));
        sub->add_option("--L", L, "Box side")->check(CLI::NonNegativeNumber);
        if (with_p)
            sub->add_option("--p", p, "Healthy probability in [0, 1)")->check(CLI::Range(0.0, 1.0));
        sub->add_option("--flavor", flavor, "east|modified (aliases site|bond)");
    }

    ModelParams params() const
    {
        ModelParams m{d, parse_flavor(flavor), p, L};
        m.validate();
        return m;
    }

    Json json() const
    {
        return Json{{"d", d}, {"L", L}, {"p", p}, {"flavor", to_string(parse_flavor(flavor))}};
    }
};

// --config resolution: entries go in right after the subcommand name, and any
// key also given on the command line is skipped, so flags override the file.
std::vector<std::string> expand_config(const std::vector<std::string>& args)
{
    std::vector<std::string> rest;
    std::string path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size())
                throw CLI::ArgumentMismatch("--config needs a file path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty() || rest.empty())
        return rest;

    std::set<std::string> given;
    for (const auto& a : rest)
        if (a.rfind("--", 0) == 0)
            given.insert(a.substr(2, a.find('=') == std::string::npos ? std::string::npos : a.find('=') - 2));

    std::vector<std::string> injected;
    for (const auto& item : CLI::ConfigINI().from_file(path)) {
        if (item.name == "++" || item.name == "--" || given.count(item.name))
            continue;
        if (item.inputs.size() == 1 && (item.inputs[0] == "true" || item.inputs[0] == "false")) {
            if (item.inputs[0] == "true")
                injected.push_back("--" + item.name);
            continue;
        }
        injected.push_back("--" + item.name);
        injected.insert(injected.end(), item.inputs.begin(), item.inputs.end());
    }
    std::vector<std::string> out{rest.front()};
    out.insert(out.end(), injected.begin(), injected.end());
    out.insert(out.end(), rest.begin() + 1, rest.end());
    return out;
}

} // namespace

int run(const std::vector<std::string>& raw_args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"eastlab: East / Modified East simulation, first-passage, percolation and mixing toolkit",
                 "eastlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);

    Common common;
    try {
        common.seed = default_seed();
    } catch (const std::exception& e) {
        err << "invalid argument: " << e.what() << "\n";
        return 2;
    }
    common.jobs = default_jobs();
    std::function<void(std::ostream&)> action;

    // simulate
    ModelFlags sim_model;
    double sim_horizon = 10.0;
    std::string sim_init = "healthy";
    std::string sim_infect;
    std::vector<std::string> sim_track;
    bool sim_good = false;
    std::uint64_t sim_replica = 0;
    auto* sim = app.add_subcommand("simulate", "Run one trajectory and report infection / occupation times");
    sim_model.add(sim);
    sim->add_option("--horizon", sim_horizon, "Simulated time")->check(CLI::NonNegativeNumber);
    sim->add_option("--init", sim_init, "Initial state: healthy|infected|single")
        ->check(CLI::IsMember({"healthy", "infected", "single"}));
    sim->add_option("--infect", sim_infect, "Vertex infected by --init single (default: far corner)");
    sim->add_option("--track", sim_track, "Tracked vertex 'x1,...,xd' (repeatable; default: far corner)")
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    sim->add_flag("--good-set", sim_good, "Record the hitting time of the good set");
    sim->add_option("--replica", sim_replica, "Replica index within the seed");
    add_common(sim, common);
    sim->callback([&] {
        action = [&](std::ostream& os) {
            const ModelParams params = sim_model.params();
            const Box box = params.box();
            Configuration init = Configuration::all_healthy(box);
            if (sim_init == "infected")
                init = Configuration::all_infected(box);
            else if (sim_init == "single")
                init = Configuration::single_infection(box, sim_infect.empty() ? box.far_corner()
                                                                              : parse_vertex(sim_infect));
            SimulateOptions opts;
            opts.horizon = sim_horizon;
            for (const auto& t : sim_track)
                opts.tracked.push_back(parse_vertex(t));
            if (opts.tracked.empty())
                opts.tracked.push_back(box.far_corner());
            for (const auto& x : opts.tracked)
                if (x.size() != params.dim || !box.contains(x))
                    throw std::invalid_argument("tracked vertex outside the box");
            if (sim_good)
                opts.good_set_length = good_set_length(params.side);

            Json spec{{"command", "simulate"}, {"model", sim_model.json()}, {"horizon", sim_horizon},
                      {"init", sim_init},      {"infect", sim_infect},      {"track", sim_track},
                      {"good_set", sim_good},  {"replica", sim_replica}};
            Emitter emit(common, spec);
            const auto stats = simulate(params, init, RandomSource(common.seed).replica(sim_replica), opts);
            Json tracked = Json::array();
            for (std::size_t k = 0; k < stats.tracked.size(); ++k)
                tracked.push_back({{"x", vertex_json(stats.tracked[k])},
                                   {"tau", time_json(stats.infection_time[k])},
                                   {"occupation_time", stats.occupation_time[k]}});
            const auto infected =
                std::count(stats.final_configuration.state.begin(), stats.final_configuration.state.end(), kInfected);
            Json body{{"tracked", tracked},
                      {"end_time", stats.end_time},
                      {"rings", stats.rings},
                      {"flips", stats.flips},
                      {"final_infected", infected}};
            if (sim_good) {
                body["good_set_length"] = *opts.good_set_length;
                body["good_set_time"] = stats.good_set_time ? Json(*stats.good_set_time) : Json(nullptr);
            }
            emit.json(body, os);
        };
    });

    // fpp
    ModelFlags fpp_model;
    fpp_model.L = 15;
    auto* fpp = app.add_subcommand("fpp", "First-passage times at p = 0 for every vertex (CSV)");
    fpp_model.add(fpp, false);
    add_common(fpp, common);
    fpp->callback([&] {
        action = [&](std::ostream& os) {
            ModelParams params = fpp_model.params();
            params.p = 0.0;
            Json model = fpp_model.json();
            model.erase("p");
            Emitter emit(common, Json{{"command", "fpp"}, {"model", model}});
            const auto times = fpp_times(params, RandomSource(common.seed));
            const Box box = params.box();
            std::string rows;
            for (int i = 0; i < params.dim; ++i)
                rows += "x" + std::to_string(i + 1) + ",";
            rows += "tau\n";
            for (VertexIndex v = 0; v < box.size(); ++v) {
                const Vertex x = box.decode(v);
                for (int i = 0; i < params.dim; ++i)
                    rows += std::to_string(x[i]) + ",";
                rows += num(times[v]) + "\n";
            }
            emit.csv(rows, os);
        };
    });

    // perc-crossing
    int pc_d = 2, pc_n = 64;
    std::string pc_kind = "bond";
    double pc_delta = 0.2;
    std::int64_t pc_reps = 200;
    std::vector<double> pc_p{0.5, 0.6, 0.7};
    auto* pcross = app.add_subcommand("perc-crossing", "Slab crossing probability on a grid of p (CSV)");
    pcross->add_option("--d", pc_d, "Dimension")->check(CLI::Range(1, 16));
    pcross->add_option("--kind", pc_kind, "bond|site");
    pcross->add_option("--n", pc_n, "Scale")->check(CLI::PositiveNumber);
    pcross->add_option("--delta", pc_delta, "Slab half-width fraction")->check(CLI::Range(0.0, 1.0));
    pcross->add_option("--reps", pc_reps, "Replicas")->check(CLI::PositiveNumber);
    pcross->add_option("--p", pc_p, "Comma-separated parameter grid")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->check(CLI::Range(0.0, 1.0));
    add_common(pcross, common);
    pcross->callback([&] {
        action = [&](std::ostream& os) {
            const auto kind = parse_percolation_kind(pc_kind);
            Emitter emit(common, Json{{"command", "perc-crossing"}, {"d", pc_d}, {"kind", to_string(kind)},
                                      {"n", pc_n}, {"delta", pc_delta}, {"reps", pc_reps}, {"p", pc_p}});
            // One set of thresholds realises the monotone coupling over the whole grid.
            const auto thresholds =
                slab_thresholds(pc_d, kind, pc_n, pc_delta, pc_reps, RandomSource(common.seed), common.jobs);
            std::string rows = "p,n,estimate,std_error,reps\n";
            for (double p : pc_p) {
                const auto hits = std::count_if(thresholds.begin(), thresholds.end(), [p](double t) { return t < p; });
                const auto e = EstimateCI::from_proportion(hits, pc_reps);
                rows += num(p) + "," + std::to_string(pc_n) + "," + num(e.estimate) + "," + num(e.std_error) + "," +
                        std::to_string(pc_reps) + "\n";
            }
            emit.csv(rows, os);
        };
    });

    // perc-pc
    int pp_d = 2;
    std::string pp_kind = "bond";
    std::vector<int> pp_n{128};
    std::int64_t pp_reps = 400;
    double pp_tol = 1e-4, pp_delta = 0.2;
    auto* ppc = app.add_subcommand("perc-pc", "Finite-size oriented percolation threshold (JSON)");
    ppc->add_option("--d", pp_d, "Dimension")->check(CLI::Range(1, 16));
    ppc->add_option("--kind", pp_kind, "bond|site");
    ppc->add_option("--n", pp_n, "Scale, or comma-separated scales for the stability gate")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->check(CLI::PositiveNumber);
    ppc->add_option("--reps", pp_reps, "Replicas per scale")->check(CLI::Range(std::int64_t{4}, std::int64_t{1} << 40));
    ppc->add_option("--tol", pp_tol, "Bisection tolerance")->check(CLI::PositiveNumber);
    ppc->add_option("--delta", pp_delta, "Slab half-width fraction")->check(CLI::Range(0.0, 1.0));
    add_common(ppc, common);
    ppc->callback([&] {
        action = [&](std::ostream& os) {
            const auto kind = parse_percolation_kind(pp_kind);
            Emitter emit(common, Json{{"command", "perc-pc"}, {"d", pp_d}, {"kind", to_string(kind)}, {"n", pp_n},
                                      {"reps", pp_reps}, {"tol", pp_tol}, {"delta", pp_delta}});
            const RandomSource source(common.seed);
            Json body{{"d", pp_d}, {"kind", to_string(kind)}, {"delta", pp_delta}};
            if (pp_n.size() == 1) {
                const auto e = estimate_pc(pp_d, kind, pp_n[0], pp_reps, pp_tol, source, common.jobs, pp_delta);
                body["n"] = e.n;
                body["p_c"] = estimate_json(e.p_c);
            } else {
                const auto s = estimate_pc_scaling(pp_d, kind, pp_n, pp_reps, pp_tol, source, common.jobs, pp_delta);
                Json scales = Json::array();
                for (const auto& e : s.estimates)
                    scales.push_back({{"n", e.n}, {"p_c", estimate_json(e.p_c)}});
                body["scales"] = scales;
                body["p_c"] = estimate_json(s.estimates.back().p_c);
                body["drift"] = s.drift;
                body["last_ci_width"] = s.last_width;
                body["stable"] = s.stable;
            }
            emit.json(body, os);
        };
    });

    // perc-survival
    int ps_d = 2, ps_s = 200;
    std::string ps_kind = "bond";
    double ps_p = 0.72;
    std::vector<int> ps_seeds{1, 2, 4, 8};
    std::int64_t ps_reps = 500;
    auto* psurv = app.add_subcommand("perc-survival", "Truncated survival probability from hyperplane seeds (CSV)");
    psurv->add_option("--d", ps_d, "Dimension")->check(CLI::Range(1, 16));
    psurv->add_option("--kind", ps_kind, "bond|site");
    psurv->add_option("--p", ps_p, "Percolation parameter")->check(CLI::Range(0.0, 1.0));
    psurv->add_option("--seeds", ps_seeds, "Comma-separated seed-set sizes")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->check(CLI::PositiveNumber);
    psurv->add_option("--generations", ps_s, "Generations s")->check(CLI::PositiveNumber);
    psurv->add_option("--reps", ps_reps, "Replicas")->check(CLI::PositiveNumber);
    add_common(psurv, common);
    psurv->callback([&] {
        action = [&](std::ostream& os) {
            const auto kind = parse_percolation_kind(ps_kind);
            Emitter emit(common, Json{{"command", "perc-survival"}, {"d", ps_d}, {"kind", to_string(kind)},
                                      {"p", ps_p}, {"seeds", ps_seeds}, {"generations", ps_s}, {"reps", ps_reps}});
            std::string rows = "seeds,generations,p,estimate,std_error,reps\n";
            for (int a : ps_seeds) {
                const auto e = survival_probability(ps_d, kind, ps_p, a, ps_s, ps_reps, RandomSource(common.seed),
                                                    common.jobs);
                rows += std::to_string(a) + "," + std::to_string(ps_s) + "," + num(ps_p) + "," + num(e.estimate) +
                        "," + num(e.std_error) + "," + std::to_string(ps_reps) + "\n";
            }
            emit.csv(rows, os);
        };
    });

    // constants
    double c_pc = 0.0;
    int c_d = 2;
    std::string c_source = "user";
    std::optional<double> c_T, c_rho;
    std::optional<int> c_L;
    bool c_table = false;
    auto* cons = app.add_subcommand("constants", "Evaluate beta_c, T_c, beta_T, lambda and T_L (JSON or table)");
    cons->add_option("--pc", c_pc, "Percolation threshold in (0, 1)")->required()->check(CLI::Range(0.0, 1.0));
    cons->add_option("--d", c_d, "Dimension")->check(CLI::Range(1, 16));
    cons->add_option("--pc-source", c_source, "Provenance of p_c")->check(CLI::IsMember({"user", "estimated"}));
    cons->add_option("--T", c_T, "Threshold time T")->check(CLI::PositiveNumber);
    cons->add_option("--rho", c_rho, "Estimated rho for T_L")->check(CLI::PositiveNumber);
    cons->add_option("--L", c_L, "Box side for T_L and the window")->check(CLI::NonNegativeNumber);
    cons->add_flag("--table", c_table, "Print a table instead of JSON");
    add_common(cons, common);
    cons->callback([&] {
        action = [&](std::ostream& os) {
            const auto r = condition_report({c_d, c_pc, c_source, c_T, c_rho, c_L});
            Json spec{{"command", "constants"}, {"pc", c_pc}, {"d", c_d}, {"pc_source", c_source}};
            if (c_T)
                spec["T"] = *c_T;
            if (c_rho)
                spec["rho"] = *c_rho;
            if (c_L)
                spec["L"] = *c_L;
            Emitter emit(common, spec);
            Json body{{"d", r.dim},
                      {"p_c", r.p_c},
                      {"p_c_source", r.p_c_source},
                      {"T_c", r.T_c},
                      {"beta_c", r.beta_c},
                      {"d_beta_c", r.d_beta_c},
                      {"condition_holds", r.condition_holds},
                      {"condition_margin", r.condition_margin}};
            if (r.T) {
                body["T"] = *r.T;
                body["beta_T"] = *r.beta_T;
                body["d_beta_T"] = *r.d_beta_T;
                body["lambda"] = r.lambda ? Json(*r.lambda) : Json(nullptr);
                if (!r.lambda_note.empty())
                    body["lambda_note"] = r.lambda_note;
            }
            if (r.T_L)
                body["T_L"] = *r.T_L;
            if (r.window)
                body["window"] = *r.window;
            if (!c_table) {
                emit.json(body, os);
                return;
            }
            std::ostringstream table;
            table << "# eastlab " << kVersion << " runspec=" << emit.json_header()["runspec_hash"].get<std::string>()
                  << " seed=" << common.seed << "\n";
            for (const auto& [k, v] : body.items())
                table << std::left << std::setw(18) << k << " " << (v.is_string() ? v.get<std::string>() : v.dump())
                      << "\n";
            Emitter::write(table.str(), common.out, os);
        };
    });

    // mix-exact
    ModelFlags mx_model;
    mx_model.d = 1;
    mx_model.L = 3;
    mx_model.p = 0.5;
    double mx_tmax = 20.0, mx_threshold = 0.25;
    int mx_points = 50;
    std::string mx_curve;
    std::int64_t mx_cap = kDefaultStateCap;
    auto* mex = app.add_subcommand("mix-exact", "Exact generator checks, TV curve and t_mix (JSON; curve as CSV)");
    mx_model.add(mex);
    mex->add_option("--t-max", mx_tmax, "Last time of the uniform grid")->check(CLI::PositiveNumber);
    mex->add_option("--points", mx_points, "Grid points")->check(CLI::Range(2, 100000));
    mex->add_option("--threshold", mx_threshold, "TV threshold for t_mix")->check(CLI::Range(0.0, 1.0));
    mex->add_option("--curve", mx_curve, "Write the TV curve to this CSV file");
    mex->add_option("--state-cap", mx_cap, "Largest admissible state space")->check(CLI::PositiveNumber);
    add_common(mex, common);
    mex->callback([&] {
        action = [&](std::ostream& os) {
            const ModelParams params = mx_model.params();
            Emitter emit(common, Json{{"command", "mix-exact"}, {"model", mx_model.json()}, {"t_max", mx_tmax},
                                      {"points", mx_points}, {"threshold", mx_threshold}, {"state_cap", mx_cap}});
            check_writable(mx_curve);
            const GeneratorMatrix g = build_generator(params, mx_cap);
            MixingOptions opts;
            opts.state_cap = mx_cap;
            std::vector<double> grid;
            for (int k = 0; k < mx_points; ++k)
                grid.push_back(mx_tmax * k / (mx_points - 1));
            const TVCurve curve = tv_curve(params, grid, opts);
            const MixingTime tm = t_mix(params, mx_threshold, opts);
            Json body{{"states", g.states},
                      {"detailed_balance_violation", detailed_balance_violation(g)},
                      {"stationarity_residual", stationarity_residual(g)},
                      {"row_sum_residual", row_sum_residual(g)},
                      {"t_mix", tm.time},
                      {"exhaustive", tm.exhaustive},
                      {"truncation_error", std::max(tm.truncation_error, curve.truncation_error)},
                      {"curve_non_increasing", curve.non_increasing()},
                      {"flags", curve.flags}};
            if (!mx_curve.empty()) {
                std::string rows = "t,d_L\n";
                for (std::size_t k = 0; k < curve.times.size(); ++k)
                    rows += num(curve.times[k]) + "," + num(curve.values[k]) + "\n";
                Emitter::write(emit.csv_header() + rows, mx_curve, os);
            }
            emit.json(body, os);
        };
    });

    // mix-couple
    ModelFlags mc_model;
    mc_model.L = 3;
    mc_model.p = 0.5;
    std::int64_t mc_reps = 200;
    double mc_horizon = 1000.0;
    std::optional<double> mc_at;
    auto* mco = app.add_subcommand("mix-couple", "Grand-coupling coalescence times (JSON)");
    mc_model.add(mco);
    mco->add_option("--reps", mc_reps, "Replicas")->check(CLI::PositiveNumber);
    mco->add_option("--horizon", mc_horizon, "Censoring horizon")->check(CLI::PositiveNumber);
    mco->add_option("--at", mc_at, "Report P(coalesced by t) at this time")->check(CLI::NonNegativeNumber);
    add_common(mco, common);
    mco->callback([&] {
        action = [&](std::ostream& os) {
            const ModelParams params = mc_model.params();
            Json spec{{"command", "mix-couple"}, {"model", mc_model.json()}, {"reps", mc_reps},
                      {"horizon", mc_horizon}};
            if (mc_at)
                spec["at"] = *mc_at;
            Emitter emit(common, spec);
            CoalescenceOptions opts;
            opts.horizon = mc_horizon;
            const auto s = coalescence_statistics(params, mc_reps, RandomSource(common.seed), opts, common.jobs);
            Json body{{"exact", s.exact}, {"mean", estimate_json(s.mean)}, {"censored", s.censored}};
            if (!s.times.empty())
                body["quantiles"] = {{"q10", s.quantile(0.1)}, {"q50", s.quantile(0.5)}, {"q90", s.quantile(0.9)}};
            if (mc_at)
                body["coalesced_by"] = s.coalesced_by(*mc_at);
            emit.json(body, os);
        };
    });

    // rho
    double r_p = 0.05;
    std::vector<int> r_n = default_rho_scales();
    std::int64_t r_reps = 100;
    auto* rho = app.add_subcommand("rho", "Inverse front speed of the one-dimensional chain (JSON)");
    rho->add_option("--p", r_p, "Healthy probability")->check(CLI::Range(0.0, 1.0));
    rho->add_option("--n", r_n, "Comma-separated scales")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->check(CLI::PositiveNumber);
    rho->add_option("--reps", r_reps, "Replicas")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
    add_common(rho, common);
    rho->callback([&] {
        action = [&](std::ostream& os) {
            Emitter emit(common, Json{{"command", "rho"}, {"p", r_p}, {"n", r_n}, {"reps", r_reps}});
            const auto r = estimate_rho(r_p, r_n, r_reps, RandomSource(common.seed), common.jobs);
            Json means = Json::array();
            for (std::size_t k = 0; k < r.n_values.size(); ++k)
                means.push_back({{"n", r.n_values[k]}, {"mean_tau", estimate_json(r.mean_times[k])}});
            emit.json(Json{{"p", r.p},
                           {"rho", estimate_json(r.rho)},
                           {"intercept", estimate_json(r.intercept)},
                           {"mean_times", means},
                           {"censored", r.censored},
                           {"nonlinear", r.nonlinear},
                           {"flags", r.flags}},
                      os);
        };
    });

    // front
    FrontOptions fr;
    fr.p = 0.02;
    std::string fr_flavor = "east";
    auto* front = app.add_subcommand("front", "Diagonal vs axis infection times from all healthy (CSV)");
    front->add_option("--d", fr.dim, "Dimension")->check(CLI::Range(1, 16));
    front->add_option("--flavor", fr_flavor, "east|modified");
    front->add_option("--p", fr.p, "Healthy probability")->check(CLI::Range(0.0, 1.0));
    front->add_option("--n", fr.n, "Scale")->check(CLI::PositiveNumber);
    front->add_option("--reps", fr.reps, "Replicas")->check(CLI::Range(std::int64_t{2}, std::int64_t{1} << 40));
    front->add_option("--rho", fr.rho, "Estimated rho for the slow-event frequency")->check(CLI::PositiveNumber);
    front->add_option("--L", fr.side, "Box side in the slow-event threshold (default n)")
        ->check(CLI::NonNegativeNumber);
    add_common(front, common);
    front->callback([&] {
        action = [&](std::ostream& os) {
            fr.flavor = parse_flavor(fr_flavor);
            fr.jobs = common.jobs;
            Json spec{{"command", "front"}, {"d", fr.dim}, {"flavor", to_string(fr.flavor)},
                      {"p", fr.p},          {"n", fr.n},   {"reps", fr.reps}};
            if (fr.rho)
                spec["rho"] = *fr.rho;
            if (fr.side)
                spec["L"] = *fr.side;
            Emitter emit(common, spec);
            const auto f = front_profile(fr, RandomSource(common.seed));
            std::string rows = "direction,estimate,std_error,reps,censored\n";
            rows += "diagonal," + num(f.diagonal.estimate) + "," + num(f.diagonal.std_error) + "," +
                    std::to_string(f.diagonal.reps) + "," + std::to_string(f.censored_diagonal) + "\n";
            rows += "axis," + num(f.axis.estimate) + "," + num(f.axis.std_error) + "," + std::to_string(f.axis.reps) +
                    "," + std::to_string(f.censored_axis) + "\n";
            if (f.slow_event)
                rows += "slow_event," + num(f.slow_event->estimate) + "," + num(f.slow_event->std_error) + "," +
                        std::to_string(f.slow_event->reps) + ",0\n";
            emit.csv(rows, os);
        };
    });

    // accept
    std::vector<int> acc_only;
    auto* acc = app.add_subcommand("accept", "Run the acceptance suite; nonzero exit on any failure");
    acc->add_option("--only", acc_only, "Comma-separated criterion numbers")
        ->delimiter(',')
        ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll)
        ->check(CLI::Range(1, 13));
    add_common(acc, common);
    int accept_status = 0;
    acc->callback([&] {
        action = [&](std::ostream& os) {
            AcceptanceOptions opts;
            opts.seed = common.seed;
            opts.jobs = common.jobs;
            opts.only = acc_only;
            std::ostringstream report;
            const auto results = run_acceptance(opts, os);
            accept_status = std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed; }) ? 0 : 1;
            if (common.out != "-") {
                for (const auto& r : results)
                    report << format_result(r) << "\n";
                Emitter::write(report.str(), common.out, os);
            }
        };
    });

    std::vector<std::string> args;
    try {
        args = expand_config(raw_args);
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == static_cast<int>(CLI::ExitCodes::Success)) {
            app.exit(e, out, err);
            return 0;
        }
        err << "error: " << e.what() << "\n\n" << app.help();
        return 2;
    }

    try {
        check_writable(common.out);
        action(out);
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return accept_status;
}

} // namespace eastlab::cli
