#pragma once

// Trace-driven decision loop: mobility traces, PoA association, critical
// chain detection, periodic re-placement, metrics and capacity sweeps.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <ostream>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp> // nlohmann/json (vendored)

#include "chainplace/allocation.hpp"
#include "chainplace/baselines.hpp"
#include "chainplace/cost_model.hpp"
#include "chainplace/errors.hpp"
#include "chainplace/placement_bu.hpp"
#include "chainplace/pushup_bupu.hpp"
#include "chainplace/rational.hpp"
#include "chainplace/service_model.hpp"
#include "chainplace/topology.hpp"

namespace chainplace {

using vehicle_id = std::int64_t;

// ---------------------------------------------------------------------------
// Traces

struct trace_event {
    double time = 0;
    vehicle_id vehicle = 0;
    double x = 0;
    double y = 0;
    bool departed = false;
};

inline void write_trace_csv(std::ostream& out, const std::vector<trace_event>& events) {
    out << "time_sec,vehicle_id,x_m,y_m\n";
    for (const auto& e : events) {
        std::ostringstream row;
        row.precision(10);
        row << e.time << ',' << e.vehicle << ',';
        if (e.departed)
            row << "departed,departed";
        else
            row << e.x << ',' << e.y;
        out << row.str() << '\n';
    }
}

/// Reads `time_sec,vehicle_id,x_m,y_m`; rows with "departed" in both
/// coordinates mark departures. The result is stably sorted by time.
inline std::vector<trace_event> read_trace_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw config_error("trace file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line != "time_sec,vehicle_id,x_m,y_m") throw config_error("trace header must be 'time_sec,vehicle_id,x_m,y_m'");
    std::vector<trace_event> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string t, v, x, y;
        if (!std::getline(ss, t, ',') || !std::getline(ss, v, ',') || !std::getline(ss, x, ',') || !std::getline(ss, y))
            throw config_error("trace row " + std::to_string(row) + " has too few fields");
        trace_event e;
        try {
            e.time = std::stod(t);
            e.vehicle = std::stoll(v);
            if (x == "departed" && y == "departed") {
                e.departed = true;
            } else {
                e.x = std::stod(x);
                e.y = std::stod(y);
            }
        } catch (const std::logic_error&) {
            throw config_error("trace row " + std::to_string(row) + " is malformed");
        }
        out.push_back(e);
    }
    std::stable_sort(out.begin(), out.end(), [](const trace_event& a, const trace_event& b) { return a.time < b.time; });
    return out;
}

inline std::vector<trace_event> read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open trace file " + path);
    return read_trace_csv(in);
}

/// Random-waypoint generator with churn.
struct mobility_spec {
    int vehicles = 300;
    double mean_speed_kmh = 15.4;
    double speed_spread = 0.5;          ///< speed ~ mean * U(1 - spread, 1 + spread)
    double sample_dt_s = 1;
    double duration_s = 60;
    double departure_rate_per_s = 1.0 / 300; ///< per vehicle; each departure is replaced by a new vehicle
};

inline std::vector<trace_event> synth_mobility(const mobility_spec& spec, const rect& area, std::uint64_t seed) {
    if (spec.vehicles < 0 || spec.mean_speed_kmh < 0 || !(spec.sample_dt_s > 0) || spec.duration_s < 0 ||
        spec.speed_spread < 0 || spec.speed_spread > 1 || spec.departure_rate_per_s < 0)
        throw config_error("invalid mobility specification");
    if (area.degenerate()) throw config_error("degenerate mobility area");
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x6d6f62u};
    std::mt19937_64 rng(sseq);
    std::uniform_real_distribution<double> ux(area.x0, area.x1);
    std::uniform_real_distribution<double> uy(area.y0, area.y1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    struct mover {
        vehicle_id id;
        double x, y, wx, wy, speed;
    };
    vehicle_id next_id = 0;
    auto spawn = [&] {
        mover m;
        m.id = next_id++;
        m.x = ux(rng);
        m.y = uy(rng);
        m.wx = ux(rng);
        m.wy = uy(rng);
        m.speed = spec.mean_speed_kmh / 3.6 * (1 - spec.speed_spread + 2 * spec.speed_spread * unit(rng));
        return m;
    };
    std::vector<mover> alive;
    for (int i = 0; i < spec.vehicles; ++i) alive.push_back(spawn());

    std::vector<trace_event> out;
    const auto steps = static_cast<std::int64_t>(std::floor(spec.duration_s / spec.sample_dt_s + 1e-9));
    for (std::int64_t k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * spec.sample_dt_s;
        if (k > 0) {
            const double p_depart = std::min(1.0, spec.departure_rate_per_s * spec.sample_dt_s);
            std::vector<mover> next;
            std::vector<mover> arrivals;
            for (auto& m : alive) {
                if (unit(rng) < p_depart) {
                    out.push_back({t, m.id, 0, 0, true});
                    arrivals.push_back(spawn());
                    continue;
                }
                double left = m.speed * spec.sample_dt_s;
                while (left > 0) {
                    const double dx = m.wx - m.x;
                    const double dy = m.wy - m.y;
                    const double dist = std::hypot(dx, dy);
                    if (dist <= left) {
                        m.x = m.wx;
                        m.y = m.wy;
                        left -= dist;
                        m.wx = ux(rng);
                        m.wy = uy(rng);
                        if (dist == 0 && m.wx == m.x && m.wy == m.y) break;
                    } else {
                        m.x += dx / dist * left;
                        m.y += dy / dist * left;
                        left = 0;
                    }
                }
                next.push_back(m);
            }
            next.insert(next.end(), arrivals.begin(), arrivals.end());
            alive = std::move(next);
        }
        for (const auto& m : alive) out.push_back({t, m.id, m.x, m.y, false});
    }
    return out;
}

/// rows x cols antennas at cell centres, each displaced by up to `jitter_m`
/// per axis (kept inside the area). Ids are row-major from 0.
inline std::vector<antenna> grid_antennas(const rect& area, int rows, int cols, double jitter_m, std::uint64_t seed) {
    if (rows < 1 || cols < 1) throw config_error("antenna grid needs at least one row and column");
    std::seed_seq sseq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), 0x616e74u};
    std::mt19937_64 rng(sseq);
    std::uniform_real_distribution<double> jit(-jitter_m, jitter_m);
    std::vector<antenna> out;
    const double w = area.width() / cols;
    const double h = area.height() / rows;
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) {
            const double x = std::clamp(area.x0 + (c + 0.5) * w + (jitter_m > 0 ? jit(rng) : 0.0), area.x0, area.x1);
            const double y = std::clamp(area.y0 + (r + 0.5) * h + (jitter_m > 0 ? jit(rng) : 0.0), area.y0, area.y1);
            out.push_back({static_cast<poa_id>(r * cols + c), x, y});
        }
    return out;
}

// ---------------------------------------------------------------------------
// Association and criticality

/// Leaf whose antenna is nearest to (x, y); ties go to the lower PoA id.
inline dc_id assign_poa(const network_tree& tree, double x, double y) {
    const auto& root_cov = tree.dc(tree.root()).coverage;
    if (!root_cov.degenerate() && !root_cov.contains({x, y}))
        throw invalid_input_error("position (" + std::to_string(x) + ", " + std::to_string(y) + ") lies outside the area");
    std::optional<dc_id> best;
    double best_d = 0;
    poa_id best_poa = 0;
    for (const auto& d : tree.datacenters()) {
        if (!d.is_leaf() || !d.position) continue;
        const double dist = std::hypot(d.position->x - x, d.position->y - y);
        const poa_id p = d.poa.value_or(d.id);
        if (!best || dist < best_d || (dist == best_d && p < best_poa)) {
            best = d.id;
            best_d = dist;
            best_poa = p;
        }
    }
    if (!best) throw lookup_error("no positioned PoA in the tree");
    return *best;
}

/// The committed allocation still serves the chain from its (updated) PoA.
inline bool serves(const network_tree& tree, const chain_spec& chain, const allocation& alloc) {
    if (!tree.is_ancestor_or_self(alloc.dc, chain.poa)) return false;
    return meets_target(total_delay(chain, alloc, alloc.dc, tree), chain.target_delay_s);
}

/// Placed chains whose datacenter left their recomputed feasible set or whose
/// committed allocation no longer meets the target.
inline std::vector<chain_id> detect_critical(const network_tree& tree, const chain_table& chains, const placement& state,
                                             const feasible_map& sets) {
    std::vector<chain_id> out;
    for (const auto& [id, alloc] : state.assign) {
        auto it = chains.find(id);
        if (it == chains.end()) continue;
        if (!sets.at(id).contains(alloc.dc) || !serves(tree, it->second, alloc)) out.push_back(id);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Scenario

enum class algo_kind { bupu, ffit, cpvnf, oracle };

inline std::string to_string(algo_kind a) {
    switch (a) {
    case algo_kind::bupu: return "bupu";
    case algo_kind::ffit: return "ffit";
    case algo_kind::cpvnf: return "cpvnf";
    case algo_kind::oracle: return "oracle";
    }
    return "?";
}

inline algo_kind parse_algo(const std::string& s) {
    if (s == "bupu") return algo_kind::bupu;
    if (s == "ffit") return algo_kind::ffit;
    if (s == "cpvnf") return algo_kind::cpvnf;
    if (s == "oracle") return algo_kind::oracle;
    throw config_error("unknown algorithm '" + s + "'");
}

inline augmentation_policy parse_augmentation(const std::string& s) {
    if (s == "auto") return augmentation_policy::automatic_search();
    const auto r = parse_rational(s);
    if (r < rational(1)) throw config_error("augmentation must be at least 1");
    return augmentation_policy::fixed(r);
}

struct scenario_config {
    rect area{0, 0, 2000, 2000};
    std::string antennas_file; ///< empty -> jittered grid
    int grid_rows = 8;
    int grid_cols = 8;
    double grid_jitter_m = 50;
    int height = 4;
    level_settings levels{.c_cpu = 100};
    service_catalog catalog = baseline_catalog();
    std::string rt_class = "rt";
    std::string std_class = "std";
    double rt_ratio = 0.3;
    cost_params costs;
    double period_s = 1;
    augmentation_policy aug = augmentation_policy::fixed(rational(1));
    std::uint64_t seed = 1;
    std::uint64_t repetition = 0;
    std::string trace_file; ///< empty -> synthetic
    mobility_spec mobility;
    double duration_s = 60; ///< decision horizon; <= 0 uses the whole trace
    pu_order order = pu_order::non_increasing;
    bool abort_on_infeasible = false;
    double oracle_budget = 1e6;
    bool check_invariants = false; ///< verify capacity bookkeeping after every decision

    void validate() const {
        if (!(period_s > 0)) throw config_error("decision period must be positive");
        if (rt_ratio < 0 || rt_ratio > 1) throw config_error("rt ratio must lie in [0, 1]");
        if (!catalog.count(rt_class)) throw config_error("catalog has no class '" + rt_class + "'");
        if (!catalog.count(std_class)) throw config_error("catalog has no class '" + std_class + "'");
        if (area.degenerate()) throw config_error("degenerate area");
        if (height < 2) throw config_error("height must be at least 2");
    }
};

namespace detail {

inline std::string resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    if (path.is_relative() && !base.empty()) return (base / path).string();
    return p;
}

} // namespace detail

/// Scenario JSON; every key is optional:
/// {"area": [x0,y0,x1,y1], "antennas": {"file": str} | {"grid": {"rows","cols","jitter_m"}},
///  "height", "c_cpu", "capacity_rule": "level_plus_one" | "level" | [multipliers...],
///  "cpu_costs": [per level], "splits": [[rows, cols] per level], "link": {"prop_delay_s","bandwidth_bps","sched_bits","bw_cost"},
///  "catalog": str (file) | {"classes": ...}, "work_per_vm", "cpu_cap", "rt_class", "std_class", "rt_ratio",
///  "costs": {"migration", "bandwidth_unit_bps"}, "period_s", "augmentation": "R" | "auto",
///  "seed", "repetition", "trace": {"file": str} | {"synthetic": {"vehicles","mean_speed_kmh","speed_spread",
///  "sample_dt_s","departure_rate_per_s"}}, "duration_s", "pu_order": "non_increasing" | "non_decreasing",
///  "abort_on_infeasible", "oracle_budget"}
inline scenario_config config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {}) {
    scenario_config c;
    try {
        if (j.contains("area")) {
            const auto a = j.at("area").get<std::vector<double>>();
            if (a.size() != 4) throw config_error("area needs four numbers");
            c.area = {a[0], a[1], a[2], a[3]};
        }
        if (j.contains("antennas")) {
            const auto& a = j.at("antennas");
            if (a.contains("file")) c.antennas_file = detail::resolve(base_dir, a.at("file").get<std::string>());
            if (a.contains("grid")) {
                const auto& g = a.at("grid");
                c.grid_rows = g.value("rows", c.grid_rows);
                c.grid_cols = g.value("cols", c.grid_cols);
                c.grid_jitter_m = g.value("jitter_m", c.grid_jitter_m);
            }
        }
        c.height = j.value("height", c.height);
        c.levels.c_cpu = j.value("c_cpu", c.levels.c_cpu);
        if (j.contains("capacity_rule")) {
            const auto& r = j.at("capacity_rule");
            if (r.is_array()) {
                c.levels.rule = capacity_rule::table;
                c.levels.multipliers = r.get<std::vector<std::int64_t>>();
            } else if (r == "level_plus_one") {
                c.levels.rule = capacity_rule::level_plus_one;
            } else if (r == "level") {
                c.levels.rule = capacity_rule::level;
            } else {
                throw config_error("unknown capacity rule");
            }
        }
        if (j.contains("cpu_costs")) c.levels.cpu_costs = j.at("cpu_costs").get<std::vector<double>>();
        if (j.contains("splits"))
            for (const auto& s : j.at("splits")) c.levels.splits.push_back({s.at(0).get<int>(), s.at(1).get<int>()});
        if (j.contains("link")) {
            const auto& l = j.at("link");
            link_params lp;
            lp.prop_delay_s = l.value("prop_delay_s", lp.prop_delay_s);
            lp.bandwidth_bps = l.value("bandwidth_bps", lp.bandwidth_bps);
            lp.sched_bits = l.value("sched_bits", lp.sched_bits);
            lp.bw_cost = l.value("bw_cost", lp.bw_cost);
            c.levels.uplinks.assign(static_cast<std::size_t>(std::max(c.height, 1)), lp);
        }
        const double work = j.value("work_per_vm", 0.003);
        const std::int64_t cap = j.value("cpu_cap", std::int64_t{30});
        c.catalog = baseline_catalog(work, cap);
        if (j.contains("catalog")) {
            const auto& cat = j.at("catalog");
            c.catalog = cat.is_string() ? read_catalog(detail::resolve(base_dir, cat.get<std::string>())) : catalog_from_json(cat);
        }
        c.rt_class = j.value("rt_class", c.rt_class);
        c.std_class = j.value("std_class", c.std_class);
        c.rt_ratio = j.value("rt_ratio", c.rt_ratio);
        if (j.contains("costs")) {
            const auto& k = j.at("costs");
            c.costs.migration_cost = k.value("migration", c.costs.migration_cost);
            c.costs.bandwidth_unit_bps = k.value("bandwidth_unit_bps", c.costs.bandwidth_unit_bps);
        }
        c.period_s = j.value("period_s", c.period_s);
        if (j.contains("augmentation")) {
            const auto& a = j.at("augmentation");
            c.aug = parse_augmentation(a.is_string() ? a.get<std::string>() : std::to_string(a.get<double>()));
        }
        c.seed = j.value("seed", c.seed);
        c.repetition = j.value("repetition", c.repetition);
        if (j.contains("trace")) {
            const auto& t = j.at("trace");
            if (t.contains("file")) c.trace_file = detail::resolve(base_dir, t.at("file").get<std::string>());
            if (t.contains("synthetic")) {
                const auto& s = t.at("synthetic");
                c.mobility.vehicles = s.value("vehicles", c.mobility.vehicles);
                c.mobility.mean_speed_kmh = s.value("mean_speed_kmh", c.mobility.mean_speed_kmh);
                c.mobility.speed_spread = s.value("speed_spread", c.mobility.speed_spread);
                c.mobility.sample_dt_s = s.value("sample_dt_s", c.mobility.sample_dt_s);
                c.mobility.departure_rate_per_s = s.value("departure_rate_per_s", c.mobility.departure_rate_per_s);
            }
        }
        c.duration_s = j.value("duration_s", c.duration_s);
        if (j.contains("pu_order")) {
            const auto o = j.at("pu_order").get<std::string>();
            if (o == "non_increasing")
                c.order = pu_order::non_increasing;
            else if (o == "non_decreasing")
                c.order = pu_order::non_decreasing;
            else
                throw config_error("unknown pu_order '" + o + "'");
        }
        c.abort_on_infeasible = j.value("abort_on_infeasible", c.abort_on_infeasible);
        c.check_invariants = j.value("check_invariants", c.check_invariants);
        c.oracle_budget = j.value("oracle_budget", c.oracle_budget);
    } catch (const nlohmann::json::exception& e) {
        throw config_error(std::string("scenario config: ") + e.what());
    }
    c.validate();
    return c;
}

inline scenario_config read_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config " + path);
    try {
        return config_from_json(nlohmann::json::parse(in), std::filesystem::path(path).parent_path());
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("config " + path + ": " + e.what());
    }
}

/// Antennas and trace materialized once, so repeated runs (sweeps) share them.
struct prepared_scenario {
    std::vector<antenna> antennas;
    std::vector<trace_event> trace;
};

inline prepared_scenario prepare(const scenario_config& cfg) {
    cfg.validate();
    prepared_scenario p;
    p.antennas = cfg.antennas_file.empty() ? grid_antennas(cfg.area, cfg.grid_rows, cfg.grid_cols, cfg.grid_jitter_m, cfg.seed)
                                           : read_antennas_csv(cfg.antennas_file);
    if (cfg.trace_file.empty()) {
        auto spec = cfg.mobility;
        if (cfg.duration_s > 0) spec.duration_s = cfg.duration_s;
        p.trace = synth_mobility(spec, cfg.area, cfg.seed);
    } else {
        p.trace = read_trace_csv(cfg.trace_file);
    }
    return p;
}

inline network_tree build_scenario_tree(const scenario_config& cfg, const prepared_scenario& prep) {
    return build_tree(prep.antennas, cfg.area, cfg.height, cfg.levels);
}

/// One uniform draw in [0, 1) per (seed, vehicle); a vehicle is RT iff its
/// draw is below the RT ratio, so RT sets are nested across ratios.
inline double class_draw(std::uint64_t seed, vehicle_id v) {
    std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(v),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(v) >> 32), 0x636c73u};
    std::mt19937_64 rng(s);
    return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline std::uint64_t tie_rank(std::uint64_t seed, std::uint64_t repetition, vehicle_id v) {
    std::seed_seq s{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(repetition),
                    static_cast<std::uint32_t>(v), static_cast<std::uint32_t>(static_cast<std::uint64_t>(v) >> 32), 0x726e6bu};
    std::mt19937_64 rng(s);
    return rng();
}

// ---------------------------------------------------------------------------
// Decision loop

struct decision_metrics {
    double t = 0;
    algo_kind algo = algo_kind::bupu;
    bool feasible = true;
    bool reshuffled = false;
    rational achieved_r{1};
    std::size_t n_chains = 0;
    std::size_t n_changed = 0;
    std::size_t n_critical = 0;
    std::size_t n_new = 0;
    std::size_t n_departed = 0;
    std::size_t n_migrations = 0;
    cost_breakdown cost;
    double compulsory_mig = 0;
    double noncompulsory_mig = 0;
    double runtime_ms = 0;
};

struct run_summary {
    algo_kind algo = algo_kind::bupu;
    std::uint64_t seed = 0;
    double period_s = 1;
    double rt_ratio = 0;
    std::string augmentation;
    std::int64_t c_cpu = 0;
    std::size_t decisions = 0;
    std::size_t infeasible_decisions = 0;
    std::size_t reshuffles = 0;
    std::size_t critical_events = 0;
    std::size_t migrations = 0;
    cost_breakdown cost;
    double compulsory_mig = 0;
    double noncompulsory_mig = 0;
    std::size_t sla_violations = 0;
    double mean_sla_violation_s = 0;
    double critical_rate_per_s = 0;
    double runtime_ms = 0;
    bool aborted = false;

    bool all_feasible() const { return infeasible_decisions == 0; }
};

struct run_result {
    std::vector<decision_metrics> decisions;
    run_summary summary;
    std::vector<double> sla_durations;
    chain_table chains; ///< active chains after the last decision
    placement state;    ///< committed placement after the last decision
};

/// Runs the periodic decision loop over the prepared trace.
inline run_result run(const scenario_config& cfg, algo_kind algo, const prepared_scenario& prep) {
    cfg.validate();
    const auto tree = build_scenario_tree(cfg, prep);
    const auto& trace = prep.trace;
    double end = cfg.duration_s;
    if (!(end > 0)) end = trace.empty() ? 0 : trace.back().time;

    struct vehicle_state {
        double x = 0, y = 0;
        bool departed = false;
        bool has_chain = false;
        dc_id sample_poa = 0;
        double last_valid = 0;
        std::optional<double> onset;
    };
    std::map<vehicle_id, vehicle_state> vehicles;
    chain_table chains;
    tie_ranks ranks;
    placement state = empty_placement(tree, cfg.aug.lo);
    decision_options opts;
    opts.params = cfg.costs;
    opts.policy = cfg.aug;
    opts.order = cfg.order;
    opts.ranks = &ranks;

    run_result res;
    auto& sum = res.summary;
    sum.algo = algo;
    sum.seed = cfg.seed;
    sum.period_s = cfg.period_s;
    sum.rt_ratio = cfg.rt_ratio;
    sum.augmentation = cfg.aug.automatic ? "auto" : to_string(cfg.aug.hi);
    sum.c_cpu = cfg.levels.c_cpu;

    auto close_episode = [&](vehicle_state& v, double at) {
        if (!v.onset) return;
        res.sla_durations.push_back(std::max(0.0, at - *v.onset));
        v.onset.reset();
    };
    // SLA check of every served vehicle at one trace sample time.
    auto sample_sla = [&](double at) {
        for (auto& [vid, v] : vehicles) {
            if (v.departed || !v.has_chain || !state.has(vid)) continue;
            chain_spec c = chains.at(vid);
            c.poa = assign_poa(tree, v.x, v.y);
            const bool ok = serves(tree, c, state.assign.at(vid));
            if (ok) {
                if (v.onset) close_episode(v, (v.last_valid + at) / 2);
                v.last_valid = at;
            } else if (!v.onset) {
                v.onset = (v.last_valid + at) / 2;
            }
        }
    };

    std::size_t next = 0;
    std::size_t total_critical = 0;
    const auto t_start = std::chrono::steady_clock::now();
    for (std::int64_t k = 0;; ++k) {
        const double t = static_cast<double>(k) * cfg.period_s;
        if (t > end + 1e-9) break;

        // Ingest every sample up to t, checking SLAs at each sample instant.
        std::set<vehicle_id> departed_now;
        while (next < trace.size() && trace[next].time <= t + 1e-9) {
            const double at = trace[next].time;
            while (next < trace.size() && trace[next].time == at) {
                const auto& e = trace[next++];
                auto& v = vehicles[e.vehicle];
                if (e.departed) {
                    if (!v.departed) {
                        v.departed = true;
                        close_episode(v, at);
                        departed_now.insert(e.vehicle);
                    }
                } else if (!v.departed) {
                    v.x = e.x;
                    v.y = e.y;
                }
            }
            sample_sla(at);
        }

        const auto t0 = std::chrono::steady_clock::now();
        decision_metrics m;
        m.t = t;
        m.algo = algo;

        // Departures release their resources now.
        for (vehicle_id vid : departed_now) {
            if (chains.erase(vid)) {
                state.release(vid);
                ++m.n_departed;
            }
            vehicles[vid].has_chain = false;
        }
        // Arrivals and PoA updates.
        std::vector<chain_id> fresh;
        for (auto& [vid, v] : vehicles) {
            if (v.departed) continue;
            const dc_id leaf = assign_poa(tree, v.x, v.y);
            if (!v.has_chain) {
                const auto& cls = cfg.catalog.at(class_draw(cfg.seed, vid) < cfg.rt_ratio ? cfg.rt_class : cfg.std_class);
                chains[vid] = make_chain(cls, vid, leaf);
                ranks[vid] = tie_rank(cfg.seed, cfg.repetition, vid);
                v.has_chain = true;
                v.last_valid = t;
                fresh.push_back(vid);
            }
            auto& c = chains.at(vid);
            c.poa = leaf;
            c.current = state.has(vid) ? std::optional<dc_id>(state.where(vid)) : std::nullopt;
        }
        const auto sets = gfa(tree, chains);
        const auto critical = detect_critical(tree, chains, state, sets);
        std::set<chain_id> changed_set(critical.begin(), critical.end());
        for (const auto& [id, c] : chains)
            if (!state.has(id)) changed_set.insert(id);
        const std::vector<chain_id> changed(changed_set.begin(), changed_set.end());
        const std::set<chain_id> critical_set(critical.begin(), critical.end());

        decision_output out;
        switch (algo) {
        case algo_kind::bupu: out = bupu(tree, chains, sets, changed, state, opts); break;
        case algo_kind::ffit: out = ffit_decision(tree, chains, sets, changed, state, opts); break;
        case algo_kind::cpvnf: out = cpvnf_decision(tree, chains, sets, changed, state, opts); break;
        case algo_kind::oracle:
            out = oracle_decision(tree, chains, sets, state, opts, oracle_options{cfg.oracle_budget, false});
            break;
        }

        for (const auto& [id, a] : out.result.assign) {
            const auto& c = chains.at(id);
            if (!c.current || *c.current == a.dc) continue;
            const double price = cfg.costs.migration_price(c, *c.current, a.dc);
            ++m.n_migrations;
            if (critical_set.count(id))
                m.compulsory_mig += price;
            else
                m.noncompulsory_mig += price;
        }
        // Chains that were fixed by this decision end their violation episode.
        for (const auto& [id, a] : out.result.assign) {
            auto& v = vehicles[id];
            if (v.onset && serves(tree, chains.at(id), a)) close_episode(v, t);
            if (!v.onset) v.last_valid = t;
        }

        state = std::move(out.result);
        if (cfg.check_invariants) {
            if (auto err = check_placement(tree, chains, state); !err.empty()) throw std::logic_error("t=" + std::to_string(t) + ": " + err);
            for (vehicle_id vid : departed_now)
                if (state.has(vid)) throw std::logic_error("departed vehicle " + std::to_string(vid) + " still placed");
        }
        m.feasible = out.feasible;
        m.reshuffled = out.reshuffled;
        m.achieved_r = out.achieved_r;
        m.n_chains = chains.size();
        m.n_changed = changed.size();
        m.n_critical = critical.size();
        m.n_new = fresh.size();
        m.cost = out.cost;
        m.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        total_critical += critical.size();

        ++sum.decisions;
        if (!m.feasible) ++sum.infeasible_decisions;
        if (m.reshuffled) ++sum.reshuffles;
        sum.critical_events += m.n_critical;
        sum.migrations += m.n_migrations;
        sum.cost += m.cost;
        sum.compulsory_mig += m.compulsory_mig;
        sum.noncompulsory_mig += m.noncompulsory_mig;
        res.decisions.push_back(m);
        if (!m.feasible && cfg.abort_on_infeasible) {
            sum.aborted = true;
            break;
        }
    }
    sum.sla_violations = res.sla_durations.size();
    double acc = 0;
    for (double d : res.sla_durations) acc += d;
    sum.mean_sla_violation_s = res.sla_durations.empty() ? 0 : acc / static_cast<double>(res.sla_durations.size());
    sum.critical_rate_per_s = end > 0 ? static_cast<double>(total_critical) / end : 0;
    sum.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start).count();
    res.chains = std::move(chains);
    res.state = std::move(state);
    return res;
}

inline run_result run(const scenario_config& cfg, algo_kind algo) {
    return run(cfg, algo, prepare(cfg));
}

// ---------------------------------------------------------------------------
// Capacity sweep

struct sweep_result {
    std::int64_t c_cpu = 0;
    int probes = 0;
    std::vector<std::pair<std::int64_t, bool>> trail; ///< (C_cpu, all decisions feasible) per probe
};

/// Smallest C_cpu for which every decision of the segment is feasible
/// without augmentation. The predicate is assumed monotone in C_cpu.
inline sweep_result sweep_capacity(scenario_config cfg, algo_kind algo, const prepared_scenario& prep,
                                   std::int64_t max_c_cpu = std::int64_t{1} << 20) {
    cfg.aug = augmentation_policy::fixed(rational(1));
    cfg.abort_on_infeasible = true;
    std::int64_t max_cap = 0;
    for (const auto& [name, cls] : cfg.catalog) max_cap = std::max(max_cap, cls.cpu_cap);
    // Every level with a positive multiplier must hold the largest chain cap.
    std::int64_t lo = 1;
    for (int l = 0; l < cfg.height; ++l) {
        const auto mult = cfg.levels.multiplier(l);
        if (mult > 0) lo = std::max(lo, (max_cap + mult - 1) / mult);
    }
    sweep_result res;
    auto feasible = [&](std::int64_t c) {
        cfg.levels.c_cpu = c;
        ++res.probes;
        const bool ok = run(cfg, algo, prep).summary.all_feasible();
        res.trail.emplace_back(c, ok);
        return ok;
    };
    if (feasible(lo)) {
        res.c_cpu = lo;
        return res;
    }
    std::int64_t bad = lo;
    std::int64_t good = lo * 2;
    while (!feasible(good)) {
        bad = good;
        if (good > max_c_cpu) throw invalid_input_error("no feasible capacity up to " + std::to_string(max_c_cpu));
        good *= 2;
    }
    while (good - bad > 1) {
        const std::int64_t mid = bad + (good - bad) / 2;
        if (feasible(mid))
            good = mid;
        else
            bad = mid;
    }
    res.c_cpu = good;
    return res;
}

inline sweep_result sweep_capacity(const scenario_config& cfg, algo_kind algo) {
    return sweep_capacity(cfg, algo, prepare(cfg));
}

// ---------------------------------------------------------------------------
// Output

inline void write_decisions_csv(std::ostream& out, const std::vector<decision_metrics>& rows) {
    write_decision_header(out);
    out << ",algo,feasible,n_critical,n_new,n_departed,n_migrations,compulsory_mig_cost,noncompulsory_mig_cost\n";
    for (const auto& m : rows) {
        decision_record r{m.t, m.n_chains, m.n_changed, m.reshuffled, m.achieved_r, m.cost, m.runtime_ms};
        write_decision_fields(out, r);
        out << ',' << to_string(m.algo) << ',' << (m.feasible ? 1 : 0) << ',' << m.n_critical << ',' << m.n_new << ','
            << m.n_departed << ',' << m.n_migrations << ',' << m.compulsory_mig << ',' << m.noncompulsory_mig << '\n';
    }
}

inline void write_costs_csv(std::ostream& out, const std::vector<decision_metrics>& rows) {
    out << "t,algo,migration,computation,bandwidth,total\n";
    for (const auto& m : rows)
        out << m.t << ',' << to_string(m.algo) << ',' << m.cost.migration << ',' << m.cost.computation << ',' << m.cost.bandwidth
            << ',' << m.cost.total() << '\n';
}

inline void write_summary_header(std::ostream& out) {
    out << "algo,seed,period_s,rt_ratio,augmentation,c_cpu,decisions,infeasible_decisions,reshuffles,critical_events,"
           "migrations,mig_cost,compulsory_mig_cost,noncompulsory_mig_cost,comp_cost,bw_cost,total_cost,sla_violations,"
           "mean_sla_violation_s,critical_rate_per_s,runtime_ms\n";
}

inline void write_summary_row(std::ostream& out, const run_summary& s) {
    out << to_string(s.algo) << ',' << s.seed << ',' << s.period_s << ',' << s.rt_ratio << ',' << s.augmentation << ',' << s.c_cpu
        << ',' << s.decisions << ',' << s.infeasible_decisions << ',' << s.reshuffles << ',' << s.critical_events << ','
        << s.migrations << ',' << s.cost.migration << ',' << s.compulsory_mig << ',' << s.noncompulsory_mig << ','
        << s.cost.computation << ',' << s.cost.bandwidth << ',' << s.cost.total() << ',' << s.sla_violations << ','
        << s.mean_sla_violation_s << ',' << s.critical_rate_per_s << ',' << s.runtime_ms << '\n';
}

} // namespace chainplace
