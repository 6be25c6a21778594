#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "support.hpp"

using namespace chainplace;

namespace {

/// Three antennas in a row, one per 1000 m cell, directly under the root.
/// The "tight" class fits only on the leaves; every vehicle gets it.
scenario_config row_config() {
    scenario_config cfg;
    cfg.area = {0, 0, 3000, 1000};
    cfg.height = 2;
    cfg.levels.c_cpu = 100;
    service_class tight;
    tight.name = "tight";
    tight.label = "RT";
    tight.vms = {{0.5, 0.001, 1e6}};
    tight.target_delay_s = 0.003;
    tight.cpu_cap = 1;
    service_class loose = tight;
    loose.name = "loose";
    loose.label = "standard";
    loose.target_delay_s = 1;
    cfg.catalog = {{"tight", tight}, {"loose", loose}};
    cfg.rt_class = "tight";
    cfg.std_class = "loose";
    cfg.rt_ratio = 1;
    cfg.duration_s = 3;
    cfg.check_invariants = true;
    return cfg;
}

std::vector<antenna> row_antennas() { return {{0, 500, 500}, {1, 1500, 500}, {2, 2500, 500}}; }

trace_event at(double t, vehicle_id v, double x) { return {t, v, x, 500, false}; }

/// One vehicle crossing all three cells, sampled every half second.
prepared_scenario crossing() {
    return {row_antennas(),
            {at(0, 0, 400), at(0.5, 0, 600), at(1, 0, 900), at(1.5, 0, 1100), at(2, 0, 1200), at(2.5, 0, 2100), at(3, 0, 2200)}};
}

scenario_config small_synthetic() {
    scenario_config cfg;
    cfg.grid_rows = 4;
    cfg.grid_cols = 4;
    cfg.height = 3;
    cfg.mobility.vehicles = 40;
    cfg.duration_s = 20;
    cfg.mobility.departure_rate_per_s = 1.0 / 30;
    cfg.check_invariants = true;
    return cfg;
}

} // namespace

TEST(TraceCsv, RoundTripWithDepartures) {
    const std::vector<trace_event> events{{0, 1, 10.5, 20}, {0, 2, 30, 40}, {1, 1, 0, 0, true}, {1, 2, 31.25, 40}};
    std::stringstream ss;
    write_trace_csv(ss, events);
    EXPECT_NE(ss.str().find("1,1,departed,departed\n"), std::string::npos);
    const auto back = read_trace_csv(ss);
    ASSERT_EQ(back.size(), events.size());
    for (std::size_t i = 0; i < events.size(); ++i) {
        EXPECT_EQ(back[i].time, events[i].time);
        EXPECT_EQ(back[i].vehicle, events[i].vehicle);
        EXPECT_EQ(back[i].departed, events[i].departed);
        if (!events[i].departed) {
            EXPECT_EQ(back[i].x, events[i].x);
            EXPECT_EQ(back[i].y, events[i].y);
        }
    }
}

TEST(TraceCsv, SortsStablyByTime) {
    std::stringstream ss("time_sec,vehicle_id,x_m,y_m\r\n2,5,1,1\r\n1,7,2,2\r\n2,3,3,3\r\n");
    const auto t = read_trace_csv(ss);
    ASSERT_EQ(t.size(), 3u);
    EXPECT_EQ(t[0].vehicle, 7);
    EXPECT_EQ(t[1].vehicle, 5);
    EXPECT_EQ(t[2].vehicle, 3);
}

TEST(TraceCsv, RejectsMalformed) {
    std::stringstream empty("");
    EXPECT_THROW(read_trace_csv(empty), config_error);
    std::stringstream header("t,v,x,y\n");
    EXPECT_THROW(read_trace_csv(header), config_error);
    std::stringstream short_row("time_sec,vehicle_id,x_m,y_m\n1,2,3\n");
    EXPECT_THROW(read_trace_csv(short_row), config_error);
    std::stringstream text("time_sec,vehicle_id,x_m,y_m\n1,abc,3,4\n");
    EXPECT_THROW(read_trace_csv(text), config_error);
    EXPECT_THROW(read_trace_csv("/nonexistent/trace.csv"), config_error);
}

TEST(Mobility, DeterministicPerSeed) {
    mobility_spec spec;
    spec.vehicles = 20;
    spec.duration_s = 10;
    const rect area{0, 0, 2000, 2000};
    const auto a = synth_mobility(spec, area, 7);
    const auto b = synth_mobility(spec, area, 7);
    const auto c = synth_mobility(spec, area, 8);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        EXPECT_EQ(a[i].vehicle, b[i].vehicle);
        EXPECT_EQ(a[i].x, b[i].x);
    }
    EXPECT_NE(a[0].x, c[0].x);
}

TEST(Mobility, PopulationSpeedAndArea) {
    mobility_spec spec;
    spec.vehicles = 50;
    spec.duration_s = 120;
    spec.departure_rate_per_s = 1.0 / 60;
    const rect area{0, 0, 2000, 2000};
    const auto trace = synth_mobility(spec, area, 3);
    std::map<double, int> alive;
    std::map<vehicle_id, trace_event> last;
    std::set<vehicle_id> gone;
    int departures = 0;
    const double vmax = spec.mean_speed_kmh / 3.6 * (1 + spec.speed_spread);
    for (const auto& e : trace) {
        if (e.departed) {
            ++departures;
            EXPECT_TRUE(gone.insert(e.vehicle).second);
            continue;
        }
        EXPECT_FALSE(gone.count(e.vehicle));
        EXPECT_TRUE(area.contains({e.x, e.y}));
        ++alive[e.time];
        if (auto it = last.find(e.vehicle); it != last.end())
            EXPECT_LE(std::hypot(e.x - it->second.x, e.y - it->second.y), vmax * (e.time - it->second.time) + 1e-9);
        last[e.vehicle] = e;
    }
    EXPECT_EQ(alive.size(), 121u);
    for (const auto& [t, n] : alive) EXPECT_EQ(n, 50);
    EXPECT_GT(departures, 30);
    EXPECT_LT(departures, 200);
}

TEST(Mobility, RejectsBadSpec) {
    mobility_spec spec;
    spec.sample_dt_s = 0;
    EXPECT_THROW(synth_mobility(spec, {0, 0, 1, 1}, 1), config_error);
    EXPECT_THROW(synth_mobility({}, {0, 0, 0, 1}, 1), config_error);
}

TEST(GridAntennas, RowMajorWithBoundedJitter) {
    const rect area{0, 0, 2000, 2000};
    const auto a = grid_antennas(area, 8, 8, 50, 1);
    ASSERT_EQ(a.size(), 64u);
    for (int r = 0; r < 8; ++r)
        for (int c = 0; c < 8; ++c) {
            const auto& x = a[static_cast<std::size_t>(r * 8 + c)];
            EXPECT_EQ(x.id, r * 8 + c);
            EXPECT_LE(std::abs(x.x - (c + 0.5) * 250), 50);
            EXPECT_LE(std::abs(x.y - (r + 0.5) * 250), 50);
        }
    const auto exact = grid_antennas(area, 2, 2, 0, 1);
    EXPECT_EQ(exact[3].x, 1500);
    EXPECT_THROW(grid_antennas(area, 0, 2, 0, 1), config_error);
}

TEST(AssignPoa, NearestAntennaWithLowIdTies) {
    const auto tree = build_tree(row_antennas(), {0, 0, 3000, 1000}, 2);
    EXPECT_EQ(tree.dc(assign_poa(tree, 100, 900)).poa, 0);
    EXPECT_EQ(tree.dc(assign_poa(tree, 1400, 0)).poa, 1);
    EXPECT_EQ(tree.dc(assign_poa(tree, 1000, 500)).poa, 0);
    EXPECT_EQ(tree.dc(assign_poa(tree, 3000, 1000)).poa, 2);
    EXPECT_THROW(assign_poa(tree, 3001, 0), invalid_input_error);
}

TEST(DetectCritical, OffPathOrNoLongerServing) {
    const auto t = testkit::overload_tree();
    chain_table chains{{1, testkit::unit_chain(1, 3)}, {2, testkit::unit_chain(2, 3)}, {3, testkit::unit_chain(3, 5)}};
    auto sets = gfa(t, chains);
    auto state = empty_placement(t, rational(3));
    state.place(sets.at(1).at(3));
    state.place(sets.at(2).at(1));
    state.place(sets.at(3).at(0));
    EXPECT_TRUE(detect_critical(t, chains, state, sets).empty());
    chains[1].poa = 4; // leaves its leaf
    chains[2].poa = 4; // still under s1
    chains[3].target_delay_s = 1e-4;
    sets = gfa(t, chains);
    EXPECT_EQ(detect_critical(t, chains, state, sets), (std::vector<chain_id>{1, 3}));
}

TEST(ClassDraw, NestedAcrossRatios) {
    int rt_low = 0;
    for (vehicle_id v = 0; v < 2000; ++v) {
        const double d = class_draw(9, v);
        EXPECT_GE(d, 0);
        EXPECT_LT(d, 1);
        EXPECT_EQ(d, class_draw(9, v));
        if (d < 0.3) {
            ++rt_low;
            EXPECT_LT(d, 0.5);
        }
    }
    EXPECT_NEAR(rt_low / 2000.0, 0.3, 0.05);
    EXPECT_NE(class_draw(9, 1), class_draw(10, 1));
}

TEST(TieRank, DependsOnRepetition) {
    EXPECT_EQ(tie_rank(1, 0, 5), tie_rank(1, 0, 5));
    EXPECT_NE(tie_rank(1, 0, 5), tie_rank(1, 1, 5));
    EXPECT_NE(tie_rank(1, 0, 5), tie_rank(1, 0, 6));
}

TEST(Config, ParsesEveryKey) {
    const auto j = nlohmann::json::parse(R"({
        "area": [0, 0, 1000, 1000], "antennas": {"grid": {"rows": 2, "cols": 3, "jitter_m": 0}},
        "height": 3, "c_cpu": 40, "capacity_rule": [1, 2, 4], "cpu_costs": [4, 2, 1], "splits": [[2, 2], [1, 1], [1, 3]],
        "link": {"prop_delay_s": 0.001, "bw_cost": 2}, "work_per_vm": 0.002, "cpu_cap": 20, "rt_ratio": 0.5,
        "costs": {"migration": 100, "bandwidth_unit_bps": 1000}, "period_s": 5, "augmentation": 1.5,
        "seed": 11, "repetition": 2, "trace": {"synthetic": {"vehicles": 10, "sample_dt_s": 0.5}},
        "duration_s": 30, "pu_order": "non_decreasing", "abort_on_infeasible": true, "oracle_budget": 1000,
        "check_invariants": true})");
    const auto c = config_from_json(j);
    EXPECT_EQ(c.area.x1, 1000);
    EXPECT_EQ(c.grid_cols, 3);
    EXPECT_EQ(c.height, 3);
    EXPECT_EQ(c.levels.multiplier(2), 4);
    EXPECT_EQ(c.levels.cpu_cost(0, 2), 4);
    EXPECT_EQ(c.levels.split(2).cols, 3);
    EXPECT_EQ(c.levels.uplink(1).prop_delay_s, 0.001);
    EXPECT_EQ(c.catalog.at("rt").cpu_cap, 20);
    EXPECT_EQ(c.catalog.at("rt").vms[0].work, 0.002);
    EXPECT_EQ(c.costs.migration_cost, 100);
    EXPECT_EQ(c.period_s, 5);
    EXPECT_EQ(c.aug.hi, rational(3, 2));
    EXPECT_FALSE(c.aug.automatic);
    EXPECT_EQ(c.seed, 11u);
    EXPECT_EQ(c.mobility.vehicles, 10);
    EXPECT_EQ(c.mobility.sample_dt_s, 0.5);
    EXPECT_EQ(c.order, pu_order::non_decreasing);
    EXPECT_TRUE(c.abort_on_infeasible);
    EXPECT_TRUE(c.check_invariants);
    EXPECT_EQ(c.oracle_budget, 1000);
}

TEST(Config, AutoAugmentationAndRelativeFiles) {
    const auto dir = std::filesystem::temp_directory_path() / "chainplace_cfg_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream(dir / "cfg.json") << R"({"augmentation": "auto", "antennas": {"file": "ant.csv"}, "trace": {"file": "tr.csv"}})";
    }
    const auto c = read_config((dir / "cfg.json").string());
    EXPECT_TRUE(c.aug.automatic);
    EXPECT_EQ(c.antennas_file, (dir / "ant.csv").string());
    EXPECT_EQ(c.trace_file, (dir / "tr.csv").string());
    std::filesystem::remove_all(dir);
}

TEST(Config, RejectsInvalid) {
    using nlohmann::json;
    EXPECT_THROW(config_from_json(json::parse(R"({"area": [0, 0, 1]})")), config_error);
    EXPECT_THROW(config_from_json(json::parse(R"({"period_s": 0})")), config_error);
    EXPECT_THROW(config_from_json(json::parse(R"({"rt_ratio": 1.5})")), config_error);
    EXPECT_THROW(config_from_json(json::parse(R"({"augmentation": "0.5"})")), config_error);
    EXPECT_THROW(config_from_json(json::parse(R"({"augmentation": "x"})")), config_error);
    EXPECT_THROW(config_from_json(json::parse(R"({"pu_order": "sideways"})")), config_error);
    EXPECT_THROW(config_from_json(json::parse(R"({"capacity_rule": "other"})")), config_error);
    EXPECT_THROW(config_from_json(json::parse(R"({"height": "tall"})")), config_error);
    EXPECT_THROW(config_from_json(json::parse(R"({"rt_class": "missing"})")), config_error);
    EXPECT_THROW(read_config("/nonexistent/cfg.json"), config_error);
    EXPECT_THROW(parse_algo("greedy"), config_error);
    EXPECT_EQ(parse_algo("cpvnf"), algo_kind::cpvnf);
}

TEST(Run, VehicleCrossingThreeCells) {
    const auto cfg = row_config();
    const auto res = run(cfg, algo_kind::bupu, crossing());
    ASSERT_EQ(res.decisions.size(), 4u);
    EXPECT_TRUE(res.summary.all_feasible());
    EXPECT_EQ(res.decisions[0].n_new, 1u);
    EXPECT_EQ(res.decisions[1].n_critical, 0u);
    EXPECT_EQ(res.decisions[2].n_critical, 1u);
    EXPECT_EQ(res.decisions[3].n_critical, 1u);
    EXPECT_EQ(res.summary.migrations, 2u);
    EXPECT_EQ(res.summary.compulsory_mig, 1200);
    EXPECT_EQ(res.summary.noncompulsory_mig, 0);
    EXPECT_EQ(res.summary.cost.migration, 1200);
    ASSERT_EQ(res.sla_durations.size(), 2u);
    EXPECT_DOUBLE_EQ(res.sla_durations[0], 0.75);
    EXPECT_DOUBLE_EQ(res.sla_durations[1], 0.75);
    EXPECT_DOUBLE_EQ(res.summary.mean_sla_violation_s, 0.75);
    EXPECT_EQ(res.state.where(0), res.chains.at(0).poa);
    EXPECT_EQ(res.chains.at(0).rt_class, "RT");
}

TEST(Run, LooseClassStaysPut) {
    auto cfg = row_config();
    cfg.rt_ratio = 0;
    cfg.levels.uplinks = {link_params{0.002, 1e10, 0, 0}}; // free bandwidth makes the root cheapest
    const auto res = run(cfg, algo_kind::bupu, crossing());
    EXPECT_TRUE(res.summary.all_feasible());
    EXPECT_EQ(res.summary.migrations, 0u);
    EXPECT_TRUE(res.sla_durations.empty());
    EXPECT_EQ(res.state.where(0), 0); // pushed up to the cheap root
}

TEST(Run, DepartureReleasedAtNextDecision) {
    auto prep = crossing();
    prep.trace.resize(4);
    prep.trace.push_back({1.7, 0, 0, 0, true});
    prep.trace.push_back(at(2, 1, 2500));
    const auto res = run(row_config(), algo_kind::bupu, prep);
    EXPECT_EQ(res.decisions[2].n_departed, 1u);
    EXPECT_EQ(res.decisions[2].n_new, 1u);
    EXPECT_FALSE(res.state.has(0));
    EXPECT_TRUE(res.state.has(1));
    EXPECT_EQ(res.chains.size(), 1u);
    // The violation from t = 1.25 ends with the departure at 1.7.
    ASSERT_EQ(res.sla_durations.size(), 1u);
    EXPECT_NEAR(res.sla_durations[0], 0.45, 1e-12);
}

TEST(Run, InfeasibleDecisionLeavesChainUnplaced) {
    auto cfg = row_config();
    cfg.levels.c_cpu = 1;
    cfg.duration_s = 1;
    prepared_scenario prep{row_antennas(), {at(0, 0, 100), at(0, 1, 200), at(1, 0, 100), at(1, 1, 200)}};
    const auto res = run(cfg, algo_kind::bupu, prep);
    ASSERT_EQ(res.decisions.size(), 2u);
    EXPECT_FALSE(res.decisions[0].feasible);
    EXPECT_TRUE(res.decisions[0].reshuffled);
    EXPECT_EQ(res.summary.infeasible_decisions, 2u);
    // The whole changed set stays unplaced and is retried next time.
    EXPECT_TRUE(res.state.assign.empty());
    EXPECT_EQ(res.decisions[1].n_changed, 2u);
    cfg.abort_on_infeasible = true;
    const auto aborted = run(cfg, algo_kind::bupu, prep);
    EXPECT_TRUE(aborted.summary.aborted);
    EXPECT_EQ(aborted.decisions.size(), 1u);
    cfg.abort_on_infeasible = false;
    cfg.aug = augmentation_policy::fixed(rational(2));
    EXPECT_TRUE(run(cfg, algo_kind::bupu, prep).summary.all_feasible());
}

TEST(Run, AllAlgorithmsKeepInvariantsOnSyntheticTraffic) {
    const auto cfg = small_synthetic();
    const auto prep = prepare(cfg);
    for (auto algo : {algo_kind::bupu, algo_kind::ffit, algo_kind::cpvnf}) {
        const auto res = run(cfg, algo, prep);
        EXPECT_EQ(res.decisions.size(), 21u) << to_string(algo);
        EXPECT_TRUE(res.summary.all_feasible()) << to_string(algo);
        EXPECT_EQ(res.summary.compulsory_mig + res.summary.noncompulsory_mig, res.summary.cost.migration);
        EXPECT_EQ(res.state.assign.size(), res.chains.size());
    }
}

TEST(Run, OracleOnATinyScenario) {
    auto cfg = small_synthetic();
    cfg.mobility.vehicles = 5;
    cfg.duration_s = 3;
    const auto prep = prepare(cfg);
    const auto oracle = run(cfg, algo_kind::oracle, prep);
    EXPECT_TRUE(oracle.summary.all_feasible());
    EXPECT_EQ(oracle.summary.reshuffles, oracle.summary.decisions);
    // Same first decision: nobody has a current placement yet.
    const auto bupu = run(cfg, algo_kind::bupu, prep);
    EXPECT_LE(oracle.decisions[0].cost.total(), bupu.decisions[0].cost.total() + 1e-9);
}

TEST(Run, ReproducibleOutputs) {
    const auto cfg = small_synthetic();
    std::ostringstream a, b;
    write_costs_csv(a, run(cfg, algo_kind::bupu).decisions);
    write_costs_csv(b, run(cfg, algo_kind::bupu).decisions);
    EXPECT_EQ(a.str(), b.str());
}

TEST(Run, LongerPeriodMeansFewerDecisions) {
    auto cfg = small_synthetic();
    cfg.period_s = 5;
    const auto res = run(cfg, algo_kind::bupu);
    ASSERT_EQ(res.decisions.size(), 5u);
    EXPECT_EQ(res.decisions[1].t, 5);
}

TEST(Sweep, FindsTheFeasibilityThreshold) {
    auto cfg = small_synthetic();
    cfg.duration_s = 8;
    const auto prep = prepare(cfg);
    const auto res = sweep_capacity(cfg, algo_kind::bupu, prep);
    EXPECT_GE(res.c_cpu, 30); // leaves must hold the 30-unit chain cap
    cfg.aug = augmentation_policy::fixed(rational(1));
    cfg.levels.c_cpu = res.c_cpu;
    EXPECT_TRUE(run(cfg, algo_kind::bupu, prep).summary.all_feasible());
    if (res.c_cpu > res.trail.front().first) {
        cfg.levels.c_cpu = res.c_cpu - 1;
        EXPECT_FALSE(run(cfg, algo_kind::bupu, prep).summary.all_feasible());
    }
    EXPECT_EQ(static_cast<int>(res.trail.size()), res.probes);
}

TEST(Outputs, CsvShapes) {
    const auto res = run(row_config(), algo_kind::bupu, crossing());
    std::ostringstream dec, costs, sum;
    write_decisions_csv(dec, res.decisions);
    write_costs_csv(costs, res.decisions);
    write_summary_header(sum);
    write_summary_row(sum, res.summary);
    auto columns = [](const std::string& line) { return std::count(line.begin(), line.end(), ',') + 1; };
    auto lines = [](const std::string& s) {
        std::vector<std::string> out;
        std::istringstream in(s);
        for (std::string l; std::getline(in, l);) out.push_back(l);
        return out;
    };
    for (const auto* s : {&dec, &costs, &sum}) {
        const auto ls = lines(s->str());
        ASSERT_GE(ls.size(), 2u);
        for (const auto& l : ls) EXPECT_EQ(columns(l), columns(ls[0])) << l;
    }
    EXPECT_EQ(lines(dec.str()).size(), 5u);
    EXPECT_EQ(lines(dec.str())[0].substr(0, 2), "t,");
    EXPECT_EQ(lines(sum.str())[1].substr(0, 5), "bupu,");
}

TEST(Mobility, EmpiricalMeanSpeed) {
    mobility_spec spec;
    spec.vehicles = 200;
    spec.duration_s = 120;
    spec.departure_rate_per_s = 0;
    const auto trace = synth_mobility(spec, {0, 0, 2000, 2000}, 11);
    std::map<vehicle_id, trace_event> last;
    double dist = 0, time = 0;
    for (const auto& e : trace) {
        if (auto it = last.find(e.vehicle); it != last.end()) {
            dist += std::hypot(e.x - it->second.x, e.y - it->second.y);
            time += e.time - it->second.time;
        }
        last[e.vehicle] = e;
    }
    ASSERT_GT(time, 0);
    EXPECT_NEAR(dist / time * 3.6, 15.4, 0.05 * 15.4);
}

TEST(Run, ParkedVehiclesNeverTurnCritical) {
    auto cfg = small_synthetic();
    cfg.mobility.mean_speed_kmh = 0;
    cfg.mobility.departure_rate_per_s = 0;
    const auto res = run(cfg, algo_kind::bupu);
    ASSERT_FALSE(res.decisions.empty());
    for (const auto& d : res.decisions) EXPECT_EQ(d.n_critical, 0u);
    EXPECT_EQ(res.summary.critical_events, 0u);
}

TEST(Run, EmptyTraceGivesZeroCostRecords) {
    auto cfg = row_config();
    const auto res = run(cfg, algo_kind::bupu, {row_antennas(), {}});
    ASSERT_FALSE(res.decisions.empty());
    for (const auto& d : res.decisions) {
        EXPECT_TRUE(d.feasible);
        EXPECT_EQ(d.n_chains, 0u);
        EXPECT_EQ(d.cost.total(), 0);
    }
}

TEST(AssignPoa, MatchesNearestScan) {
    const rect area{0, 0, 2000, 2000};
    const auto antennas = grid_antennas(area, 8, 8, 50, 5);
    const auto tree = build_tree(antennas, area, 4);
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0, 2000);
    for (int i = 0; i < 2000; ++i) {
        const double x = u(rng), y = u(rng);
        std::size_t best = 0;
        for (std::size_t k = 1; k < antennas.size(); ++k)
            if (std::hypot(antennas[k].x - x, antennas[k].y - y) < std::hypot(antennas[best].x - x, antennas[best].y - y)) best = k;
        EXPECT_EQ(tree.dc(assign_poa(tree, x, y)).poa, antennas[best].id);
    }
}

TEST(Run, CoarsePeriodInstantsAreFineInstants) {
    auto cfg = small_synthetic();
    const auto prep = prepare(cfg);
    std::set<double> fine;
    for (const auto& d : run(cfg, algo_kind::bupu, prep).decisions) fine.insert(d.t);
    for (double period : {2.0, 5.0}) {
        cfg.period_s = period;
        for (const auto& d : run(cfg, algo_kind::bupu, prep).decisions) EXPECT_TRUE(fine.count(d.t)) << d.t;
    }
}
