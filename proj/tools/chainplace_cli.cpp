// Command-line front end: topology dump, trace generation, simulation runs,
// capacity sweeps and LP export.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "chainplace/chainplace.hpp"

namespace fs = std::filesystem;
using namespace chainplace;

namespace {

struct common_flags {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<double> period;
    std::optional<double> rt_ratio;
    std::optional<std::string> aug;
    std::string out = "out";
};

void add_common(CLI::App* cmd, common_flags& f) {
    cmd->add_option("--config", f.config, "Scenario JSON file");
    cmd->add_option("--seed", f.seed, "Random seed");
    cmd->add_option("--period", f.period, "Decision period in seconds");
    cmd->add_option("--rt-ratio", f.rt_ratio, "Fraction of RT chains in [0, 1]");
    cmd->add_option("--aug", f.aug, "Resource augmentation: a ratio >= 1 or 'auto'");
    cmd->add_option("--out", f.out, "Output directory");
}

scenario_config load(const common_flags& f) {
    scenario_config cfg = f.config.empty() ? scenario_config{} : read_config(f.config);
    if (f.seed) cfg.seed = *f.seed;
    if (f.period) cfg.period_s = *f.period;
    if (f.rt_ratio) cfg.rt_ratio = *f.rt_ratio;
    if (f.aug) cfg.aug = parse_augmentation(*f.aug);
    cfg.validate();
    return cfg;
}

std::ofstream open_out(const common_flags& f, const std::string& name) {
    fs::create_directories(f.out);
    const auto path = (fs::path(f.out) / name).string();
    std::ofstream out(path);
    if (!out) throw config_error("cannot write " + path);
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Service-chain placement and migration simulator"};
    app.require_subcommand(1);

    common_flags flags;
    std::string algo = "bupu";
    bool binary = false;

    auto* topo = app.add_subcommand("build-topology", "Write topology.json and antennas.csv");
    add_common(topo, flags);
    auto* traces = app.add_subcommand("gen-traces", "Write the synthetic mobility trace to trace.csv");
    add_common(traces, flags);
    auto* run_cmd = app.add_subcommand("run", "Run the decision loop; writes decisions.csv, costs.csv, summary.csv");
    add_common(run_cmd, flags);
    run_cmd->add_option("--algo", algo, "bupu | ffit | cpvnf | oracle")->check(CLI::IsMember({"bupu", "ffit", "cpvnf", "oracle"}));
    auto* sweep = app.add_subcommand("sweep-capacity", "Binary search for the minimal C_cpu; writes sweep.csv");
    add_common(sweep, flags);
    sweep->add_option("--algo", algo, "bupu | ffit | cpvnf | oracle")->check(CLI::IsMember({"bupu", "ffit", "cpvnf", "oracle"}));
    auto* lp = app.add_subcommand("export-lp", "Export the first decision instant as an LP file (problem.lp)");
    add_common(lp, flags);
    lp->add_flag("--binary", binary, "Declare the variables binary");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        const auto cfg = load(flags);
        const auto prep = prepare(cfg);

        if (topo->parsed()) {
            const auto tree = build_scenario_tree(cfg, prep);
            open_out(flags, "topology.json") << to_json(tree).dump(2) << '\n';
            auto ant = open_out(flags, "antennas.csv");
            write_antennas_csv(ant, prep.antennas);
            std::cout << tree.size() << " datacenters, " << tree.leaves().size() << " PoAs, height " << tree.height() << '\n';
            return 0;
        }
        if (traces->parsed()) {
            auto out = open_out(flags, "trace.csv");
            write_trace_csv(out, prep.trace);
            std::cout << prep.trace.size() << " trace rows\n";
            return 0;
        }
        if (run_cmd->parsed()) {
            const auto res = run(cfg, parse_algo(algo), prep);
            auto dec = open_out(flags, "decisions.csv");
            write_decisions_csv(dec, res.decisions);
            auto costs = open_out(flags, "costs.csv");
            write_costs_csv(costs, res.decisions);
            auto summary = open_out(flags, "summary.csv");
            write_summary_header(summary);
            write_summary_row(summary, res.summary);
            const auto& s = res.summary;
            std::cout << s.decisions << " decisions, " << s.infeasible_decisions << " infeasible, total cost " << s.cost.total() << '\n';
            return s.all_feasible() ? 0 : 2;
        }
        if (sweep->parsed()) {
            const auto res = sweep_capacity(cfg, parse_algo(algo), prep);
            auto out = open_out(flags, "sweep.csv");
            out << "c_cpu,feasible\n";
            for (const auto& [c, ok] : res.trail) out << c << ',' << (ok ? 1 : 0) << '\n';
            std::cout << "minimal C_cpu for " << algo << ": " << res.c_cpu << " (" << res.probes << " probes)\n";
            return 0;
        }
        if (lp->parsed()) {
            // Chains of every vehicle present at the first trace instant.
            const auto tree = build_scenario_tree(cfg, prep);
            chain_table chains;
            const double t0 = prep.trace.empty() ? 0 : prep.trace.front().time;
            for (const auto& e : prep.trace) {
                if (e.time != t0 || e.departed) continue;
                const auto& cls = cfg.catalog.at(class_draw(cfg.seed, e.vehicle) < cfg.rt_ratio ? cfg.rt_class : cfg.std_class);
                chains[e.vehicle] = make_chain(cls, e.vehicle, assign_poa(tree, e.x, e.y));
            }
            const auto sets = gfa(tree, chains);
            const rational r = cfg.aug.automatic ? rational(1) : cfg.aug.hi;
            std::vector<std::int64_t> caps;
            for (const auto& d : tree.datacenters()) caps.push_back(augmented_capacity(d, r));
            auto out = open_out(flags, "problem.lp");
            lp_export(out, tree, chains, sets, cfg.costs, caps, lp_options{binary});
            std::cout << chains.size() << " chains exported\n";
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 1;
}
