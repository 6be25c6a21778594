#pragma once

// Reference placers: top-down first fit, cost-greedy CPVNF, an exact
// branch-and-bound oracle for small instances, and an LP-format exporter.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "chainplace/allocation.hpp"
#include "chainplace/cost_model.hpp"
#include "chainplace/placement_bu.hpp"
#include "chainplace/pushup_bupu.hpp"

namespace chainplace {

/// Each chain (in rank order) goes to the first datacenter with room,
/// scanning its feasible set from the top down.
inline placement_outcome f_fit(const chain_table& chains, const std::vector<chain_id>& to_place, const feasible_map& sets,
                               placement start, const tie_ranks* ranks = nullptr) {
    (void)chains;
    std::vector<chain_id> order(to_place);
    std::sort(order.begin(), order.end(), [&](chain_id a, chain_id b) {
        return std::make_tuple(rank_of(ranks, a), a) < std::make_tuple(rank_of(ranks, b), b);
    });
    placement_outcome out;
    for (chain_id u : order) {
        const auto& fs = sets.at(u);
        bool done = false;
        for (auto i = fs.dcs.size(); i-- > 0;) {
            if (start.avail[static_cast<std::size_t>(fs.dcs[i])] >= fs.allocs[i].total()) {
                start.place(fs.allocs[i]);
                done = true;
                break;
            }
        }
        if (!done) {
            out.failed = u;
            return out;
        }
    }
    out.placed = std::move(start);
    return out;
}

/// Chains by non-increasing allocation at their PoA datacenter; each takes
/// its cheapest feasible datacenter with room (lower datacenter on ties).
inline placement_outcome cpvnf(const network_tree& tree, const chain_table& chains, const std::vector<chain_id>& to_place,
                               const feasible_map& sets, placement start, const cost_params& params,
                               const tie_ranks* ranks = nullptr) {
    auto edge_units = [&](chain_id u) -> std::int64_t {
        const auto& fs = sets.at(u);
        if (fs.empty()) return 0;
        return fs.dcs.front() == chains.at(u).poa ? fs.allocs.front().total() : 0;
    };
    std::vector<chain_id> order(to_place);
    std::sort(order.begin(), order.end(), [&](chain_id a, chain_id b) {
        const auto ea = edge_units(a);
        const auto eb = edge_units(b);
        if (ea != eb) return ea > eb;
        return std::make_tuple(rank_of(ranks, a), a) < std::make_tuple(rank_of(ranks, b), b);
    });
    placement_outcome out;
    for (chain_id u : order) {
        const auto& fs = sets.at(u);
        const auto& chain = chains.at(u);
        std::optional<std::size_t> best;
        double best_cost = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < fs.dcs.size(); ++i) {
            if (start.avail[static_cast<std::size_t>(fs.dcs[i])] < fs.allocs[i].total()) continue;
            const double c = per_chain_cost(tree, chain, fs.allocs[i], params);
            if (c < best_cost - cost_tolerance) {
                best_cost = c;
                best = i;
            }
        }
        if (!best) {
            out.failed = u;
            return out;
        }
        start.place(fs.allocs[*best]);
    }
    out.placed = std::move(start);
    return out;
}

inline decision_output ffit_decision(const network_tree& tree, const chain_table& chains, const feasible_map& sets,
                                     const std::vector<chain_id>& changed, const placement& state, const decision_options& opts) {
    placer_fn place = [&](const std::vector<chain_id>& to_place, placement start) {
        return f_fit(chains, to_place, sets, std::move(start), opts.ranks);
    };
    return orchestrate(tree, chains, sets, changed, state, opts, place);
}

inline decision_output cpvnf_decision(const network_tree& tree, const chain_table& chains, const feasible_map& sets,
                                      const std::vector<chain_id>& changed, const placement& state, const decision_options& opts) {
    placer_fn place = [&](const std::vector<chain_id>& to_place, placement start) {
        return cpvnf(tree, chains, to_place, sets, std::move(start), opts.params, opts.ranks);
    };
    return orchestrate(tree, chains, sets, changed, state, opts, place);
}

// ---------------------------------------------------------------------------
// Exact oracle

struct oracle_options {
    double budget_limit = 1e6;   ///< refuse when the product of |S_u| exceeds this
    bool first_feasible = false; ///< stop at the first feasible assignment
};

struct oracle_result {
    bool feasible = false;
    std::optional<double> min_cost;
    std::optional<placement> result;
    std::uint64_t explored = 0; ///< complete assignments evaluated
};

/// Min-cost assignment of `to_place` over their feasible sets on top of
/// `start`. Depth-first in chain-id order, candidate datacenters in
/// ascending id; the first assignment reaching the optimum is kept.
inline oracle_result exhaustive_oracle(const network_tree& tree, const chain_table& chains, const std::vector<chain_id>& to_place,
                                       const feasible_map& sets, const placement& start, const cost_params& params,
                                       const oracle_options& opts = {}) {
    std::vector<chain_id> order(to_place);
    std::sort(order.begin(), order.end());
    double space = 1;
    for (chain_id u : order) space *= static_cast<double>(sets.at(u).dcs.size());
    if (space > opts.budget_limit)
        throw search_space_error("search space of " + std::to_string(space) + " assignments exceeds the limit");

    oracle_result res;
    for (chain_id u : order)
        if (sets.at(u).empty()) return res;

    struct option {
        const allocation* alloc;
        double cost;
    };
    std::vector<std::vector<option>> options(order.size());
    std::vector<double> min_rest(order.size() + 1, 0.0);
    for (std::size_t i = 0; i < order.size(); ++i) {
        const auto& fs = sets.at(order[i]);
        for (const auto& a : fs.allocs) options[i].push_back({&a, per_chain_cost(tree, chains.at(order[i]), a, params)});
        std::sort(options[i].begin(), options[i].end(), [](const option& a, const option& b) { return a.alloc->dc < b.alloc->dc; });
    }
    for (std::size_t i = order.size(); i-- > 0;) {
        double m = std::numeric_limits<double>::infinity();
        for (const auto& o : options[i]) m = std::min(m, o.cost);
        min_rest[i] = min_rest[i + 1] + m;
    }

    std::vector<std::int64_t> avail = start.avail;
    std::vector<const allocation*> cur(order.size(), nullptr);
    std::vector<const allocation*> best;
    double best_cost = std::numeric_limits<double>::infinity();
    bool stop = false;
    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double acc) {
        if (stop) return;
        if (i == order.size()) {
            ++res.explored;
            if (acc < best_cost - cost_tolerance) {
                best_cost = acc;
                best = cur;
                if (opts.first_feasible) stop = true;
            }
            return;
        }
        if (acc + min_rest[i] >= best_cost - cost_tolerance) return;
        for (const auto& o : options[i]) {
            const auto s = static_cast<std::size_t>(o.alloc->dc);
            const auto need = o.alloc->total();
            if (avail[s] < need) continue;
            avail[s] -= need;
            cur[i] = o.alloc;
            rec(i + 1, acc + o.cost);
            avail[s] += need;
            if (stop) return;
        }
    };
    rec(0, 0.0);
    if (best.empty() && !order.empty()) return res;
    placement p = start;
    for (const auto* a : best) p.place(*a);
    res.feasible = true;
    res.min_cost = total_cost(tree, chains, p.assign, params).total();
    res.result = std::move(p);
    return res;
}

inline decision_output oracle_decision(const network_tree& tree, const chain_table& chains, const feasible_map& sets,
                                       const placement& state, const decision_options& opts, const oracle_options& oopts = {}) {
    decision_output out;
    std::vector<chain_id> all;
    for (const auto& [id, c] : chains) all.push_back(id);
    const rational r = opts.policy.automatic ? rational(1) : opts.policy.hi;
    auto res = exhaustive_oracle(tree, chains, all, sets, empty_placement(tree, r), opts.params, oopts);
    out.reshuffled = true;
    out.achieved_r = r;
    if (!res.feasible) {
        out.result = state;
        for (const auto& [id, c] : chains) out.result.release(id);
        out.cost = total_cost(tree, chains, out.result.assign, opts.params);
        return out;
    }
    out.feasible = true;
    out.result = std::move(*res.result);
    out.cost = total_cost(tree, chains, out.result.assign, opts.params);
    return out;
}

// ---------------------------------------------------------------------------
// LP export

struct lp_options {
    bool integer = false; ///< add a Binary section (the ILP rather than its relaxation)
};

inline std::string lp_var(chain_id u, dc_id s) {
    return "y_" + std::to_string(u) + "_" + std::to_string(s);
}

/// Writes the placement problem with allocations fixed to the feasible-set
/// ones: minimize sum cost(u,s) y_u_s, each chain assigned once, per
/// datacenter capacity `capacity[s]`, 0 <= y <= 1.
inline void lp_export(std::ostream& out, const network_tree& tree, const chain_table& chains, const feasible_map& sets,
                      const cost_params& params, const std::vector<std::int64_t>& capacity, const lp_options& opts = {}) {
    if (capacity.size() != tree.size()) throw invalid_input_error("capacity vector size mismatch");
    std::ostringstream os;
    os.precision(17);
    for (const auto& [id, c] : chains)
        if (sets.at(id).empty())
            throw invalid_input_error("chain " + std::to_string(id) + " has no delay-feasible datacenter");

    os << "\\ chain placement\n";
    os << "Minimize\n obj:";
    bool first = true;
    for (const auto& [id, c] : chains) {
        const auto& fs = sets.at(id);
        for (const auto& a : fs.allocs) {
            const double coef = per_chain_cost(tree, c, a, params);
            os << (first ? " " : " + ") << coef << ' ' << lp_var(id, a.dc);
            first = false;
        }
    }
    if (first) os << " 0";
    os << "\nSubject To\n";
    for (const auto& [id, c] : chains) {
        os << " assign_" << id << ':';
        const auto& fs = sets.at(id);
        for (std::size_t i = 0; i < fs.dcs.size(); ++i) os << (i == 0 ? " " : " + ") << lp_var(id, fs.dcs[i]);
        os << " = 1\n";
    }
    for (const auto& d : tree.datacenters()) {
        std::ostringstream row;
        row.precision(17);
        bool any = false;
        for (const auto& [id, c] : chains) {
            const auto& fs = sets.at(id);
            for (const auto& a : fs.allocs) {
                if (a.dc != d.id) continue;
                row << (any ? " + " : " ") << a.total() << ' ' << lp_var(id, a.dc);
                any = true;
            }
        }
        if (any) os << " cap_" << d.id << ':' << row.str() << " <= " << capacity[static_cast<std::size_t>(d.id)] << '\n';
    }
    os << "Bounds\n";
    for (const auto& [id, c] : chains)
        for (dc_id s : sets.at(id).dcs) os << " 0 <= " << lp_var(id, s) << " <= 1\n";
    if (opts.integer) {
        os << "Binary\n";
        for (const auto& [id, c] : chains)
            for (dc_id s : sets.at(id).dcs) os << ' ' << lp_var(id, s) << '\n';
    }
    os << "End\n";
    out << os.str();
}

inline void lp_export(const std::string& path, const network_tree& tree, const chain_table& chains, const feasible_map& sets,
                      const cost_params& params, const std::vector<std::int64_t>& capacity, const lp_options& opts = {}) {
    std::ofstream f(path);
    if (!f) throw config_error("cannot write LP file " + path);
    lp_export(f, tree, chains, sets, params, capacity, opts);
    if (!f) throw config_error("failed writing LP file " + path);
}

} // namespace chainplace
