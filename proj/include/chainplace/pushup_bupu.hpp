#pragma once

// Push-up cost reduction and the per-decision orchestrator: place the
// changed chains incrementally, fall back to re-placing every chain at the
// smallest workable augmentation.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <vector>

#include "chainplace/allocation.hpp"
#include "chainplace/cost_model.hpp"
#include "chainplace/placement_bu.hpp"
#include "chainplace/rational.hpp"

namespace chainplace {

enum class pu_order {
    non_increasing, ///< largest allocations first
    non_decreasing,
};

/// Gains below this are treated as ties so that float noise cannot move chains.
inline constexpr double cost_tolerance = 1e-9;

/// Repeatedly moves each chain of `targets` to the highest datacenter above
/// it (in its feasible set) that has room and is strictly cheaper for it.
inline placement pu(const network_tree& tree, const chain_table& chains, const std::vector<chain_id>& targets,
                    const feasible_map& sets, placement p, const cost_params& params, pu_order order = pu_order::non_increasing) {
    std::vector<chain_id> ids;
    for (chain_id u : targets)
        if (p.has(u)) ids.push_back(u);
    bool moved = true;
    while (moved) {
        moved = false;
        std::stable_sort(ids.begin(), ids.end(), [&](chain_id a, chain_id b) {
            const auto ua = p.assign.at(a).total();
            const auto ub = p.assign.at(b).total();
            if (ua != ub) return order == pu_order::non_increasing ? ua > ub : ua < ub;
            return a < b;
        });
        for (chain_id u : ids) {
            const auto& chain = chains.at(u);
            const auto& fs = sets.at(u);
            const allocation cur = p.assign.at(u);
            const double cur_cost = per_chain_cost(tree, chain, cur, params);
            const auto pos = std::find(fs.dcs.begin(), fs.dcs.end(), cur.dc);
            // Only datacenters strictly above the current one; if the current
            // one is not in the set, nothing is above it either.
            if (pos == fs.dcs.end()) continue;
            for (auto i = fs.dcs.size(); i-- > static_cast<std::size_t>(pos - fs.dcs.begin()) + 1;) {
                const auto& cand = fs.allocs[i];
                if (p.avail[static_cast<std::size_t>(cand.dc)] < cand.total()) continue;
                if (per_chain_cost(tree, chain, cand, params) < cur_cost - cost_tolerance) {
                    p.release(u);
                    p.place(cand);
                    moved = true;
                    break;
                }
            }
        }
    }
    return p;
}

/// A placement heuristic: places `to_place` on top of `start`.
using placer_fn = std::function<placement_outcome(const std::vector<chain_id>& to_place, placement start)>;

/// {lo} + {k / C_min : lo < k / C_min < hi} + {hi}, C_min the smallest positive capacity.
inline std::vector<rational> augmentation_grid(const network_tree& tree, const rational& lo, const rational& hi) {
    if (hi < lo) throw invalid_input_error("augmentation upper bound below lower bound");
    std::int64_t c_min = 0;
    for (const auto& d : tree.datacenters())
        if (d.capacity > 0 && (c_min == 0 || d.capacity < c_min)) c_min = d.capacity;
    std::vector<rational> grid{lo};
    if (c_min > 0) {
        const std::int64_t first = floor_mul(lo, c_min) + 1;
        for (std::int64_t k = first; rational(k, c_min) < hi; ++k) grid.emplace_back(k, c_min);
    }
    if (hi != lo) grid.push_back(hi);
    return grid;
}

struct search_result {
    rational r{1};
    placement_outcome outcome; ///< outcome of the final probe (at r, or at hi on failure)
    int probes = 0;
};

/// Smallest grid value whose from-scratch placement succeeds, assuming the
/// success predicate is monotone in R.
inline search_result binary_search_r(const network_tree& tree, const std::vector<chain_id>& all, const placer_fn& place,
                                     const rational& lo, const rational& hi) {
    const auto grid = augmentation_grid(tree, lo, hi);
    search_result res;
    auto probe = [&](std::size_t i) {
        ++res.probes;
        return place(all, empty_placement(tree, grid[i]));
    };
    auto top = probe(grid.size() - 1);
    if (!top.ok()) {
        res.r = grid.back();
        res.outcome = std::move(top);
        return res;
    }
    std::size_t ok = grid.size() - 1;
    placement_outcome best = std::move(top);
    std::size_t lo_i = 0;
    std::size_t hi_i = ok; // invariant: grid[hi_i] succeeds; everything below lo_i fails
    while (lo_i < hi_i) {
        const std::size_t mid = lo_i + (hi_i - lo_i) / 2;
        auto o = probe(mid);
        if (o.ok()) {
            hi_i = mid;
            best = std::move(o);
        } else {
            lo_i = mid + 1;
        }
    }
    res.r = grid[hi_i];
    res.outcome = std::move(best);
    return res;
}

struct augmentation_policy {
    rational lo{1};
    rational hi{1};
    bool automatic = false; ///< hi = maxCap / mu_tilde of the current decision

    static augmentation_policy fixed(const rational& r) { return {r, r, false}; }
    static augmentation_policy automatic_search() { return {rational(1), rational(1), true}; }
};

struct decision_options {
    cost_params params;
    augmentation_policy policy;
    pu_order order = pu_order::non_increasing;
    const tie_ranks* ranks = nullptr;
};

struct decision_output {
    bool feasible = false;
    placement result;
    cost_breakdown cost;
    bool reshuffled = false;
    rational achieved_r{1};
    std::optional<chain_id> failed;
    std::optional<infeasibility_witness> witness;
    int probes = 0;
};

/// Shared orchestration: first try `place` on the changed chains only, on
/// top of the other chains' committed state; otherwise re-place every chain
/// from scratch at the smallest workable augmentation. `improve` (if set)
/// is applied to the chains that were (re)placed.
inline decision_output orchestrate(const network_tree& tree, const chain_table& chains, const feasible_map& sets,
                                   const std::vector<chain_id>& changed, const placement& state, const decision_options& opts,
                                   const placer_fn& place,
                                   const std::function<placement(const std::vector<chain_id>&, placement)>& improve = {}) {
    decision_output out;
    placement base = state;
    for (chain_id u : changed) base.release(u);

    auto finish = [&](placement p, const std::vector<chain_id>& touched) {
        if (improve) p = improve(touched, std::move(p));
        out.feasible = true;
        out.achieved_r = p.augmentation;
        out.cost = total_cost(tree, chains, p.assign, opts.params);
        out.result = std::move(p);
        return out;
    };

    if (changed.empty()) return finish(std::move(base), {});
    auto first = place(changed, base);
    if (first.ok()) return finish(std::move(*first.placed), changed);

    out.reshuffled = true;
    std::vector<chain_id> all;
    for (const auto& [id, c] : chains) all.push_back(id);
    rational lo = opts.policy.lo;
    rational hi = opts.policy.hi;
    if (opts.policy.automatic) {
        bool any = false;
        for (const auto& [id, fs] : sets) any = any || !fs.empty();
        hi = any ? std::max(rational(1), r_max(chains, sets)) : rational(1);
        lo = std::min(lo, hi);
    }
    auto search = binary_search_r(tree, all, place, lo, hi);
    out.probes = search.probes;
    if (!search.outcome.ok()) {
        out.feasible = false;
        out.achieved_r = search.r;
        out.failed = search.outcome.failed;
        out.witness = search.outcome.witness;
        out.result = std::move(base);
        out.cost = total_cost(tree, chains, out.result.assign, opts.params);
        return out;
    }
    return finish(std::move(*search.outcome.placed), all);
}

/// BU on the changed chains then push-up; reshuffle with binary search over
/// R when that fails.
inline decision_output bupu(const network_tree& tree, const chain_table& chains, const feasible_map& sets,
                            const std::vector<chain_id>& changed, const placement& state, const decision_options& opts) {
    placer_fn place = [&](const std::vector<chain_id>& to_place, placement start) {
        return bu(tree, chains, to_place, sets, std::move(start), opts.ranks);
    };
    auto improve = [&](const std::vector<chain_id>& touched, placement p) {
        return pu(tree, chains, touched, sets, std::move(p), opts.params, opts.order);
    };
    return orchestrate(tree, chains, sets, changed, state, opts, place, improve);
}

// ---------------------------------------------------------------------------
// Decision log

struct decision_record {
    double t = 0;
    std::size_t n_chains = 0;
    std::size_t n_changed = 0;
    bool reshuffled = false;
    rational achieved_r{1};
    cost_breakdown cost;
    double runtime_ms = 0;
};

inline void write_decision_header(std::ostream& out) {
    out << "t,n_chains,n_changed,reshuffled,achieved_R,mig_cost,comp_cost,bw_cost,total_cost,runtime_ms";
}

inline void write_decision_fields(std::ostream& out, const decision_record& r) {
    out << r.t << ',' << r.n_chains << ',' << r.n_changed << ',' << (r.reshuffled ? 1 : 0) << ',' << to_double(r.achieved_r) << ','
        << r.cost.migration << ',' << r.cost.computation << ',' << r.cost.bandwidth << ',' << r.cost.total() << ',' << r.runtime_ms;
}

} // namespace chainplace
