#pragma once

// Bottom-up placement under multiplicative capacity augmentation R, with the
// infeasibility certificate produced when it fails.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include <boost/graph/adjacency_list.hpp>
#include <boost/graph/push_relabel_max_flow.hpp>
#include <json.hpp> // nlohmann/json (vendored)

#include "chainplace/allocation.hpp"
#include "chainplace/errors.hpp"
#include "chainplace/rational.hpp"
#include "chainplace/service_model.hpp"
#include "chainplace/topology.hpp"

namespace chainplace {

struct placement {
    std::map<chain_id, allocation> assign;
    std::vector<std::int64_t> avail; ///< residual CPU units per datacenter
    rational augmentation{1};

    bool has(chain_id u) const { return assign.count(u) != 0; }
    dc_id where(chain_id u) const {
        auto it = assign.find(u);
        if (it == assign.end()) throw lookup_error("chain " + std::to_string(u) + " is not placed");
        return it->second.dc;
    }
    void place(const allocation& a) {
        if (has(a.chain)) throw invalid_input_error("chain " + std::to_string(a.chain) + " is already placed");
        avail.at(static_cast<std::size_t>(a.dc)) -= a.total();
        assign.emplace(a.chain, a);
    }
    void release(chain_id u) {
        auto it = assign.find(u);
        if (it == assign.end()) return;
        avail.at(static_cast<std::size_t>(it->second.dc)) += it->second.total();
        assign.erase(it);
    }
};

inline std::int64_t augmented_capacity(const datacenter& d, const rational& r) {
    return floor_mul(r, d.capacity);
}

/// No chains placed; a_s = floor(R * C_s).
inline placement empty_placement(const network_tree& tree, const rational& r) {
    if (r < rational(1)) throw invalid_input_error("augmentation must be at least 1");
    placement p;
    p.augmentation = r;
    for (const auto& d : tree.datacenters()) p.avail.push_back(augmented_capacity(d, r));
    return p;
}

/// Capacity bookkeeping and path membership. Returns an empty string when
/// consistent, otherwise a description of the first violation.
inline std::string check_placement(const network_tree& tree, const chain_table& chains, const placement& p) {
    if (p.avail.size() != tree.size()) return "availability vector size mismatch";
    std::vector<std::int64_t> used(tree.size(), 0);
    for (const auto& [id, a] : p.assign) {
        auto it = chains.find(id);
        if (it == chains.end()) return "unknown chain " + std::to_string(id);
        if (!tree.is_ancestor_or_self(a.dc, it->second.poa)) return "chain " + std::to_string(id) + " placed off its root path";
        if (a.total() > it->second.cpu_cap) return "chain " + std::to_string(id) + " exceeds its CPU cap";
        if (!meets_target(total_delay(it->second, a, a.dc, tree), it->second.target_delay_s))
            return "chain " + std::to_string(id) + " misses its delay target";
        used[static_cast<std::size_t>(a.dc)] += a.total();
    }
    for (const auto& d : tree.datacenters()) {
        const auto i = static_cast<std::size_t>(d.id);
        if (p.avail[i] < 0) return "negative availability at datacenter " + std::to_string(d.id);
        if (used[i] + p.avail[i] != augmented_capacity(d, p.augmentation))
            return "capacity bookkeeping broken at datacenter " + std::to_string(d.id);
    }
    return {};
}

struct infeasibility_witness {
    chain_id failed_chain = 0;
    std::vector<chain_id> chains; ///< H'
    std::vector<dc_id> tree_dcs;  ///< T_{H'}, sorted
    std::int64_t lhs = 0;         ///< |H'|
    rational rhs{0};              ///< (R / max cap) * sum of C_s over T_{H'}
    bool refined = false;         ///< replaced by the max-closure fallback

    bool holds() const { return rational(lhs) > rhs; }
};

inline nlohmann::json to_json(const infeasibility_witness& w) {
    return {{"failed_chain", w.failed_chain},
            {"chains", w.chains},
            {"datacenters", w.tree_dcs},
            {"lhs", w.lhs},
            {"rhs", to_string(w.rhs)},
            {"rhs_value", to_double(w.rhs)},
            {"holds", w.holds()},
            {"refined", w.refined}};
}

/// Result of any placer: a placement, or the chain that could not be placed
/// (plus a certificate when the placer is BU).
struct placement_outcome {
    std::optional<placement> placed;
    std::optional<chain_id> failed;
    std::optional<infeasibility_witness> witness;

    bool ok() const { return placed.has_value(); }
};

/// Per-chain secondary tie-break rank; chains without an entry use their id.
using tie_ranks = std::map<chain_id, std::uint64_t>;

inline std::uint64_t rank_of(const tie_ranks* ranks, chain_id u) {
    if (ranks) {
        auto it = ranks->find(u);
        if (it != ranks->end()) return it->second;
    }
    return static_cast<std::uint64_t>(u);
}

inline std::int64_t max_cpu_cap(const chain_table& chains) {
    std::int64_t m = 0;
    for (const auto& [id, c] : chains) m = std::max(m, c.cpu_cap);
    return m;
}

/// a_s < max cap over all chains.
inline bool almost_full(dc_id s, const std::vector<std::int64_t>& avail, const chain_table& chains) {
    return avail.at(static_cast<std::size_t>(s)) < max_cpu_cap(chains);
}

/// Smallest total allocation over every stored (chain, datacenter) pair.
inline std::int64_t mu_tilde(const feasible_map& sets) {
    std::optional<std::int64_t> best;
    for (const auto& [id, fs] : sets)
        for (const auto& a : fs.allocs) best = best ? std::min(*best, a.total()) : a.total();
    if (!best) throw invalid_input_error("no chain has a delay-feasible datacenter");
    return *best;
}

/// max cap / mu_tilde
inline rational r_max(const chain_table& chains, const feasible_map& sets) {
    return rational(max_cpu_cap(chains), mu_tilde(sets));
}

namespace detail {

inline rational witness_rhs(const network_tree& tree, const std::vector<dc_id>& dcs, std::int64_t max_cap, const rational& r) {
    std::int64_t cap_sum = 0;
    for (dc_id s : dcs) cap_sum += tree.dc(s).capacity;
    return max_cap > 0 ? r * rational(cap_sum) / rational(max_cap) : rational(0);
}

/// Best H' among chains whose whole feasible set is almost-full: a maximum
/// weight closure (+1 per chain, -R*C_s/max cap per datacenter) via min cut.
inline std::optional<infeasibility_witness> max_closure_witness(const network_tree& tree, const feasible_map& sets,
                                                                const std::vector<chain_id>& pool,
                                                                const std::vector<std::int64_t>& avail,
                                                                std::int64_t max_cap, const rational& r) {
    using traits = boost::adjacency_list_traits<boost::vecS, boost::vecS, boost::directedS>;
    using graph = boost::adjacency_list<
        boost::vecS, boost::vecS, boost::directedS, boost::no_property,
        boost::property<boost::edge_capacity_t, std::int64_t,
                        boost::property<boost::edge_residual_capacity_t, std::int64_t,
                                        boost::property<boost::edge_reverse_t, traits::edge_descriptor>>>>;

    std::vector<chain_id> members;
    for (chain_id u : pool) {
        const auto& dcs = sets.at(u).dcs;
        if (!dcs.empty() && std::all_of(dcs.begin(), dcs.end(), [&](dc_id s) {
                return avail[static_cast<std::size_t>(s)] < max_cap;
            }))
            members.push_back(u);
    }
    if (members.empty()) return std::nullopt;

    const std::size_t n_dc = tree.size();
    graph g(2 + members.size() + n_dc);
    const std::size_t src = 0, sink = 1;
    auto cap = boost::get(boost::edge_capacity, g);
    auto rev = boost::get(boost::edge_reverse, g);
    auto add = [&](std::size_t a, std::size_t b, std::int64_t c) {
        auto e = boost::add_edge(a, b, g).first;
        auto back = boost::add_edge(b, a, g).first;
        cap[e] = c;
        cap[back] = 0;
        rev[e] = back;
        rev[back] = e;
    };
    // scaled weights: chain max_cap * den(R), datacenter num(R) * C_s
    const std::int64_t chain_w = max_cap * r.denominator();
    std::int64_t inf = chain_w * static_cast<std::int64_t>(members.size()) + 1;
    auto dc_node = [&](dc_id s) { return 2 + members.size() + static_cast<std::size_t>(s); };
    std::set<dc_id> used;
    for (std::size_t i = 0; i < members.size(); ++i) {
        add(src, 2 + i, chain_w);
        for (dc_id s : sets.at(members[i]).dcs) {
            add(2 + i, dc_node(s), inf);
            used.insert(s);
        }
    }
    for (dc_id s : used) add(dc_node(s), sink, r.numerator() * tree.dc(s).capacity);

    boost::push_relabel_max_flow(g, src, sink);

    // source side of the residual graph is the optimal closure
    auto res = boost::get(boost::edge_residual_capacity, g);
    std::vector<char> seen(boost::num_vertices(g), 0);
    std::deque<std::size_t> q{src};
    seen[src] = 1;
    while (!q.empty()) {
        const auto v = q.front();
        q.pop_front();
        for (auto [it, end] = boost::out_edges(v, g); it != end; ++it) {
            const auto w = boost::target(*it, g);
            if (!seen[w] && res[*it] > 0) {
                seen[w] = 1;
                q.push_back(w);
            }
        }
    }
    infeasibility_witness w;
    for (std::size_t i = 0; i < members.size(); ++i)
        if (seen[2 + i]) w.chains.push_back(members[i]);
    for (dc_id s : used)
        if (seen[dc_node(s)]) w.tree_dcs.push_back(s);
    w.lhs = static_cast<std::int64_t>(w.chains.size());
    w.rhs = witness_rhs(tree, w.tree_dcs, max_cap, r);
    w.refined = true;
    if (!w.holds()) return std::nullopt;
    return w;
}

inline infeasibility_witness build_witness(const network_tree& tree, const chain_table& chains, const feasible_map& sets,
                                           const std::map<dc_id, std::vector<chain_id>>& placed_on, chain_id failed,
                                           const std::vector<chain_id>& pool, const std::vector<std::int64_t>& avail,
                                           const rational& r) {
    infeasibility_witness w;
    w.failed_chain = failed;
    std::set<chain_id> in_h{failed};
    std::set<dc_id> visited;
    std::deque<chain_id> pending{failed};
    w.chains.push_back(failed);
    while (!pending.empty()) {
        const chain_id u = pending.front();
        pending.pop_front();
        const auto& dcs = sets.at(u).dcs;
        for (auto it = dcs.rbegin(); it != dcs.rend(); ++it) {
            if (!visited.insert(*it).second) continue;
            auto on = placed_on.find(*it);
            if (on == placed_on.end()) continue;
            for (auto c = on->second.rbegin(); c != on->second.rend(); ++c) {
                if (!in_h.insert(*c).second) continue;
                w.chains.push_back(*c);
                pending.push_back(*c);
            }
        }
    }
    w.tree_dcs.assign(visited.begin(), visited.end());
    w.lhs = static_cast<std::int64_t>(w.chains.size());
    const auto max_cap = max_cpu_cap(chains);
    w.rhs = witness_rhs(tree, w.tree_dcs, max_cap, r);
    if (!w.holds() && max_cap > 0) {
        if (auto better = max_closure_witness(tree, sets, pool, avail, max_cap, r)) {
            better->failed_chain = failed;
            return *better;
        }
    }
    return w;
}

} // namespace detail

/// Places `to_place` on top of `start` (whose availability already reflects
/// the other chains and the augmentation). Datacenters are visited in
/// post-order; at each one the eligible chains are tried in order of how
/// many feasible datacenters remain above, then allocation size, then rank.
inline placement_outcome bu(const network_tree& tree, const chain_table& chains, const std::vector<chain_id>& to_place,
                            const feasible_map& sets, placement start, const tie_ranks* ranks = nullptr) {
    placement_outcome out;
    std::map<dc_id, std::vector<chain_id>> placed_on;
    auto fail = [&](chain_id u) {
        out.failed = u;
        out.witness = detail::build_witness(tree, chains, sets, placed_on, u, to_place, start.avail, start.augmentation);
        return out;
    };

    std::vector<chain_id> unplaced;
    for (chain_id u : to_place) {
        if (start.has(u)) throw invalid_input_error("chain " + std::to_string(u) + " must be released before placement");
        if (sets.at(u).empty()) return fail(u);
        unplaced.push_back(u);
    }
    std::sort(unplaced.begin(), unplaced.end());

    for (dc_id s : tree.post_order()) {
        struct candidate {
            std::size_t above;
            std::int64_t units;
            std::uint64_t rank;
            chain_id id;
            const allocation* alloc;
        };
        std::vector<candidate> cands;
        for (chain_id u : unplaced) {
            const auto& fs = sets.at(u);
            const auto pos = std::find(fs.dcs.begin(), fs.dcs.end(), s);
            if (pos == fs.dcs.end()) continue;
            const auto i = static_cast<std::size_t>(pos - fs.dcs.begin());
            cands.push_back({fs.dcs.size() - 1 - i, fs.allocs[i].total(), rank_of(ranks, u), u, &fs.allocs[i]});
        }
        std::sort(cands.begin(), cands.end(), [](const candidate& a, const candidate& b) {
            return std::tie(a.above, a.units, a.rank, a.id) < std::tie(b.above, b.units, b.rank, b.id);
        });
        for (const auto& c : cands) {
            if (start.avail[static_cast<std::size_t>(s)] >= c.units) {
                start.place(*c.alloc);
                placed_on[s].push_back(c.id);
                unplaced.erase(std::find(unplaced.begin(), unplaced.end(), c.id));
            } else if (c.above == 0) {
                return fail(c.id);
            }
        }
    }
    if (!unplaced.empty()) return fail(unplaced.front());
    out.placed = std::move(start);
    return out;
}

} // namespace chainplace
