#pragma once

// Instance builders and brute-force oracles shared by the tests.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <vector>

#include "chainplace/chainplace.hpp"

namespace testkit {

using namespace chainplace;

/// Straight path: root at level `levels - 1` down to a single leaf (id levels - 1).
inline network_tree path_tree(int levels, std::int64_t capacity, double tau_s = 0.002) {
    std::vector<node_spec> nodes;
    for (int i = 0; i < levels; ++i) {
        node_spec n;
        n.level = levels - 1 - i;
        if (i > 0) n.parent = i - 1;
        n.capacity = capacity;
        n.cpu_cost = std::ldexp(1.0, i);
        n.uplink.prop_delay_s = tau_s;
        nodes.push_back(n);
    }
    return network_tree(nodes);
}

/// s0 -> {s1, s2}, s1 -> {s3, s4}, s2 -> {s5}; unit capacities, zero latency.
inline network_tree overload_tree() {
    std::vector<node_spec> nodes(6);
    const int parent[] = {-1, 0, 0, 1, 1, 2};
    const int level[] = {2, 1, 1, 0, 0, 0};
    for (int i = 0; i < 6; ++i) {
        if (parent[i] >= 0) nodes[static_cast<std::size_t>(i)].parent = parent[i];
        nodes[static_cast<std::size_t>(i)].level = level[i];
        nodes[static_cast<std::size_t>(i)].capacity = 1;
        nodes[static_cast<std::size_t>(i)].uplink.prop_delay_s = 0;
    }
    return network_tree(nodes);
}

/// Single VM needing exactly one unit, with a loose target.
inline chain_spec unit_chain(chain_id id, dc_id poa) {
    chain_spec c;
    c.id = id;
    c.vms = {{0.5, 0.001, 1e6}};
    c.target_delay_s = 1;
    c.cpu_cap = 1;
    c.poa = poa;
    return c;
}

/// Six unit chains: 1..3 at s5, 4..6 at s3. Five slots for six chains.
inline chain_table overload_chains() {
    chain_table t;
    for (chain_id u = 1; u <= 6; ++u) t[u] = unit_chain(u, u <= 3 ? 5 : 3);
    return t;
}

/// Random rooted tree: node i > 0 hangs under a uniform earlier node; levels
/// are subtree heights so leaves sit at level 0.
inline network_tree random_tree(std::mt19937_64& rng, int n_nodes, std::int64_t cap_lo, std::int64_t cap_hi, double tau_lo,
                                double tau_hi) {
    std::vector<int> parent(static_cast<std::size_t>(n_nodes), -1);
    for (int i = 1; i < n_nodes; ++i) parent[static_cast<std::size_t>(i)] = std::uniform_int_distribution<int>(0, i - 1)(rng);
    std::vector<int> level(static_cast<std::size_t>(n_nodes), 0);
    for (int i = n_nodes - 1; i > 0; --i) {
        auto& pl = level[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
        pl = std::max(pl, level[static_cast<std::size_t>(i)] + 1);
    }
    const int root_level = level[0];
    std::vector<node_spec> nodes(static_cast<std::size_t>(n_nodes));
    std::uniform_int_distribution<std::int64_t> cap(cap_lo, cap_hi);
    std::uniform_real_distribution<double> tau(tau_lo, tau_hi);
    for (int i = 0; i < n_nodes; ++i) {
        auto& n = nodes[static_cast<std::size_t>(i)];
        if (parent[static_cast<std::size_t>(i)] >= 0) n.parent = parent[static_cast<std::size_t>(i)];
        n.level = level[static_cast<std::size_t>(i)];
        n.capacity = cap(rng);
        n.cpu_cost = std::ldexp(1.0, root_level - n.level);
        n.uplink.prop_delay_s = tau(rng);
    }
    return network_tree(nodes);
}

/// Random chain with 1..max_vms VMs at a random leaf; the CPU cap exceeds
/// the finiteness threshold by cap_lo..cap_hi units.
inline chain_spec random_chain(std::mt19937_64& rng, chain_id id, const network_tree& tree, int max_vms, std::int64_t cap_lo,
                               std::int64_t cap_hi, double delta_lo, double delta_hi) {
    chain_spec c;
    c.id = id;
    const int h = std::uniform_int_distribution<int>(1, max_vms)(rng);
    std::uniform_real_distribution<double> load(0.1, 3.0);
    std::uniform_real_distribution<double> work(0.0005, 0.003);
    for (int k = 0; k < h; ++k) c.vms.push_back({load(rng), work(rng), 1e6});
    c.target_delay_s = std::uniform_real_distribution<double>(delta_lo, delta_hi)(rng);
    c.cpu_cap = min_units(c) + std::uniform_int_distribution<std::int64_t>(cap_lo, cap_hi)(rng);
    const auto leaves = tree.leaves();
    c.poa = leaves[std::uniform_int_distribution<std::size_t>(0, leaves.size() - 1)(rng)];
    return c;
}

/// Smallest total over all per-VM vectors (above the finiteness threshold,
/// total <= cap) whose computational delay meets `slack`; -1 if none.
inline std::int64_t brute_min_budget(const chain_spec& c, double slack) {
    const auto h = c.vms.size();
    std::vector<std::int64_t> lo(h);
    std::int64_t base = 0;
    for (std::size_t k = 0; k < h; ++k) base += lo[k] = static_cast<std::int64_t>(std::floor(c.vms[k].load_units)) + 1;
    std::int64_t best = -1;
    std::vector<std::int64_t> mu(lo);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t k, std::int64_t used) {
        if (k == h) {
            double d = 0;
            for (std::size_t i = 0; i < h; ++i) d += c.vms[i].work / (static_cast<double>(mu[i]) - c.vms[i].load_units);
            if (d <= slack + 1e-12 && (best < 0 || used < best)) best = used;
            return;
        }
        for (std::int64_t extra = 0; used + lo[k] + extra <= c.cpu_cap; ++extra) {
            mu[k] = lo[k] + extra;
            rec(k + 1, used + mu[k]);
        }
    };
    if (base <= c.cpu_cap) rec(0, 0);
    return best;
}

/// Smallest computational delay over all per-VM vectors (above the
/// finiteness threshold) whose total is exactly `budget`.
inline double brute_b_minimal_delay(const chain_spec& c, std::int64_t budget) {
    const auto h = c.vms.size();
    std::vector<std::int64_t> lo(h);
    std::int64_t base = 0;
    for (std::size_t k = 0; k < h; ++k) base += lo[k] = static_cast<std::int64_t>(std::floor(c.vms[k].load_units)) + 1;
    double best = std::numeric_limits<double>::infinity();
    std::vector<std::int64_t> mu(lo);
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t k, std::int64_t left) {
        if (k + 1 == h) {
            mu[k] = lo[k] + left;
            double d = 0;
            for (std::size_t i = 0; i < h; ++i) d += c.vms[i].work / (static_cast<double>(mu[i]) - c.vms[i].load_units);
            best = std::min(best, d);
            return;
        }
        for (std::int64_t extra = 0; extra <= left; ++extra) {
            mu[k] = lo[k] + extra;
            rec(k + 1, left - extra);
        }
    };
    if (budget >= base) rec(0, budget - base);
    return best;
}

/// Subset-sum partition check by dynamic programming.
inline bool partition_solvable(const std::vector<int>& n) {
    int total = 0;
    for (int v : n) total += v;
    if (total % 2) return false;
    std::vector<char> can(static_cast<std::size_t>(total / 2 + 1), 0);
    can[0] = 1;
    for (int v : n)
        for (int s = total / 2; s >= v; --s)
            if (can[static_cast<std::size_t>(s - v)]) can[static_cast<std::size_t>(s)] = 1;
    return can[static_cast<std::size_t>(total / 2)] != 0;
}

/// Partition-reduction instance: leaf s under root r, zero latency, capacity
/// floor(sum / 2) each; chain i is one VM with load 1 that needs exactly n_i units.
struct partition_instance {
    network_tree tree;
    chain_table chains;
};

inline partition_instance make_partition_instance(const std::vector<int>& n) {
    int total = 0;
    for (int v : n) total += v;
    std::vector<node_spec> nodes(2);
    nodes[0].level = 1;
    nodes[0].capacity = total / 2;
    nodes[1].level = 0;
    nodes[1].parent = 0;
    nodes[1].capacity = total / 2;
    nodes[1].uplink.prop_delay_s = 0;
    partition_instance inst{network_tree(nodes), {}};
    for (std::size_t i = 0; i < n.size(); ++i) {
        chain_spec c;
        c.id = static_cast<chain_id>(i);
        c.vms = {{1.0, 1.0, 1e6}};
        c.target_delay_s = 1.0 / (n[i] - 1);
        c.cpu_cap = n[i];
        c.poa = 1;
        inst.chains[c.id] = c;
    }
    return inst;
}

/// Every chain id of a table.
inline std::vector<chain_id> ids(const chain_table& t) {
    std::vector<chain_id> out;
    for (const auto& [id, c] : t) out.push_back(id);
    return out;
}

/// Random small placement instance used by the placement property suites.
struct placement_instance {
    network_tree tree;
    chain_table chains;
    feasible_map sets;
};

inline placement_instance random_placement_instance(std::mt19937_64& rng, int max_nodes = 8, int max_chains = 10) {
    for (;;) {
        const int n_nodes = std::uniform_int_distribution<int>(2, max_nodes)(rng);
        auto tree = random_tree(rng, n_nodes, 8, 30, 0.0005, 0.002);
        chain_table chains;
        const int n_chains = std::uniform_int_distribution<int>(1, max_chains)(rng);
        for (int u = 0; u < n_chains; ++u) chains[u] = random_chain(rng, u, tree, 3, 0, 6, 0.004, 0.012);
        auto sets = gfa(tree, chains);
        bool all = true;
        for (const auto& [id, fs] : sets) all = all && !fs.empty();
        if (all) return {std::move(tree), std::move(chains), std::move(sets)};
    }
}

} // namespace testkit
