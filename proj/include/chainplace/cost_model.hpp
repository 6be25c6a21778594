#pragma once

// Objective: migration + computation + bandwidth cost of a placement.

#include <cstdint>
#include <functional>
#include <map>
#include <vector>

#include "chainplace/errors.hpp"
#include "chainplace/service_model.hpp"
#include "chainplace/topology.hpp"

namespace chainplace {

struct cost_params {
    double migration_cost = 600;
    /// Optional distance-dependent override of the constant migration price.
    std::function<double(const chain_spec&, dc_id from, dc_id to)> migration;
    /// Bandwidth prices are per this many bit/s of steady traffic.
    double bandwidth_unit_bps = 1e6;

    double migration_price(const chain_spec& chain, dc_id from, dc_id to) const {
        if (from == to) return 0;
        return migration ? migration(chain, from, to) : migration_cost;
    }
};

struct cost_breakdown {
    double migration = 0;
    double computation = 0;
    double bandwidth = 0;

    double total() const { return migration + computation + bandwidth; }

    cost_breakdown& operator+=(const cost_breakdown& o) {
        migration += o.migration;
        computation += o.computation;
        bandwidth += o.bandwidth;
        return *this;
    }
};

/// Cost of serving `chain` with `alloc` (on alloc.dc); migration is charged
/// against chain.current.
inline cost_breakdown chain_cost(const network_tree& tree, const chain_spec& chain, const allocation& alloc,
                                 const cost_params& params) {
    const dc_id s = alloc.dc;
    if (!tree.is_ancestor_or_self(s, chain.poa))
        throw off_path_error("chain " + std::to_string(chain.id) + " evaluated off its root path");
    cost_breakdown c;
    if (chain.current) c.migration = params.migration_price(chain, *chain.current, s);
    c.computation = static_cast<double>(alloc.total()) * tree.dc(s).cpu_cost;
    for (auto idx : tree.path(chain.poa, s)) c.bandwidth += tree.link_at(idx).bw_cost * chain.uplink_bps() / params.bandwidth_unit_bps;
    for (auto idx : tree.path(s, chain.poa)) c.bandwidth += tree.link_at(idx).bw_cost * chain.downlink_bps / params.bandwidth_unit_bps;
    return c;
}

inline double per_chain_cost(const network_tree& tree, const chain_spec& chain, const allocation& alloc, const cost_params& params) {
    return chain_cost(tree, chain, alloc, params).total();
}

/// Steady traffic on every directed link, indexed like tree.links().
inline std::vector<double> link_traffic(const network_tree& tree, const chain_table& chains,
                                        const std::map<chain_id, allocation>& assign) {
    std::vector<double> load(tree.links().size(), 0.0);
    for (const auto& [id, alloc] : assign) {
        const auto& chain = chains.at(id);
        if (!tree.is_ancestor_or_self(alloc.dc, chain.poa))
            throw off_path_error("chain " + std::to_string(id) + " is placed off its root path");
        for (auto idx : tree.path(chain.poa, alloc.dc)) load[idx] += chain.uplink_bps();
        for (auto idx : tree.path(alloc.dc, chain.poa)) load[idx] += chain.downlink_bps;
    }
    return load;
}

inline double link_traffic(const network_tree& tree, const chain_table& chains, const std::map<chain_id, allocation>& assign,
                           std::size_t link_index) {
    return link_traffic(tree, chains, assign).at(link_index);
}

/// Whole-placement objective, bandwidth billed per link from aggregate traffic.
inline cost_breakdown total_cost(const network_tree& tree, const chain_table& chains, const std::map<chain_id, allocation>& assign,
                                 const cost_params& params) {
    cost_breakdown c;
    for (const auto& [id, alloc] : assign) {
        const auto& chain = chains.at(id);
        if (chain.current) c.migration += params.migration_price(chain, *chain.current, alloc.dc);
        c.computation += static_cast<double>(alloc.total()) * tree.dc(alloc.dc).cpu_cost;
    }
    const auto load = link_traffic(tree, chains, assign);
    for (std::size_t i = 0; i < load.size(); ++i) c.bandwidth += tree.links()[i].bw_cost * load[i] / params.bandwidth_unit_bps;
    return c;
}

} // namespace chainplace
