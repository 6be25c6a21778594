#pragma once

// Greedy minimal CPU allocation per (chain, datacenter) and the resulting
// delay-feasible datacenter sets.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "chainplace/errors.hpp"
#include "chainplace/service_model.hpp"
#include "chainplace/topology.hpp"

namespace chainplace {

/// Absolute tolerance on delay comparisons, in seconds.
inline constexpr double delay_tolerance = 1e-12;

inline bool meets_target(double delay, double budget) {
    return delay <= budget + delay_tolerance;
}

/// Smallest admissible allocation of VM k: floor(theta*lambda) + 1.
inline std::int64_t min_units(const vm_profile& vm) {
    return static_cast<std::int64_t>(std::floor(vm.load_units)) + 1;
}

inline std::int64_t min_units(const chain_spec& chain) {
    std::int64_t total = 0;
    for (const auto& vm : chain.vms) total += min_units(vm);
    return total;
}

/// delta_k(mu) = D_k(mu) - D_k(mu + 1)
inline double delay_reduction(const chain_spec& chain, std::size_t k, std::int64_t mu) {
    const auto& vm = chain.vms.at(k);
    if (mu < min_units(vm)) throw infinite_delay_error("delay reduction evaluated below the finiteness threshold");
    return vm_delay(vm.load_units, vm.work, mu) - vm_delay(vm.load_units, vm.work, mu + 1);
}

/// Called once per iterate (including the initial one) with the per-VM
/// units and the computational delay.
using gfa_observer = std::function<void(std::span<const std::int64_t>, double)>;

/// Greedy minimal allocation for a computational-delay budget `slack`.
/// Returns nullopt when the budget cannot be met within the chain's CPU cap.
inline std::optional<std::vector<std::int64_t>> minimal_allocation(const chain_spec& chain, double slack,
                                                                   const gfa_observer& observe = {}) {
    if (!(slack > 0)) return std::nullopt;
    const auto h = chain.length();
    std::vector<std::int64_t> mu(h);
    std::vector<double> delay(h);
    std::int64_t total = 0;
    double dc = 0;
    for (std::size_t k = 0; k < h; ++k) {
        mu[k] = min_units(chain.vms[k]);
        delay[k] = vm_delay(chain.vms[k].load_units, chain.vms[k].work, mu[k]);
        total += mu[k];
        dc += delay[k];
    }
    if (observe) observe(mu, dc);
    while (!meets_target(dc, slack) && total <= chain.cpu_cap) {
        std::size_t best = 0;
        double best_gain = -1;
        for (std::size_t k = 0; k < h; ++k) {
            const double gain = delay[k] - vm_delay(chain.vms[k].load_units, chain.vms[k].work, mu[k] + 1);
            if (gain > best_gain) {
                best_gain = gain;
                best = k;
            }
        }
        ++mu[best];
        ++total;
        delay[best] = vm_delay(chain.vms[best].load_units, chain.vms[best].work, mu[best]);
        dc = 0;
        for (double d : delay) dc += d;
        if (observe) observe(mu, dc);
    }
    if (total > chain.cpu_cap || !meets_target(dc, slack)) return std::nullopt;
    return mu;
}

inline std::optional<allocation> gfa_single(const chain_spec& chain, dc_id s, const network_tree& tree) {
    const double slack = chain.target_delay_s - net_delay(chain, s, tree);
    auto mu = minimal_allocation(chain, slack);
    if (!mu) return std::nullopt;
    return allocation{chain.id, s, std::move(*mu)};
}

/// Delay-feasible datacenters of one chain, bottom-up from its PoA.
struct feasible_set {
    chain_id chain = 0;
    std::vector<dc_id> dcs;
    std::vector<allocation> allocs; ///< parallel to dcs

    bool empty() const { return dcs.empty(); }
    bool contains(dc_id s) const { return std::find(dcs.begin(), dcs.end(), s) != dcs.end(); }
    dc_id top() const {
        if (dcs.empty()) throw lookup_error("chain " + std::to_string(chain) + " has no delay-feasible datacenter");
        return dcs.back();
    }
    const allocation& at(dc_id s) const {
        for (std::size_t i = 0; i < dcs.size(); ++i)
            if (dcs[i] == s) return allocs[i];
        throw lookup_error("datacenter " + std::to_string(s) + " is not delay-feasible for chain " + std::to_string(chain));
    }
};

using feasible_map = std::map<chain_id, feasible_set>;

/// Walks the root path from the PoA; the first infeasible datacenter and
/// all its ancestors are dropped.
inline feasible_set gfa_chain(const chain_spec& chain, const network_tree& tree) {
    feasible_set fs;
    fs.chain = chain.id;
    for (dc_id s : tree.root_path(chain.poa)) {
        auto alloc = gfa_single(chain, s, tree);
        if (!alloc) break;
        fs.dcs.push_back(s);
        fs.allocs.push_back(std::move(*alloc));
    }
    return fs;
}

inline feasible_map gfa(const network_tree& tree, const chain_table& chains) {
    feasible_map out;
    for (const auto& [id, chain] : chains) out.emplace(id, gfa_chain(chain, tree));
    return out;
}

/// Exhaustive B-minimal allocation: among all per-VM vectors above the
/// finiteness threshold summing to exactly B, the one with least
/// computational delay (first in lexicographic order on ties).
inline std::vector<std::int64_t> b_minimal_oracle(const chain_spec& chain, std::int64_t budget) {
    const auto h = chain.length();
    std::vector<std::int64_t> floor_units(h);
    std::int64_t base = 0;
    for (std::size_t k = 0; k < h; ++k) base += floor_units[k] = min_units(chain.vms[k]);
    if (budget < base) throw invalid_input_error("budget below the finiteness threshold");

    std::vector<std::int64_t> cur(floor_units);
    std::vector<std::int64_t> best;
    double best_delay = std::numeric_limits<double>::infinity();
    std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t k, std::int64_t left) {
        if (k + 1 == h) {
            cur[k] = floor_units[k] + left;
            const double d = chain_comp_delay(chain, std::span<const std::int64_t>(cur));
            if (d < best_delay) {
                best_delay = d;
                best = cur;
            }
            return;
        }
        for (std::int64_t extra = 0; extra <= left; ++extra) {
            cur[k] = floor_units[k] + extra;
            rec(k + 1, left - extra);
        }
    };
    rec(0, budget - base);
    return best;
}

/// CSV `chain_id,dc_id,vm_index,mu_units`, one row per VM.
inline void write_allocations_csv(std::ostream& out, const feasible_map& sets) {
    out << "chain_id,dc_id,vm_index,mu_units\n";
    for (const auto& [id, fs] : sets)
        for (const auto& a : fs.allocs)
            for (std::size_t k = 0; k < a.units.size(); ++k) out << id << ',' << a.dc << ',' << k << ',' << a.units[k] << '\n';
}

} // namespace chainplace
