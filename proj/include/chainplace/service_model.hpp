#pragma once

// Service chains and their delay model: M/M/1 computational delay per VM,
// token-bucket/rate-latency network delay, and their sum.

#include <cstdint>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp> // nlohmann/json (vendored)

#include "chainplace/errors.hpp"
#include "chainplace/topology.hpp"

namespace chainplace {

using chain_id = std::int64_t;

/// One VM of a chain. CPU quantities are in CPU units (1 unit = 100 MHz).
struct vm_profile {
    double load_units = 1; ///< theta_k * lambda_k: CPU units needed to keep up with the input rate
    double work = 1;       ///< gamma_k * theta_k: CPU-unit seconds per data unit
    double rate_bps = 1e6; ///< lambda_k
};

struct chain_spec {
    chain_id id = 0;
    std::vector<vm_profile> vms;
    double downlink_bps = 1e6; ///< lambda_{h+1}: last VM back to the PoA
    double burst_bits = 0;     ///< sigma
    double target_delay_s = 0.1;
    std::int64_t cpu_cap = 1; ///< maximum CPU units the chain may receive in total
    dc_id poa = 0;            ///< leaf datacenter co-located with the user's PoA
    std::optional<dc_id> current;
    std::string rt_class;

    std::size_t length() const { return vms.size(); }
    double uplink_bps() const { return vms.front().rate_bps; }

    void validate() const {
        const auto where = " (chain " + std::to_string(id) + ")";
        if (vms.empty()) throw invalid_input_error("chain must contain at least one VM" + where);
        for (const auto& vm : vms)
            if (!(vm.load_units > 0) || !(vm.work > 0) || !(vm.rate_bps > 0))
                throw invalid_input_error("VM load, work and rate must be strictly positive" + where);
        if (!(downlink_bps > 0) || !(target_delay_s > 0)) throw invalid_input_error("downlink rate and target delay must be positive" + where);
        if (burst_bits < 0) throw invalid_input_error("burstiness must be non-negative" + where);
        if (cpu_cap < 1) throw invalid_input_error("cpu cap must be positive" + where);
    }

    /// The per-chain CPU cap must fit in every datacenter.
    void validate_against(const network_tree& tree) const {
        validate();
        if (!tree.contains(poa) || !tree.dc(poa).is_leaf())
            throw lookup_error("chain " + std::to_string(id) + " has PoA " + std::to_string(poa) + " which is not a leaf");
        if (cpu_cap > tree.min_capacity())
            throw invalid_input_error("chain " + std::to_string(id) + " cpu cap exceeds the smallest datacenter capacity");
    }
};

using chain_table = std::map<chain_id, chain_spec>;

struct allocation {
    chain_id chain = 0;
    dc_id dc = 0;
    std::vector<std::int64_t> units; ///< per-VM CPU units

    std::int64_t total() const { return std::accumulate(units.begin(), units.end(), std::int64_t{0}); }
    friend bool operator==(const allocation&, const allocation&) = default;
};

/// Mean M/M/1 sojourn time of one data unit: work / (mu - load).
inline double vm_delay(double load_units, double work, std::int64_t mu) {
    const double excess = static_cast<double>(mu) - load_units;
    if (!(excess > 0)) throw infinite_delay_error("allocation of " + std::to_string(mu) + " units does not exceed the VM load");
    return work / excess;
}

inline double chain_comp_delay(const chain_spec& chain, std::span<const std::int64_t> units) {
    if (units.size() != chain.length()) throw invalid_input_error("allocation does not cover every VM of the chain");
    double total = 0;
    for (std::size_t k = 0; k < units.size(); ++k) total += vm_delay(chain.vms[k].load_units, chain.vms[k].work, units[k]);
    return total;
}

inline double chain_comp_delay(const chain_spec& chain, const allocation& alloc) {
    return chain_comp_delay(chain, std::span<const std::int64_t>(alloc.units));
}

/// Network delay of a chain served on `s`: the burst is paid once per
/// direction, plus the link latencies to s and back.
inline double net_delay(const chain_spec& chain, dc_id s, const network_tree& tree) {
    if (!tree.is_ancestor_or_self(s, chain.poa))
        throw off_path_error("datacenter " + std::to_string(s) + " is not on the root path of chain " + std::to_string(chain.id));
    return chain.burst_bits / chain.uplink_bps() + chain.burst_bits / chain.downlink_bps + tree.path_latency(chain.poa, s) +
           tree.path_latency(s, chain.poa);
}

inline double total_delay(const chain_spec& chain, const allocation& alloc, dc_id s, const network_tree& tree) {
    return chain_comp_delay(chain, alloc) + net_delay(chain, s, tree);
}

// ---------------------------------------------------------------------------
// Service catalog

struct service_class {
    std::string name;
    std::string label;
    std::vector<vm_profile> vms;
    double downlink_bps = 1e6;
    double burst_bits = 0;
    double target_delay_s = 0.1;
    std::int64_t cpu_cap = 30;
};

using service_catalog = std::map<std::string, service_class>;

inline chain_spec make_chain(const service_class& cls, chain_id id, dc_id poa) {
    chain_spec c;
    c.id = id;
    c.vms = cls.vms;
    c.downlink_bps = cls.downlink_bps;
    c.burst_bits = cls.burst_bits;
    c.target_delay_s = cls.target_delay_s;
    c.cpu_cap = cls.cpu_cap;
    c.poa = poa;
    c.rt_class = cls.label.empty() ? cls.name : cls.label;
    return c;
}

/// Two automotive classes sharing a 3-VM chain with loads (2, 10, 2) units:
/// "rt" with a 10 ms target and "std" with 100 ms.
inline service_catalog baseline_catalog(double work_per_vm = 0.003, std::int64_t cpu_cap = 30) {
    const std::vector<vm_profile> vms{{2, work_per_vm, 1e6}, {10, work_per_vm, 1e6}, {2, work_per_vm, 1e6}};
    service_catalog cat;
    cat["rt"] = {"rt", "RT", vms, 1e6, 0, 0.010, cpu_cap};
    cat["std"] = {"std", "standard", vms, 1e6, 0, 0.100, cpu_cap};
    return cat;
}

/// Catalog schema:
/// {"classes": {"<name>": {"label": str, "target_delay_s": num, "cpu_cap": int,
///   "burst_bits": num, "downlink_bps": num,
///   "vms": [{"load_units": num, "work": num, "rate_bps": num}, ...]}}}
inline service_catalog catalog_from_json(const nlohmann::json& j) {
    if (!j.contains("classes") || !j["classes"].is_object()) throw config_error("catalog needs a 'classes' object");
    service_catalog cat;
    for (auto it = j["classes"].begin(); it != j["classes"].end(); ++it) {
        const auto& c = it.value();
        service_class cls;
        cls.name = it.key();
        try {
            cls.label = c.value("label", it.key());
            cls.target_delay_s = c.at("target_delay_s").get<double>();
            cls.cpu_cap = c.at("cpu_cap").get<std::int64_t>();
            cls.burst_bits = c.value("burst_bits", 0.0);
            cls.downlink_bps = c.value("downlink_bps", 1e6);
            for (const auto& vm : c.at("vms"))
                cls.vms.push_back({vm.at("load_units").get<double>(), vm.at("work").get<double>(), vm.value("rate_bps", 1e6)});
        } catch (const nlohmann::json::exception& e) {
            throw config_error("catalog class '" + it.key() + "': " + e.what());
        }
        make_chain(cls, 0, 0).validate();
        cat[cls.name] = std::move(cls);
    }
    return cat;
}

inline nlohmann::json to_json(const service_catalog& cat) {
    nlohmann::json classes = nlohmann::json::object();
    for (const auto& [name, cls] : cat) {
        nlohmann::json vms = nlohmann::json::array();
        for (const auto& vm : cls.vms) vms.push_back({{"load_units", vm.load_units}, {"work", vm.work}, {"rate_bps", vm.rate_bps}});
        classes[name] = {{"label", cls.label},       {"target_delay_s", cls.target_delay_s}, {"cpu_cap", cls.cpu_cap},
                         {"burst_bits", cls.burst_bits}, {"downlink_bps", cls.downlink_bps},     {"vms", vms}};
    }
    return {{"classes", classes}};
}

inline service_catalog read_catalog(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open catalog " + path);
    try {
        return catalog_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw config_error("catalog " + path + ": " + e.what());
    }
}

} // namespace chainplace
