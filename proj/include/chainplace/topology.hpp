#pragma once

// Hierarchical (fat-tree) edge-cloud network: datacenters, directed links,
// unique root paths, and the recursive-rectangle builder used for
// antenna-driven topologies.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp> // nlohmann/json (vendored)

#include "chainplace/errors.hpp"

namespace chainplace {

using dc_id = std::int32_t;
using poa_id = std::int64_t;

struct point {
    double x = 0;
    double y = 0;
};

struct rect {
    double x0 = 0;
    double y0 = 0;
    double x1 = 0;
    double y1 = 0;

    double width() const { return x1 - x0; }
    double height() const { return y1 - y0; }
    bool degenerate() const { return !(x1 > x0) || !(y1 > y0); }
    bool contains(point p) const { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
};

struct datacenter {
    dc_id id = 0;
    int level = 0;
    std::optional<dc_id> parent;
    std::vector<dc_id> children;
    std::int64_t capacity = 0; // CPU units
    double cpu_cost = 1;       // cost units per CPU unit
    rect coverage;
    std::optional<poa_id> poa; // set on leaves only
    std::optional<point> position;

    bool is_leaf() const { return children.empty(); }
};

struct link_params {
    double prop_delay_s = 0.002;
    double bandwidth_bps = 1e10;
    double sched_bits = 0; // L_max
    double bw_cost = 3;    // cost units per billed bandwidth unit
};

struct link {
    dc_id from = 0;
    dc_id to = 0;
    double prop_delay_s = 0;
    double bandwidth_bps = 1;
    double sched_bits = 0;
    double bw_cost = 0;
    bool uplink = true;

    /// tau = L_max / C + T_p
    double latency() const { return sched_bits / bandwidth_bps + prop_delay_s; }
};

/// Input row for building a tree by hand. Nodes are identified by their index.
struct node_spec {
    std::optional<dc_id> parent;
    int level = 0;
    std::int64_t capacity = 0;
    double cpu_cost = 1;
    link_params uplink; // link to the parent (ignored for the root)
    std::optional<poa_id> poa;
    rect coverage;
    std::optional<point> position;
};

/// Immutable rooted tree of datacenters. Every non-root node contributes an
/// uplink (child -> parent) and a downlink (parent -> child).
class network_tree {
public:
    network_tree() = default;

    explicit network_tree(const std::vector<node_spec>& nodes) { build(nodes); }

    std::size_t size() const { return dcs_.size(); }
    const datacenter& dc(dc_id id) const {
        check(id);
        return dcs_[static_cast<std::size_t>(id)];
    }
    const std::vector<datacenter>& datacenters() const { return dcs_; }
    const std::vector<link>& links() const { return links_; }
    const link& link_at(std::size_t index) const { return links_.at(index); }
    dc_id root() const { return root_; }
    /// Number of levels (root level + 1).
    int height() const { return height_; }
    /// Longest shortest-path length, in edges.
    int diameter() const { return diameter_; }
    bool contains(dc_id id) const { return id >= 0 && static_cast<std::size_t>(id) < dcs_.size(); }

    std::size_t uplink_index(dc_id child) const {
        check(child);
        if (child == root_) throw lookup_error("root has no uplink");
        return uplink_of_[static_cast<std::size_t>(child)];
    }
    std::size_t downlink_index(dc_id child) const {
        check(child);
        if (child == root_) throw lookup_error("root has no downlink");
        return downlink_of_[static_cast<std::size_t>(child)];
    }

    int depth(dc_id id) const {
        check(id);
        return depth_[static_cast<std::size_t>(id)];
    }

    /// True when `anc` lies on the path from `node` to the root (inclusive).
    bool is_ancestor_or_self(dc_id anc, dc_id node) const {
        check(anc);
        check(node);
        dc_id cur = node;
        while (true) {
            if (cur == anc) return true;
            const auto& d = dcs_[static_cast<std::size_t>(cur)];
            if (!d.parent || depth_[static_cast<std::size_t>(cur)] <= depth_[static_cast<std::size_t>(anc)]) return false;
            cur = *d.parent;
        }
    }

    /// Datacenters from `from` up to the root, inclusive, bottom-up.
    std::vector<dc_id> root_path(dc_id from) const {
        check(from);
        std::vector<dc_id> out;
        for (std::optional<dc_id> cur = from; cur; cur = dcs_[static_cast<std::size_t>(*cur)].parent) out.push_back(*cur);
        return out;
    }

    dc_id lowest_common_ancestor(dc_id a, dc_id b) const {
        check(a);
        check(b);
        while (depth(a) > depth(b)) a = *dcs_[static_cast<std::size_t>(a)].parent;
        while (depth(b) > depth(a)) b = *dcs_[static_cast<std::size_t>(b)].parent;
        while (a != b) {
            a = *dcs_[static_cast<std::size_t>(a)].parent;
            b = *dcs_[static_cast<std::size_t>(b)].parent;
        }
        return a;
    }

    /// Directed links from i to j through their lowest common ancestor
    /// (uplinks first, then downlinks). Empty when i == j.
    std::vector<std::size_t> path(dc_id i, dc_id j) const {
        const dc_id lca = lowest_common_ancestor(i, j);
        std::vector<std::size_t> out;
        for (dc_id cur = i; cur != lca; cur = *dcs_[static_cast<std::size_t>(cur)].parent) out.push_back(uplink_index(cur));
        std::vector<std::size_t> down;
        for (dc_id cur = j; cur != lca; cur = *dcs_[static_cast<std::size_t>(cur)].parent) down.push_back(downlink_index(cur));
        out.insert(out.end(), down.rbegin(), down.rend());
        return out;
    }

    /// Sum of link latencies along path(i, j).
    double path_latency(dc_id i, dc_id j) const {
        double total = 0;
        for (auto idx : path(i, j)) total += links_[idx].latency();
        return total;
    }

    /// `s` and all its descendants, sorted by id.
    std::vector<dc_id> subtree(dc_id s) const {
        check(s);
        std::vector<dc_id> out;
        std::vector<dc_id> stack{s};
        while (!stack.empty()) {
            dc_id cur = stack.back();
            stack.pop_back();
            out.push_back(cur);
            const auto& ch = dcs_[static_cast<std::size_t>(cur)].children;
            stack.insert(stack.end(), ch.begin(), ch.end());
        }
        std::sort(out.begin(), out.end());
        return out;
    }

    /// Children before parents, children visited in stored order.
    const std::vector<dc_id>& post_order() const { return post_order_; }

    std::vector<dc_id> leaves() const {
        std::vector<dc_id> out;
        for (const auto& d : dcs_)
            if (d.is_leaf()) out.push_back(d.id);
        return out;
    }

    dc_id leaf_of_poa(poa_id poa) const {
        for (const auto& d : dcs_)
            if (d.is_leaf() && d.poa && *d.poa == poa) return d.id;
        throw lookup_error("unknown PoA " + std::to_string(poa));
    }

    std::int64_t min_capacity() const {
        std::int64_t m = std::numeric_limits<std::int64_t>::max();
        for (const auto& d : dcs_) m = std::min(m, d.capacity);
        return dcs_.empty() ? 0 : m;
    }

    /// Copy of the tree with capacities replaced (one entry per datacenter).
    network_tree with_capacities(const std::vector<std::int64_t>& caps) const {
        if (caps.size() != dcs_.size()) throw invalid_input_error("capacity vector size mismatch");
        network_tree copy = *this;
        for (std::size_t i = 0; i < caps.size(); ++i) {
            if (caps[i] < 0) throw invalid_input_error("negative capacity");
            copy.dcs_[i].capacity = caps[i];
        }
        return copy;
    }

private:
    void check(dc_id id) const {
        if (!contains(id)) throw lookup_error("unknown datacenter " + std::to_string(id));
    }

    void build(const std::vector<node_spec>& nodes) {
        if (nodes.empty()) throw construction_error("empty tree");
        const auto n = nodes.size();
        dcs_.assign(n, {});
        std::optional<dc_id> root;
        for (std::size_t i = 0; i < n; ++i) {
            const auto& spec = nodes[i];
            auto& d = dcs_[i];
            d.id = static_cast<dc_id>(i);
            d.level = spec.level;
            d.parent = spec.parent;
            d.capacity = spec.capacity;
            d.cpu_cost = spec.cpu_cost;
            d.coverage = spec.coverage;
            d.poa = spec.poa;
            d.position = spec.position;
            if (spec.capacity < 0) throw construction_error("negative capacity at datacenter " + std::to_string(i));
            if (!(spec.cpu_cost > 0)) throw construction_error("cpu cost must be positive at datacenter " + std::to_string(i));
            if (!spec.parent) {
                if (root) throw construction_error("more than one root");
                root = static_cast<dc_id>(i);
            } else if (*spec.parent < 0 || static_cast<std::size_t>(*spec.parent) >= n || *spec.parent == d.id) {
                throw construction_error("bad parent reference at datacenter " + std::to_string(i));
            }
        }
        if (!root) throw construction_error("tree has no root");
        root_ = *root;
        for (std::size_t i = 0; i < n; ++i)
            if (dcs_[i].parent) dcs_[static_cast<std::size_t>(*dcs_[i].parent)].children.push_back(static_cast<dc_id>(i));

        // Depths via BFS from the root; unreachable nodes mean a cycle.
        depth_.assign(n, -1);
        std::vector<dc_id> queue{root_};
        depth_[static_cast<std::size_t>(root_)] = 0;
        for (std::size_t head = 0; head < queue.size(); ++head) {
            const auto cur = queue[head];
            for (auto c : dcs_[static_cast<std::size_t>(cur)].children) {
                depth_[static_cast<std::size_t>(c)] = depth_[static_cast<std::size_t>(cur)] + 1;
                queue.push_back(c);
            }
        }
        if (queue.size() != n) throw construction_error("parent references contain a cycle");

        for (auto& d : dcs_) {
            if (d.parent && dcs_[static_cast<std::size_t>(*d.parent)].level <= d.level)
                throw construction_error("datacenter " + std::to_string(d.id) + " is not below its parent");
            if (d.is_leaf() != (d.level == 0))
                throw construction_error("leaves must be exactly the level-0 datacenters (id " + std::to_string(d.id) + ")");
            if (d.is_leaf() && !d.poa) d.poa = d.id;
        }
        height_ = dcs_[static_cast<std::size_t>(root_)].level + 1;

        uplink_of_.assign(n, 0);
        downlink_of_.assign(n, 0);
        links_.clear();
        for (std::size_t i = 0; i < n; ++i) {
            if (!dcs_[i].parent) continue;
            const auto& lp = nodes[i].uplink;
            if (!(lp.bandwidth_bps > 0) || lp.prop_delay_s < 0 || lp.sched_bits < 0 || lp.bw_cost < 0)
                throw construction_error("invalid link parameters above datacenter " + std::to_string(i));
            link up{static_cast<dc_id>(i), *dcs_[i].parent, lp.prop_delay_s, lp.bandwidth_bps, lp.sched_bits, lp.bw_cost, true};
            link down{*dcs_[i].parent, static_cast<dc_id>(i), lp.prop_delay_s, lp.bandwidth_bps, lp.sched_bits, lp.bw_cost, false};
            if (!std::isfinite(up.latency())) throw construction_error("non-finite link latency");
            uplink_of_[i] = links_.size();
            links_.push_back(up);
            downlink_of_[i] = links_.size();
            links_.push_back(down);
        }

        post_order_.clear();
        post_visit(root_);

        // Diameter: max over nodes of the two deepest child branches.
        diameter_ = 0;
        std::vector<int> down_height(n, 0);
        for (auto id : post_order_) {
            int best = 0;
            int second = 0;
            for (auto c : dcs_[static_cast<std::size_t>(id)].children) {
                int h = down_height[static_cast<std::size_t>(c)] + 1;
                if (h > best) {
                    second = best;
                    best = h;
                } else if (h > second) {
                    second = h;
                }
            }
            down_height[static_cast<std::size_t>(id)] = best;
            diameter_ = std::max(diameter_, best + second);
        }
    }

    void post_visit(dc_id id) {
        for (auto c : dcs_[static_cast<std::size_t>(id)].children) post_visit(c);
        post_order_.push_back(id);
    }

    std::vector<datacenter> dcs_;
    std::vector<link> links_;
    std::vector<std::size_t> uplink_of_;
    std::vector<std::size_t> downlink_of_;
    std::vector<int> depth_;
    std::vector<dc_id> post_order_;
    dc_id root_ = 0;
    int height_ = 0;
    int diameter_ = 0;
};

// ---------------------------------------------------------------------------
// Recursive-rectangle builder

struct antenna {
    poa_id id = 0;
    double x = 0;
    double y = 0;
};

struct grid_split {
    int rows = 2;
    int cols = 2;
};

enum class capacity_rule {
    level_plus_one, ///< multiplier(l) = l + 1 (default; leaves keep capacity)
    level,          ///< multiplier(l) = l (literal rule; leaves get zero)
    table,          ///< explicit per-level multipliers
};

struct level_settings {
    std::int64_t c_cpu = 1;
    capacity_rule rule = capacity_rule::level_plus_one;
    std::vector<std::int64_t> multipliers; ///< used when rule == table, indexed by level
    std::vector<double> cpu_costs;         ///< per level; empty -> 2^(root_level - l)
    std::vector<link_params> uplinks;      ///< per child level; empty -> link_params{}
    std::vector<grid_split> splits;        ///< per level (split of a level-l rectangle); missing -> 2x2

    std::int64_t multiplier(int level) const {
        switch (rule) {
        case capacity_rule::level_plus_one: return level + 1;
        case capacity_rule::level: return level;
        case capacity_rule::table:
            if (static_cast<std::size_t>(level) >= multipliers.size())
                throw config_error("capacity multiplier table has no entry for level " + std::to_string(level));
            return multipliers[static_cast<std::size_t>(level)];
        }
        return level + 1;
    }
    double cpu_cost(int level, int root_level) const {
        if (static_cast<std::size_t>(level) < cpu_costs.size()) return cpu_costs[static_cast<std::size_t>(level)];
        return std::ldexp(1.0, root_level - level);
    }
    link_params uplink(int child_level) const {
        if (static_cast<std::size_t>(child_level) < uplinks.size()) return uplinks[static_cast<std::size_t>(child_level)];
        return {};
    }
    grid_split split(int level) const {
        if (static_cast<std::size_t>(level) < splits.size() && splits[static_cast<std::size_t>(level)].rows > 0) return splits[static_cast<std::size_t>(level)];
        return {};
    }
};

namespace detail {

/// Index of the cell along one axis, half-open [a, b) with the far edge of
/// the parent rectangle closed.
inline int cell_index(double v, double lo, double hi, int cells) {
    const double w = (hi - lo) / cells;
    int idx = static_cast<int>(std::floor((v - lo) / w));
    return std::clamp(idx, 0, cells - 1);
}

struct build_state {
    const level_settings& settings;
    int root_level;
    std::vector<node_spec> nodes;
};

inline std::optional<dc_id> build_rect(build_state& st, const rect& area, int level, std::optional<dc_id> parent,
                                       const std::vector<antenna>& members) {
    if (members.empty()) return std::nullopt;
    const auto id = static_cast<dc_id>(st.nodes.size());
    node_spec spec;
    spec.parent = parent;
    spec.level = level;
    spec.capacity = st.settings.multiplier(level) * st.settings.c_cpu;
    spec.cpu_cost = st.settings.cpu_cost(level, st.root_level);
    spec.uplink = st.settings.uplink(level);
    spec.coverage = area;
    st.nodes.push_back(spec);

    if (level == 1) {
        auto sorted = members;
        std::sort(sorted.begin(), sorted.end(), [](const antenna& a, const antenna& b) { return a.id < b.id; });
        for (const auto& a : sorted) {
            node_spec leaf;
            leaf.parent = id;
            leaf.level = 0;
            leaf.capacity = st.settings.multiplier(0) * st.settings.c_cpu;
            leaf.cpu_cost = st.settings.cpu_cost(0, st.root_level);
            leaf.uplink = st.settings.uplink(0);
            leaf.poa = a.id;
            leaf.coverage = rect{a.x, a.y, a.x, a.y};
            leaf.position = point{a.x, a.y};
            st.nodes.push_back(leaf);
        }
        return id;
    }

    const auto sp = st.settings.split(level);
    if (sp.rows < 1 || sp.cols < 1) throw config_error("split must have at least one row and column");
    std::vector<std::vector<antenna>> cells(static_cast<std::size_t>(sp.rows * sp.cols));
    for (const auto& a : members) {
        const int col = cell_index(a.x, area.x0, area.x1, sp.cols);
        const int row = cell_index(a.y, area.y0, area.y1, sp.rows);
        cells[static_cast<std::size_t>(row * sp.cols + col)].push_back(a);
    }
    const double w = area.width() / sp.cols;
    const double h = area.height() / sp.rows;
    for (int row = 0; row < sp.rows; ++row) {
        for (int col = 0; col < sp.cols; ++col) {
            rect sub{area.x0 + col * w, area.y0 + row * h, col + 1 == sp.cols ? area.x1 : area.x0 + (col + 1) * w,
                     row + 1 == sp.rows ? area.y1 : area.y0 + (row + 1) * h};
            build_rect(st, sub, level - 1, id, cells[static_cast<std::size_t>(row * sp.cols + col)]);
        }
    }
    return id;
}

} // namespace detail

/// Builds a tree of `height` levels (root at level height-1) by recursively
/// splitting `area`; each level-1 rectangle adopts the antennas inside it as
/// leaves. Rectangles without antennas are pruned.
inline network_tree build_tree(const std::vector<antenna>& antennas, const rect& area, int height,
                               const level_settings& settings = {}) {
    if (area.degenerate()) throw construction_error("degenerate area");
    if (height < 2) throw construction_error("height must be at least 2");
    if (antennas.empty()) throw construction_error("no antennas");
    for (const auto& a : antennas)
        if (!area.contains({a.x, a.y})) throw construction_error("antenna " + std::to_string(a.id) + " lies outside the area");
    for (std::size_t i = 0; i < antennas.size(); ++i)
        for (std::size_t j = i + 1; j < antennas.size(); ++j)
            if (antennas[i].id == antennas[j].id) throw construction_error("duplicate antenna id " + std::to_string(antennas[i].id));
    detail::build_state st{settings, height - 1, {}};
    detail::build_rect(st, area, height - 1, std::nullopt, antennas);
    return network_tree(st.nodes);
}

// ---------------------------------------------------------------------------
// I/O

/// Reads `poa_id,x_m,y_m` rows (header required).
inline std::vector<antenna> read_antennas_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw config_error("antenna file is empty");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
    if (line != "poa_id,x_m,y_m") throw config_error("antenna header must be 'poa_id,x_m,y_m'");
    std::vector<antenna> out;
    std::size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string a, b, c;
        if (!std::getline(ss, a, ',') || !std::getline(ss, b, ',') || !std::getline(ss, c))
            throw config_error("antenna row " + std::to_string(row) + " has too few fields");
        try {
            out.push_back({std::stoll(a), std::stod(b), std::stod(c)});
        } catch (const std::logic_error&) {
            throw config_error("antenna row " + std::to_string(row) + " is malformed");
        }
    }
    return out;
}

inline std::vector<antenna> read_antennas_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open antenna file " + path);
    return read_antennas_csv(in);
}

inline void write_antennas_csv(std::ostream& out, const std::vector<antenna>& antennas) {
    out << "poa_id,x_m,y_m\n";
    out.precision(17);
    for (const auto& a : antennas) out << a.id << ',' << a.x << ',' << a.y << '\n';
}

/// Topology dump. Schema:
/// {"root", "height", "diameter",
///  "datacenters": [{"id","level","parent"|null,"children","capacity","cpu_cost","poa"|null,"coverage":[x0,y0,x1,y1]}],
///  "links": [{"from","to","direction":"up"|"down","tau_s","prop_delay_s","bandwidth_bps","sched_bits","bw_cost"}]}
inline nlohmann::json to_json(const network_tree& tree) {
    nlohmann::json j;
    j["root"] = tree.root();
    j["height"] = tree.height();
    j["diameter"] = tree.diameter();
    auto& dcs = j["datacenters"] = nlohmann::json::array();
    for (const auto& d : tree.datacenters()) {
        nlohmann::json e;
        e["id"] = d.id;
        e["level"] = d.level;
        e["parent"] = d.parent ? nlohmann::json(*d.parent) : nlohmann::json(nullptr);
        e["children"] = d.children;
        e["capacity"] = d.capacity;
        e["cpu_cost"] = d.cpu_cost;
        e["poa"] = d.poa ? nlohmann::json(*d.poa) : nlohmann::json(nullptr);
        e["coverage"] = {d.coverage.x0, d.coverage.y0, d.coverage.x1, d.coverage.y1};
        dcs.push_back(std::move(e));
    }
    auto& links = j["links"] = nlohmann::json::array();
    for (const auto& l : tree.links()) {
        links.push_back({{"from", l.from},
                         {"to", l.to},
                         {"direction", l.uplink ? "up" : "down"},
                         {"tau_s", l.latency()},
                         {"prop_delay_s", l.prop_delay_s},
                         {"bandwidth_bps", l.bandwidth_bps},
                         {"sched_bits", l.sched_bits},
                         {"bw_cost", l.bw_cost}});
    }
    return j;
}

} // namespace chainplace
