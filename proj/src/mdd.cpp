#include "bnv/mdd.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "bnv/errors.hpp"

namespace bnv {

namespace {

struct NodeKeyHash {
    size_t operator()(const std::pair<int, std::vector<NodeId>>& key) const {
        size_t h = static_cast<size_t>(key.first) * 0x9e3779b97f4a7c15ULL;
        for (NodeId c : key.second)
            h = (h ^ static_cast<size_t>(static_cast<uint32_t>(c))) * 0x100000001b3ULL;
        return h;
    }
};

// Shared state of one compile() run.
struct Builder {
    const BayesianNetwork& net;
    const CompilerConfig& cfg;
    const std::vector<int>& ordering;

    std::vector<MddNode> nodes;
    std::unordered_map<std::pair<int, std::vector<NodeId>>, NodeId, NodeKeyHash> unique;
    std::map<std::pair<int, NodeId>, NodeId> chain_memo;  // (level, sink) -> node

    // Factor schedule: a CPT folds into the running weights at the depth
    // where its last non-outcome scope variable gets assigned.
    std::vector<std::vector<int>> factors_at_depth;  // depth -> CPT child ids
    std::vector<bool> involves_outcome;              // per CPT
    std::vector<bool> zero_free;                     // per CPT
    std::vector<bool> outcome_done;                  // depth -> all Y factors folded
    std::vector<bool> rest_zero_free;                // depth -> unfolded non-Y CPTs zero-free

    Assignment partial;
    long long work = 0;

    Builder(const BayesianNetwork& n, const CompilerConfig& c, const std::vector<int>& ord)
        : net(n), cfg(c), ordering(ord), partial(n.var_count()) {
        const int height = static_cast<int>(ordering.size());
        std::vector<int> level_of(net.var_count(), -1);
        for (int d = 0; d < height; ++d) level_of[ordering[d]] = d;

        factors_at_depth.resize(height + 1);
        involves_outcome.resize(net.var_count());
        zero_free.resize(net.var_count());
        std::vector<int> fold_depth(net.var_count());
        for (int v = 0; v < net.var_count(); ++v) {
            const Cpt& cpt = net.cpts[v];
            bool zf = true;
            for (const auto& row : cpt.rows)
                for (double p : row) zf = zf && p > 0.0;
            zero_free[v] = zf;
            bool y = v == net.outcome;
            int depth = 0;
            if (v != net.outcome) depth = std::max(depth, level_of[v] + 1);
            for (int p : cpt.parents) {
                if (p == net.outcome)
                    y = true;
                else
                    depth = std::max(depth, level_of[p] + 1);
            }
            involves_outcome[v] = y;
            fold_depth[v] = depth;
            factors_at_depth[depth].push_back(v);
        }

        outcome_done.assign(height + 1, true);
        rest_zero_free.assign(height + 1, true);
        for (int v = 0; v < net.var_count(); ++v) {
            for (int d = 0; d < fold_depth[v]; ++d) {
                if (involves_outcome[v]) outcome_done[d] = false;
                if (!involves_outcome[v] && !zero_free[v]) rest_zero_free[d] = false;
            }
        }
    }

    void spend() {
        if (++work > cfg.budget)
            throw BudgetError("compilation budget of " + std::to_string(cfg.budget) +
                              " enumeration steps exceeded");
    }

    // Factor of CPT v under `partial`, with the outcome pinned to y.
    double factor(int v, int y) {
        const Cpt& cpt = net.cpts[v];
        partial.set(net.outcome, y);
        double f = cpt.rows[cpt_row_index(net, cpt, partial)][v == net.outcome ? y : partial[v]];
        partial.unset(net.outcome);
        return f;
    }

    NodeId intern(int level, std::vector<NodeId> children) {
        auto key = std::make_pair(level, std::move(children));
        auto it = unique.find(key);
        if (it != unique.end()) return it->second;
        NodeId id = static_cast<NodeId>(nodes.size());
        nodes.push_back({level, key.second});
        unique.emplace(std::move(key), id);
        return id;
    }

    // Redundant node column from `level` down to `sink` (constant subtree).
    NodeId chain(int level, NodeId sink) {
        if (level == static_cast<int>(ordering.size())) return sink;
        auto it = chain_memo.find({level, sink});
        if (it != chain_memo.end()) return it->second;
        NodeId below = chain(level + 1, sink);
        int card = net.variables[ordering[level]].cardinality();
        NodeId id = intern(level, std::vector<NodeId>(card, below));
        chain_memo.emplace(std::make_pair(level, sink), id);
        return id;
    }

    NodeId sink_for(double w0, double w1, int depth) {
        double total = w0 + w1;
        if (total == 0.0) {
            switch (cfg.zero_evidence) {
                case CompilerConfig::kClass0: return chain(depth, kFalseSink);
                case CompilerConfig::kClass1: return chain(depth, kTrueSink);
                case CompilerConfig::kError:
                    throw ZeroEvidenceError(
                        "a zero-probability evidence path has no defined class "
                        "(set zero_evidence to a default class to map it)");
            }
        }
        return w1 / total >= cfg.threshold ? kTrueSink : kFalseSink;
    }

    NodeId build(int depth, double w0, double w1) {
        spend();
        const int height = static_cast<int>(ordering.size());
        if (depth == height) return sink_for(w0, w1, depth);
        // All remaining completions share one class: every factor still
        // involving the outcome is folded and no unfolded factor can zero
        // out, so the posterior is fixed at w1/(w0+w1) across the subtree.
        if (w0 + w1 == 0.0 || (outcome_done[depth] && rest_zero_free[depth])) {
            NodeId sink = sink_for(w0, w1, depth);
            return Mdd::is_sink(sink) ? chain(depth, sink) : sink;
        }

        int var = ordering[depth];
        int card = net.variables[var].cardinality();
        std::vector<NodeId> children(card);
        for (int j = 0; j < card; ++j) {
            partial.set(var, j);
            double c0 = w0, c1 = w1;
            for (int f : factors_at_depth[depth + 1]) {
                if (involves_outcome[f]) {
                    c0 *= factor(f, 0);
                    c1 *= factor(f, 1);
                } else {
                    double p = factor(f, 0);
                    c0 *= p;
                    c1 *= p;
                }
            }
            children[j] = build(depth + 1, c0, c1);
        }
        partial.unset(var);
        return intern(depth, std::move(children));
    }
};

std::vector<int> resolve_ordering(const BayesianNetwork& net, const CompilerConfig& cfg) {
    if (cfg.ordering.empty()) return feature_topological_order(net);
    std::vector<int> order;
    std::set<int> seen;
    for (const auto& name : cfg.ordering) {
        int v = net.index_of(name);
        if (v < 0) throw InvalidArgument("ordering names unknown variable '" + name + "'");
        if (v == net.outcome)
            throw InvalidArgument("ordering must not contain the outcome variable");
        if (!seen.insert(v).second)
            throw InvalidArgument("ordering repeats variable '" + name + "'");
        order.push_back(v);
    }
    if (static_cast<int>(order.size()) != net.var_count() - 1)
        throw InvalidArgument("ordering must cover exactly the feature set");
    return order;
}

}  // namespace

Mdd compile(const BayesianNetwork& net, const CompilerConfig& cfg) {
    validate(net);
    if (cfg.threshold <= 0.0 || cfg.threshold >= 1.0)
        throw InvalidArgument("threshold must lie strictly inside (0,1)");
    std::vector<int> ordering = resolve_ordering(net, cfg);

    Builder builder(net, cfg, ordering);
    double w0 = 1.0, w1 = 1.0;
    for (int f : builder.factors_at_depth[0]) {
        if (builder.involves_outcome[f]) {
            w0 *= builder.factor(f, 0);
            w1 *= builder.factor(f, 1);
        } else {
            double p = builder.factor(f, 0);
            w0 *= p;
            w1 *= p;
        }
    }

    Mdd mdd;
    mdd.variables = net.variables;
    mdd.outcome = net.outcome;
    mdd.threshold = cfg.threshold;
    mdd.ordering = ordering;
    mdd.root = builder.build(0, w0, w1);
    mdd.nodes = std::move(builder.nodes);
    Mdd reduced = reduce(mdd);
    validate_mdd(reduced);
    return reduced;
}

namespace {

// One merge + one level-removal sweep; the caller loops to a fixpoint.
// Returns true when anything changed.
bool reduce_pass(Mdd& mdd) {
    const int height = mdd.height();
    bool changed = false;

    // Merge duplicates bottom-up. Children only point downward, so deeper
    // levels are final by the time a level is keyed.
    std::vector<NodeId> remap(mdd.nodes.size());
    for (size_t i = 0; i < mdd.nodes.size(); ++i) remap[i] = static_cast<NodeId>(i);
    std::vector<std::vector<int>> by_level(height);
    for (size_t i = 0; i < mdd.nodes.size(); ++i)
        by_level[mdd.nodes[i].level].push_back(static_cast<int>(i));
    for (int level = height - 1; level >= 0; --level) {
        std::map<std::vector<NodeId>, NodeId> canon;
        for (int id : by_level[level]) {
            for (NodeId& c : mdd.nodes[id].children)
                if (!Mdd::is_sink(c)) c = remap[c];
            auto [it, fresh] = canon.emplace(mdd.nodes[id].children, id);
            remap[id] = it->second;
            changed = changed || !fresh;
        }
    }
    if (!Mdd::is_sink(mdd.root)) mdd.root = remap[mdd.root];

    // A level dies when every (surviving) node on it maps all values to one
    // child. Resolve deepest-first so consecutive dead levels chain through.
    std::vector<bool> live_node(mdd.nodes.size());
    for (size_t i = 0; i < mdd.nodes.size(); ++i) live_node[i] = remap[i] == static_cast<NodeId>(i);
    std::vector<bool> dead_level(height, true);
    for (size_t i = 0; i < mdd.nodes.size(); ++i) {
        if (!live_node[i]) continue;
        const auto& kids = mdd.nodes[i].children;
        bool constant = std::all_of(kids.begin(), kids.end(),
                                    [&](NodeId c) { return c == kids.front(); });
        if (!constant) dead_level[mdd.nodes[i].level] = false;
    }
    std::vector<NodeId> through(mdd.nodes.size());
    for (size_t i = 0; i < mdd.nodes.size(); ++i) through[i] = static_cast<NodeId>(i);
    for (int level = height - 1; level >= 0; --level) {
        if (!dead_level[level]) continue;
        changed = true;
        for (int id : by_level[level]) {
            if (!live_node[id]) continue;
            NodeId target = mdd.nodes[id].children.front();
            through[id] = Mdd::is_sink(target) ? target : through[target];
        }
    }
    auto chase = [&](NodeId id) {
        return Mdd::is_sink(id) || !dead_level[mdd.nodes[id].level] ? id : through[id];
    };
    for (size_t i = 0; i < mdd.nodes.size(); ++i)
        if (live_node[i])
            for (NodeId& c : mdd.nodes[i].children) c = chase(c);
    mdd.root = chase(mdd.root);

    // Rebuild: BFS from the root, children in value order, levels compacted.
    std::vector<int> new_level(height, -1);
    std::vector<int> pruned = mdd.pruned;
    std::vector<int> ordering;
    for (int level = 0; level < height; ++level) {
        if (dead_level[level]) {
            pruned.push_back(mdd.ordering[level]);
        } else {
            new_level[level] = static_cast<int>(ordering.size());
            ordering.push_back(mdd.ordering[level]);
        }
    }
    std::vector<NodeId> new_id(mdd.nodes.size(), -1);
    std::vector<MddNode> nodes;
    std::vector<NodeId> frontier;
    auto visit = [&](NodeId id) {
        if (Mdd::is_sink(id)) return id;
        if (new_id[id] < 0) {
            new_id[id] = static_cast<NodeId>(nodes.size());
            nodes.push_back({new_level[mdd.nodes[id].level], mdd.nodes[id].children});
            frontier.push_back(id);
        }
        return new_id[id];
    };
    mdd.root = visit(mdd.root);
    for (size_t next = 0; next < frontier.size(); ++next) {
        NodeId old = frontier[next];
        for (NodeId& c : nodes[new_id[old]].children) c = visit(c);
    }
    std::sort(pruned.begin(), pruned.end());
    changed = changed || nodes.size() != mdd.nodes.size();
    mdd.nodes = std::move(nodes);
    mdd.ordering = std::move(ordering);
    mdd.pruned = std::move(pruned);
    return changed;
}

}  // namespace

Mdd reduce(const Mdd& mdd) {
    Mdd out = mdd;
    while (reduce_pass(out)) {
    }
    return out;
}

int evaluate(const Mdd& mdd, const Assignment& a) {
    if (a.size() != static_cast<int>(mdd.variables.size()))
        throw InvalidArgument("assignment sized for a different network");
    NodeId id = mdd.root;
    while (!Mdd::is_sink(id)) {
        int var = mdd.ordering[mdd.nodes[id].level];
        if (!a.assigned(var))
            throw InvalidArgument("assignment misses diagram variable '" +
                                  mdd.variables[var].name + "'");
        int value = a[var];
        if (value < 0 || value >= mdd.variables[var].cardinality())
            throw InvalidArgument("value out of range for '" + mdd.variables[var].name + "'");
        id = mdd.nodes[id].children[value];
    }
    return id == kTrueSink ? 1 : 0;
}

MddStats stats(const Mdd& mdd) {
    MddStats s;
    s.height = mdd.height();
    s.node_count = static_cast<int>(mdd.nodes.size());
    for (const auto& node : mdd.nodes) s.edge_count += static_cast<long long>(node.children.size());
    for (int v : mdd.pruned) s.pruned_variables.push_back(mdd.variables[v].name);
    return s;
}

void validate_mdd(const Mdd& mdd) {
    const int height = mdd.height();
    const int var_count = static_cast<int>(mdd.variables.size());
    if (mdd.outcome < 0 || mdd.outcome >= var_count)
        throw SemanticError("diagram has no outcome variable");

    std::set<int> seen;
    for (int v : mdd.ordering) {
        if (v < 0 || v >= var_count || v == mdd.outcome || !seen.insert(v).second)
            throw SemanticError("diagram ordering is not a list of distinct features");
    }
    for (int v : mdd.pruned)
        if (v < 0 || v >= var_count || v == mdd.outcome || !seen.insert(v).second)
            throw SemanticError("pruned list overlaps the ordering or repeats");
    if (static_cast<int>(seen.size()) != var_count - 1)
        throw SemanticError("ordering plus pruned must cover every feature");

    std::vector<std::vector<int>> by_level(height);
    for (size_t i = 0; i < mdd.nodes.size(); ++i) {
        const MddNode& node = mdd.nodes[i];
        if (node.level < 0 || node.level >= height) throw SemanticError("node level out of range");
        by_level[node.level].push_back(static_cast<int>(i));
        int card = mdd.variables[mdd.ordering[node.level]].cardinality();
        if (static_cast<int>(node.children.size()) != card)
            throw SemanticError("node is missing an outgoing edge for some value");
        for (NodeId c : node.children) {
            if (Mdd::is_sink(c)) {
                if (c != kTrueSink && c != kFalseSink) throw SemanticError("unknown sink id");
                // Sink edges may leave only the last level: the encoder's
                // level-wise ExactlyOne clauses assume every path visits
                // every level.
                if (node.level != height - 1)
                    throw SemanticError("sink edge above the last level");
            } else {
                if (c >= static_cast<NodeId>(mdd.nodes.size()))
                    throw SemanticError("edge to unknown node");
                if (mdd.nodes[c].level != node.level + 1)
                    throw SemanticError("edge skips a level");
            }
        }
    }
    for (int level = 0; level < height; ++level) {
        if (by_level[level].empty()) throw SemanticError("empty diagram level");
        std::set<std::vector<NodeId>> maps;
        for (int id : by_level[level])
            if (!maps.insert(mdd.nodes[id].children).second)
                throw SemanticError("duplicate outgoing maps on one level (not reduced)");
    }

    if (Mdd::is_sink(mdd.root)) {
        if (!mdd.nodes.empty()) throw SemanticError("sink-rooted diagram must have no nodes");
        if (mdd.root != kTrueSink && mdd.root != kFalseSink) throw SemanticError("unknown sink id");
    } else {
        if (mdd.root >= static_cast<NodeId>(mdd.nodes.size()) || mdd.nodes[mdd.root].level != 0)
            throw SemanticError("root must sit on level 0");
        std::set<NodeId> reached{mdd.root};
        std::vector<NodeId> frontier{mdd.root};
        while (!frontier.empty()) {
            NodeId id = frontier.back();
            frontier.pop_back();
            for (NodeId c : mdd.nodes[id].children)
                if (!Mdd::is_sink(c) && reached.insert(c).second) frontier.push_back(c);
        }
        if (reached.size() != mdd.nodes.size()) throw SemanticError("unreachable diagram node");
    }

    if (mdd.threshold <= 0.0 || mdd.threshold >= 1.0)
        throw SemanticError("threshold must lie strictly inside (0,1)");
}

nlohmann::json mdd_to_json(const Mdd& mdd) {
    nlohmann::json j;
    j["kind"] = "mdd";
    j["network_hash"] = mdd.network_hash;
    j["threshold"] = mdd.threshold;
    j["variables"] = nlohmann::json::array();
    for (const auto& var : mdd.variables)
        j["variables"].push_back({{"name", var.name}, {"values", var.value_labels}});
    j["outcome"] = mdd.variables[mdd.outcome].name;
    j["ordering"] = nlohmann::json::array();
    for (int v : mdd.ordering) j["ordering"].push_back(mdd.variables[v].name);
    j["pruned"] = nlohmann::json::array();
    for (int v : mdd.pruned) j["pruned"].push_back(mdd.variables[v].name);
    j["root"] = mdd.root;
    j["nodes"] = nlohmann::json::array();
    for (const auto& node : mdd.nodes)
        j["nodes"].push_back({{"level", node.level}, {"children", node.children}});
    return j;
}

Mdd mdd_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "mdd") throw ParseError("not a diagram artifact (kind != mdd)");
    Mdd mdd;
    mdd.network_hash = j.value("network_hash", "");
    mdd.threshold = j.at("threshold").get<double>();
    std::map<std::string, int> ids;
    for (const auto& entry : j.at("variables")) {
        Variable var;
        var.name = entry.at("name").get<std::string>();
        var.value_labels = entry.at("values").get<std::vector<std::string>>();
        if (!ids.emplace(var.name, static_cast<int>(mdd.variables.size())).second)
            throw SemanticError("variable '" + var.name + "' declared twice");
        mdd.variables.push_back(std::move(var));
    }
    auto lookup = [&](const std::string& name) {
        auto it = ids.find(name);
        if (it == ids.end()) throw SemanticError("unknown variable '" + name + "' in artifact");
        return it->second;
    };
    mdd.outcome = lookup(j.at("outcome").get<std::string>());
    for (const auto& name : j.at("ordering")) mdd.ordering.push_back(lookup(name.get<std::string>()));
    for (const auto& name : j.at("pruned")) mdd.pruned.push_back(lookup(name.get<std::string>()));
    mdd.root = j.at("root").get<NodeId>();
    for (const auto& entry : j.at("nodes")) {
        MddNode node;
        node.level = entry.at("level").get<int>();
        node.children = entry.at("children").get<std::vector<NodeId>>();
        mdd.nodes.push_back(std::move(node));
    }
    validate_mdd(mdd);
    return mdd;
}

}  // namespace bnv
