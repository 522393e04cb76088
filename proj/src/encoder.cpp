#include "bnv/encoder.hpp"

#include <algorithm>
#include <sstream>

#include "bnv/errors.hpp"

namespace bnv {

namespace {

std::tuple<int, int, int, std::string, std::string> key_of(const VarRole& r) {
    return {static_cast<int>(r.kind), r.a, r.b, r.tag, r.label};
}

}  // namespace

int VariableRegistry::add(const VarRole& role) {
    int id = first_id_ + static_cast<int>(roles_.size());
    if (!index_.emplace(key_of(role), id).second)
        throw InvalidArgument("duplicate registry role");
    roles_.push_back(role);
    return id;
}

void VariableRegistry::start_at(int first_id) {
    if (!roles_.empty()) throw InvalidArgument("registry already populated");
    if (first_id < 1) throw InvalidArgument("ids start at 1");
    first_id_ = first_id;
}

const VarRole& VariableRegistry::role(int id) const {
    if (id < first_id_ || id > last_id()) throw InvalidArgument("unknown registry id");
    return roles_[id - first_id_];
}

int VariableRegistry::find(const VarRole& role) const {
    auto it = index_.find(key_of(role));
    return it == index_.end() ? -1 : it->second;
}

int VariableRegistry::value_literal(int feature, int value, const std::string& tag) const {
    int id = find({VarRole::kValue, feature, value, tag, {}});
    if (id < 0) throw InvalidArgument("no value literal for feature " + std::to_string(feature) +
                                      " value " + std::to_string(value));
    return id;
}

int VariableRegistry::sink_literal(bool true_sink, const std::string& tag) const {
    int id = find({true_sink ? VarRole::kSinkTrue : VarRole::kSinkFalse, -1, -1, tag, {}});
    if (id < 0) throw InvalidArgument("no sink literal for this tag");
    return id;
}

int VariableRegistry::root_literal(const std::string& tag) const {
    int id = find({VarRole::kRoot, -1, -1, tag, {}});
    if (id < 0) throw InvalidArgument("no root literal for this tag");
    return id;
}

std::vector<int> VariableRegistry::ids_of_kind(VarRole::Kind kind, const std::string& tag) const {
    std::vector<int> out;
    for (int id = first_id_; id <= last_id(); ++id)
        if (roles_[id - first_id_].kind == kind && roles_[id - first_id_].tag == tag)
            out.push_back(id);
    return out;
}

bool VariableRegistry::has_tag(const std::string& tag) const {
    return std::any_of(roles_.begin(), roles_.end(),
                       [&](const VarRole& r) { return r.tag == tag; });
}

namespace {

// EO = one ALO clause + AMO. Pairwise AMO is smallest up to a point; past 8
// literals a sequential counter keeps the clause count linear in the width.
void exactly_one(Cnf& cnf, VariableRegistry& reg, const std::vector<int>& vars,
                 const std::string& label) {
    cnf.add(Clause(vars.begin(), vars.end()));
    const int n = static_cast<int>(vars.size());
    if (n <= 8) {
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) cnf.add({-vars[i], -vars[j]});
        return;
    }
    std::vector<int> s(n - 1);
    for (int i = 0; i + 1 < n; ++i)
        s[i] = reg.add({VarRole::kAux, -1, -1, {}, label + ":seq" + std::to_string(i)});
    cnf.add({-vars[0], s[0]});
    for (int i = 1; i + 1 < n; ++i) {
        cnf.add({-vars[i], s[i]});
        cnf.add({-s[i - 1], s[i]});
        cnf.add({-vars[i], -s[i - 1]});
    }
    cnf.add({-vars[n - 1], -s[n - 2]});
}

}  // namespace

EncodedModel encode(const Mdd& mdd) {
    validate_mdd(mdd);
    EncodedModel m;
    m.mdd_ref = {mdd.network_hash, mdd.threshold, mdd.variables,
                 mdd.outcome,      mdd.ordering,  mdd.pruned};
    VariableRegistry& reg = m.registry;
    Cnf& cnf = m.cnf;

    const int rho = reg.add({VarRole::kRoot});
    const int sink_t = reg.add({VarRole::kSinkTrue});
    const int sink_f = reg.add({VarRole::kSinkFalse});
    std::vector<int> node_lit(mdd.nodes.size());
    for (size_t i = 0; i < mdd.nodes.size(); ++i)
        node_lit[i] = reg.add({VarRole::kNode, static_cast<int>(i)});
    std::vector<std::vector<int>> edge_lit(mdd.nodes.size());
    for (size_t i = 0; i < mdd.nodes.size(); ++i)
        for (size_t j = 0; j < mdd.nodes[i].children.size(); ++j)
            edge_lit[i].push_back(
                reg.add({VarRole::kEdge, static_cast<int>(i), static_cast<int>(j)}));
    std::vector<std::vector<int>> value_lit(mdd.variables.size());
    for (int v = 0; v < static_cast<int>(mdd.variables.size()); ++v) {
        if (v == mdd.outcome) continue;
        for (int j = 0; j < mdd.variables[v].cardinality(); ++j)
            value_lit[v].push_back(reg.add({VarRole::kValue, v, j}));
    }

    auto lit_of = [&](NodeId c) {
        if (!Mdd::is_sink(c)) return node_lit[c];
        return c == kTrueSink ? sink_t : sink_f;
    };

    cnf.add({rho});
    cnf.add({-rho, lit_of(mdd.root)});
    cnf.add({rho, -lit_of(mdd.root)});

    for (size_t i = 0; i < mdd.nodes.size(); ++i) {
        const MddNode& node = mdd.nodes[i];
        const int var = mdd.ordering[node.level];
        Clause t1{-node_lit[i]};
        for (int e : edge_lit[i]) t1.push_back(e);
        cnf.add(t1);
        for (size_t j = 0; j < node.children.size(); ++j) {
            const int e = edge_lit[i][j];
            const int mu = lit_of(node.children[j]);
            const int x = value_lit[var][j];
            cnf.add({-e, node_lit[i]});            // T2
            cnf.add({-e, mu});                     // T3
            cnf.add({-e, x});                      // T4
            cnf.add({-mu, -x, -node_lit[i], e});   // T5
            cnf.add({-node_lit[i], -x, e});        // P1
        }
    }

    // P2: incoming-edge support for every non-root node; the sinks take
    // part when reachable (a constant diagram has no edges at all, and its
    // free sink is pinned by the sink-pair EO below instead).
    std::vector<std::vector<int>> incoming(mdd.nodes.size());
    std::vector<int> into_true, into_false;
    for (size_t i = 0; i < mdd.nodes.size(); ++i)
        for (size_t j = 0; j < mdd.nodes[i].children.size(); ++j) {
            NodeId c = mdd.nodes[i].children[j];
            if (c == kTrueSink)
                into_true.push_back(edge_lit[i][j]);
            else if (c == kFalseSink)
                into_false.push_back(edge_lit[i][j]);
            else
                incoming[c].push_back(edge_lit[i][j]);
        }
    for (size_t i = 0; i < mdd.nodes.size(); ++i) {
        if (static_cast<NodeId>(i) == mdd.root) continue;
        Clause p2{-node_lit[i]};
        for (int e : incoming[i]) p2.push_back(e);
        cnf.add(p2);
    }
    if (!into_true.empty()) {
        Clause p2{-sink_t};
        for (int e : into_true) p2.push_back(e);
        cnf.add(p2);
    }
    if (!into_false.empty()) {
        Clause p2{-sink_f};
        for (int e : into_false) p2.push_back(e);
        cnf.add(p2);
    }

    std::vector<std::vector<int>> by_level(mdd.height());
    for (size_t i = 0; i < mdd.nodes.size(); ++i)
        by_level[mdd.nodes[i].level].push_back(static_cast<int>(i));

    // P3: a value literal implies one of its level's same-labeled edges.
    for (int level = 0; level < mdd.height(); ++level) {
        const int var = mdd.ordering[level];
        for (int j = 0; j < mdd.variables[var].cardinality(); ++j) {
            Clause p3{-value_lit[var][j]};
            for (int i : by_level[level]) p3.push_back(edge_lit[i][j]);
            cnf.add(p3);
        }
    }

    // P4 per level, with the sink pair as the terminal level.
    for (int level = 0; level < mdd.height(); ++level) {
        std::vector<int> lits;
        for (int i : by_level[level]) lits.push_back(node_lit[i]);
        exactly_one(cnf, reg, lits, "amo(level=" + std::to_string(level) + ")");
    }
    exactly_one(cnf, reg, {sink_t, sink_f}, "amo(sinks)");

    // Domain well-formedness over every feature, pruned ones included.
    for (int v = 0; v < static_cast<int>(mdd.variables.size()); ++v) {
        if (v == mdd.outcome) continue;
        exactly_one(cnf, reg, value_lit[v], "amo(value=" + mdd.variables[v].name + ")");
    }

    cnf.num_vars = std::max(cnf.num_vars, reg.last_id());
    return m;
}

std::vector<Clause> assert_class(const EncodedModel& m, int cls, const std::string& tag) {
    if (cls != 0 && cls != 1) throw InvalidArgument("class must be 0 or 1");
    Lit t = m.registry.sink_literal(true, tag);
    Lit f = m.registry.sink_literal(false, tag);
    if (cls == 1) return {{t}, {-f}};
    return {{-t}, {f}};
}

OrdinalGate encode_ordinal_less(VariableRegistry& registry, const std::vector<Lit>& a,
                                const std::vector<Lit>& b, const std::string& label) {
    if (a.size() != b.size() || a.empty())
        throw InvalidArgument("comparator blocks must share one non-empty domain");
    const int d = static_cast<int>(a.size());
    OrdinalGate out;
    std::vector<Lit> pairs;
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k)
            pairs.push_back(registry.add({VarRole::kAux, -1, -1, {},
                                          label + ":pair(" + std::to_string(j) + "," +
                                              std::to_string(k) + ")"}));
    out.gate = registry.add({VarRole::kAux, -1, -1, {}, label + ":gate"});
    if (pairs.empty()) {  // d == 1: no j < k exists
        out.clauses.push_back({-out.gate});
        return out;
    }
    int p = 0;
    for (int j = 0; j < d; ++j)
        for (int k = j + 1; k < d; ++k) {
            Lit c = pairs[p++];
            out.clauses.push_back({-c, a[j]});
            out.clauses.push_back({-c, b[k]});
            out.clauses.push_back({c, -a[j], -b[k]});
            out.clauses.push_back({-c, out.gate});
        }
    Clause some_pair{-out.gate};
    for (Lit c : pairs) some_pair.push_back(c);
    out.clauses.push_back(some_pair);
    return out;
}

int append_copy(EncodedModel& dst, const EncodedModel& src, const std::string& tag) {
    if (tag.empty()) throw InvalidArgument("copy tag must be non-empty");
    if (dst.registry.has_tag(tag) || src.registry.has_tag(tag))
        throw InvalidArgument("copy tag '" + tag + "' already in use");
    if (dst.mdd_ref.variables.empty()) dst.mdd_ref = src.mdd_ref;
    const int next = dst.registry.size() == 0 ? dst.registry.first_id()
                                              : dst.registry.last_id() + 1;
    const int offset = next - src.registry.first_id();
    for (int id = src.registry.first_id(); id <= src.registry.last_id(); ++id) {
        VarRole role = src.registry.role(id);
        role.tag = tag;
        dst.registry.add(role);
    }
    for (const Clause& c : src.cnf.clauses) {
        Clause shifted;
        for (Lit l : c) shifted.push_back(l > 0 ? l + offset : l - offset);
        dst.cnf.add(shifted);
    }
    dst.cnf.num_vars = std::max(dst.cnf.num_vars, dst.registry.last_id());
    return offset;
}

EncodedModel instantiate_copy(const EncodedModel& m, const std::string& tag) {
    EncodedModel out;
    out.mdd_ref = m.mdd_ref;
    out.registry.start_at(m.cnf.num_vars + 1);
    out.cnf.num_vars = m.cnf.num_vars;
    append_copy(out, m, tag);
    return out;
}

namespace {

std::string role_text(const VarRole& r, const MddRef& ref) {
    std::ostringstream s;
    if (!r.tag.empty()) s << r.tag << ":";
    switch (r.kind) {
        case VarRole::kRoot: s << "root"; break;
        case VarRole::kSinkTrue: s << "sink true"; break;
        case VarRole::kSinkFalse: s << "sink false"; break;
        case VarRole::kNode: s << "node " << r.a; break;
        case VarRole::kEdge: s << "edge " << r.a << " " << r.b; break;
        case VarRole::kValue:
            s << "value " << ref.variables[r.a].name << " " << r.b;
            break;
        case VarRole::kAux: s << "aux " << r.label; break;
    }
    return s.str();
}

}  // namespace

std::string model_to_dimacs(const EncodedModel& m) {
    std::vector<std::string> comments;
    for (int id = m.registry.first_id(); id <= m.registry.last_id(); ++id)
        comments.push_back("var " + std::to_string(id) + " " +
                           role_text(m.registry.role(id), m.mdd_ref));
    return to_dimacs(m.cnf, comments);
}

nlohmann::json encoded_to_json(const EncodedModel& m) {
    nlohmann::json j;
    j["kind"] = "encoded-model";
    j["num_vars"] = m.cnf.num_vars;
    j["clauses"] = m.cnf.clauses;

    nlohmann::json reg = nlohmann::json::array();
    for (int id = m.registry.first_id(); id <= m.registry.last_id(); ++id) {
        const VarRole& r = m.registry.role(id);
        nlohmann::json entry{{"id", id}};
        switch (r.kind) {
            case VarRole::kRoot: entry["kind"] = "root"; break;
            case VarRole::kSinkTrue:
                entry["kind"] = "sink";
                entry["value"] = true;
                break;
            case VarRole::kSinkFalse:
                entry["kind"] = "sink";
                entry["value"] = false;
                break;
            case VarRole::kNode:
                entry["kind"] = "node";
                entry["node"] = r.a;
                break;
            case VarRole::kEdge:
                entry["kind"] = "edge";
                entry["node"] = r.a;
                entry["value"] = r.b;
                break;
            case VarRole::kValue:
                entry["kind"] = "value";
                entry["feature"] = m.mdd_ref.variables[r.a].name;
                entry["value"] = r.b;
                break;
            case VarRole::kAux:
                entry["kind"] = "aux";
                entry["label"] = r.label;
                break;
        }
        if (!r.tag.empty()) entry["tag"] = r.tag;
        reg.push_back(std::move(entry));
    }
    j["registry"] = std::move(reg);

    nlohmann::json ref;
    ref["network_hash"] = m.mdd_ref.network_hash;
    ref["threshold"] = m.mdd_ref.threshold;
    ref["variables"] = nlohmann::json::array();
    for (const auto& var : m.mdd_ref.variables)
        ref["variables"].push_back({{"name", var.name}, {"values", var.value_labels}});
    ref["outcome"] = m.mdd_ref.variables[m.mdd_ref.outcome].name;
    ref["ordering"] = nlohmann::json::array();
    for (int v : m.mdd_ref.ordering) ref["ordering"].push_back(m.mdd_ref.variables[v].name);
    ref["pruned"] = nlohmann::json::array();
    for (int v : m.mdd_ref.pruned) ref["pruned"].push_back(m.mdd_ref.variables[v].name);
    j["mdd_ref"] = std::move(ref);
    return j;
}

EncodedModel encoded_from_json(const nlohmann::json& j) {
    if (j.value("kind", "") != "encoded-model")
        throw ParseError("not an encoded artifact (kind != encoded-model)");
    EncodedModel m;

    const auto& ref = j.at("mdd_ref");
    m.mdd_ref.network_hash = ref.value("network_hash", "");
    m.mdd_ref.threshold = ref.at("threshold").get<double>();
    std::map<std::string, int> ids;
    for (const auto& entry : ref.at("variables")) {
        Variable var;
        var.name = entry.at("name").get<std::string>();
        var.value_labels = entry.at("values").get<std::vector<std::string>>();
        if (!ids.emplace(var.name, static_cast<int>(m.mdd_ref.variables.size())).second)
            throw SemanticError("variable '" + var.name + "' declared twice");
        m.mdd_ref.variables.push_back(std::move(var));
    }
    auto lookup = [&](const std::string& name) {
        auto it = ids.find(name);
        if (it == ids.end()) throw SemanticError("unknown variable '" + name + "' in artifact");
        return it->second;
    };
    m.mdd_ref.outcome = lookup(ref.at("outcome").get<std::string>());
    for (const auto& name : ref.at("ordering"))
        m.mdd_ref.ordering.push_back(lookup(name.get<std::string>()));
    for (const auto& name : ref.at("pruned"))
        m.mdd_ref.pruned.push_back(lookup(name.get<std::string>()));

    bool first = true;
    int expected = 0;
    for (const auto& entry : j.at("registry")) {
        int id = entry.at("id").get<int>();
        if (first) {
            m.registry.start_at(id);
            expected = id;
            first = false;
        }
        if (id != expected++) throw ParseError("registry ids must be dense and ascending");
        VarRole role;
        std::string kind = entry.at("kind").get<std::string>();
        if (kind == "root") {
            role.kind = VarRole::kRoot;
        } else if (kind == "sink") {
            role.kind = entry.at("value").get<bool>() ? VarRole::kSinkTrue : VarRole::kSinkFalse;
        } else if (kind == "node") {
            role.kind = VarRole::kNode;
            role.a = entry.at("node").get<int>();
        } else if (kind == "edge") {
            role.kind = VarRole::kEdge;
            role.a = entry.at("node").get<int>();
            role.b = entry.at("value").get<int>();
        } else if (kind == "value") {
            role.kind = VarRole::kValue;
            role.a = lookup(entry.at("feature").get<std::string>());
            role.b = entry.at("value").get<int>();
        } else if (kind == "aux") {
            role.kind = VarRole::kAux;
            role.label = entry.at("label").get<std::string>();
        } else {
            throw ParseError("unknown registry role kind '" + kind + "'");
        }
        role.tag = entry.value("tag", "");
        m.registry.add(role);
    }

    for (const auto& clause : j.at("clauses")) m.cnf.add(clause.get<Clause>());
    m.cnf.num_vars = std::max(j.at("num_vars").get<int>(), m.cnf.num_vars);
    if (m.cnf.num_vars < m.registry.last_id())
        throw ParseError("registry ids exceed the declared variable count");
    return m;
}

}  // namespace bnv
