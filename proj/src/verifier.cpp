#include "bnv/verifier.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_set>

#include "bnv/bayesnet.hpp"
#include "bnv/errors.hpp"

namespace bnv {

namespace {

int cardinality_of(const MddRef& ref, int v) {
    return static_cast<int>(ref.variables[v].value_labels.size());
}

void check_feature(const MddRef& ref, int v, const char* what) {
    if (v < 0 || v >= static_cast<int>(ref.variables.size()))
        throw InvalidArgument(std::string(what) + ": no such variable");
    if (v == ref.outcome)
        throw InvalidArgument(std::string(what) + ": '" + ref.variables[v].name +
                              "' is the outcome, not a feature");
}

std::pair<int, int> allowed_range(const Rule& r, int card) {
    switch (r.sense) {
        case Sense::kGe: return {r.index, card - 1};
        case Sense::kLe: return {0, r.index};
        case Sense::kEq: return {r.index, r.index};
        case Sense::kGt: return {r.index + 1, card - 1};
        case Sense::kLt: return {0, r.index - 1};
    }
    return {1, 0};
}

void accumulate(SolverStats& into, const SolverStats& s) {
    into.decisions += s.decisions;
    into.propagations += s.propagations;
    into.conflicts += s.conflicts;
    into.seconds += s.seconds;
}

}  // namespace

std::vector<int> decode_feature_values(const EncodedModel& m, const std::vector<Lit>& model,
                                       const std::string& tag) {
    std::unordered_set<int> pos;
    for (Lit l : model)
        if (l > 0) pos.insert(l);
    const MddRef& ref = m.mdd_ref;
    std::vector<int> vals(ref.variables.size(), kUnassigned);
    for (int v = 0; v < static_cast<int>(ref.variables.size()); ++v) {
        if (v == ref.outcome) continue;
        int found = -1;
        for (int j = 0; j < cardinality_of(ref, v); ++j) {
            if (!pos.count(m.registry.value_literal(v, j, tag))) continue;
            if (found >= 0)
                throw Error("model assigns two values to '" + ref.variables[v].name + "'");
            found = j;
        }
        if (found < 0) throw Error("model assigns no value to '" + ref.variables[v].name + "'");
        vals[v] = found;
    }
    return vals;
}

ItrVerdict verify_itr(const EncodedModel& m, const ItrQuery& q, const VerifierConfig& cfg) {
    const MddRef& ref = m.mdd_ref;
    if (q.cls != 0 && q.cls != 1) throw InvalidArgument("rule class must be 0 or 1");
    std::set<int> constrained;
    for (const Rule& r : q.rules) {
        check_feature(ref, r.feature, "rule");
        if (r.index < 0 || r.index >= cardinality_of(ref, r.feature))
            throw InvalidArgument("rule value index outside the domain of '" +
                                  ref.variables[r.feature].name + "'");
        if (!constrained.insert(r.feature).second)
            throw InvalidArgument("more than one rule constrains '" +
                                  ref.variables[r.feature].name + "'");
    }

    ItrVerdict out;
    for (const Rule& r : q.rules) {
        auto [lo, hi] = allowed_range(r, cardinality_of(ref, r.feature));
        if (lo > hi) {
            out.holds = true;
            out.vacuous = true;
            out.note = "rule over '" + ref.variables[r.feature].name +
                       "' admits no value; no context can match";
            return out;
        }
    }

    Cnf work = m.cnf;
    for (const Rule& r : q.rules) {
        auto [lo, hi] = allowed_range(r, cardinality_of(ref, r.feature));
        Clause range;
        for (int j = lo; j <= hi; ++j) range.push_back(m.registry.value_literal(r.feature, j));
        work.add(range);
    }
    for (const Clause& c : assert_class(m, 1 - q.cls)) work.add(c);

    Enumeration res =
        enumerate(work, m.registry.ids_of_kind(VarRole::kValue), cfg.max_witnesses,
                  cfg.conflict_limit);
    out.stats = res.stats;
    if (res.models.empty()) {
        if (!res.complete)
            throw BudgetError("conflict budget exhausted before the rule query was decided");
        out.holds = true;
        return out;
    }
    out.holds = false;
    out.complete = res.complete;
    for (const auto& model : res.models)
        out.counterexamples.push_back(decode_feature_values(m, model));
    return out;
}

FmoVerdict verify_fmo(const EncodedModel& m, const FmoQuery& q, const VerifierConfig& cfg) {
    const MddRef& ref = m.mdd_ref;
    check_feature(ref, q.feature, "monotonicity query");
    std::set<int> pinned;
    for (const auto& [v, val] : q.phi) {
        check_feature(ref, v, "context");
        if (val < 0 || val >= cardinality_of(ref, v))
            throw InvalidArgument("context value outside the domain of '" +
                                  ref.variables[v].name + "'");
        if (!pinned.insert(v).second)
            throw InvalidArgument("context pins '" + ref.variables[v].name + "' twice");
    }

    FmoVerdict out;
    const int d = cardinality_of(ref, q.feature);
    if (d < 3) {
        out.holds = true;
        out.vacuous = true;
        out.note = "feature '" + ref.variables[q.feature].name +
                   "' has fewer than three values; every decision over it is monotone";
        return out;
    }

    // Three aligned copies; the swing feature strictly increases across them.
    EncodedModel combined;
    const std::array<std::string, 3> tags{"M1", "M2", "M3"};
    for (const auto& t : tags) append_copy(combined, m, t);

    for (const auto& [v, val] : q.phi)
        for (const auto& t : tags)
            combined.cnf.add({combined.registry.value_literal(v, val, t)});

    if (q.tie_free) {
        for (int v = 0; v < static_cast<int>(ref.variables.size()); ++v) {
            if (v == ref.outcome || v == q.feature) continue;
            for (int j = 0; j < cardinality_of(ref, v); ++j) {
                Lit a = combined.registry.value_literal(v, j, "M1");
                Lit b = combined.registry.value_literal(v, j, "M2");
                Lit c = combined.registry.value_literal(v, j, "M3");
                combined.cnf.add({-a, b});
                combined.cnf.add({a, -b});
                combined.cnf.add({-b, c});
                combined.cnf.add({b, -c});
            }
        }
    }

    auto value_block = [&](const std::string& t) {
        std::vector<Lit> lits;
        for (int j = 0; j < d; ++j)
            lits.push_back(combined.registry.value_literal(q.feature, j, t));
        return lits;
    };
    OrdinalGate g12 =
        encode_ordinal_less(combined.registry, value_block("M1"), value_block("M2"), "less(M1,M2)");
    OrdinalGate g23 =
        encode_ordinal_less(combined.registry, value_block("M2"), value_block("M3"), "less(M2,M3)");
    for (const Clause& c : g12.clauses) combined.cnf.add(c);
    for (const Clause& c : g23.clauses) combined.cnf.add(c);
    combined.cnf.add({g12.gate});
    combined.cnf.add({g23.gate});
    combined.cnf.num_vars = std::max(combined.cnf.num_vars, combined.registry.last_id());

    std::vector<int> projection;
    for (const auto& t : tags) {
        auto ids = combined.registry.ids_of_kind(VarRole::kValue, t);
        projection.insert(projection.end(), ids.begin(), ids.end());
    }

    auto run_pattern = [&](const std::array<int, 3>& classes, bool& satisfiable) {
        Cnf work = combined.cnf;
        for (int k = 0; k < 3; ++k)
            for (const Clause& c : assert_class(combined, classes[k], tags[k])) work.add(c);
        Enumeration res = enumerate(work, projection, cfg.max_witnesses, cfg.conflict_limit);
        accumulate(out.stats, res.stats);
        if (res.models.empty() && !res.complete)
            throw BudgetError("conflict budget exhausted before the monotonicity query was decided");
        out.complete = out.complete && (res.complete || res.models.empty());
        satisfiable = !res.models.empty();
        for (const auto& model : res.models) {
            std::array<std::vector<int>, 3> triple;
            for (int k = 0; k < 3; ++k)
                triple[k] = decode_feature_values(combined, model, tags[k]);
            out.witnesses.push_back(std::move(triple));
        }
    };
    run_pattern({0, 1, 0}, out.low_high_low);
    run_pattern({1, 0, 1}, out.high_low_high);
    out.holds = !out.low_high_low && !out.high_low_high;
    return out;
}

namespace {

int variable_id(const MddRef& ref, const std::string& name) {
    for (int v = 0; v < static_cast<int>(ref.variables.size()); ++v)
        if (ref.variables[v].name == name) return v;
    throw SemanticError("unknown variable '" + name + "' in query");
}

int feature_id(const MddRef& ref, const std::string& name) {
    int v = variable_id(ref, name);
    if (v == ref.outcome)
        throw SemanticError("'" + name + "' is the outcome, not a feature");
    return v;
}

int value_index(const MddRef& ref, int v, const nlohmann::json& j) {
    const Variable& var = ref.variables[v];
    if (j.is_number_integer()) {
        int idx = j.get<int>();
        if (idx < 0 || idx >= static_cast<int>(var.value_labels.size()))
            throw SemanticError("value index " + std::to_string(idx) + " outside the domain of '" +
                                var.name + "'");
        return idx;
    }
    if (j.is_string()) {
        const std::string label = j.get<std::string>();
        for (int i = 0; i < static_cast<int>(var.value_labels.size()); ++i)
            if (var.value_labels[i] == label) return i;
        throw SemanticError("'" + var.name + "' has no value '" + label + "'");
    }
    throw ParseError("query values must be an index or a value label");
}

Sense sense_of(const std::string& op) {
    if (op == ">=") return Sense::kGe;
    if (op == "<=") return Sense::kLe;
    if (op == "==" || op == "=") return Sense::kEq;
    if (op == ">") return Sense::kGt;
    if (op == "<") return Sense::kLt;
    throw SemanticError("unknown rule operator '" + op + "' (expected >=, <=, ==, >, <)");
}

std::string sense_text(Sense s) {
    switch (s) {
        case Sense::kGe: return ">=";
        case Sense::kLe: return "<=";
        case Sense::kEq: return "==";
        case Sense::kGt: return ">";
        case Sense::kLt: return "<";
    }
    return "?";
}

nlohmann::json context_json(const std::vector<int>& vals, const MddRef& ref) {
    nlohmann::json o = nlohmann::json::object();
    for (size_t v = 0; v < ref.variables.size(); ++v) {
        if (static_cast<int>(v) == ref.outcome || vals[v] == kUnassigned) continue;
        o[ref.variables[v].name] = ref.variables[v].value_labels[vals[v]];
    }
    return o;
}

nlohmann::json stats_json(const SolverStats& s) {
    return {{"decisions", s.decisions},
            {"propagations", s.propagations},
            {"conflicts", s.conflicts},
            {"seconds", s.seconds}};
}

}  // namespace

Query query_from_json(const nlohmann::json& j, const MddRef& ref) {
    Query q;
    const std::string type = j.at("type").get<std::string>();
    if (type == "itr") {
        q.type = Query::kItr;
        q.itr.cls = j.value("class", 1);
        if (q.itr.cls != 0 && q.itr.cls != 1) throw SemanticError("query class must be 0 or 1");
        for (const auto& rj : j.at("rules")) {
            Rule r;
            r.feature = feature_id(ref, rj.at("feature").get<std::string>());
            r.sense = sense_of(rj.at("op").get<std::string>());
            const auto& v = rj.contains("value") ? rj.at("value") : rj.at("index");
            r.index = value_index(ref, r.feature, v);
            q.itr.rules.push_back(r);
        }
    } else if (type == "fmo") {
        q.type = Query::kFmo;
        q.fmo.feature = feature_id(ref, j.at("feature").get<std::string>());
        q.fmo.tie_free = j.value("tie_free", true);
        if (j.contains("phi"))
            for (const auto& [name, v] : j.at("phi").items()) {
                int var = feature_id(ref, name);
                q.fmo.phi.emplace_back(var, value_index(ref, var, v));
            }
    } else {
        throw SemanticError("unknown query type '" + type + "' (expected itr or fmo)");
    }
    return q;
}

std::vector<Query> queries_from_json(const nlohmann::json& j, const MddRef& ref) {
    std::vector<Query> out;
    if (j.is_array()) {
        for (const auto& entry : j) out.push_back(query_from_json(entry, ref));
    } else if (j.is_object() && j.contains("queries")) {
        for (const auto& entry : j.at("queries")) out.push_back(query_from_json(entry, ref));
    } else {
        out.push_back(query_from_json(j, ref));
    }
    if (out.empty()) throw SemanticError("query file contains no queries");
    return out;
}

nlohmann::json verdict_to_json(const ItrVerdict& v, const ItrQuery& q, const MddRef& ref) {
    nlohmann::json j;
    j["type"] = "itr";
    j["class"] = q.cls;
    nlohmann::json rules = nlohmann::json::array();
    for (const Rule& r : q.rules)
        rules.push_back({{"feature", ref.variables[r.feature].name},
                         {"op", sense_text(r.sense)},
                         {"value", ref.variables[r.feature].value_labels[r.index]}});
    j["rules"] = std::move(rules);
    j["holds"] = v.holds;
    j["vacuous"] = v.vacuous;
    if (!v.note.empty()) j["note"] = v.note;
    nlohmann::json ces = nlohmann::json::array();
    for (const auto& ce : v.counterexamples) ces.push_back(context_json(ce, ref));
    j["counterexamples"] = std::move(ces);
    j["complete"] = v.complete;
    j["stats"] = stats_json(v.stats);
    return j;
}

nlohmann::json verdict_to_json(const FmoVerdict& v, const FmoQuery& q, const MddRef& ref) {
    nlohmann::json j;
    j["type"] = "fmo";
    j["feature"] = ref.variables[q.feature].name;
    nlohmann::json phi = nlohmann::json::object();
    for (const auto& [var, val] : q.phi)
        phi[ref.variables[var].name] = ref.variables[var].value_labels[val];
    j["phi"] = std::move(phi);
    j["tie_free"] = q.tie_free;
    j["holds"] = v.holds;
    j["vacuous"] = v.vacuous;
    if (!v.note.empty()) j["note"] = v.note;
    j["patterns"] = {{"low_high_low", v.low_high_low}, {"high_low_high", v.high_low_high}};
    nlohmann::json ws = nlohmann::json::array();
    for (const auto& w : v.witnesses)
        ws.push_back({{"m1", context_json(w[0], ref)},
                      {"m2", context_json(w[1], ref)},
                      {"m3", context_json(w[2], ref)}});
    j["witnesses"] = std::move(ws);
    j["complete"] = v.complete;
    j["stats"] = stats_json(v.stats);
    return j;
}

}  // namespace bnv
