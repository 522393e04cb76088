#pragma once

#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "bnv/cnf.hpp"
#include "bnv/mdd.hpp"

namespace bnv {

// Semantic role of one propositional variable.
struct VarRole {
    enum Kind { kRoot, kSinkTrue, kSinkFalse, kNode, kEdge, kValue, kAux };
    Kind kind = kAux;
    int a = -1;         // node id (kNode, kEdge) or feature id (kValue)
    int b = -1;         // value index (kEdge, kValue)
    std::string tag;    // model-copy tag; empty in the original
    std::string label;  // kAux only: what the auxiliary stands for

    bool operator==(const VarRole&) const = default;
};

// Bijection between variable ids and roles. Ids are dense from first_id();
// copies of a model keep their own registry starting past the original ids.
class VariableRegistry {
  public:
    int add(const VarRole& role);  // next id; rejects duplicate roles
    void start_at(int first_id);   // only before the first add

    int first_id() const { return first_id_; }
    int last_id() const { return first_id_ + static_cast<int>(roles_.size()) - 1; }
    int size() const { return static_cast<int>(roles_.size()); }
    const VarRole& role(int id) const;

    int find(const VarRole& role) const;  // -1 when absent
    int value_literal(int feature, int value, const std::string& tag = {}) const;
    int sink_literal(bool true_sink, const std::string& tag = {}) const;
    int root_literal(const std::string& tag = {}) const;
    std::vector<int> ids_of_kind(VarRole::Kind kind, const std::string& tag = {}) const;
    bool has_tag(const std::string& tag) const;

  private:
    int first_id_ = 1;
    std::vector<VarRole> roles_;
    std::map<std::tuple<int, int, int, std::string, std::string>, int> index_;
};

// Provenance the encoded artifact carries so queries can be decoded and
// cached results keyed without the source network at hand.
struct MddRef {
    std::string network_hash;
    double threshold = 0.5;
    std::vector<Variable> variables;  // all network variables, declaration order
    int outcome = -1;
    std::vector<int> ordering;  // variable ids, level order
    std::vector<int> pruned;
};

struct EncodedModel {
    Cnf cnf;
    VariableRegistry registry;
    MddRef mdd_ref;
};

// Clause-per-clause translation of the diagram:
//   T1 node->some edge, T2/T3/T4 edge->source/destination/value,
//   T5 destination+value+source->edge, P1 node+value->edge,
//   P2 node->some incoming edge (every non-root node, sinks included),
//   P3 value->some same-labeled edge on its level,
//   P4 ExactlyOne node per level (the sink pair counts as the last level),
// plus the root unit (rho), rho <-> root literal, and ExactlyOne over each
// feature's value literals (pruned features too, as free inputs). Neither
// sink is ever asserted as a unit here; class selection happens later via
// assert_class. AMO constraints are pairwise up to 8 literals and a
// sequential counter above, keeping the clause count linear in the diagram.
EncodedModel encode(const Mdd& mdd);

// Dynamic sink assertion: {T, -F} for class 1, {-T, F} for class 0.
std::vector<Clause> assert_class(const EncodedModel& m, int cls, const std::string& tag = {});

struct OrdinalGate {
    std::vector<Clause> clauses;
    Lit gate;  // g <-> "a's value < b's value" under the value EO constraints
};

// Strict ordinal comparison of two same-domain value-literal blocks: the
// upper triangle of the value-pair matrix as a DNF, Tseitin-translated with
// one auxiliary per (j,k) conjunct plus the gate. d=1 yields the unit (-g).
OrdinalGate encode_ordinal_less(VariableRegistry& registry, const std::vector<Lit>& a,
                                const std::vector<Lit>& b, const std::string& label);

// Clause-identical model over fresh ids (shifted past src's); roles carry
// the tag. Throws on a tag already present.
EncodedModel instantiate_copy(const EncodedModel& m, const std::string& tag);

// Append a tagged copy of src into dst (registry + clauses); returns the id
// offset applied to src's ids. Used to stack the M1/M2/M3 copies.
int append_copy(EncodedModel& dst, const EncodedModel& src, const std::string& tag);

// DIMACS with a `c var <id> <role>` map ahead of the header.
std::string model_to_dimacs(const EncodedModel& m);

nlohmann::json encoded_to_json(const EncodedModel& m);
EncodedModel encoded_from_json(const nlohmann::json& j);

}  // namespace bnv
