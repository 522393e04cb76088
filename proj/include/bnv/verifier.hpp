#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "bnv/encoder.hpp"
#include "bnv/solver.hpp"

namespace bnv {

// Antecedent senses over ordered value indices.
enum class Sense { kGe, kLe, kEq, kGt, kLt };

struct Rule {
    int feature = -1;
    Sense sense = Sense::kEq;
    int index = 0;
};

// "If every rule matches then the model decides cls." At most one rule per
// feature; a rule whose admitted range is empty makes the query vacuous.
struct ItrQuery {
    std::vector<Rule> rules;
    int cls = 1;
};

// "Under the partial context phi, the decision is monotone in feature."
// tie_free keeps the remaining features equal across the three compared
// contexts; switching it off checks the stronger free-variation property.
struct FmoQuery {
    std::vector<std::pair<int, int>> phi;  // (feature, value index)
    int feature = -1;
    bool tie_free = true;
};

struct VerifierConfig {
    long long max_witnesses = 8;   // counterexamples per satisfiable check
    long long conflict_limit = -1; // <0: none; exhausting it throws BudgetError
};

struct ItrVerdict {
    bool holds = false;
    bool vacuous = false;
    std::string note;
    // Each counterexample assigns every feature, indexed by variable id;
    // the outcome slot stays kUnassigned.
    std::vector<std::vector<int>> counterexamples;
    bool complete = true;  // false when max_witnesses truncated the list
    SolverStats stats;
};

struct FmoVerdict {
    bool holds = false;
    bool vacuous = false;
    std::string note;
    bool low_high_low = false;   // witness with the middle context deciding 1
    bool high_low_high = false;  // witness with the middle context deciding 0
    std::vector<std::array<std::vector<int>, 3>> witnesses;
    bool complete = true;
    SolverStats stats;
};

ItrVerdict verify_itr(const EncodedModel& m, const ItrQuery& q, const VerifierConfig& cfg = {});
FmoVerdict verify_fmo(const EncodedModel& m, const FmoQuery& q, const VerifierConfig& cfg = {});

// Reads the feature values a model assigns inside one tagged copy. Throws
// Error if any feature has no (or more than one) true value literal, which
// would mean the encoding's exactly-one layer is broken.
std::vector<int> decode_feature_values(const EncodedModel& m, const std::vector<Lit>& model,
                                       const std::string& tag = {});

struct Query {
    enum Type { kItr, kFmo };
    Type type = kItr;
    ItrQuery itr;
    FmoQuery fmo;
};

// {"type":"itr","class":c,"rules":[{"feature":name,"op":">=","value":idx|label}...]}
// {"type":"fmo","feature":name,"phi":{name:idx|label,...},"tie_free":bool}
Query query_from_json(const nlohmann::json& j, const MddRef& ref);
// Accepts one query object, an array, or {"queries":[...]}.
std::vector<Query> queries_from_json(const nlohmann::json& j, const MddRef& ref);

nlohmann::json verdict_to_json(const ItrVerdict& v, const ItrQuery& q, const MddRef& ref);
nlohmann::json verdict_to_json(const FmoVerdict& v, const FmoQuery& q, const MddRef& ref);

}  // namespace bnv
