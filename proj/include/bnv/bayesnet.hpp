#pragma once

#include <string>
#include <vector>

namespace bnv {

constexpr int kUnassigned = -1;

// A discrete variable. Value order is the declaration order of the labels
// and doubles as the ordinal order used by monotonicity queries.
struct Variable {
    std::string name;
    std::vector<std::string> value_labels;

    int cardinality() const { return static_cast<int>(value_labels.size()); }
};

// Conditional probability table of one variable. Rows are stored in
// row-major order over the parent tuple: the last parent varies fastest.
struct Cpt {
    int child = -1;
    std::vector<int> parents;                 // declaration order; defines row layout
    std::vector<std::vector<double>> rows;    // rows[parent_index][child_value]
};

// Immutable after construction (validate() is called by the parsers and
// should be called after hand-building one). Safe to share across threads.
struct BayesianNetwork {
    std::vector<Variable> variables;
    std::vector<std::pair<int, int>> edges;   // (parent, child)
    std::vector<Cpt> cpts;                    // one per variable, same index
    int outcome = -1;

    int var_count() const { return static_cast<int>(variables.size()); }
    int index_of(const std::string& name) const;  // -1 when absent

    bool is_feature(int v) const { return v != outcome; }
    std::vector<int> feature_ids() const;

    // Independent parameter count: sum over v of (card(v)-1) * prod card(parents).
    long long parameter_count() const;
    double average_degree() const;  // 2|E| / |V|
};

// Value indices per variable id; kUnassigned marks holes. The outcome
// variable is never assigned (operations validate this).
class Assignment {
  public:
    Assignment() = default;
    explicit Assignment(int var_count) : values_(var_count, kUnassigned) {}

    int operator[](int var) const { return values_[var]; }
    void set(int var, int value) { values_[var] = value; }
    void unset(int var) { values_[var] = kUnassigned; }
    bool assigned(int var) const { return values_[var] != kUnassigned; }
    int size() const { return static_cast<int>(values_.size()); }

    bool operator==(const Assignment&) const = default;

  private:
    std::vector<int> values_;
};

// Throws SemanticError on any violated invariant: cardinalities, duplicate
// labels, cycles, CPT row coverage, row normalization (1e-9), binary outcome,
// parent lists consistent with the edge set.
void validate(const BayesianNetwork& net);

// Row index into cpt.rows for the given (complete over parents) assignment.
int cpt_row_index(const BayesianNetwork& net, const Cpt& cpt, const Assignment& a);

// Exact P(outcome = 1 | evidence). Evidence must assign every feature and
// nothing else. Throws ZeroEvidenceError when P(evidence) == 0.
double posterior(const BayesianNetwork& net, const Assignment& evidence);

// 1 iff posterior >= threshold; the tie at the threshold goes to class 1.
int classify(const BayesianNetwork& net, const Assignment& evidence, double threshold);

// Topological order of the features (BN edges restricted to features),
// lexicographic tie-break on names. The default MDD ordering.
std::vector<int> feature_topological_order(const BayesianNetwork& net);

}  // namespace bnv
