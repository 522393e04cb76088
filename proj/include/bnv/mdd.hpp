#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "bnv/bayesnet.hpp"

namespace bnv {

// Internal node ids are indices into Mdd::nodes; sinks are negative.
using NodeId = int32_t;
constexpr NodeId kFalseSink = -1;
constexpr NodeId kTrueSink = -2;

struct MddNode {
    int level = 0;
    std::vector<NodeId> children;  // value index -> node id, one per value
};

// Leveled decision diagram over the features of one network. Quasi-reduced:
// every root-to-sink path visits every level (sink edges leave only the last
// level), which the level-wise ExactlyOne clauses of the encoder rely on.
// A level exists only while some node on it branches; levels where every
// node maps all values to one child collapse away and their variables land
// in `pruned`. Immutable after compile; safe to share across threads.
struct Mdd {
    std::vector<Variable> variables;  // all network variables, declaration order
    int outcome = -1;
    double threshold = 0.5;
    std::string network_hash;  // provenance: hash of the source network text

    std::vector<int> ordering;  // variable ids, level 0 first (diagram vars only)
    std::vector<int> pruned;    // variable ids absent from the diagram
    std::vector<MddNode> nodes;
    NodeId root = kFalseSink;

    static bool is_sink(NodeId id) { return id < 0; }
    int height() const { return static_cast<int>(ordering.size()); }
};

struct CompilerConfig {
    double threshold = 0.5;
    // Empty: topological order of the features, lexicographic tie-break.
    // Otherwise a given list of names covering exactly the feature set.
    std::vector<std::string> ordering;
    enum ZeroEvidence { kError, kClass0, kClass1 };
    ZeroEvidence zero_evidence = kError;
    // Cap on enumeration steps. Constant subtrees are detected and counted
    // once, so networks whose raw value-space product exceeds the budget can
    // still compile when the outcome depends on few variables.
    long long budget = 1LL << 22;
};

// Enumerates the decision function level by level with running joint weights
// and hash-consed nodes, then reduces. The result is decision-equivalent to
// classify(net, ., threshold) on every complete assignment.
// Throws BudgetError past cfg.budget and ZeroEvidenceError for a
// zero-probability path under the default config.
Mdd compile(const BayesianNetwork& net, const CompilerConfig& cfg = {});

// Canonicalize: merge same-level nodes with identical outgoing maps
// (bottom-up), drop levels where every node maps all values to one child,
// renumber in BFS order. Idempotent.
Mdd reduce(const Mdd& mdd);

// Follows the unique path selected by a complete assignment; 1 for the TRUE
// sink. Throws InvalidArgument when a diagram variable is unassigned.
int evaluate(const Mdd& mdd, const Assignment& a);

struct MddStats {
    int height = 0;       // internal levels; sinks not counted
    int node_count = 0;   // sinks excluded
    long long edge_count = 0;
    std::vector<std::string> pruned_variables;
};

MddStats stats(const Mdd& mdd);

// Checks every structural invariant (child counts, level adjacency, sink
// edges only from the last level, reducedness, reachability, feature cover).
// Throws SemanticError with a description when one fails.
void validate_mdd(const Mdd& mdd);

// Artifact format, so compilation (the expensive step) is cacheable and
// encode can run as a separate invocation. Sinks serialize as -1/-2.
nlohmann::json mdd_to_json(const Mdd& mdd);
Mdd mdd_from_json(const nlohmann::json& j);

}  // namespace bnv
