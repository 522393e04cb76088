#include "bnv/bayesnet.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "bnv/errors.hpp"

namespace bnv {

int BayesianNetwork::index_of(const std::string& name) const {
    for (int i = 0; i < var_count(); ++i)
        if (variables[i].name == name) return i;
    return -1;
}

std::vector<int> BayesianNetwork::feature_ids() const {
    std::vector<int> ids;
    for (int i = 0; i < var_count(); ++i)
        if (i != outcome) ids.push_back(i);
    return ids;
}

long long BayesianNetwork::parameter_count() const {
    long long total = 0;
    for (int v = 0; v < var_count(); ++v) {
        long long rows = 1;
        for (int p : cpts[v].parents) rows *= variables[p].cardinality();
        total += rows * (variables[v].cardinality() - 1);
    }
    return total;
}

double BayesianNetwork::average_degree() const {
    if (variables.empty()) return 0.0;
    return 2.0 * static_cast<double>(edges.size()) / static_cast<double>(variables.size());
}

void validate(const BayesianNetwork& net) {
    const int n = net.var_count();
    if (n == 0) throw SemanticError("network has no variables");
    if (net.outcome < 0 || net.outcome >= n) throw SemanticError("outcome variable not set");

    std::set<std::string> names;
    for (const auto& v : net.variables) {
        if (!names.insert(v.name).second)
            throw SemanticError("duplicate variable name '" + v.name + "'");
        if (v.cardinality() < 2)
            throw SemanticError("variable '" + v.name + "' needs at least 2 values");
        std::set<std::string> labels(v.value_labels.begin(), v.value_labels.end());
        if (static_cast<int>(labels.size()) != v.cardinality())
            throw SemanticError("variable '" + v.name + "' has duplicate value labels");
    }
    if (net.variables[net.outcome].cardinality() != 2)
        throw SemanticError("outcome variable '" + net.variables[net.outcome].name +
                            "' must be binary");

    std::set<std::pair<int, int>> edge_set;
    for (auto [p, c] : net.edges) {
        if (p < 0 || p >= n || c < 0 || c >= n || p == c)
            throw SemanticError("edge endpoints out of range");
        if (!edge_set.insert({p, c}).second) throw SemanticError("duplicate edge");
    }

    // Acyclicity via Kahn's algorithm.
    std::vector<int> indeg(n, 0);
    for (auto [p, c] : net.edges) indeg[c]++;
    std::vector<int> queue;
    for (int v = 0; v < n; ++v)
        if (indeg[v] == 0) queue.push_back(v);
    int seen = 0;
    while (!queue.empty()) {
        int v = queue.back();
        queue.pop_back();
        ++seen;
        for (auto [p, c] : net.edges)
            if (p == v && --indeg[c] == 0) queue.push_back(c);
    }
    if (seen != n) throw SemanticError("edge set contains a cycle");

    if (static_cast<int>(net.cpts.size()) != n)
        throw SemanticError("expected one CPT per variable");

    for (int v = 0; v < n; ++v) {
        const Cpt& cpt = net.cpts[v];
        if (cpt.child != v) throw SemanticError("CPT index does not match its child");

        std::set<int> declared(cpt.parents.begin(), cpt.parents.end());
        if (declared.size() != cpt.parents.size())
            throw SemanticError("CPT of '" + net.variables[v].name + "' repeats a parent");
        std::set<int> in_neighbors;
        for (auto [p, c] : net.edges)
            if (c == v) in_neighbors.insert(p);
        if (declared != in_neighbors)
            throw SemanticError("CPT parents of '" + net.variables[v].name +
                                "' do not match the edge set");

        long long expected_rows = 1;
        for (int p : cpt.parents) expected_rows *= net.variables[p].cardinality();
        if (static_cast<long long>(cpt.rows.size()) != expected_rows)
            throw SemanticError("CPT of '" + net.variables[v].name + "' has " +
                                std::to_string(cpt.rows.size()) + " rows, expected " +
                                std::to_string(expected_rows));
        for (const auto& row : cpt.rows) {
            if (static_cast<int>(row.size()) != net.variables[v].cardinality())
                throw SemanticError("CPT row width mismatch for '" + net.variables[v].name + "'");
            double sum = 0.0;
            for (double p : row) {
                if (p < 0.0 || p > 1.0)
                    throw SemanticError("probability out of [0,1] in CPT of '" +
                                        net.variables[v].name + "'");
                sum += p;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw SemanticError("CPT row of '" + net.variables[v].name +
                                    "' sums to " + std::to_string(sum));
        }
    }
}

int cpt_row_index(const BayesianNetwork& net, const Cpt& cpt, const Assignment& a) {
    int index = 0;
    for (int p : cpt.parents) index = index * net.variables[p].cardinality() + a[p];
    return index;
}

namespace {

// Joint weights (w0, w1) = P(evidence, Y = 0/1), multiplying CPT factors in
// lexicographic child-name order so the result does not depend on the
// declaration order of the variables.
std::pair<double, double> joint_weights(const BayesianNetwork& net, const Assignment& evidence) {
    std::vector<int> order(net.var_count());
    for (int i = 0; i < net.var_count(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return net.variables[a].name < net.variables[b].name;
    });

    Assignment full = evidence;
    double w0 = 1.0, w1 = 1.0;
    for (int v : order) {
        const Cpt& cpt = net.cpts[v];
        bool involves_outcome = v == net.outcome;
        for (int p : cpt.parents) involves_outcome = involves_outcome || p == net.outcome;
        if (!involves_outcome) {
            double f = cpt.rows[cpt_row_index(net, cpt, full)][full[v]];
            w0 *= f;
            w1 *= f;
            continue;
        }
        for (int y = 0; y <= 1; ++y) {
            full.set(net.outcome, y);
            int value = v == net.outcome ? y : full[v];
            double f = cpt.rows[cpt_row_index(net, cpt, full)][value];
            (y == 0 ? w0 : w1) *= f;
        }
        full.unset(net.outcome);
    }
    return {w0, w1};
}

void check_complete_evidence(const BayesianNetwork& net, const Assignment& evidence) {
    if (evidence.size() != net.var_count())
        throw InvalidArgument("evidence sized for a different network");
    for (int v = 0; v < net.var_count(); ++v) {
        if (v == net.outcome) {
            if (evidence.assigned(v))
                throw InvalidArgument("evidence must not assign the outcome variable");
            continue;
        }
        if (!evidence.assigned(v))
            throw InvalidArgument("evidence does not assign '" + net.variables[v].name + "'");
        if (evidence[v] < 0 || evidence[v] >= net.variables[v].cardinality())
            throw InvalidArgument("evidence value out of range for '" +
                                  net.variables[v].name + "'");
    }
}

}  // namespace

double posterior(const BayesianNetwork& net, const Assignment& evidence) {
    check_complete_evidence(net, evidence);
    auto [w0, w1] = joint_weights(net, evidence);
    double total = w0 + w1;
    if (total == 0.0) throw ZeroEvidenceError("evidence has probability zero");
    return w1 / total;
}

int classify(const BayesianNetwork& net, const Assignment& evidence, double threshold) {
    if (threshold <= 0.0 || threshold >= 1.0)
        throw InvalidArgument("threshold must lie strictly inside (0,1)");
    return posterior(net, evidence) >= threshold ? 1 : 0;
}

std::vector<int> feature_topological_order(const BayesianNetwork& net) {
    std::vector<int> features = net.feature_ids();
    std::vector<int> indeg(net.var_count(), 0);
    for (auto [p, c] : net.edges)
        if (p != net.outcome && c != net.outcome) indeg[c]++;

    // Kahn's algorithm, always taking the lexicographically smallest name.
    std::map<std::string, int> ready;
    for (int f : features)
        if (indeg[f] == 0) ready.emplace(net.variables[f].name, f);

    std::vector<int> order;
    while (!ready.empty()) {
        int v = ready.begin()->second;
        ready.erase(ready.begin());
        order.push_back(v);
        for (auto [p, c] : net.edges)
            if (p == v && c != net.outcome && --indeg[c] == 0)
                ready.emplace(net.variables[c].name, c);
    }
    return order;
}

}  // namespace bnv
