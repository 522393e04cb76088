#pragma once

#include <optional>
#include <vector>

#include "bnv/cnf.hpp"

namespace bnv {

struct SolverStats {
    long long decisions = 0;
    long long propagations = 0;
    long long conflicts = 0;
    double seconds = 0.0;
};

enum class Status { kSat, kUnsat };

struct SolveResult {
    Status status = Status::kUnsat;
    // Total assignment indexed by variable id (entry 0 unused); checked
    // against every clause before being returned.
    std::vector<bool> values;
    SolverStats stats;

    bool lit_true(Lit l) const { return l > 0 ? values[l] : !values[-l]; }
};

// CDCL with two watched literals and first-UIP learning. Deterministic:
// branches on the lowest unassigned id, positive polarity first, no
// restarts; identical input bytes give identical models and stats. VSIDS
// branching can be switched on where reproducibility matters less.
// Single-owner and stateful; run distinct instances in parallel instead of
// sharing one.
class Solver {
  public:
    explicit Solver(int num_vars);

    // Callable between solve() calls (the solver returns at decision level
    // 0), which is how enumeration adds blocking clauses.
    void add_clause(const Clause& c);

    // Assumptions hold for this call only. Throws BudgetError when the
    // conflict limit is hit — never a wrong answer.
    SolveResult solve(const std::vector<Lit>& assumptions = {});

    // Unit propagation only, no search: the implied trail under the
    // assumptions, or nullopt on conflict.
    std::optional<std::vector<Lit>> propagate_view(const std::vector<Lit>& assumptions);

    void set_conflict_limit(long long limit) { conflict_limit_ = limit; }  // <0: none
    void set_vsids(bool on) { vsids_ = on; }

    const SolverStats& stats() const { return stats_; }

  private:
    int value_of(Lit l) const {
        int a = assigns_[var_of(l)];
        return l > 0 ? a : -a;
    }
    static size_t slot(Lit l) { return 2 * static_cast<size_t>(var_of(l)) + (l < 0); }
    int current_level() const { return static_cast<int>(trail_lim_.size()); }
    void enqueue(Lit l, int reason);
    int propagate();  // clause index of a conflict, or -1
    std::pair<Clause, int> analyze(int conflict);
    void backtrack(int level);
    int pick_branch() const;
    void bump(int v);
    void attach(int ci);
    void check_model() const;

    int num_vars_;
    std::vector<Clause> db_;
    std::vector<std::vector<int>> watches_;
    std::vector<signed char> assigns_;  // 0 unknown, +1 true, -1 false
    std::vector<int> level_;
    std::vector<int> reason_;  // clause index, -1 for decisions/facts
    std::vector<Lit> trail_;
    std::vector<size_t> trail_lim_;
    size_t qhead_ = 0;
    std::vector<char> seen_;
    std::vector<double> activity_;
    double bump_inc_ = 1.0;
    bool vsids_ = false;
    bool unsat_ = false;
    long long conflict_limit_ = -1;
    SolverStats stats_;
};

// One-shot helpers; each builds a fresh solver.
SolveResult solve(const Cnf& cnf, const std::vector<Lit>& assumptions = {},
                  long long conflict_limit = -1);
std::optional<std::vector<Lit>> propagate_units(const Cnf& cnf,
                                                const std::vector<Lit>& assumptions = {});

struct Enumeration {
    // Each model is the projected assignment: one signed literal per
    // projection variable, ascending by id.
    std::vector<std::vector<Lit>> models;
    bool complete = false;  // false when the limit or a budget cut it short
    SolverStats stats;
};

// AllSAT over a projection: repeatedly solve, record the projection, block
// it. Distinct by construction; when the limit is reached one extra solve
// decides the completeness flag.
Enumeration enumerate(const Cnf& cnf, const std::vector<int>& projection_vars, long long limit,
                      long long conflict_limit = -1);

}  // namespace bnv
