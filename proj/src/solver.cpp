#include "bnv/solver.hpp"

#include <algorithm>
#include <chrono>

#include "bnv/errors.hpp"

namespace bnv {

Solver::Solver(int num_vars)
    : num_vars_(num_vars),
      watches_(2 * static_cast<size_t>(num_vars) + 2),
      assigns_(num_vars + 1, 0),
      level_(num_vars + 1, 0),
      reason_(num_vars + 1, -1),
      seen_(num_vars + 1, 0),
      activity_(num_vars + 1, 0.0) {}

void Solver::attach(int ci) {
    watches_[slot(db_[ci][0])].push_back(ci);
    watches_[slot(db_[ci][1])].push_back(ci);
}

void Solver::add_clause(const Clause& c) {
    if (unsat_) return;
    // Level-0 state is permanent, so drop false literals, skip satisfied
    // clauses, and reject duplicates/tautologies up front.
    Clause lits;
    for (Lit l : c) {
        if (var_of(l) < 1 || var_of(l) > num_vars_)
            throw InvalidArgument("literal outside the declared variable range");
        if (value_of(l) > 0) return;  // already satisfied for good
        if (value_of(l) < 0) continue;
        bool dup = false;
        for (Lit k : lits) {
            if (k == l) dup = true;
            if (k == -l) return;  // tautology
        }
        if (!dup) lits.push_back(l);
    }
    if (lits.empty()) {
        unsat_ = true;
        return;
    }
    if (lits.size() == 1) {
        enqueue(lits[0], -1);
        if (propagate() >= 0) unsat_ = true;
        return;
    }
    db_.push_back(std::move(lits));
    attach(static_cast<int>(db_.size()) - 1);
}

void Solver::enqueue(Lit l, int reason) {
    int v = var_of(l);
    assigns_[v] = l > 0 ? 1 : -1;
    level_[v] = current_level();
    reason_[v] = reason;
    trail_.push_back(l);
    ++stats_.propagations;
}

int Solver::propagate() {
    while (qhead_ < trail_.size()) {
        Lit p = trail_[qhead_++];
        Lit false_lit = -p;
        auto& wl = watches_[slot(false_lit)];
        size_t keep = 0;
        for (size_t i = 0; i < wl.size(); ++i) {
            int ci = wl[i];
            Clause& c = db_[ci];
            if (c[0] == false_lit) std::swap(c[0], c[1]);
            if (value_of(c[0]) > 0) {
                wl[keep++] = ci;
                continue;
            }
            bool moved = false;
            for (size_t k = 2; k < c.size(); ++k) {
                if (value_of(c[k]) >= 0) {
                    std::swap(c[1], c[k]);
                    watches_[slot(c[1])].push_back(ci);
                    moved = true;
                    break;
                }
            }
            if (moved) continue;
            wl[keep++] = ci;
            if (value_of(c[0]) < 0) {
                for (++i; i < wl.size(); ++i) wl[keep++] = wl[i];
                wl.resize(keep);
                qhead_ = trail_.size();
                return ci;
            }
            enqueue(c[0], ci);
        }
        wl.resize(keep);
    }
    return -1;
}

std::pair<Clause, int> Solver::analyze(int conflict) {
    Clause learnt{0};  // slot 0 becomes the asserting literal
    int counter = 0;
    Lit p = 0;
    int index = static_cast<int>(trail_.size()) - 1;
    int ci = conflict;
    do {
        const Clause& c = db_[ci];
        for (size_t k = p == 0 ? 0 : 1; k < c.size(); ++k) {
            int v = var_of(c[k]);
            if (!seen_[v] && level_[v] > 0) {
                seen_[v] = 1;
                bump(v);
                if (level_[v] >= current_level())
                    ++counter;
                else
                    learnt.push_back(c[k]);
            }
        }
        while (!seen_[var_of(trail_[index])]) --index;
        p = trail_[index--];
        ci = reason_[var_of(p)];
        seen_[var_of(p)] = 0;
        --counter;
    } while (counter > 0);
    learnt[0] = -p;

    int backjump = 0;
    for (size_t k = 1; k < learnt.size(); ++k) {
        if (level_[var_of(learnt[k])] > backjump) {
            backjump = level_[var_of(learnt[k])];
            std::swap(learnt[1], learnt[k]);
        }
        // swap keeps the deepest literal in slot 1 for watching
    }
    for (size_t k = 1; k < learnt.size(); ++k) seen_[var_of(learnt[k])] = 0;
    return {std::move(learnt), backjump};
}

void Solver::backtrack(int target) {
    if (current_level() <= target) return;
    size_t limit = trail_lim_[target];
    for (size_t k = trail_.size(); k > limit; --k) assigns_[var_of(trail_[k - 1])] = 0;
    trail_.resize(limit);
    trail_lim_.resize(target);
    qhead_ = trail_.size();
}

int Solver::pick_branch() const {
    if (!vsids_) {
        for (int v = 1; v <= num_vars_; ++v)
            if (assigns_[v] == 0) return v;
        return 0;
    }
    int best = 0;
    for (int v = 1; v <= num_vars_; ++v)
        if (assigns_[v] == 0 && (best == 0 || activity_[v] > activity_[best])) best = v;
    return best;
}

void Solver::bump(int v) {
    if (!vsids_) return;
    activity_[v] += bump_inc_;
    if (activity_[v] > 1e100) {
        for (int u = 1; u <= num_vars_; ++u) activity_[u] *= 1e-100;
        bump_inc_ *= 1e-100;
    }
}

void Solver::check_model() const {
    for (const Clause& c : db_) {
        bool sat = false;
        for (Lit l : c) sat = sat || value_of(l) > 0;
        if (!sat) throw Error("internal solver fault: model violates a clause");
    }
}

SolveResult Solver::solve(const std::vector<Lit>& assumptions) {
    auto start = std::chrono::steady_clock::now();
    auto finish = [&](Status status, std::vector<bool> values) {
        backtrack(0);
        stats_.seconds += std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                              .count();
        SolveResult r;
        r.status = status;
        r.values = std::move(values);
        r.stats = stats_;
        return r;
    };

    if (!unsat_ && propagate() >= 0) unsat_ = true;
    if (unsat_) return finish(Status::kUnsat, {});

    long long conflicts_before = stats_.conflicts;
    for (;;) {
        int conflict = propagate();
        if (conflict >= 0) {
            ++stats_.conflicts;
            if (current_level() == 0) return finish(Status::kUnsat, {});
            if (conflict_limit_ >= 0 && stats_.conflicts - conflicts_before > conflict_limit_) {
                backtrack(0);
                stats_.seconds +=
                    std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
                        .count();
                throw BudgetError("conflict limit of " + std::to_string(conflict_limit_) +
                                  " exceeded");
            }
            auto [learnt, backjump] = analyze(conflict);
            backtrack(backjump);
            if (learnt.size() == 1) {
                enqueue(learnt[0], -1);
            } else {
                db_.push_back(std::move(learnt));
                int ci = static_cast<int>(db_.size()) - 1;
                attach(ci);
                enqueue(db_[ci][0], ci);
            }
            bump_inc_ /= 0.95;
            continue;
        }

        if (current_level() < static_cast<int>(assumptions.size())) {
            Lit a = assumptions[current_level()];
            if (var_of(a) < 1 || var_of(a) > num_vars_)
                throw InvalidArgument("assumption literal outside the variable range");
            if (value_of(a) < 0) return finish(Status::kUnsat, {});
            trail_lim_.push_back(trail_.size());
            if (value_of(a) == 0) enqueue(a, -1);
            continue;
        }

        int v = pick_branch();
        if (v == 0) {
            check_model();
            std::vector<bool> values(num_vars_ + 1, false);
            for (int u = 1; u <= num_vars_; ++u) values[u] = assigns_[u] > 0;
            return finish(Status::kSat, std::move(values));
        }
        ++stats_.decisions;
        trail_lim_.push_back(trail_.size());
        enqueue(v, -1);  // positive polarity first, by convention
    }
}

std::optional<std::vector<Lit>> Solver::propagate_view(const std::vector<Lit>& assumptions) {
    if (unsat_ || propagate() >= 0) return std::nullopt;
    size_t base = trail_.size();
    trail_lim_.push_back(base);
    bool conflict = false;
    for (Lit a : assumptions) {
        if (value_of(a) < 0) conflict = true;
        if (conflict) break;
        if (value_of(a) == 0) enqueue(a, -1);
        conflict = propagate() >= 0;
    }
    std::optional<std::vector<Lit>> out;
    if (!conflict) out = std::vector<Lit>(trail_.begin(), trail_.end());
    backtrack(static_cast<int>(trail_lim_.size()) - 1);
    return out;
}

SolveResult solve(const Cnf& cnf, const std::vector<Lit>& assumptions, long long conflict_limit) {
    Solver s(cnf.num_vars);
    s.set_conflict_limit(conflict_limit);
    for (const Clause& c : cnf.clauses) s.add_clause(c);
    return s.solve(assumptions);
}

std::optional<std::vector<Lit>> propagate_units(const Cnf& cnf,
                                                const std::vector<Lit>& assumptions) {
    Solver s(cnf.num_vars);
    for (const Clause& c : cnf.clauses) s.add_clause(c);
    return s.propagate_view(assumptions);
}

Enumeration enumerate(const Cnf& cnf, const std::vector<int>& projection_vars, long long limit,
                      long long conflict_limit) {
    if (projection_vars.empty()) throw InvalidArgument("empty projection");
    if (limit < 1) throw InvalidArgument("enumeration limit must be at least 1");
    std::vector<int> proj = projection_vars;
    std::sort(proj.begin(), proj.end());
    proj.erase(std::unique(proj.begin(), proj.end()), proj.end());
    for (int v : proj)
        if (v < 1 || v > cnf.num_vars) throw InvalidArgument("projection variable out of range");

    Solver s(cnf.num_vars);
    s.set_conflict_limit(conflict_limit);
    for (const Clause& c : cnf.clauses) s.add_clause(c);

    Enumeration out;
    try {
        for (;;) {
            SolveResult r = s.solve();
            if (r.status == Status::kUnsat) {
                out.complete = true;
                break;
            }
            if (static_cast<long long>(out.models.size()) == limit) break;  // one extra solve: more exist
            std::vector<Lit> model;
            Clause blocking;
            for (int v : proj) {
                model.push_back(r.values[v] ? v : -v);
                blocking.push_back(r.values[v] ? -v : v);
            }
            out.models.push_back(std::move(model));
            s.add_clause(blocking);
        }
    } catch (const BudgetError&) {
        out.complete = false;  // partial list, flagged
    }
    out.stats = s.stats();
    return out;
}

}  // namespace bnv
