// Acceptance gate: one line per criterion, nonzero exit when any fails.
#include <algorithm>
#include <chrono>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "bnv/encoder.hpp"
#include "bnv/errors.hpp"
#include "bnv/mdd.hpp"
#include "bnv/serialize.hpp"
#include "bnv/solver.hpp"
#include "bnv/verifier.hpp"
#include "oracles.hpp"

using namespace bnv;
using namespace bnv::test;

namespace {

const std::string kData = BNV_DATA_DIR;
int failures = 0;

void report(int n, const char* name, bool pass, const std::string& detail) {
    std::printf("%s %d %s (%s)\n", pass ? "PASS" : "FAIL", n, name, detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in.good()) throw Error("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string fmt(const char* pattern, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, pattern);
    std::vsnprintf(buf, sizeof buf, pattern, ap);
    va_end(ap);
    return buf;
}

std::vector<BayesianNetwork> corpus;
std::vector<Mdd> corpus_mdds;

// 1. Every complete assignment decides identically through the compiled
//    diagram and through exact inference, over >= 100 random networks.
void criterion_1() {
    Timer t;
    Rng rng(42);
    long long assignments = 0, bad = 0;
    for (int i = 0; i < 120; ++i) corpus.push_back(random_network(rng));
    for (const BayesianNetwork& net : corpus) {
        Mdd mdd = compile(net);
        std::vector<int> vals = first_assignment(net);
        do {
            Assignment a = to_assignment(vals);
            const int got = evaluate(mdd, a);
            if (got != classify(net, a, 0.5) || got != oracle_classify(net, vals, 0.5)) ++bad;
            ++assignments;
        } while (next_assignment(net, vals));
        corpus_mdds.push_back(std::move(mdd));
    }
    const double sec = t.elapsed();
    report(1, "diagram-inference-equivalence", bad == 0 && sec < 60.0,
           fmt("%zu networks, %lld assignments, %lld mismatches, %.1fs",
               corpus.size(), assignments, bad, sec));
}

// 2. With a complete assignment asserted, the encoding has exactly one model
//    projected onto the diagram literals, and its active sink is the
//    diagram's answer. Exhaustive per network.
void criterion_2() {
    Timer t;
    long long assignments = 0, bad = 0;
    for (size_t i = 0; i < corpus.size(); ++i) {
        const BayesianNetwork& net = corpus[i];
        const Mdd& mdd = corpus_mdds[i];
        EncodedModel m = encode(mdd);

        std::vector<int> diagram_vars;
        for (int k = VarRole::kRoot; k <= VarRole::kEdge; ++k)
            for (int id : m.registry.ids_of_kind(static_cast<VarRole::Kind>(k)))
                diagram_vars.push_back(id);
        std::sort(diagram_vars.begin(), diagram_vars.end());

        std::vector<int> vals = first_assignment(net);
        do {
            Cnf work = m.cnf;
            for (int f = 0; f < net.var_count(); ++f) {
                if (f == net.outcome) continue;
                work.add({m.registry.value_literal(f, vals[f])});
            }
            SolveResult r = solve(work);
            const int want = evaluate(mdd, to_assignment(vals));
            if (r.status != Status::kSat ||
                r.lit_true(m.registry.sink_literal(true)) != (want == 1) ||
                r.lit_true(m.registry.sink_literal(false)) != (want == 0)) {
                ++bad;
            } else {
                Clause blocking;
                for (int id : diagram_vars) blocking.push_back(r.lit_true(id) ? -id : id);
                work.add(blocking);
                if (solve(work).status != Status::kUnsat) ++bad;  // a second projected model
            }
            ++assignments;
        } while (next_assignment(net, vals));
    }
    report(2, "encoding-path-consistency", bad == 0,
           fmt("%zu networks, %lld assignments, %lld mismatches, %.1fs",
               corpus.size(), assignments, bad, t.elapsed()));
}

// 3. Rule-query verdicts agree with a brute-force scan of the constrained
//    region, and every counterexample replays to the opposite class.
void criterion_3() {
    Timer t;
    Rng rng(1337);
    int held = 0, violated = 0;
    long long bad = 0;
    for (int i = 0; i < 500; ++i) {
        BayesianNetwork net = random_network(rng);
        EncodedModel m = encode(compile(net));

        std::vector<int> feats = net.feature_ids();
        rng.shuffle(feats);
        feats.resize(1 + rng.below(std::min<uint64_t>(feats.size(), 3)));
        std::vector<Rule> rules;
        for (int f : feats) {
            Rule r;
            r.feature = f;
            r.sense = static_cast<Sense>(rng.below(5));
            r.index = static_cast<int>(rng.below(net.variables[f].cardinality()));
            rules.push_back(r);
        }
        const int cls = static_cast<int>(rng.below(2));

        ItrVerdict v = verify_itr(m, ItrQuery{rules, cls});
        RegionScan scan = oracle_itr(net, rules, cls, 0.5);
        if (v.holds != scan.holds) ++bad;
        (v.holds ? held : violated)++;
        for (const auto& ce : v.counterexamples) {
            for (const Rule& r : rules)
                if (!rule_matches(r, ce[r.feature])) ++bad;
            if (oracle_classify(net, ce, 0.5) != 1 - cls) ++bad;
        }
    }
    const double sec = t.elapsed();
    report(3, "rule-query-against-region-scan", bad == 0 && sec < 120.0,
           fmt("500 rule sets, %d held / %d violated, %lld mismatches, %.1fs",
               held, violated, bad, sec));
}

// 4. Monotonicity verdicts agree with a brute-force scan of all context
//    triples; witness triples strictly increase and replay their pattern.
void criterion_4() {
    Timer t;
    Rng rng(2025);
    int done = 0, held = 0, violated = 0;
    long long bad = 0;
    while (done < 500) {
        BayesianNetwork net = random_network(rng);
        std::vector<int> wide;
        for (int f : net.feature_ids())
            if (net.variables[f].cardinality() >= 3) wide.push_back(f);
        if (wide.empty()) continue;
        const int feature = wide[rng.below(wide.size())];

        std::vector<std::pair<int, int>> phi;
        for (int f : net.feature_ids())
            if (f != feature && rng.chance(0.3))
                phi.emplace_back(f, static_cast<int>(rng.below(net.variables[f].cardinality())));

        EncodedModel m = encode(compile(net));
        FmoQuery q;
        q.feature = feature;
        q.phi = phi;
        FmoVerdict v = verify_fmo(m, q);
        MonotoneScan scan = oracle_fmo(net, phi, feature, 0.5);
        if (v.low_high_low != scan.lhl || v.high_low_high != scan.hlh ||
            v.holds != (!scan.lhl && !scan.hlh))
            ++bad;
        (v.holds ? held : violated)++;

        for (const auto& w : v.witnesses) {
            if (!(w[0][feature] < w[1][feature] && w[1][feature] < w[2][feature])) ++bad;
            for (auto [pf, pv] : phi)
                if (w[0][pf] != pv || w[1][pf] != pv || w[2][pf] != pv) ++bad;
            for (int f : net.feature_ids())
                if (f != feature && (w[0][f] != w[1][f] || w[1][f] != w[2][f])) ++bad;
            const int c0 = oracle_classify(net, w[0], 0.5);
            const int c1 = oracle_classify(net, w[1], 0.5);
            const int c2 = oracle_classify(net, w[2], 0.5);
            const bool lhl = c0 == 0 && c1 == 1 && c2 == 0;
            const bool hlh = c0 == 1 && c1 == 0 && c2 == 1;
            if (!lhl && !hlh) ++bad;
        }
        ++done;
    }
    report(4, "monotonicity-against-triple-scan", bad == 0,
           fmt("500 queries, %d held / %d violated, %lld mismatches, %.1fs",
               held, violated, bad, t.elapsed()));
}

// 5. The SAT engine against truth tables, lossless DIMACS, and input-space
//    enumeration over class-free encodings.
void criterion_5() {
    Timer t;
    Rng rng(77);
    long long bad = 0;
    int sat = 0, unsat = 0;
    for (int i = 0; i < 500; ++i) {
        const int n = 4 + static_cast<int>(rng.below(17));
        Cnf cnf = random_cnf(rng, n, 1 + rng.below(static_cast<uint64_t>(5 * n)));
        const bool expect = oracle_sat(cnf);
        if ((solve(cnf).status == Status::kSat) != expect) ++bad;
        (expect ? sat : unsat)++;
        Cnf back = from_dimacs(to_dimacs(cnf));
        if (back.num_vars != cnf.num_vars || !(back.clauses == cnf.clauses)) ++bad;
    }

    // class-free model counts: one model per complete diagram-variable input
    int counted = 0;
    for (size_t i = 0; i < corpus.size() && counted < 10; ++i) {
        if (corpus_mdds[i].ordering.empty()) continue;  // constant: nothing to project on
        long long expected = 1;
        for (int v : corpus_mdds[i].ordering)
            expected *= corpus[i].variables[v].cardinality();
        if (expected > 512) continue;
        EncodedModel m = encode(corpus_mdds[i]);
        std::vector<int> proj;
        for (int v : corpus_mdds[i].ordering)
            for (int j = 0; j < corpus[i].variables[v].cardinality(); ++j)
                proj.push_back(m.registry.value_literal(v, j));
        Enumeration e = enumerate(m.cnf, proj, expected + 1);
        if (!e.complete || static_cast<long long>(e.models.size()) != expected) ++bad;
        ++counted;
    }
    report(5, "sat-engine-against-truth-tables", bad == 0,
           fmt("500 formulas (%d sat / %d unsat), %d enumerations, %lld mismatches, %.1fs",
               sat, unsat, counted, bad, t.elapsed()));
}

// 6. The two public reference networks, with their sizes reported next to
//    the established reference values; clause counts within 4x, decisions
//    equivalent, and child-scale timing sane.
void criterion_6() {
    Timer t;
    bool ok = true;

    BayesianNetwork asia = parse_network(slurp(kData + "/asia.bif"), "bif", "either");
    Mdd asia_mdd = compile(asia);
    MddStats asia_st = stats(asia_mdd);
    EncodedModel asia_m = encode(asia_mdd);
    const long long asia_clauses = static_cast<long long>(asia_m.cnf.clauses.size());
    ok = ok && asia_clauses <= 4 * 50;
    {
        std::vector<int> vals = first_assignment(asia);
        do {
            Assignment a = to_assignment(vals);
            if (evaluate(asia_mdd, a) != classify(asia, a, 0.5)) ok = false;
        } while (next_assignment(asia, vals));
    }

    BayesianNetwork child = parse_network(slurp(kData + "/child.bif"), "bif", "Sick");
    Mdd child_mdd = compile(child);
    MddStats child_st = stats(child_mdd);
    Timer te;
    EncodedModel child_m = encode(child_mdd);
    const double encode_sec = te.elapsed();
    const long long child_clauses = static_cast<long long>(child_m.cnf.clauses.size());
    ok = ok && encode_sec < 1.0 && child_clauses <= 4 * 1236;

    Rng rng(4242);
    for (int i = 0; i < 20000; ++i) {
        std::vector<int> vals(child.var_count(), kUnassigned);
        for (int f : child.feature_ids())
            vals[f] = static_cast<int>(rng.below(child.variables[f].cardinality()));
        if (evaluate(child_mdd, to_assignment(vals)) != classify(child, to_assignment(vals), 0.5))
            ok = false;
    }

    Timer tq1;
    ItrQuery iq;
    iq.rules = {{child.index_of("Age"), Sense::kGe, 1}};
    iq.cls = 0;
    verify_itr(child_m, iq);
    const double q1 = tq1.elapsed();
    Timer tq2;
    FmoQuery fq;
    fq.feature = child.index_of("Age");
    verify_fmo(child_m, fq);
    const double q2 = tq2.elapsed();
    ok = ok && q1 < 10.0 && q2 < 10.0;

    report(6, "reference-network-scale", ok,
           fmt("asia h%d/n%d lit%d cls%lld vs ref 3/3/15/50; "
               "child h%d/n%d lit%d cls%lld vs ref 8/41/210/1236; "
               "encode %.3fs, queries %.3fs/%.3fs, %.1fs total",
               asia_st.height, asia_st.node_count, asia_m.cnf.num_vars, asia_clauses,
               child_st.height, child_st.node_count, child_m.cnf.num_vars, child_clauses,
               encode_sec, q1, q2, t.elapsed()));
}

// 7. The frozen 11-feature fixture: the verifier reproduces the hold/violate
//    pattern computed independently when the fixture was made, and the
//    region-scan oracle agrees live.
void criterion_7() {
    Timer t;
    BayesianNetwork net = parse_network(slurp(kData + "/credit11.json"), "native-json");
    EncodedModel m = encode(compile(net));

    nlohmann::json doc = nlohmann::json::parse(slurp(kData + "/credit11_queries.json"));
    std::vector<Query> queries = queries_from_json(doc, m.mdd_ref);

    long long bad = 0;
    int idx = 0;
    std::string pattern;
    for (const auto& jq : doc.at("queries")) {
        const bool expected = jq.at("expected_holds").get<bool>();
        const Query& q = queries[idx++];
        ItrVerdict v = verify_itr(m, q.itr);
        RegionScan scan = oracle_itr(net, q.itr.rules, q.itr.cls, 0.5);
        if (v.holds != expected || scan.holds != expected) ++bad;
        pattern += v.holds ? 'T' : 'F';
    }
    report(7, "frozen-fixture-pattern", bad == 0,
           fmt("%d queries, pattern %s, %lld mismatches, %.1fs",
               idx, pattern.c_str(), bad, t.elapsed()));
}

}  // namespace

int main() {
    struct Step {
        int n;
        void (*fn)();
        const char* name;
    };
    const Step steps[] = {
        {1, criterion_1, "diagram-inference-equivalence"},
        {2, criterion_2, "encoding-path-consistency"},
        {3, criterion_3, "rule-query-against-region-scan"},
        {4, criterion_4, "monotonicity-against-triple-scan"},
        {5, criterion_5, "sat-engine-against-truth-tables"},
        {6, criterion_6, "reference-network-scale"},
        {7, criterion_7, "frozen-fixture-pattern"},
    };
    for (const Step& s : steps) {
        try {
            s.fn();
        } catch (const std::exception& e) {
            report(s.n, s.name, false, std::string("exception: ") + e.what());
        }
    }
    std::printf("acceptance: %d/7 criteria passed\n", 7 - failures);
    return failures == 0 ? 0 : 1;
}
