#include "doctest.h"

#include <fstream>
#include <sstream>

#include "bnv/errors.hpp"
#include "bnv/serialize.hpp"
#include "bnv/verifier.hpp"
#include "oracles.hpp"

using namespace bnv;
using namespace bnv::test;

namespace {

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const std::string kData = BNV_DATA_DIR;

struct Loaded {
    BayesianNetwork net;
    EncodedModel model;
};

Loaded load(const std::string& file, const std::string& format, const std::string& outcome = "") {
    Loaded l;
    l.net = parse_network(slurp(kData + "/" + file), format, outcome);
    l.model = encode(compile(l.net));
    return l;
}

// Single ternary feature with an explicitly non-monotone decision:
// P(Y=1 | F = v0,v1,v2) = 0.9, 0.1, 0.9.
Loaded dip_network() {
    Loaded l;
    l.net.variables = {{"F", {"v0", "v1", "v2"}}, {"Y", {"n", "y"}}};
    l.net.outcome = 1;
    l.net.edges = {{0, 1}};
    l.net.cpts.resize(2);
    l.net.cpts[0] = {0, {}, {{0.3, 0.3, 0.4}}};
    l.net.cpts[1] = {1, {0}, {{0.1, 0.9}, {0.9, 0.1}, {0.1, 0.9}}};
    validate(l.net);
    l.model = encode(compile(l.net));
    return l;
}

// Random rule set in the style of the bench generator: distinct features,
// one rule each.
std::vector<Rule> random_rules(Rng& rng, const BayesianNetwork& net) {
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
    return rules;
}

}  // namespace

TEST_CASE("admission rule queries verify as designed") {
    Loaded l = load("admission.json", "native-json");
    const int gpa = l.net.index_of("GPA"), test = l.net.index_of("Test");

    ItrQuery good;
    good.rules = {{gpa, Sense::kGe, 1}, {test, Sense::kEq, 1}};
    good.cls = 1;
    ItrVerdict v = verify_itr(l.model, good);
    CHECK(v.holds);
    CHECK(!v.vacuous);
    CHECK(v.counterexamples.empty());

    ItrQuery bad;
    bad.rules = {{test, Sense::kEq, 1}};
    bad.cls = 1;
    v = verify_itr(l.model, bad);
    CHECK(!v.holds);
    REQUIRE(!v.counterexamples.empty());
    for (const auto& ce : v.counterexamples) {
        CHECK(ce[test] == 1);                          // matches the antecedent
        CHECK(oracle_classify(l.net, ce, 0.5) == 0);   // and decides the other class
        CHECK(ce[l.net.outcome] == kUnassigned);
    }
}

TEST_CASE("rule verdicts match the region-scan oracle on random networks") {
    Rng rng(51);
    int held = 0, violated = 0;
    for (int i = 0; i < 120; ++i) {
        BayesianNetwork net = random_network(rng);
        EncodedModel m = encode(compile(net));
        std::vector<Rule> rules = random_rules(rng, net);
        const int cls = static_cast<int>(rng.below(2));

        ItrQuery q{rules, cls};
        ItrVerdict v = verify_itr(m, q);
        RegionScan scan = oracle_itr(net, rules, cls, 0.5);
        if (v.vacuous) {
            CHECK(v.holds);
            continue;
        }
        CHECK(v.holds == scan.holds);
        (v.holds ? held : violated)++;
        for (const auto& ce : v.counterexamples) {
            for (const Rule& r : rules) CHECK(rule_matches(r, ce[r.feature]));
            CHECK(oracle_classify(net, ce, 0.5) == 1 - cls);
        }
    }
    CHECK(held > 10);
    CHECK(violated > 10);
}

TEST_CASE("empty admitted ranges make rule queries vacuous") {
    Loaded l = load("admission.json", "native-json");
    const int gpa = l.net.index_of("GPA");

    ItrQuery q;
    q.rules = {{gpa, Sense::kGt, 2}};  // no value above the top index
    ItrVerdict v = verify_itr(l.model, q);
    CHECK(v.holds);
    CHECK(v.vacuous);
    CHECK(v.note.find("admits no value") != std::string::npos);

    q.rules = {{gpa, Sense::kLt, 0}};
    v = verify_itr(l.model, q);
    CHECK(v.vacuous);
}

TEST_CASE("a ruleless query asks whether the class is constant") {
    Loaded l = load("admission.json", "native-json");
    ItrQuery q;
    q.cls = 1;
    ItrVerdict v = verify_itr(l.model, q);
    CHECK(!v.holds);  // admission decides both ways

    // constant-decision network
    BayesianNetwork net;
    net.variables = {{"Y", {"n", "y"}}, {"F", {"a", "b"}}};
    net.outcome = 0;
    net.cpts.resize(2);
    net.cpts[0] = {0, {}, {{0.2, 0.8}}};
    net.cpts[1] = {1, {}, {{0.5, 0.5}}};
    validate(net);
    EncodedModel m = encode(compile(net));
    v = verify_itr(m, ItrQuery{{}, 1});
    CHECK(v.holds);
    v = verify_itr(m, ItrQuery{{}, 0});
    CHECK(!v.holds);
}

TEST_CASE("rule query validation") {
    Loaded l = load("admission.json", "native-json");
    const int gpa = l.net.index_of("GPA");

    CHECK_THROWS_AS(verify_itr(l.model, ItrQuery{{{gpa, Sense::kEq, 0}}, 2}), InvalidArgument);
    CHECK_THROWS_AS(verify_itr(l.model, ItrQuery{{{gpa, Sense::kEq, 3}}, 1}), InvalidArgument);
    CHECK_THROWS_AS(verify_itr(l.model, ItrQuery{{{l.net.outcome, Sense::kEq, 0}}, 1}),
                    InvalidArgument);
    CHECK_THROWS_AS(
        verify_itr(l.model, ItrQuery{{{gpa, Sense::kGe, 1}, {gpa, Sense::kLe, 1}}, 1}),
        InvalidArgument);
    CHECK_THROWS_AS(verify_itr(l.model, ItrQuery{{{-1, Sense::kEq, 0}, {gpa, Sense::kLe, 1}}, 1}),
                    InvalidArgument);
}

TEST_CASE("witness caps are honored and flagged") {
    Loaded l = load("admission.json", "native-json");
    ItrQuery q;  // no rules: every one of the four class-0 inputs refutes
    q.cls = 1;

    VerifierConfig cfg;
    cfg.max_witnesses = 1;
    ItrVerdict v = verify_itr(l.model, q, cfg);
    CHECK(!v.holds);
    CHECK(v.counterexamples.size() == 1);
    CHECK(!v.complete);

    cfg.max_witnesses = 16;
    v = verify_itr(l.model, q, cfg);
    CHECK(v.counterexamples.size() == 4);
    CHECK(v.complete);
}

TEST_CASE("monotonicity holds for admission GPA and fails for the dip") {
    Loaded adm = load("admission.json", "native-json");
    FmoQuery q;
    q.feature = adm.net.index_of("GPA");
    q.phi = {{adm.net.index_of("Test"), 1}};
    FmoVerdict v = verify_fmo(adm.model, q);
    CHECK(v.holds);
    CHECK(!v.low_high_low);
    CHECK(!v.high_low_high);
    CHECK(v.witnesses.empty());

    Loaded dip = dip_network();
    q = FmoQuery{};
    q.feature = 0;
    v = verify_fmo(dip.model, q);
    CHECK(!v.holds);
    CHECK(v.high_low_high);   // 0.9, 0.1, 0.9 decides 1,0,1
    CHECK(!v.low_high_low);
    REQUIRE(!v.witnesses.empty());
    for (const auto& w : v.witnesses) {
        CHECK(w[0][0] < w[1][0]);
        CHECK(w[1][0] < w[2][0]);
        CHECK(oracle_classify(dip.net, w[0], 0.5) == 1);
        CHECK(oracle_classify(dip.net, w[1], 0.5) == 0);
        CHECK(oracle_classify(dip.net, w[2], 0.5) == 1);
    }
}

TEST_CASE("monotonicity verdicts match the triple-scan oracle") {
    Rng rng(52);
    int held = 0, violated = 0;
    for (int i = 0; i < 120; ++i) {
        BayesianNetwork net = random_network(rng);
        EncodedModel m = encode(compile(net));

        std::vector<int> feats = net.feature_ids();
        int feature = feats[rng.below(feats.size())];
        if (net.variables[feature].cardinality() < 3) continue;

        std::vector<std::pair<int, int>> phi;
        for (int f : feats)
            if (f != feature && rng.chance(0.3))
                phi.emplace_back(f, static_cast<int>(rng.below(net.variables[f].cardinality())));

        FmoQuery q;
        q.feature = feature;
        q.phi = phi;
        FmoVerdict v = verify_fmo(m, q);
        MonotoneScan scan = oracle_fmo(net, phi, feature, 0.5);
        CHECK(v.low_high_low == scan.lhl);
        CHECK(v.high_low_high == scan.hlh);
        CHECK(v.holds == (!scan.lhl && !scan.hlh));
        (v.holds ? held : violated)++;

        for (const auto& w : v.witnesses) {
            CHECK(w[0][feature] < w[1][feature]);
            CHECK(w[1][feature] < w[2][feature]);
            for (auto [pf, pv] : phi) {
                CHECK(w[0][pf] == pv);
                CHECK(w[1][pf] == pv);
                CHECK(w[2][pf] == pv);
            }
            for (int f : feats) {  // tie_free: non-swing features agree
                if (f == feature) continue;
                CHECK(w[0][f] == w[1][f]);
                CHECK(w[1][f] == w[2][f]);
            }
            const int c0 = oracle_classify(net, w[0], 0.5);
            const int c1 = oracle_classify(net, w[1], 0.5);
            const int c2 = oracle_classify(net, w[2], 0.5);
            const bool is_lhl = c0 == 0 && c1 == 1 && c2 == 0;
            const bool is_hlh = c0 == 1 && c1 == 0 && c2 == 1;
            CHECK((is_lhl || is_hlh));
        }
    }
    CHECK(held > 10);
    CHECK(violated > 5);
}

TEST_CASE("binary features make monotonicity queries vacuous") {
    Loaded l = load("asia.bif", "bif", "either");
    FmoQuery q;
    q.feature = l.net.index_of("lung");
    FmoVerdict v = verify_fmo(l.model, q);
    CHECK(v.holds);
    CHECK(v.vacuous);
    CHECK(v.note.find("fewer than three") != std::string::npos);
}

TEST_CASE("a context that pins the swing feature cannot witness a violation") {
    Loaded dip = dip_network();
    FmoQuery q;
    q.feature = 0;
    q.phi = {{0, 1}};
    FmoVerdict v = verify_fmo(dip.model, q);
    CHECK(v.holds);
    MonotoneScan scan = oracle_fmo(dip.net, q.phi, 0, 0.5);
    CHECK(!scan.lhl);
    CHECK(!scan.hlh);
}

TEST_CASE("free variation catches violations tied contexts hide") {
    // Decision table over (F ternary, G binary), rows (f,g):
    //   g=0: 0,0,1   g=1: 1,0,0
    // Each G-column is monotone, but mixing columns gives the 1,0,1 triple
    // (f0,g1) (f1,*) (f2,g0).
    BayesianNetwork net;
    net.variables = {{"F", {"v0", "v1", "v2"}}, {"G", {"w0", "w1"}}, {"Y", {"n", "y"}}};
    net.outcome = 2;
    net.edges = {{0, 2}, {1, 2}};
    net.cpts.resize(3);
    net.cpts[0] = {0, {}, {{0.3, 0.3, 0.4}}};
    net.cpts[1] = {1, {}, {{0.5, 0.5}}};
    net.cpts[2] = {2, {0, 1},
                   {{0.9, 0.1}, {0.1, 0.9}, {0.9, 0.1}, {0.9, 0.1}, {0.1, 0.9}, {0.9, 0.1}}};
    validate(net);
    EncodedModel m = encode(compile(net));

    FmoQuery tied;
    tied.feature = 0;
    FmoVerdict vt = verify_fmo(m, tied);
    CHECK(vt.holds);

    FmoQuery loose = tied;
    loose.tie_free = false;
    FmoVerdict vl = verify_fmo(m, loose);
    CHECK(!vl.holds);
    CHECK(vl.high_low_high);
    CHECK(!vl.low_high_low);
    for (const auto& w : vl.witnesses) {
        CHECK(w[0][0] < w[1][0]);
        CHECK(w[1][0] < w[2][0]);
        CHECK(oracle_classify(net, w[0], 0.5) == 1);
        CHECK(oracle_classify(net, w[1], 0.5) == 0);
        CHECK(oracle_classify(net, w[2], 0.5) == 1);
    }

    // tied violations always surface in the free mode too
    Rng rng(53);
    for (int i = 0; i < 25; ++i) {
        BayesianNetwork rnet = random_network(rng);
        std::vector<int> feats = rnet.feature_ids();
        int feature = feats[rng.below(feats.size())];
        if (rnet.variables[feature].cardinality() < 3) continue;
        EncodedModel rm = encode(compile(rnet));
        FmoQuery a;
        a.feature = feature;
        FmoQuery b = a;
        b.tie_free = false;
        if (!verify_fmo(rm, a).holds) CHECK(!verify_fmo(rm, b).holds);
    }
}

TEST_CASE("monotonicity query validation") {
    Loaded adm = load("admission.json", "native-json");
    const int gpa = adm.net.index_of("GPA"), test = adm.net.index_of("Test");

    FmoQuery q;
    q.feature = adm.net.outcome;
    CHECK_THROWS_AS(verify_fmo(adm.model, q), InvalidArgument);
    q.feature = gpa;
    q.phi = {{test, 7}};
    CHECK_THROWS_AS(verify_fmo(adm.model, q), InvalidArgument);
    q.phi = {{test, 1}, {test, 0}};
    CHECK_THROWS_AS(verify_fmo(adm.model, q), InvalidArgument);
    q.phi = {{adm.net.outcome, 0}};
    CHECK_THROWS_AS(verify_fmo(adm.model, q), InvalidArgument);
}

TEST_CASE("queries parse from json with labels or indices") {
    Loaded adm = load("admission.json", "native-json");
    const MddRef& ref = adm.model.mdd_ref;

    nlohmann::json j = {{"type", "itr"},
                        {"class", 1},
                        {"rules", nlohmann::json::array({{{"feature", "GPA"},
                                                          {"op", ">="},
                                                          {"value", "medium"}},
                                                         {{"feature", "Test"},
                                                          {"op", "=="},
                                                          {"value", 1}}})}};
    Query q = query_from_json(j, ref);
    CHECK(q.type == Query::kItr);
    CHECK(q.itr.cls == 1);
    REQUIRE(q.itr.rules.size() == 2);
    CHECK(q.itr.rules[0].feature == adm.net.index_of("GPA"));
    CHECK(q.itr.rules[0].sense == Sense::kGe);
    CHECK(q.itr.rules[0].index == 1);
    CHECK(q.itr.rules[1].sense == Sense::kEq);

    nlohmann::json f = {{"type", "fmo"},
                        {"feature", "GPA"},
                        {"phi", {{"Test", "pass"}}},
                        {"tie_free", true}};
    q = query_from_json(f, ref);
    CHECK(q.type == Query::kFmo);
    CHECK(q.fmo.feature == adm.net.index_of("GPA"));
    REQUIRE(q.fmo.phi.size() == 1);
    CHECK(q.fmo.phi[0].second == 1);

    CHECK(queries_from_json(nlohmann::json::array({j, f}), ref).size() == 2);
    nlohmann::json wrapped = {{"queries", nlohmann::json::array({j})}};
    CHECK(queries_from_json(wrapped, ref).size() == 1);
    CHECK(queries_from_json(j, ref).size() == 1);

    CHECK_THROWS_AS(queries_from_json(nlohmann::json::array(), ref), SemanticError);
    j["rules"][0]["op"] = "~";
    CHECK_THROWS_AS(query_from_json(j, ref), SemanticError);
    j["rules"][0]["op"] = ">=";
    j["rules"][0]["feature"] = "Nope";
    CHECK_THROWS_AS(query_from_json(j, ref), SemanticError);
    j["rules"][0]["feature"] = "GPA";
    j["rules"][0]["value"] = "gigantic";
    CHECK_THROWS_AS(query_from_json(j, ref), SemanticError);
    j["type"] = "what";
    CHECK_THROWS_AS(query_from_json(j, ref), SemanticError);
}

TEST_CASE("verdicts serialize with labels and solver stats") {
    Loaded adm = load("admission.json", "native-json");
    ItrQuery q;
    q.rules = {{adm.net.index_of("Test"), Sense::kEq, 1}};
    q.cls = 1;
    ItrVerdict v = verify_itr(adm.model, q);
    nlohmann::json j = verdict_to_json(v, q, adm.model.mdd_ref);
    CHECK(j.at("type") == "itr");
    CHECK(j.at("holds") == false);
    CHECK(j.at("rules")[0].at("feature") == "Test");
    CHECK(j.at("rules")[0].at("value") == "pass");
    REQUIRE(!j.at("counterexamples").empty());
    CHECK(j.at("counterexamples")[0].contains("GPA"));
    CHECK(j.at("stats").contains("conflicts"));

    FmoQuery fq;
    fq.feature = adm.net.index_of("GPA");
    fq.phi = {{adm.net.index_of("Test"), 1}};
    FmoVerdict fv = verify_fmo(adm.model, fq);
    nlohmann::json fj = verdict_to_json(fv, fq, adm.model.mdd_ref);
    CHECK(fj.at("type") == "fmo");
    CHECK(fj.at("holds") == true);
    CHECK(fj.at("feature") == "GPA");
    CHECK(fj.at("phi").at("Test") == "pass");
}

TEST_CASE("feature values decode from models through the registry") {
    Loaded adm = load("admission.json", "native-json");
    Cnf work = adm.model.cnf;
    for (const Clause& c : assert_class(adm.model, 1)) work.add(c);
    SolveResult r = solve(work);
    REQUIRE(r.status == Status::kSat);

    std::vector<Lit> model;
    for (int id = 1; id <= adm.model.cnf.num_vars; ++id)
        model.push_back(r.lit_true(id) ? id : -id);
    std::vector<int> vals = decode_feature_values(adm.model, model);
    CHECK(oracle_classify(adm.net, vals, 0.5) == 1);
}
