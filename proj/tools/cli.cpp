#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "bnv/bayesnet.hpp"
#include "bnv/encoder.hpp"
#include "bnv/errors.hpp"
#include "bnv/mdd.hpp"
#include "bnv/prng.hpp"
#include "bnv/serialize.hpp"
#include "bnv/solver.hpp"
#include "bnv/verifier.hpp"

namespace bnv {

namespace {

namespace fs = std::filesystem;

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path + "'");
    out << text;
    out.flush();
    if (!out) throw Error("failed while writing '" + path + "'");
}

nlohmann::json load_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("invalid JSON in '" + path + "': " + e.what());
    }
}

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double elapsed() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string detect_format(const std::string& path, const std::string& choice) {
    if (choice == "bif") return "bif";
    if (choice == "json") return "native-json";
    std::string ext = fs::path(path).extension().string();
    if (ext == ".bif") return "bif";
    if (ext == ".json") return "native-json";
    throw InvalidArgument("cannot infer the format of '" + path + "'; pass --format");
}

std::vector<std::string> split_csv(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream ss(s);
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// Sibling of the input: data/net.json -> data/net.mdd.json.
std::string default_output(const std::string& input, const std::string& old_suffix,
                           const std::string& new_suffix) {
    fs::path p(input);
    std::string name = p.filename().string();
    if (name.size() > old_suffix.size() &&
        name.compare(name.size() - old_suffix.size(), old_suffix.size(), old_suffix) == 0)
        name.resize(name.size() - old_suffix.size());
    else
        name = fs::path(name).stem().string();
    return (p.parent_path() / (name + new_suffix)).string();
}

EncodedModel load_encoded(const std::string& path) {
    nlohmann::json j = load_json(path);
    std::string kind = j.is_object() ? j.value("kind", "") : "";
    if (kind == "encoded-model") return encoded_from_json(j);
    if (kind == "mdd") return encode(mdd_from_json(j));
    throw ParseError("'" + path + "' is neither an encoded model nor a compiled diagram");
}

// ---------------------------------------------------------------- compile

struct CompileOpts {
    std::string input;
    std::string output;
    std::string format = "auto";
    std::string outcome;
    std::string order_csv;
    std::string zero = "error";
    double threshold = 0.5;
    long long budget = 1LL << 22;
};

CompilerConfig compiler_config(const CompileOpts& o) {
    CompilerConfig cfg;
    cfg.threshold = o.threshold;
    cfg.budget = o.budget;
    cfg.ordering = split_csv(o.order_csv);
    if (o.zero == "class0")
        cfg.zero_evidence = CompilerConfig::kClass0;
    else if (o.zero == "class1")
        cfg.zero_evidence = CompilerConfig::kClass1;
    return cfg;
}

int cmd_compile(const CompileOpts& o, std::ostream& out) {
    const std::string text = read_file(o.input);
    const std::string fmt = detect_format(o.input, o.format);
    const CompilerConfig cfg = compiler_config(o);
    const std::string out_path =
        o.output.empty() ? default_output(o.input, ".json", ".mdd.json") : o.output;

    char tbuf[64];
    std::snprintf(tbuf, sizeof tbuf, "%.17g", o.threshold);
    const std::string cfg_str = "format=" + fmt + ";outcome=" + o.outcome + ";threshold=" + tbuf +
                                ";order=" + o.order_csv + ";zero=" + o.zero +
                                ";budget=" + std::to_string(o.budget);
    const std::string key = content_hash(text + "\n" + cfg_str);

    Timer timer;
    const char* cache_env = std::getenv("BNV_CACHE_DIR");
    fs::path cache_file;
    std::string artifact;
    bool cached = false;
    if (cache_env && *cache_env) {
        cache_file = fs::path(cache_env) / (key + ".mdd.json");
        if (fs::exists(cache_file)) {
            artifact = read_file(cache_file.string());
            cached = true;
        }
    }

    Mdd mdd;
    if (cached) {
        mdd = mdd_from_json(nlohmann::json::parse(artifact));
    } else {
        BayesianNetwork net = parse_network(text, fmt, o.outcome);
        mdd = compile(net, cfg);
        mdd.network_hash = content_hash(text);
        artifact = mdd_to_json(mdd).dump(2) + "\n";
        if (cache_env && *cache_env) {
            fs::create_directories(cache_env);
            write_file(cache_file.string(), artifact);
        }
    }
    write_file(out_path, artifact);

    MddStats st = stats(mdd);
    nlohmann::json report{{"output", out_path},     {"network_hash", mdd.network_hash},
                          {"nodes", st.node_count}, {"edges", st.edge_count},
                          {"height", st.height},    {"pruned", st.pruned_variables},
                          {"cached", cached},       {"seconds", timer.elapsed()}};
    out << report.dump() << "\n";
    return 0;
}

// ----------------------------------------------------------------- encode

struct EncodeOpts {
    std::string input;
    std::string output;
    std::string dimacs;
};

int cmd_encode(const EncodeOpts& o, std::ostream& out) {
    nlohmann::json j = load_json(o.input);
    if (!j.is_object() || j.value("kind", "") != "mdd")
        throw ParseError("'" + o.input + "' is not a compiled diagram artifact");
    Mdd mdd = mdd_from_json(j);
    Timer timer;
    EncodedModel m = encode(mdd);
    const double secs = timer.elapsed();
    const std::string out_path =
        o.output.empty() ? default_output(o.input, ".mdd.json", ".enc.json") : o.output;
    write_file(out_path, encoded_to_json(m).dump(2) + "\n");
    if (!o.dimacs.empty()) write_file(o.dimacs, model_to_dimacs(m));
    nlohmann::json report{{"output", out_path},
                          {"literals", m.cnf.num_vars},
                          {"clauses", m.cnf.clauses.size()},
                          {"seconds", secs}};
    out << report.dump() << "\n";
    return 0;
}

// ----------------------------------------------------------------- verify

struct VerifyOpts {
    std::string input;
    std::string query;
    std::string output;
    std::string format = "json";
    long long max_witnesses = 8;
    long long conflict_limit = -1;
};

std::string verdict_line(const nlohmann::json& v, size_t index) {
    std::ostringstream s;
    s << "query " << (index + 1) << ": " << v.at("type").get<std::string>();
    if (v.at("type") == "fmo") s << "(" << v.at("feature").get<std::string>() << ")";
    if (v.at("holds").get<bool>()) {
        s << " -> holds";
        if (v.at("vacuous").get<bool>()) s << " (vacuous: " << v.value("note", "") << ")";
    } else {
        s << " -> VIOLATED";
        if (v.at("type") == "fmo") {
            if (v.at("patterns").at("low_high_low").get<bool>()) s << " [low-high-low]";
            if (v.at("patterns").at("high_low_high").get<bool>()) s << " [high-low-high]";
            s << " (" << v.at("witnesses").size() << " witnesses)";
        } else {
            s << " (" << v.at("counterexamples").size() << " counterexamples)";
        }
    }
    return s.str();
}

int cmd_verify(const VerifyOpts& o, std::ostream& out) {
    EncodedModel m = load_encoded(o.input);
    std::vector<Query> queries = queries_from_json(load_json(o.query), m.mdd_ref);
    VerifierConfig cfg;
    cfg.max_witnesses = o.max_witnesses;
    cfg.conflict_limit = o.conflict_limit;

    nlohmann::json results = nlohmann::json::array();
    bool all_hold = true;
    for (const Query& q : queries) {
        if (q.type == Query::kItr) {
            ItrVerdict v = verify_itr(m, q.itr, cfg);
            all_hold = all_hold && v.holds;
            results.push_back(verdict_to_json(v, q.itr, m.mdd_ref));
        } else {
            FmoVerdict v = verify_fmo(m, q.fmo, cfg);
            all_hold = all_hold && v.holds;
            results.push_back(verdict_to_json(v, q.fmo, m.mdd_ref));
        }
    }
    nlohmann::json report{{"all_hold", all_hold}, {"results", results}};

    std::string text;
    if (o.format == "text") {
        std::ostringstream s;
        size_t held = 0;
        for (size_t i = 0; i < results.size(); ++i) {
            s << verdict_line(results[i], i) << "\n";
            if (results[i].at("holds").get<bool>()) ++held;
        }
        s << "summary: " << held << "/" << results.size() << " hold\n";
        text = s.str();
    } else {
        text = report.dump(2) + "\n";
    }
    if (o.output.empty()) {
        out << text;
    } else {
        write_file(o.output, text);
        out << "verified " << results.size() << " queries; all_hold="
            << (all_hold ? "true" : "false") << "; report: " << o.output << "\n";
    }
    return all_hold ? 0 : 2;
}

// -------------------------------------------------------------- enumerate

struct EnumOpts {
    std::string input;
    std::string output;
    std::string project = "values";
    long long limit = 64;
    long long conflict_limit = -1;
};

int cmd_enumerate(const EnumOpts& o, std::ostream& out) {
    EncodedModel m = load_encoded(o.input);
    std::vector<int> projection;
    if (o.project == "values") {
        projection = m.registry.ids_of_kind(VarRole::kValue);
    } else if (o.project == "diagram") {
        for (auto kind : {VarRole::kNode, VarRole::kEdge, VarRole::kSinkTrue, VarRole::kSinkFalse}) {
            auto ids = m.registry.ids_of_kind(kind);
            projection.insert(projection.end(), ids.begin(), ids.end());
        }
    } else {
        projection.resize(m.cnf.num_vars);
        for (int i = 0; i < m.cnf.num_vars; ++i) projection[i] = i + 1;
    }
    Timer timer;
    Enumeration res = enumerate(m.cnf, projection, o.limit, o.conflict_limit);
    nlohmann::json report{{"count", res.models.size()},
                          {"complete", res.complete},
                          {"projection", o.project},
                          {"models", res.models},
                          {"seconds", timer.elapsed()}};
    std::string text = report.dump(2) + "\n";
    if (o.output.empty())
        out << text;
    else {
        write_file(o.output, text);
        out << res.models.size() << " models (complete=" << (res.complete ? "true" : "false")
            << "); report: " << o.output << "\n";
    }
    return 0;
}

// ----------------------------------------------------------- export-dimacs

struct ExportOpts {
    std::string input;
    std::string output;
};

int cmd_export_dimacs(const ExportOpts& o, std::ostream& out) {
    std::string text = model_to_dimacs(load_encoded(o.input));
    if (o.output.empty())
        out << text;
    else {
        write_file(o.output, text);
        out << "wrote " << o.output << "\n";
    }
    return 0;
}

// ------------------------------------------------------------------ bench

struct BenchOpts {
    std::string dir;
    std::string output;
    std::string outcome;  // "NAME" for every .bif, or "stem=NAME,stem=NAME"
    int queries = 5;
    int reps = 3;
    int jobs = 1;
    unsigned long long seed = 1;
    double threshold = 0.5;
    long long budget = 1LL << 22;
};

uint64_t fnv64(const std::string& s) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string outcome_for(const std::string& spec, const std::string& stem) {
    if (spec.find('=') == std::string::npos) return spec;
    for (const std::string& part : split_csv(spec)) {
        auto eq = part.find('=');
        if (eq != std::string::npos && part.substr(0, eq) == stem) return part.substr(eq + 1);
    }
    return "";
}

std::vector<Query> random_queries(const BayesianNetwork& net, Rng& rng, int n) {
    const std::vector<int> feats = net.feature_ids();
    std::vector<Query> out;
    for (int i = 0; i < n; ++i) {
        Query q;
        if (i % 2 == 0) {
            q.type = Query::kItr;
            std::vector<int> pool = feats;
            rng.shuffle(pool);
            int k = 1 + static_cast<int>(rng.below(std::min<uint64_t>(3, pool.size())));
            for (int t = 0; t < k; ++t) {
                Rule r;
                r.feature = pool[t];
                r.sense = static_cast<Sense>(rng.below(5));
                r.index = static_cast<int>(
                    rng.below(static_cast<uint64_t>(net.variables[r.feature].cardinality())));
                q.itr.rules.push_back(r);
            }
            q.itr.cls = static_cast<int>(rng.below(2));
        } else {
            q.type = Query::kFmo;
            q.fmo.feature = feats[rng.below(feats.size())];
            for (int f : feats)
                if (f != q.fmo.feature && rng.chance(0.3))
                    q.fmo.phi.emplace_back(
                        f, static_cast<int>(
                               rng.below(static_cast<uint64_t>(net.variables[f].cardinality()))));
        }
        out.push_back(std::move(q));
    }
    return out;
}

struct BenchRow {
    std::string name;
    int bn_nodes = 0;
    double bn_avg_degree = 0.0;
    long long bn_parameters = 0;
    int mdd_height = 0;
    int mdd_nodes = 0;
    int cnf_literals = 0;
    long long cnf_clauses = 0;
    double compile_seconds = 0.0;
    double encode_seconds = 0.0;
    double verify_seconds = 0.0;
    unsigned long long seed = 0;
    std::string error;
};

BenchRow bench_one(const fs::path& path, const BenchOpts& o) {
    BenchRow row;
    row.name = path.stem().string();
    row.seed = o.seed;
    try {
        const std::string text = read_file(path.string());
        BayesianNetwork net;
        if (path.extension() == ".bif") {
            net = parse_network(text, "bif", outcome_for(o.outcome, row.name));
        } else {
            nlohmann::json j = nlohmann::json::parse(text);
            if (j.is_object() && j.contains("kind"))
                throw SemanticError("not a network (kind=" + j["kind"].get<std::string>() + ")");
            net = network_from_json(j);
        }
        row.bn_nodes = net.var_count();
        row.bn_avg_degree = net.average_degree();
        row.bn_parameters = net.parameter_count();

        Rng rng(o.seed ^ fnv64(row.name));
        std::vector<Query> queries = random_queries(net, rng, o.queries);
        CompilerConfig cfg;
        cfg.threshold = o.threshold;
        cfg.budget = o.budget;
        VerifierConfig vcfg;
        vcfg.max_witnesses = 1;

        for (int rep = 0; rep < o.reps; ++rep) {
            Timer tc;
            Mdd mdd = compile(net, cfg);
            row.compile_seconds += tc.elapsed();
            Timer te;
            EncodedModel m = encode(mdd);
            row.encode_seconds += te.elapsed();
            Timer tv;
            for (const Query& q : queries) {
                if (q.type == Query::kItr)
                    verify_itr(m, q.itr, vcfg);
                else
                    verify_fmo(m, q.fmo, vcfg);
            }
            row.verify_seconds += tv.elapsed();
            if (rep == 0) {
                MddStats st = stats(mdd);
                row.mdd_height = st.height;
                row.mdd_nodes = st.node_count;
                row.cnf_literals = m.cnf.num_vars;
                row.cnf_clauses = static_cast<long long>(m.cnf.clauses.size());
            }
        }
        row.compile_seconds /= o.reps;
        row.encode_seconds /= o.reps;
        row.verify_seconds /= o.reps;
    } catch (const std::exception& e) {
        row.error = e.what();
    }
    return row;
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

int cmd_bench(const BenchOpts& o, std::ostream& out) {
    if (!fs::is_directory(o.dir)) throw InvalidArgument("'" + o.dir + "' is not a directory");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(o.dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        if (ext == ".bif" || ext == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<BenchRow> rows(files.size());
    std::atomic<size_t> next{0};
    auto worker = [&] {
        for (size_t i = next.fetch_add(1); i < files.size(); i = next.fetch_add(1))
            rows[i] = bench_one(files[i], o);
    };
    const int jobs = std::max(1, std::min<int>(o.jobs, static_cast<int>(files.size())));
    if (jobs <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }

    std::ostringstream csv;
    csv << "name,bn_nodes,bn_avg_degree,bn_parameters,mdd_height,mdd_nodes,cnf_literals,"
           "cnf_clauses,compile_seconds,encode_seconds,verify_seconds,seed,error\n";
    char buf[64];
    for (const BenchRow& r : rows) {
        csv << csv_escape(r.name) << "," << r.bn_nodes << ",";
        std::snprintf(buf, sizeof buf, "%.3f", r.bn_avg_degree);
        csv << buf << "," << r.bn_parameters << "," << r.mdd_height << "," << r.mdd_nodes << ","
            << r.cnf_literals << "," << r.cnf_clauses << ",";
        std::snprintf(buf, sizeof buf, "%.6f", r.compile_seconds);
        csv << buf << ",";
        std::snprintf(buf, sizeof buf, "%.6f", r.encode_seconds);
        csv << buf << ",";
        std::snprintf(buf, sizeof buf, "%.6f", r.verify_seconds);
        csv << buf << "," << r.seed << "," << csv_escape(r.error) << "\n";
    }
    if (o.output.empty())
        out << csv.str();
    else {
        write_file(o.output, csv.str());
        out << "wrote " << rows.size() << " rows to " << o.output << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian network classifier verification toolchain"};
    app.name("bnv");
    app.require_subcommand(1);

    CompileOpts co;
    auto* compile_cmd = app.add_subcommand("compile", "Compile a network into a decision diagram");
    compile_cmd->add_option("network", co.input, "network file (.bif or native .json)")->required();
    compile_cmd->add_option("-o,--output", co.output, "artifact path (default: <stem>.mdd.json)");
    compile_cmd->add_option("--format", co.format, "input format")
        ->check(CLI::IsMember({"auto", "bif", "json"}));
    compile_cmd->add_option("--outcome", co.outcome, "outcome variable (required for BIF)");
    compile_cmd->add_option("--threshold", co.threshold, "decision threshold in (0,1)");
    compile_cmd->add_option("--order", co.order_csv, "comma-separated feature ordering");
    compile_cmd->add_option("--zero-evidence", co.zero, "zero-probability context policy")
        ->check(CLI::IsMember({"error", "class0", "class1"}));
    compile_cmd->add_option("--budget", co.budget, "compilation step budget")
        ->check(CLI::PositiveNumber);

    EncodeOpts eo;
    auto* encode_cmd = app.add_subcommand("encode", "Encode a compiled diagram as CNF");
    encode_cmd->add_option("mdd", eo.input, "diagram artifact from compile")->required();
    encode_cmd->add_option("-o,--output", eo.output, "artifact path (default: <stem>.enc.json)");
    encode_cmd->add_option("--dimacs", eo.dimacs, "also write DIMACS with role comments");

    VerifyOpts vo;
    auto* verify_cmd = app.add_subcommand("verify", "Check rule/monotonicity queries against a model");
    verify_cmd->add_option("model", vo.input, "encoded artifact (or diagram artifact)")->required();
    verify_cmd->add_option("-q,--query", vo.query, "query file (JSON)")->required();
    verify_cmd->add_option("-o,--output", vo.output, "write the report here instead of stdout");
    verify_cmd->add_option("--format", vo.format, "report format")
        ->check(CLI::IsMember({"json", "text"}));
    verify_cmd->add_option("--max-witnesses", vo.max_witnesses, "counterexample cap per query")
        ->check(CLI::PositiveNumber);
    verify_cmd->add_option("--conflict-limit", vo.conflict_limit, "solver conflict budget (<0: none)");

    EnumOpts no;
    auto* enum_cmd = app.add_subcommand("enumerate", "List satisfying models of an encoded model");
    enum_cmd->add_option("model", no.input, "encoded artifact (or diagram artifact)")->required();
    enum_cmd->add_option("-o,--output", no.output, "write the report here instead of stdout");
    enum_cmd->add_option("--limit", no.limit, "maximum models to list")->check(CLI::PositiveNumber);
    enum_cmd->add_option("--project", no.project, "projection scope")
        ->check(CLI::IsMember({"values", "diagram", "all"}));
    enum_cmd->add_option("--conflict-limit", no.conflict_limit, "solver conflict budget (<0: none)");

    ExportOpts xo;
    auto* export_cmd = app.add_subcommand("export-dimacs", "Write an encoded model as DIMACS CNF");
    export_cmd->add_option("model", xo.input, "encoded artifact (or diagram artifact)")->required();
    export_cmd->add_option("-o,--output", xo.output, "output path (default: stdout)");

    BenchOpts bo;
    auto* bench_cmd = app.add_subcommand("bench", "Benchmark a directory of networks");
    bench_cmd->add_option("dir", bo.dir, "directory of .bif / native .json networks")->required();
    bench_cmd->add_option("-o,--output", bo.output, "CSV path (default: stdout)");
    bench_cmd->add_option("--outcome", bo.outcome,
                          "outcome for BIF inputs: NAME, or stem=NAME,stem=NAME");
    bench_cmd->add_option("--queries", bo.queries, "random queries per network")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--reps", bo.reps, "repetitions to average over")
        ->check(CLI::PositiveNumber);
    bench_cmd->add_option("--jobs", bo.jobs, "parallel workers")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--seed", bo.seed, "master seed recorded in every row");
    bench_cmd->add_option("--threshold", bo.threshold, "decision threshold in (0,1)");
    bench_cmd->add_option("--budget", bo.budget, "compilation step budget")
        ->check(CLI::PositiveNumber);

    try {
        std::vector<const char*> argv;
        argv.push_back("bnv");
        for (const std::string& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        if (compile_cmd->parsed()) return cmd_compile(co, out);
        if (encode_cmd->parsed()) return cmd_encode(eo, out);
        if (verify_cmd->parsed()) return cmd_verify(vo, out);
        if (enum_cmd->parsed()) return cmd_enumerate(no, out);
        if (export_cmd->parsed()) return cmd_export_dimacs(xo, out);
        if (bench_cmd->parsed()) return cmd_bench(bo, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    err << "error: no subcommand\n";
    return 1;
}

}  // namespace bnv
