#include "bnv/serialize.hpp"

#include <cstdint>
#include <map>

#include "bnv/bif.hpp"
#include "bnv/errors.hpp"

namespace bnv {

namespace {

int label_index(const Variable& var, const std::string& label) {
    for (int i = 0; i < var.cardinality(); ++i)
        if (var.value_labels[i] == label) return i;
    throw SemanticError("unknown value '" + label + "' for variable '" + var.name + "'");
}

}  // namespace

nlohmann::json network_to_json(const BayesianNetwork& net) {
    nlohmann::json j;
    j["variables"] = nlohmann::json::array();
    for (const auto& var : net.variables)
        j["variables"].push_back({{"name", var.name}, {"values", var.value_labels}});

    j["edges"] = nlohmann::json::array();
    for (const auto& [p, c] : net.edges)
        j["edges"].push_back({net.variables[p].name, net.variables[c].name});

    j["cpts"] = nlohmann::json::object();
    for (const auto& cpt : net.cpts) {
        nlohmann::json entry;
        entry["parents"] = nlohmann::json::array();
        for (int p : cpt.parents) entry["parents"].push_back(net.variables[p].name);
        entry["rows"] = nlohmann::json::array();
        std::vector<int> digits(cpt.parents.size(), 0);
        for (const auto& row : cpt.rows) {
            nlohmann::json given = nlohmann::json::array();
            for (size_t i = 0; i < cpt.parents.size(); ++i)
                given.push_back(net.variables[cpt.parents[i]].value_labels[digits[i]]);
            entry["rows"].push_back({{"given", given}, {"p", row}});
            for (int i = static_cast<int>(digits.size()) - 1; i >= 0; --i) {
                if (++digits[i] < net.variables[cpt.parents[i]].cardinality()) break;
                digits[i] = 0;
            }
        }
        j["cpts"][net.variables[cpt.child].name] = std::move(entry);
    }

    j["outcome"] = net.variables[net.outcome].name;
    return j;
}

BayesianNetwork network_from_json(const nlohmann::json& j) {
    for (const char* key : {"variables", "edges", "cpts", "outcome"})
        if (!j.contains(key)) throw ParseError(std::string("missing top-level key '") + key + "'");

    BayesianNetwork net;
    std::map<std::string, int> ids;
    for (const auto& entry : j.at("variables")) {
        Variable var;
        var.name = entry.at("name").get<std::string>();
        var.value_labels = entry.at("values").get<std::vector<std::string>>();
        if (!ids.emplace(var.name, net.var_count()).second)
            throw SemanticError("variable '" + var.name + "' declared twice");
        net.variables.push_back(std::move(var));
    }

    auto lookup = [&](const std::string& name) {
        auto it = ids.find(name);
        if (it == ids.end()) throw SemanticError("reference to undeclared variable '" + name + "'");
        return it->second;
    };

    for (const auto& edge : j.at("edges")) {
        if (!edge.is_array() || edge.size() != 2)
            throw ParseError("each edge must be a [parent, child] pair");
        net.edges.emplace_back(lookup(edge[0].get<std::string>()),
                               lookup(edge[1].get<std::string>()));
    }

    net.cpts.resize(net.var_count());
    for (auto& cpt : net.cpts) cpt.child = -1;
    for (const auto& [name, entry] : j.at("cpts").items()) {
        int child = lookup(name);
        Cpt cpt;
        cpt.child = child;
        for (const auto& p : entry.at("parents")) cpt.parents.push_back(lookup(p.get<std::string>()));

        long long row_count = 1;
        for (int p : cpt.parents) row_count *= net.variables[p].cardinality();
        cpt.rows.assign(row_count, {});
        for (const auto& row : entry.at("rows")) {
            const auto& given = row.at("given");
            if (static_cast<size_t>(given.size()) != cpt.parents.size())
                throw SemanticError("row of '" + name + "' lists " +
                                    std::to_string(given.size()) + " parent values, expected " +
                                    std::to_string(cpt.parents.size()));
            long long index = 0;
            for (size_t i = 0; i < cpt.parents.size(); ++i) {
                const Variable& parent = net.variables[cpt.parents[i]];
                index = index * parent.cardinality() +
                        label_index(parent, given[i].get<std::string>());
            }
            if (!cpt.rows[index].empty())
                throw SemanticError("duplicate CPT row for '" + name + "'");
            cpt.rows[index] = row.at("p").get<std::vector<double>>();
        }
        for (const auto& row : cpt.rows)
            if (row.empty())
                throw SemanticError("CPT of '" + name + "' is missing a parent-value row");
        net.cpts[child] = std::move(cpt);
    }
    for (int v = 0; v < net.var_count(); ++v)
        if (net.cpts[v].child == -1)
            throw SemanticError("no CPT for '" + net.variables[v].name + "'");

    net.outcome = lookup(j.at("outcome").get<std::string>());
    validate(net);
    return net;
}

BayesianNetwork parse_network(const std::string& text, const std::string& format,
                              const std::string& outcome_name) {
    if (format == "bif") {
        if (outcome_name.empty())
            throw InvalidArgument("BIF input needs an explicit outcome variable name");
        return parse_bif(text, outcome_name);
    }
    if (format == "native-json") {
        if (!outcome_name.empty())
            throw InvalidArgument("native-json input carries its own outcome field");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(e.what());
        }
        return network_from_json(j);
    }
    throw InvalidArgument("unknown network format '" + format + "' (want bif or native-json)");
}

std::string serialize_network(const BayesianNetwork& net, const std::string& format) {
    if (format == "bif") return to_bif(net);
    if (format == "native-json") return network_to_json(net).dump(2) + "\n";
    throw InvalidArgument("unknown network format '" + format + "' (want bif or native-json)");
}

std::string content_hash(const std::string& bytes) {
    uint64_t hash = 0xcbf29ce484222325ull;
    for (unsigned char c : bytes) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
    return std::string(buffer);
}

}  // namespace bnv
