#include "bnv/cnf.hpp"

#include <sstream>

#include "bnv/errors.hpp"

namespace bnv {

void Cnf::add(Clause c) {
    if (c.empty()) throw InvalidArgument("empty clause");
    for (Lit l : c) {
        if (l == 0) throw InvalidArgument("literal 0 is reserved");
        if (var_of(l) > num_vars) num_vars = var_of(l);
    }
    clauses.push_back(std::move(c));
}

std::string to_dimacs(const Cnf& cnf, const std::vector<std::string>& comments) {
    std::ostringstream out;
    for (const auto& line : comments) out << "c " << line << "\n";
    out << "p cnf " << cnf.num_vars << " " << cnf.clauses.size() << "\n";
    for (const auto& clause : cnf.clauses) {
        for (Lit l : clause) out << l << " ";
        out << "0\n";
    }
    return out.str();
}

Cnf from_dimacs(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    bool have_header = false;
    long long declared_clauses = 0;
    Cnf cnf;
    int num_vars = 0;
    Clause current;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == 'c') continue;
        std::istringstream fields(line);
        if (!have_header) {
            std::string p, fmt;
            if (!(fields >> p >> fmt >> num_vars >> declared_clauses) || p != "p" || fmt != "cnf" ||
                num_vars < 0 || declared_clauses < 0)
                throw ParseError("expected header 'p cnf <vars> <clauses>'", line_no);
            have_header = true;
            continue;
        }
        Lit l;
        while (fields >> l) {
            if (l == 0) {
                if (current.empty()) throw ParseError("empty clause", line_no);
                cnf.clauses.push_back(std::move(current));
                current.clear();
            } else {
                if (var_of(l) > num_vars)
                    throw ParseError("literal " + std::to_string(l) +
                                         " exceeds the declared variable count",
                                     line_no);
                current.push_back(l);
            }
        }
        if (!fields.eof()) throw ParseError("bad token in clause data", line_no);
    }
    if (!have_header) throw ParseError("missing 'p cnf' header");
    if (!current.empty()) throw ParseError("last clause is not 0-terminated", line_no);
    if (static_cast<long long>(cnf.clauses.size()) != declared_clauses)
        throw ParseError("header declares " + std::to_string(declared_clauses) + " clauses, found " +
                         std::to_string(cnf.clauses.size()));
    cnf.num_vars = num_vars;
    return cnf;
}

}  // namespace bnv
