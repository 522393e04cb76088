#pragma once

#include <string>
#include <vector>

namespace bnv {

// Signed DIMACS-style literal: magnitude is a variable id >= 1, sign is
// polarity. Variable ids are registry ids in encoded models.
using Lit = int;
using Clause = std::vector<Lit>;

inline int var_of(Lit l) { return l < 0 ? -l : l; }

struct Cnf {
    int num_vars = 0;
    std::vector<Clause> clauses;

    // Rejects empty clauses and out-of-range literals; num_vars grows as
    // needed so builders can add clauses before settling on a final count.
    void add(Clause c);
};

// DIMACS text (`c` comments, `p cnf <vars> <clauses>`, 0-terminated
// clauses). Throws ParseError on malformed input; round trip is lossless.
std::string to_dimacs(const Cnf& cnf, const std::vector<std::string>& comments = {});
Cnf from_dimacs(const std::string& text);

}  // namespace bnv
