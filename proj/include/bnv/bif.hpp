#pragma once

#include <string>

#include "bnv/bayesnet.hpp"

namespace bnv {

// Reader for the discrete subset of the BIF format: `network`, `variable`
// with `type discrete`, and `probability` blocks (`table` rows or per-parent
// value tuples). BIF carries no class marker, so the outcome variable is
// named by the caller. Throws ParseError with a source position on syntax
// errors and SemanticError on invariant violations.
BayesianNetwork parse_bif(const std::string& text, const std::string& outcome_name);

// Renders the same subset back out; parse(serialize(net)) is structurally
// identical to net.
std::string to_bif(const BayesianNetwork& net);

}  // namespace bnv
