#pragma once

#include <string>
#include <string_view>

#include "structsel/rules.hpp"

namespace structsel {

// Parses one rule expression.
//
//   rule     := unit | "!" rule | rule "&" rule | rule "|" rule
//             | rule "->" rule | "(" rule ")"
//   unit     := "u(" varset "," countset ")"
//   varset   := "{" name ("," name)* "}"
//   countset := "{" ints "}" | "all"          (all = select every scope var)
//
// Precedence ! > & > | > ->, with -> right-associative. Names may use
// [A-Za-z0-9_.:-]; a "-" directly followed by ">" always reads as the arrow.
Rule parse_rule(std::string_view text, const RegistryPtr& reg);

// Parses a rule file: one "name : expr" per line, '#' starts a comment,
// blank lines ignored. A single line may carry the prefix tag "forced:";
// that rule must be a select-all unit rule and defines the always-selected
// set. Rule names use [A-Za-z0-9_.-] (no colon).
RuleSet parse_rule_file(std::string_view text, const RegistryPtr& reg);

// Serializes a rule set back to the file syntax.
std::string format_rule_file(const RuleSet& rs);

}  // namespace structsel
