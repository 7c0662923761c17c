#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathway/detect.hpp"
#include "pathway/errors.hpp"
#include "pathway/sequence.hpp"

namespace pathway {

enum class ConstraintKind {
    nonzero_all,
    zero_all,
    monotone_nonincreasing,
    monotone_nondecreasing,
    strictly_decreasing,
    strictly_increasing,
    end_lt_start,
    end_gt_start,
    constant,
};

const char* constraint_name(ConstraintKind kind);

struct Rule {
    std::string variable;
    ConstraintKind kind;
    bool operator==(const Rule&) const = default;
};

// Conjunction of per-variable constraints over an evolution pattern.
struct RuleSet {
    std::vector<Rule> rules;
    bool operator==(const RuleSet&) const = default;
};

struct ParseError : ConfigError {
    int line;
    int column;
    ParseError(int line_, int col_, const std::string& msg)
        : ConfigError("rules:" + std::to_string(line_) + ":" + std::to_string(col_) +
                      ": " + msg),
          line(line_),
          column(col_) {}
};

// Grammar: ruleset := rule (";" rule)* ; rule := IDENT ":" constraint.
// '#' starts a comment that runs to end of line. Throws ParseError.
RuleSet parse_rules(const std::string& text);
RuleSet load_rules(const std::filesystem::path& path);

// Renders a RuleSet back into parseable text (one rule per line).
std::string print_rules(const RuleSet& rules);

// Conjunction over all rules applied to the pattern's per-variable component
// sequences. Unknown variables raise ConfigError at bind time.
bool eval_rules(const Pattern& pattern, const RuleSet& rules,
                const std::vector<std::string>& schema);

PatternIndex filter_patterns(const PatternIndex& index, const RuleSet& rules,
                             const std::vector<std::string>& schema);

// A partition is active at t when some occurrence's [t_start, t_end] interval
// contains t; overlapping instances in one partition count once.
struct PrevalenceSeries {
    std::size_t nt = 0;
    std::size_t npart = 0;
    std::vector<std::size_t> active_count;    // partitions active per t
    std::vector<std::size_t> instance_count;  // raw overlapping instance count per t
    std::vector<std::uint8_t> active;         // [t * npart] bitmap for maps
};

PrevalenceSeries prevalence(const PatternIndex& filtered, std::size_t nt,
                            std::size_t npart, std::uint8_t arm, std::uint16_t member);

SignificanceSeries prevalence_significance(const std::vector<PrevalenceSeries>& forced,
                                           const std::vector<PrevalenceSeries>& baseline,
                                           double alpha);

}  // namespace pathway
