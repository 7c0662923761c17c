#include <doctest.h>

#include <algorithm>
#include <random>
#include <set>

#include "pathway/errors.hpp"
#include "pathway/rules.hpp"

using namespace pathway;

namespace {

const char* kAssertions =
    "AEROD_v: nonzero; FLNT: noninc; FLNT: end<start; T050: nondec; T050: end>start";
const std::vector<std::string> kSchema{"AEROD_v", "FLNT", "T050"};

Pattern pat(std::initializer_list<std::initializer_list<std::int32_t>> steps) {
    Pattern p;
    for (auto s : steps) p.push_back(Symbol(s));
    return p;
}

}  // namespace

TEST_CASE("parse_rules: pinned assertion text yields 5 constraints on 3 variables") {
    RuleSet rs = parse_rules(kAssertions);
    REQUIRE(rs.rules.size() == 5);
    CHECK(rs.rules[0] == Rule{"AEROD_v", ConstraintKind::nonzero_all});
    CHECK(rs.rules[1] == Rule{"FLNT", ConstraintKind::monotone_nonincreasing});
    CHECK(rs.rules[2] == Rule{"FLNT", ConstraintKind::end_lt_start});
    CHECK(rs.rules[3] == Rule{"T050", ConstraintKind::monotone_nondecreasing});
    CHECK(rs.rules[4] == Rule{"T050", ConstraintKind::end_gt_start});
    std::set<std::string> vars;
    for (const auto& r : rs.rules) vars.insert(r.variable);
    CHECK(vars.size() == 3);
}

TEST_CASE("parse_rules: empty input, comments, trailing semicolon") {
    CHECK(parse_rules("").rules.empty());
    CHECK(parse_rules("  # only a comment\n").rules.empty());
    RuleSet rs = parse_rules("# header\nX: inc;  # tail comment\nY: const;\n");
    REQUIRE(rs.rules.size() == 2);
    CHECK(rs.rules[1].kind == ConstraintKind::constant);
}

TEST_CASE("parse_rules: diagnostics carry line and column") {
    try {
        parse_rules("FLNT noninc");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 1);
        CHECK(e.column == 6);
        CHECK(std::string(e.what()).find(":") != std::string::npos);
        CHECK(std::string(e.what()).find("\":\"") != std::string::npos);
    }
    try {
        parse_rules("X: inc;\nY wrong");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line == 2);
    }
    CHECK_THROWS_AS(parse_rules("X: bogus"), ParseError);
    CHECK_THROWS_AS(parse_rules("X: end=start"), ParseError);
    CHECK_THROWS_AS(parse_rules("X: inc; X: inc"), ParseError);  // duplicate
    CHECK_THROWS_AS(parse_rules("X: inc Y: dec"), ParseError);   // missing ';'
    CHECK_THROWS_AS(parse_rules("42"), ParseError);
}

TEST_CASE("print_rules round trips through parse_rules") {
    RuleSet rs = parse_rules(kAssertions);
    RuleSet back = parse_rules(print_rules(rs));
    CHECK(back == rs);
    // all nine constraint kinds survive the round trip
    RuleSet all = parse_rules(
        "a: nonzero; b: zero; c: noninc; d: nondec; e: dec; f: inc; "
        "g: end<start; h: end>start; i: const");
    CHECK(parse_rules(print_rules(all)) == all);
}

TEST_CASE("eval_rules: pinned pathway satisfies the assertions") {
    RuleSet rs = parse_rules(kAssertions);
    Pattern good = pat({{1, 3, 1}, {1, 3, 2}, {1, 2, 2}, {1, 1, 2}});
    CHECK(eval_rules(good, rs, kSchema));

    Pattern zero_a = pat({{0, 3, 1}, {0, 2, 2}});
    CHECK_FALSE(eval_rules(zero_a, rs, kSchema));  // AEROD_v zero

    Pattern flnt_up = pat({{1, 2, 1}, {1, 3, 2}});
    CHECK_FALSE(eval_rules(flnt_up, rs, kSchema));  // FLNT increases

    Pattern t050_down = pat({{1, 3, 2}, {1, 2, 1}});
    CHECK_FALSE(eval_rules(t050_down, rs, kSchema));  // T050 decreases

    Pattern flat = pat({{1, 2, 2}, {1, 2, 2}});
    CHECK_FALSE(eval_rules(flat, rs, kSchema));  // end<start and end>start both fail

    // a length-1 pattern passes monotone rules but fails end-vs-start rules
    Pattern single = pat({{1, 3, 1}});
    CHECK_FALSE(eval_rules(single, rs, kSchema));
    CHECK(eval_rules(single, parse_rules("FLNT: noninc; T050: nondec"), kSchema));
    CHECK(eval_rules(single, RuleSet{}, kSchema));  // vacuous conjunction
}

TEST_CASE("eval_rules: errors") {
    RuleSet rs = parse_rules("Q: inc");
    Pattern p = pat({{1, 2, 3}});
    CHECK_THROWS_WITH_AS(eval_rules(p, rs, kSchema), doctest::Contains("Q"),
                         ConfigError);
    CHECK_THROWS_AS(eval_rules(Pattern{}, RuleSet{}, kSchema), ConfigError);
    CHECK_THROWS_AS(eval_rules(pat({{1, 2}}), RuleSet{}, kSchema), ConfigError);
}

TEST_CASE("eval_rules: reversal duality") {
    std::mt19937 rng(99);
    std::vector<std::string> schema{"v"};
    auto dual = [](ConstraintKind k) {
        switch (k) {
            case ConstraintKind::monotone_nonincreasing:
                return ConstraintKind::monotone_nondecreasing;
            case ConstraintKind::monotone_nondecreasing:
                return ConstraintKind::monotone_nonincreasing;
            case ConstraintKind::end_lt_start:
                return ConstraintKind::end_gt_start;
            case ConstraintKind::end_gt_start:
                return ConstraintKind::end_lt_start;
            default:
                return k;
        }
    };
    std::vector<ConstraintKind> kinds{
        ConstraintKind::monotone_nonincreasing, ConstraintKind::monotone_nondecreasing,
        ConstraintKind::end_lt_start, ConstraintKind::end_gt_start};
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t len = 1 + rng() % 6;
        Pattern p(len);
        for (auto& s : p) s = Symbol{static_cast<std::int32_t>(rng() % 4)};
        Pattern rev(p.rbegin(), p.rend());
        ConstraintKind k = kinds[rng() % kinds.size()];
        RuleSet fwd{{Rule{"v", k}}}, bwd{{Rule{"v", dual(k)}}};
        CHECK(eval_rules(p, fwd, schema) == eval_rules(rev, bwd, schema));
    }
}

TEST_CASE("filter_patterns: vacuous filter, bind errors, monotonicity") {
    std::mt19937 rng(7);
    std::vector<std::string> schema{"a", "b"};
    for (int trial = 0; trial < 100; ++trial) {
        PatternIndex idx;
        std::size_t np = 1 + rng() % 8;
        for (std::size_t i = 0; i < np; ++i) {
            std::size_t len = 1 + rng() % 4;
            Pattern p;
            for (std::size_t s = 0; s < len; ++s)
                p.push_back(Symbol{static_cast<std::int32_t>(rng() % 3),
                                   static_cast<std::int32_t>(rng() % 3)});
            PatternData d;
            d.instances = 1 + rng() % 5;
            idx.patterns[p] = d;
        }
        PatternIndex all = filter_patterns(idx, RuleSet{}, schema);
        CHECK(all.patterns.size() == idx.patterns.size());

        RuleSet one = parse_rules("a: nonzero");
        RuleSet two = parse_rules("a: nonzero; b: noninc");
        PatternIndex f1 = filter_patterns(idx, one, schema);
        PatternIndex f2 = filter_patterns(idx, two, schema);
        CHECK(f1.patterns.size() <= idx.patterns.size());
        CHECK(f2.patterns.size() <= f1.patterns.size());
        for (const auto& [p, d] : f2.patterns) CHECK(f1.patterns.count(p) == 1);
    }
    PatternIndex empty;
    CHECK_THROWS_WITH_AS(filter_patterns(empty, parse_rules("nope: inc"), schema),
                         doctest::Contains("nope"), ConfigError);
}

TEST_CASE("prevalence: intervals, overlap OR, disjoint additivity") {
    PatternIndex idx;
    Pattern p1{Symbol{1}}, p2{Symbol{2}};
    // one occurrence spanning [3,8] in partition 0
    idx.patterns[p1].occurrences.push_back(Occurrence{1, 0, 0, 3, 8, 6});
    PrevalenceSeries ps = prevalence(idx, 12, 4, 1, 0);
    for (std::size_t t = 0; t < 12; ++t)
        CHECK(ps.active_count[t] == ((t >= 3 && t <= 8) ? 1u : 0u));

    // overlapping occurrence in the same partition: still 1 (OR), instances add
    idx.patterns[p2].occurrences.push_back(Occurrence{1, 0, 0, 5, 6, 2});
    ps = prevalence(idx, 12, 4, 1, 0);
    CHECK(ps.active_count[5] == 1);
    CHECK(ps.instance_count[5] == 2);

    // occurrence in a distinct partition is additive
    idx.patterns[p2].occurrences.push_back(Occurrence{1, 0, 2, 5, 5, 1});
    ps = prevalence(idx, 12, 4, 1, 0);
    CHECK(ps.active_count[5] == 2);

    // other arm/member occurrences are ignored
    idx.patterns[p2].occurrences.push_back(Occurrence{0, 0, 3, 5, 5, 1});
    idx.patterns[p2].occurrences.push_back(Occurrence{1, 1, 3, 5, 5, 1});
    ps = prevalence(idx, 12, 4, 1, 0);
    CHECK(ps.active_count[5] == 2);

    for (std::size_t t = 0; t < ps.nt; ++t) CHECK(ps.active_count[t] <= ps.npart);
}

TEST_CASE("prevalence_significance mirrors the membership detector") {
    PatternIndex idx;
    Pattern p1{Symbol{1}};
    // forced members 0..2 active in 3 partitions over [2,9]; baseline empty
    for (std::uint16_t m = 0; m < 3; ++m)
        for (std::uint32_t part = 0; part < 3; ++part)
            idx.patterns[p1].occurrences.push_back(Occurrence{1, m, part, 2, 9, 8});
    std::vector<PrevalenceSeries> forced, baseline;
    for (std::uint16_t m = 0; m < 3; ++m) {
        forced.push_back(prevalence(idx, 12, 5, 1, m));
        baseline.push_back(prevalence(idx, 12, 5, 0, m));
    }
    SignificanceSeries sig = prevalence_significance(forced, baseline, 0.05);
    for (std::size_t t = 2; t <= 9; ++t) {
        CHECK(sig.flag[t] == SigFlag::increase);
        CHECK(sig.p_value[t] == 0.0);  // degenerate zero-variance split
    }
    CHECK(sig.flag[0] == SigFlag::none);
    CHECK(sig.p_value[0] == 1.0);

    CHECK_THROWS_AS(prevalence_significance({forced[0]}, {baseline[0]}, 0.05),
                    ConfigError);
}
