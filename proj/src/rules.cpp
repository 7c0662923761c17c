#include "pathway/rules.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace pathway {

const char* constraint_name(ConstraintKind kind) {
    switch (kind) {
        case ConstraintKind::nonzero_all: return "nonzero";
        case ConstraintKind::zero_all: return "zero";
        case ConstraintKind::monotone_nonincreasing: return "noninc";
        case ConstraintKind::monotone_nondecreasing: return "nondec";
        case ConstraintKind::strictly_decreasing: return "dec";
        case ConstraintKind::strictly_increasing: return "inc";
        case ConstraintKind::end_lt_start: return "end<start";
        case ConstraintKind::end_gt_start: return "end>start";
        case ConstraintKind::constant: return "const";
    }
    return "?";
}

namespace {

struct Token {
    enum Type { ident, colon, semicolon, lt, gt, end } type;
    std::string text;
    int line;
    int col;
};

class Lexer {
public:
    explicit Lexer(const std::string& text) : s_(text) {}

    Token next() {
        skip_ws();
        Token t;
        t.line = line_;
        t.col = col_;
        if (pos_ >= s_.size()) {
            t.type = Token::end;
            return t;
        }
        char c = s_[pos_];
        if (c == ':') { advance(); t.type = Token::colon; t.text = ":"; return t; }
        if (c == ';') { advance(); t.type = Token::semicolon; t.text = ";"; return t; }
        if (c == '<') { advance(); t.type = Token::lt; t.text = "<"; return t; }
        if (c == '>') { advance(); t.type = Token::gt; t.text = ">"; return t; }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::string id;
            while (pos_ < s_.size() &&
                   (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_'))
                id.push_back(advance());
            t.type = Token::ident;
            t.text = std::move(id);
            return t;
        }
        throw ParseError(line_, col_, std::string("unexpected character '") + c + "'");
    }

private:
    char advance() {
        char c = s_[pos_++];
        if (c == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        return c;
    }
    void skip_ws() {
        while (pos_ < s_.size()) {
            char c = s_[pos_];
            if (c == '#') {
                while (pos_ < s_.size() && s_[pos_] != '\n') advance();
            } else if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else {
                break;
            }
        }
    }
    const std::string& s_;
    std::size_t pos_ = 0;
    int line_ = 1;
    int col_ = 1;
};

ConstraintKind keyword_constraint(const Token& t) {
    const std::string& w = t.text;
    if (w == "nonzero") return ConstraintKind::nonzero_all;
    if (w == "zero") return ConstraintKind::zero_all;
    if (w == "noninc") return ConstraintKind::monotone_nonincreasing;
    if (w == "nondec") return ConstraintKind::monotone_nondecreasing;
    if (w == "dec") return ConstraintKind::strictly_decreasing;
    if (w == "inc") return ConstraintKind::strictly_increasing;
    if (w == "const") return ConstraintKind::constant;
    throw ParseError(t.line, t.col,
                     "expected a constraint (one of: nonzero, zero, noninc, nondec, "
                     "dec, inc, end<start, end>start, const), got '" + w + "'");
}

}  // namespace

RuleSet parse_rules(const std::string& text) {
    Lexer lex(text);
    RuleSet rs;
    Token t = lex.next();
    while (t.type != Token::end) {
        if (t.type != Token::ident)
            throw ParseError(t.line, t.col, "expected variable name, got '" + t.text + "'");
        Rule rule;
        rule.variable = t.text;

        Token colon = lex.next();
        if (colon.type != Token::colon)
            throw ParseError(colon.line, colon.col,
                             "expected \":\" after variable name, got '" + colon.text + "'");

        Token c = lex.next();
        if (c.type != Token::ident)
            throw ParseError(c.line, c.col, "expected a constraint, got '" + c.text + "'");
        if (c.text == "end") {
            Token op = lex.next();
            if (op.type != Token::lt && op.type != Token::gt)
                throw ParseError(op.line, op.col,
                                 "expected \"<\" or \">\" after 'end', got '" + op.text + "'");
            Token start = lex.next();
            if (start.type != Token::ident || start.text != "start")
                throw ParseError(start.line, start.col,
                                 "expected 'start', got '" + start.text + "'");
            rule.kind = op.type == Token::lt ? ConstraintKind::end_lt_start
                                             : ConstraintKind::end_gt_start;
        } else {
            rule.kind = keyword_constraint(c);
        }
        // each variable may carry a constraint kind at most once
        for (const auto& prev : rs.rules)
            if (prev.variable == rule.variable && prev.kind == rule.kind)
                throw ParseError(t.line, t.col, "duplicate rule '" + rule.variable + ": " +
                                 constraint_name(rule.kind) + "'");
        rs.rules.push_back(std::move(rule));

        t = lex.next();
        if (t.type == Token::semicolon) {
            t = lex.next();  // trailing semicolon is allowed
        } else if (t.type != Token::end) {
            throw ParseError(t.line, t.col, "expected \";\" or end of input, got '" +
                             t.text + "'");
        }
    }
    return rs;
}

RuleSet load_rules(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open rules file: " + path.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return parse_rules(ss.str());
}

std::string print_rules(const RuleSet& rules) {
    std::string out;
    for (const auto& r : rules.rules) {
        out += r.variable;
        out += ": ";
        out += constraint_name(r.kind);
        out += ";\n";
    }
    return out;
}

namespace {

bool eval_one(ConstraintKind kind, const Pattern& pattern, std::size_t v) {
    auto comp = [&](std::size_t s) { return pattern[s][v]; };
    std::size_t n = pattern.size();
    switch (kind) {
        case ConstraintKind::nonzero_all:
            for (std::size_t s = 0; s < n; ++s)
                if (comp(s) <= 0) return false;
            return true;
        case ConstraintKind::zero_all:
            for (std::size_t s = 0; s < n; ++s)
                if (comp(s) != 0) return false;
            return true;
        case ConstraintKind::monotone_nonincreasing:
            for (std::size_t s = 0; s + 1 < n; ++s)
                if (comp(s + 1) > comp(s)) return false;
            return true;
        case ConstraintKind::monotone_nondecreasing:
            for (std::size_t s = 0; s + 1 < n; ++s)
                if (comp(s + 1) < comp(s)) return false;
            return true;
        case ConstraintKind::strictly_decreasing:
            for (std::size_t s = 0; s + 1 < n; ++s)
                if (comp(s + 1) >= comp(s)) return false;
            return true;
        case ConstraintKind::strictly_increasing:
            for (std::size_t s = 0; s + 1 < n; ++s)
                if (comp(s + 1) <= comp(s)) return false;
            return true;
        case ConstraintKind::end_lt_start:
            return comp(n - 1) < comp(0);
        case ConstraintKind::end_gt_start:
            return comp(n - 1) > comp(0);
        case ConstraintKind::constant:
            for (std::size_t s = 1; s < n; ++s)
                if (comp(s) != comp(0)) return false;
            return true;
    }
    return false;
}

std::size_t bind_variable(const std::string& name, const std::vector<std::string>& schema) {
    auto it = std::find(schema.begin(), schema.end(), name);
    if (it == schema.end())
        throw ConfigError("rule references unknown variable '" + name + "'");
    return static_cast<std::size_t>(it - schema.begin());
}

}  // namespace

bool eval_rules(const Pattern& pattern, const RuleSet& rules,
                const std::vector<std::string>& schema) {
    if (pattern.empty()) throw ConfigError("eval_rules: empty pattern");
    for (const auto& sym : pattern)
        if (sym.size() != schema.size())
            throw ConfigError("eval_rules: pattern arity " + std::to_string(sym.size()) +
                              " does not match schema size " +
                              std::to_string(schema.size()));
    for (const auto& rule : rules.rules) {
        std::size_t v = bind_variable(rule.variable, schema);
        if (!eval_one(rule.kind, pattern, v)) return false;
    }
    return true;
}

PatternIndex filter_patterns(const PatternIndex& index, const RuleSet& rules,
                             const std::vector<std::string>& schema) {
    // bind even when the index is empty so bad rules fail loudly
    for (const auto& rule : rules.rules) bind_variable(rule.variable, schema);
    PatternIndex out;
    for (const auto& [pat, data] : index.patterns)
        if (eval_rules(pat, rules, schema)) out.patterns.emplace(pat, data);
    return out;
}

PrevalenceSeries prevalence(const PatternIndex& filtered, std::size_t nt,
                            std::size_t npart, std::uint8_t arm, std::uint16_t member) {
    PrevalenceSeries ps;
    ps.nt = nt;
    ps.npart = npart;
    ps.active.assign(nt * npart, 0);
    ps.instance_count.assign(nt, 0);
    ps.active_count.assign(nt, 0);
    for (const auto& [pat, data] : filtered.patterns) {
        for (const auto& occ : data.occurrences) {
            if (occ.arm != arm || occ.member != member) continue;
            for (std::uint32_t t = occ.t_start; t <= occ.t_end && t < nt; ++t) {
                ps.active[t * npart + occ.partition] = 1;
                ps.instance_count[t]++;
            }
        }
    }
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t p = 0; p < npart; ++p)
            if (ps.active[t * npart + p]) ps.active_count[t]++;
    return ps;
}

SignificanceSeries prevalence_significance(const std::vector<PrevalenceSeries>& forced,
                                           const std::vector<PrevalenceSeries>& baseline,
                                           double alpha) {
    if (forced.size() < 2 || baseline.size() != forced.size())
        throw ConfigError("prevalence_significance: need E >= 2 paired members per arm");
    std::size_t nt = forced[0].nt;
    SignificanceSeries out;
    out.alpha = alpha;
    out.t_stat.resize(nt);
    out.p_value.resize(nt);
    out.flag.resize(nt);
    std::vector<double> fa(forced.size()), ba(baseline.size());
    for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t e = 0; e < forced.size(); ++e) {
            fa[e] = static_cast<double>(forced[e].active_count[t]);
            ba[e] = static_cast<double>(baseline[e].active_count[t]);
        }
        WelchResult w = welch_t(fa, ba);
        out.t_stat[t] = w.t_stat;
        out.p_value[t] = w.p_value;
        if (w.p_value < alpha)
            out.flag[t] = w.t_stat > 0 ? SigFlag::increase : SigFlag::decrease;
        else
            out.flag[t] = SigFlag::none;
    }
    return out;
}

}  // namespace pathway
