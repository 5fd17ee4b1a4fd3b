#include "conceptguard/rules.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace conceptguard {

FormulaPtr make_leaf(VarRef v) {
    return std::make_shared<Formula>(Formula{Formula::Leaf{v}});
}

FormulaPtr make_not(FormulaPtr arg) {
    return std::make_shared<Formula>(Formula{Formula::Not{std::move(arg)}});
}

FormulaPtr make_binary(Connective op, FormulaPtr lhs, FormulaPtr rhs) {
    return std::make_shared<Formula>(Formula{Formula::Binary{op, std::move(lhs), std::move(rhs)}});
}

namespace {

struct Token {
    enum class Kind { Var, Not, And, Or, Xor, Iff, LParen, RParen, Conf, End };
    Kind kind = Kind::End;
    VarRef var{VarKind::Concept, 0};
    double conf = 0.0;
    int column = 0; // 1-based
};

// Lexes a single rule line (comments already stripped).
struct LineLexer {
    const std::string& text;
    int line;
    size_t pos = 0;

    LineLexer(const std::string& t, int ln) : text(t), line(ln) {}

    [[noreturn]] void fail(const std::string& msg, size_t at) const {
        throw ParseError(msg, line, static_cast<int>(at) + 1);
    }

    Token next() {
        while (pos < text.size() && (text[pos] == ' ' || text[pos] == '\t' || text[pos] == '\r'))
            ++pos;
        Token tok;
        tok.column = static_cast<int>(pos) + 1;
        if (pos >= text.size()) {
            tok.kind = Token::Kind::End;
            return tok;
        }
        char ch = text[pos];
        if (ch == '(') {
            ++pos;
            tok.kind = Token::Kind::LParen;
            return tok;
        }
        if (ch == ')') {
            ++pos;
            tok.kind = Token::Kind::RParen;
            return tok;
        }
        if (ch == '<') {
            if (text.compare(pos, 3, "<->") == 0) {
                pos += 3;
                tok.kind = Token::Kind::Iff;
                return tok;
            }
            fail("expected '<->'", pos);
        }
        if (std::isalpha(static_cast<unsigned char>(ch))) {
            size_t start = pos;
            while (pos < text.size() &&
                   (std::isalnum(static_cast<unsigned char>(text[pos])) || text[pos] == '_'))
                ++pos;
            std::string word = text.substr(start, pos - start);
            if (word == "NOT") {
                tok.kind = Token::Kind::Not;
                return tok;
            }
            if (word == "AND") {
                tok.kind = Token::Kind::And;
                return tok;
            }
            if (word == "OR") {
                tok.kind = Token::Kind::Or;
                return tok;
            }
            if (word == "XOR") {
                tok.kind = Token::Kind::Xor;
                return tok;
            }
            if (word == "conf") {
                if (pos >= text.size() || text[pos] != '=')
                    fail("expected '=' after 'conf'", pos);
                ++pos;
                size_t numStart = pos;
                while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])))
                    ++pos;
                double value = 0.0;
                auto res = std::from_chars(text.data() + numStart, text.data() + pos, value);
                if (res.ec != std::errc() || res.ptr != text.data() + pos || !std::isfinite(value))
                    fail("bad confidence value", numStart);
                tok.kind = Token::Kind::Conf;
                tok.conf = value;
                return tok;
            }
            if ((word[0] == 'c' || word[0] == 'y') && word.size() > 1 &&
                std::all_of(word.begin() + 1, word.end(),
                            [](char d) { return std::isdigit(static_cast<unsigned char>(d)); })) {
                int idx = 0;
                auto res = std::from_chars(word.data() + 1, word.data() + word.size(), idx);
                if (res.ec != std::errc())
                    fail("variable index out of range", start);
                tok.kind = Token::Kind::Var;
                tok.var = {word[0] == 'c' ? VarKind::Concept : VarKind::Category, idx};
                return tok;
            }
            fail("unknown token '" + word + "'", start);
        }
        fail(std::string("unexpected character '") + ch + "'", pos);
    }
};

// Recursive descent over one line. Precedence, tightest first:
// NOT, AND, XOR, OR, <->. Binary connectives associate to the left.
struct LineParser {
    LineLexer lexer;
    Token cur;

    LineParser(const std::string& text, int line) : lexer(text, line) { cur = lexer.next(); }

    void advance() { cur = lexer.next(); }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ParseError(msg, lexer.line, cur.column);
    }

    FormulaPtr parseAtom() {
        if (cur.kind == Token::Kind::Var) {
            VarRef v = cur.var;
            advance();
            return make_leaf(v);
        }
        if (cur.kind == Token::Kind::LParen) {
            advance();
            FormulaPtr inner = parseIff();
            if (cur.kind != Token::Kind::RParen)
                fail("expected ')'");
            advance();
            return inner;
        }
        fail("expected variable, NOT or '('");
    }

    FormulaPtr parseUnary() {
        if (cur.kind == Token::Kind::Not) {
            advance();
            return make_not(parseUnary());
        }
        return parseAtom();
    }

    FormulaPtr parseAnd() {
        FormulaPtr lhs = parseUnary();
        while (cur.kind == Token::Kind::And) {
            advance();
            lhs = make_binary(Connective::And, lhs, parseUnary());
        }
        return lhs;
    }

    FormulaPtr parseXor() {
        FormulaPtr lhs = parseAnd();
        while (cur.kind == Token::Kind::Xor) {
            advance();
            lhs = make_binary(Connective::Xor, lhs, parseAnd());
        }
        return lhs;
    }

    FormulaPtr parseOr() {
        FormulaPtr lhs = parseXor();
        while (cur.kind == Token::Kind::Or) {
            advance();
            lhs = make_binary(Connective::Or, lhs, parseXor());
        }
        return lhs;
    }

    FormulaPtr parseIff() {
        FormulaPtr lhs = parseOr();
        while (cur.kind == Token::Kind::Iff) {
            advance();
            lhs = make_binary(Connective::Iff, lhs, parseOr());
        }
        return lhs;
    }

    Rule parseRule(int line) {
        Rule rule;
        rule.source_line = line;
        if (cur.kind == Token::Kind::Conf) {
            rule.confidence = cur.conf;
            advance();
        }
        rule.formula = parseIff();
        if (cur.kind != Token::Kind::End)
            fail("trailing input after rule");
        rule.family = infer_family(*rule.formula);
        return rule;
    }
};

void collect_vars(const Formula& f, std::vector<VarRef>& out) {
    if (const auto* leaf = std::get_if<Formula::Leaf>(&f.node)) {
        out.push_back(leaf->var);
    } else if (const auto* neg = std::get_if<Formula::Not>(&f.node)) {
        collect_vars(*neg->arg, out);
    } else {
        const auto& bin = std::get<Formula::Binary>(f.node);
        collect_vars(*bin.lhs, out);
        collect_vars(*bin.rhs, out);
    }
}

int precedence(Connective op) {
    switch (op) {
    case Connective::And: return 4;
    case Connective::Xor: return 3;
    case Connective::Or: return 2;
    case Connective::Iff: return 1;
    }
    return 0;
}

const char* op_text(Connective op) {
    switch (op) {
    case Connective::And: return "AND";
    case Connective::Xor: return "XOR";
    case Connective::Or: return "OR";
    case Connective::Iff: return "<->";
    }
    return "?";
}

std::string var_text(VarRef v) {
    return (v.kind == VarKind::Concept ? "c" : "y") + std::to_string(v.index);
}

// prec: precedence of the enclosing operator, rightSide: whether this node is
// a right operand (the parser builds left-leaning chains, so right-nested
// same-precedence subtrees must keep their parentheses to round-trip).
void format_node(const Formula& f, int prec, bool rightSide, std::string& out) {
    if (const auto* leaf = std::get_if<Formula::Leaf>(&f.node)) {
        out += var_text(leaf->var);
        return;
    }
    if (const auto* neg = std::get_if<Formula::Not>(&f.node)) {
        out += "NOT ";
        format_node(*neg->arg, 5, false, out);
        return;
    }
    const auto& bin = std::get<Formula::Binary>(f.node);
    int p = precedence(bin.op);
    bool parens = p < prec || (p == prec && rightSide);
    if (parens)
        out += '(';
    format_node(*bin.lhs, p, false, out);
    out += ' ';
    out += op_text(bin.op);
    out += ' ';
    format_node(*bin.rhs, p, true, out);
    if (parens)
        out += ')';
}

std::string format_double(double v) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

} // namespace

RuleSet parse_rules(const std::string& text) {
    RuleSet out;
    int line = 0;
    size_t start = 0;
    while (start <= text.size()) {
        size_t end = text.find('\n', start);
        if (end == std::string::npos)
            end = text.size();
        ++line;
        std::string raw = text.substr(start, end - start);
        start = end + 1;
        if (size_t hash = raw.find('#'); hash != std::string::npos)
            raw.resize(hash);
        bool blank = std::all_of(raw.begin(), raw.end(), [](char ch) {
            return std::isspace(static_cast<unsigned char>(ch));
        });
        if (blank)
            continue;
        LineParser parser(raw, line);
        Rule rule = parser.parseRule(line);
        rule.id = static_cast<int>(out.rules.size());
        out.rules.push_back(std::move(rule));
        if (end == text.size())
            break;
    }
    return out;
}

std::string format_formula(const Formula& f) {
    std::string out;
    format_node(f, 0, false, out);
    return out;
}

std::string format_rules(const RuleSet& rules) {
    std::string out;
    for (const Rule& rule : rules.rules) {
        if (rule.confidence) {
            out += "conf=";
            out += format_double(*rule.confidence);
            out += ' ';
        }
        out += format_formula(*rule.formula);
        out += '\n';
    }
    return out;
}

std::vector<VarRef> formula_vars(const Formula& f) {
    std::vector<VarRef> vars;
    collect_vars(f, vars);
    std::sort(vars.begin(), vars.end());
    vars.erase(std::unique(vars.begin(), vars.end()), vars.end());
    return vars;
}

RuleFamily infer_family(const Formula& f) {
    for (VarRef v : formula_vars(f)) {
        if (v.kind == VarKind::Category)
            return RuleFamily::CategoryConcept;
    }
    return RuleFamily::ConceptConcept;
}

std::string canonical_key(const Formula& f) {
    if (const auto* leaf = std::get_if<Formula::Leaf>(&f.node))
        return var_text(leaf->var);
    if (const auto* neg = std::get_if<Formula::Not>(&f.node))
        return "!(" + canonical_key(*neg->arg) + ")";
    const auto& bin = std::get<Formula::Binary>(f.node);
    std::string a = canonical_key(*bin.lhs);
    std::string b = canonical_key(*bin.rhs);
    if (b < a)
        std::swap(a, b); // all four connectives are commutative
    return std::string(op_text(bin.op)) + "(" + a + "," + b + ")";
}

RuleSet validate_rules(const RuleSet& rules, const RuleSchema& schema,
                       const ValidateOptions& opts) {
    RuleSet out;
    std::map<std::string, int> seen; // canonical key -> source line
    for (const Rule& rule : rules.rules) {
        int line = rule.source_line;
        if (!rule.formula)
            throw ValidationError("rule has no formula", line, 1);
        std::vector<VarRef> vars = formula_vars(*rule.formula);
        for (VarRef v : vars) {
            int limit = v.kind == VarKind::Concept ? schema.num_concepts : schema.num_categories;
            if (v.index < 0 || v.index >= limit)
                throw ValidationError("variable " + var_text(v) + " outside schema (" +
                                          std::to_string(limit) + " slots)",
                                      line, 1);
        }
        if (vars.empty())
            throw ValidationError("rule references no variables", line, 1);
        if (static_cast<int>(vars.size()) > opts.max_arity)
            throw ValidationError("rule arity " + std::to_string(vars.size()) +
                                      " exceeds limit " + std::to_string(opts.max_arity),
                                  line, 1);
        if (rule.confidence && (!(*rule.confidence >= 0.0) || !(*rule.confidence <= 1.0)))
            throw ValidationError("confidence outside [0,1]", line, 1);

        // degeneracy check over the rule's own variables (at most 2^max_arity rows)
        bool anyTrue = false;
        bool anyFalse = false;
        for (uint32_t mask = 0; mask < (1u << vars.size()); ++mask) {
            bool val = eval_formula(*rule.formula, [&](VarRef v) {
                size_t at = std::lower_bound(vars.begin(), vars.end(), v) - vars.begin();
                return (mask >> at) & 1u;
            });
            (val ? anyTrue : anyFalse) = true;
            if (anyTrue && anyFalse)
                break;
        }
        if (!anyFalse)
            throw ValidationError("rule is a tautology", line, 1);
        if (!anyTrue)
            throw ValidationError("rule is a contradiction", line, 1);

        std::string key = canonical_key(*rule.formula);
        auto [it, inserted] = seen.emplace(key, line);
        if (!inserted) {
            if (opts.dedup)
                continue;
            throw ValidationError("duplicate of rule at line " + std::to_string(it->second),
                                  line, 1);
        }
        Rule kept = rule;
        kept.id = static_cast<int>(out.rules.size());
        out.rules.push_back(std::move(kept));
    }
    return out;
}

} // namespace conceptguard
