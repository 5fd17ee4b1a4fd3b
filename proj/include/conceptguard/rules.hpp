#pragma once

#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace conceptguard {

// Variables a rule may mention: concept slots c<j> and category slots y<j>.
enum class VarKind { Concept, Category };

struct VarRef {
    VarKind kind;
    int index;

    friend bool operator==(const VarRef&, const VarRef&) = default;
    friend auto operator<=>(const VarRef&, const VarRef&) = default;
};

enum class Connective { And, Or, Xor, Iff };

struct Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

// Immutable propositional formula. Binary nodes only; chained infix input
// associates to the left.
struct Formula {
    struct Leaf {
        VarRef var;
    };
    struct Not {
        FormulaPtr arg;
    };
    struct Binary {
        Connective op;
        FormulaPtr lhs;
        FormulaPtr rhs;
    };

    std::variant<Leaf, Not, Binary> node;
};

FormulaPtr make_leaf(VarRef v);
FormulaPtr make_not(FormulaPtr arg);
FormulaPtr make_binary(Connective op, FormulaPtr lhs, FormulaPtr rhs);

// CategoryConcept iff the formula mentions at least one category variable.
enum class RuleFamily { ConceptConcept, CategoryConcept };

struct Rule {
    int id = 0;
    FormulaPtr formula;
    RuleFamily family = RuleFamily::ConceptConcept;
    std::optional<double> confidence;
    int source_line = 0; // 1-based line in the parsed text, 0 if synthesized
};

struct RuleSet {
    std::vector<Rule> rules;
};

// Slot counts rules are validated against. Names are optional report labels.
struct RuleSchema {
    int num_concepts = 0;
    int num_categories = 0;
    std::vector<std::string> concept_names;
    std::vector<std::string> category_names;
};

// Parse and validation failures carry the 1-based source position.
class RuleError : public std::runtime_error {
public:
    RuleError(const std::string& msg, int line, int column)
        : std::runtime_error(msg), line_(line), column_(column) {}

    int line() const { return line_; }
    int column() const { return column_; }

private:
    int line_;
    int column_;
};

class ParseError : public RuleError {
    using RuleError::RuleError;
};

class ValidationError : public RuleError {
    using RuleError::RuleError;
};

// Text form, one rule per line: [conf=<float>] <expr>, '#' starts a comment.
// Connective precedence, tightest first: NOT, AND, XOR, OR, <->.
RuleSet parse_rules(const std::string& text);

// Canonical text that parses back to a structurally identical rule set.
std::string format_rules(const RuleSet& rules);
std::string format_formula(const Formula& f);

struct ValidateOptions {
    bool dedup = false;  // drop later duplicates instead of rejecting
    int max_arity = 4;   // distinct variables per rule
};

// Checks index ranges, arity, confidence range, degeneracy (tautology or
// contradiction) and duplicates modulo commutativity. Returns the surviving
// rules with ids resequenced in input order.
RuleSet validate_rules(const RuleSet& rules, const RuleSchema& schema,
                       const ValidateOptions& opts = {});

// Distinct variables, sorted (concepts before categories, then by index).
std::vector<VarRef> formula_vars(const Formula& f);

RuleFamily infer_family(const Formula& f);

// Structural key that identifies formulas up to commutativity of the binary
// connectives. Used for duplicate detection.
std::string canonical_key(const Formula& f);

template <class Lookup>
bool eval_formula(const Formula& f, Lookup&& value) {
    if (const auto* leaf = std::get_if<Formula::Leaf>(&f.node)) {
        return value(leaf->var);
    }
    if (const auto* neg = std::get_if<Formula::Not>(&f.node)) {
        return !eval_formula(*neg->arg, value);
    }
    const auto& bin = std::get<Formula::Binary>(f.node);
    bool a = eval_formula(*bin.lhs, value);
    bool b = eval_formula(*bin.rhs, value);
    switch (bin.op) {
    case Connective::And: return a && b;
    case Connective::Or: return a || b;
    case Connective::Xor: return a != b;
    case Connective::Iff: return a == b;
    }
    return false; // unreachable
}

} // namespace conceptguard
