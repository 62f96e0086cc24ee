#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mixedrank {

/// A fixed-effect term. One variable is a main effect, two or more an
/// interaction written "a:b".
struct FixedTerm {
    std::vector<std::string> variables;

    /// Term identity ignores variable order: "a:b" and "b:a" are the same term.
    bool same_term(const FixedTerm& other) const;
    /// True when every variable of this term also appears in `other`.
    bool contained_in(const FixedTerm& other) const;
    std::string label() const;

    friend bool operator==(const FixedTerm&, const FixedTerm&) = default;
};

enum class CovarianceStructure { unstructured, diagonal };

/// A random-effect term "(inner | group)" or "(inner || group)".
struct RandomTerm {
    bool inner_intercept = true;
    std::vector<std::string> inner_variables;
    std::string group;
    CovarianceStructure covariance = CovarianceStructure::unstructured;

    std::string label() const;

    friend bool operator==(const RandomTerm&, const RandomTerm&) = default;
};

struct FormulaAst {
    std::string response;
    std::vector<FixedTerm> fixed_terms;
    std::vector<RandomTerm> random_terms;
    bool has_intercept = true;

    /// Every variable referenced anywhere on the right-hand side, first-use order.
    std::vector<std::string> variables() const;

    friend bool operator==(const FormulaAst&, const FormulaAst&) = default;
};

/// Raised for malformed formulas. `offset()` is the 0-based byte offset of the
/// offending token; `expected()` lists what the parser would have accepted.
class FormulaError : public std::runtime_error {
public:
    FormulaError(const std::string& message, std::size_t offset,
                 std::vector<std::string> expected = {});

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

/// Grammar:
///   formula := ident "~" rhs
///   rhs     := term ("+" term)*
///   term    := "1" | "0" | ident (":" ident)* | "(" inner ("|" | "||") ident ")"
///   inner   := ("1" | "0") ("+" ident)* | ident ("+" ident)*
/// "||" selects a diagonal covariance for the random term. "*" and "/" are
/// rejected.
FormulaAst parse_formula(std::string_view text);

/// Canonical text, e.g. "loss ~ algorithm + (1|benchmark)".
std::string format_formula(const FormulaAst& ast);

}  // namespace mixedrank
