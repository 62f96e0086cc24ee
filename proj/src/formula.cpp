#include "mixedrank/formula.hpp"

#include <algorithm>
#include <cctype>
#include <optional>
#include <sstream>

namespace mixedrank {

namespace {

std::vector<std::string> sorted_copy(std::vector<std::string> v) {
    std::sort(v.begin(), v.end());
    return v;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) out += sep;
        out += parts[i];
    }
    return out;
}

enum class Tok { ident, number, tilde, plus, colon, lparen, rparen, bar, dbar, end };

struct Token {
    Tok kind;
    std::string text;
    std::size_t offset;
};

std::string describe(const Token& t) {
    switch (t.kind) {
        case Tok::end: return "end of input";
        case Tok::ident: return "identifier '" + t.text + "'";
        case Tok::number: return "number '" + t.text + "'";
        default: return "'" + t.text + "'";
    }
}

bool ident_start(char c) {
    return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool ident_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

std::vector<Token> tokenize(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (ident_start(c)) {
            while (i < s.size() && ident_char(s[i])) ++i;
            out.push_back({Tok::ident, std::string(s.substr(start, i - start)), start});
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
            out.push_back({Tok::number, std::string(s.substr(start, i - start)), start});
            continue;
        }
        switch (c) {
            case '~': out.push_back({Tok::tilde, "~", start}); ++i; continue;
            case '+': out.push_back({Tok::plus, "+", start}); ++i; continue;
            case ':': out.push_back({Tok::colon, ":", start}); ++i; continue;
            case '(': out.push_back({Tok::lparen, "(", start}); ++i; continue;
            case ')': out.push_back({Tok::rparen, ")", start}); ++i; continue;
            case '|':
                if (i + 1 < s.size() && s[i + 1] == '|') {
                    out.push_back({Tok::dbar, "||", start});
                    i += 2;
                } else {
                    out.push_back({Tok::bar, "|", start});
                    ++i;
                }
                continue;
            case '*':
                throw FormulaError("'*' expansion is not supported; write 'a + b + a:b' explicitly",
                                   start);
            case '/':
                throw FormulaError("nesting with '/' is not supported; write the random terms explicitly",
                                   start);
            default:
                throw FormulaError(std::string("unexpected character '") + c + "'", start);
        }
    }
    out.push_back({Tok::end, "", s.size()});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    FormulaAst parse() {
        FormulaAst ast;
        ast.response = expect(Tok::ident, "response identifier").text;
        expect(Tok::tilde, "'~'");
        std::optional<bool> explicit_intercept;
        std::size_t intercept_offset = 0;
        parse_term(ast, explicit_intercept, intercept_offset);
        while (peek().kind == Tok::plus) {
            next();
            parse_term(ast, explicit_intercept, intercept_offset);
        }
        if (peek().kind != Tok::end) {
            fail({"'+'", "end of input"});
        }
        if (explicit_intercept) ast.has_intercept = *explicit_intercept;
        return ast;
    }

private:
    const Token& peek() const { return toks_[pos_]; }
    const Token& next() { return toks_[pos_++]; }

    [[noreturn]] void fail(std::vector<std::string> expected) const {
        const Token& t = peek();
        std::ostringstream msg;
        msg << "formula syntax error at byte " << t.offset << ": expected "
            << (expected.size() == 1 ? expected.front() : "one of [" + join(expected, ", ") + "]")
            << ", found " << describe(t);
        throw FormulaError(msg.str(), t.offset, std::move(expected));
    }

    const Token& expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) fail({what});
        return next();
    }

    bool read_intercept_literal(bool& value) {
        const Token& t = peek();
        if (t.kind != Tok::number) return false;
        if (t.text != "0" && t.text != "1") {
            throw FormulaError("only the literals 0 and 1 are allowed, found '" + t.text + "'",
                               t.offset, {"0", "1"});
        }
        value = t.text == "1";
        next();
        return true;
    }

    void parse_term(FormulaAst& ast, std::optional<bool>& intercept, std::size_t& intercept_offset) {
        const Token& t = peek();
        if (t.kind == Tok::number) {
            const std::size_t off = t.offset;
            bool value = true;
            read_intercept_literal(value);
            if (intercept && *intercept != value) {
                throw FormulaError("conflicting intercept literals '0' and '1' (first at byte " +
                                       std::to_string(intercept_offset) + ")",
                                   off);
            }
            intercept = value;
            intercept_offset = off;
            return;
        }
        if (t.kind == Tok::ident) {
            const std::size_t off = t.offset;
            FixedTerm term;
            term.variables.push_back(next().text);
            while (peek().kind == Tok::colon) {
                next();
                const Token& v = expect(Tok::ident, "identifier");
                if (std::find(term.variables.begin(), term.variables.end(), v.text) !=
                    term.variables.end()) {
                    throw FormulaError("variable '" + v.text + "' repeated inside an interaction",
                                       v.offset);
                }
                term.variables.push_back(v.text);
            }
            for (const auto& existing : ast.fixed_terms) {
                if (existing.same_term(term)) {
                    throw FormulaError("duplicate term '" + term.label() + "'", off);
                }
            }
            ast.fixed_terms.push_back(std::move(term));
            return;
        }
        if (t.kind == Tok::lparen) {
            const std::size_t off = t.offset;
            next();
            RandomTerm rt = parse_random_inner();
            for (const auto& existing : ast.random_terms) {
                if (existing == rt) {
                    throw FormulaError("duplicate random term '" + rt.label() + "'", off);
                }
            }
            ast.random_terms.push_back(std::move(rt));
            return;
        }
        fail({"'0'", "'1'", "identifier", "'('"});
    }

    RandomTerm parse_random_inner() {
        RandomTerm rt;
        const std::size_t inner_offset = peek().offset;
        bool value = true;
        bool saw_literal = false;
        if (peek().kind == Tok::number) {
            read_intercept_literal(value);
            saw_literal = true;
            rt.inner_intercept = value;
        } else if (peek().kind == Tok::ident) {
            rt.inner_intercept = true;
            rt.inner_variables.push_back(next().text);
        } else {
            fail({"'0'", "'1'", "identifier"});
        }
        while (peek().kind == Tok::plus) {
            next();
            const Token& v = expect(Tok::ident, "identifier");
            if (std::find(rt.inner_variables.begin(), rt.inner_variables.end(), v.text) !=
                rt.inner_variables.end()) {
                throw FormulaError("variable '" + v.text + "' repeated inside a random term",
                                   v.offset);
            }
            rt.inner_variables.push_back(v.text);
        }
        if (peek().kind == Tok::bar) {
            rt.covariance = CovarianceStructure::unstructured;
        } else if (peek().kind == Tok::dbar) {
            rt.covariance = CovarianceStructure::diagonal;
        } else {
            fail({"'+'", "'|'", "'||'"});
        }
        next();
        const Token& g = expect(Tok::ident, "grouping identifier");
        rt.group = g.text;
        if (std::find(rt.inner_variables.begin(), rt.inner_variables.end(), rt.group) !=
            rt.inner_variables.end()) {
            throw FormulaError("grouping factor '" + rt.group + "' also appears inside the random term",
                               g.offset);
        }
        expect(Tok::rparen, "')'");
        if (saw_literal && !rt.inner_intercept && rt.inner_variables.empty()) {
            throw FormulaError("random term has an empty inner part", inner_offset);
        }
        return rt;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

FormulaError::FormulaError(const std::string& message, std::size_t offset,
                           std::vector<std::string> expected)
    : std::runtime_error(message.rfind("formula", 0) == 0
                             ? message
                             : "formula error at byte " + std::to_string(offset) + ": " + message),
      offset_(offset),
      expected_(std::move(expected)) {}

bool FixedTerm::same_term(const FixedTerm& other) const {
    return sorted_copy(variables) == sorted_copy(other.variables);
}

bool FixedTerm::contained_in(const FixedTerm& other) const {
    return std::all_of(variables.begin(), variables.end(), [&](const std::string& v) {
        return std::find(other.variables.begin(), other.variables.end(), v) != other.variables.end();
    });
}

std::string FixedTerm::label() const { return join(variables, ":"); }

std::string RandomTerm::label() const {
    std::vector<std::string> inner;
    inner.push_back(inner_intercept ? "1" : "0");
    inner.insert(inner.end(), inner_variables.begin(), inner_variables.end());
    const char* bar = covariance == CovarianceStructure::diagonal ? "||" : "|";
    return "(" + join(inner, " + ") + bar + group + ")";
}

std::vector<std::string> FormulaAst::variables() const {
    std::vector<std::string> out;
    auto add = [&](const std::string& v) {
        if (std::find(out.begin(), out.end(), v) == out.end()) out.push_back(v);
    };
    for (const auto& t : fixed_terms)
        for (const auto& v : t.variables) add(v);
    for (const auto& r : random_terms) {
        for (const auto& v : r.inner_variables) add(v);
        add(r.group);
    }
    return out;
}

FormulaAst parse_formula(std::string_view text) {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) {
        throw FormulaError("empty formula", 0, {"response identifier"});
    }
    Parser p(tokenize(text));
    return p.parse();
}

std::string format_formula(const FormulaAst& ast) {
    std::vector<std::string> parts;
    if (!ast.has_intercept) parts.emplace_back("0");
    for (const auto& t : ast.fixed_terms) parts.push_back(t.label());
    for (const auto& r : ast.random_terms) parts.push_back(r.label());
    if (parts.empty()) parts.emplace_back("1");
    return ast.response + " ~ " + join(parts, " + ");
}

}  // namespace mixedrank
