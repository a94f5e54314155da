#include "firmgraph/logic/parser.hpp"

#include <cctype>
#include <optional>

#include <fmt/format.h>

#include "firmgraph/error.hpp"

namespace firmgraph::logic {

namespace {

enum class Tok { ident, integer, quoted, lparen, rparen, comma, neck, period, end };

struct Token {
    Tok kind = Tok::end;
    std::string text;
    std::size_t line = 1;
    std::size_t column = 1;
};

const char* describe(Tok kind) {
    switch (kind) {
        case Tok::ident: return "identifier";
        case Tok::integer: return "integer";
        case Tok::quoted: return "quoted constant";
        case Tok::lparen: return "'('";
        case Tok::rparen: return "')'";
        case Tok::comma: return "','";
        case Tok::neck: return "':-'";
        case Tok::period: return "'.'";
        case Tok::end: return "end of input";
    }
    return "token";
}

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_space_and_comments();
        Token tok;
        tok.line = line_;
        tok.column = column_;
        if (pos_ >= src_.size()) return tok;

        const char c = src_[pos_];
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            tok.kind = Tok::ident;
            while (pos_ < src_.size() &&
                   (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
                tok.text.push_back(advance());
            return tok;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            tok.kind = Tok::integer;
            while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
                tok.text.push_back(advance());
            return tok;
        }
        if (c == '\'' || c == '"') {
            tok.kind = Tok::quoted;
            tok.text = read_quoted(tok);
            return tok;
        }
        advance();
        switch (c) {
            case '(': tok.kind = Tok::lparen; return tok;
            case ')': tok.kind = Tok::rparen; return tok;
            case ',': tok.kind = Tok::comma; return tok;
            case '.': tok.kind = Tok::period; return tok;
            case ':':
                if (pos_ < src_.size() && src_[pos_] == '-') {
                    advance();
                    tok.kind = Tok::neck;
                    return tok;
                }
                break;
            default: break;
        }
        throw ParseError(tok.line, tok.column, fmt::format("unexpected character '{}'", c));
    }

    // Label from the most recent `%!` comment, consumed by the next clause.
    std::optional<std::string> take_label() { return std::exchange(label_, std::nullopt); }

private:
    char advance() {
        const char c = src_[pos_++];
        if (c == '\n') {
            ++line_;
            column_ = 1;
        } else {
            ++column_;
        }
        return c;
    }

    void skip_space_and_comments() {
        while (pos_ < src_.size()) {
            const char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == '%') {
                std::string comment;
                while (pos_ < src_.size() && src_[pos_] != '\n') comment.push_back(advance());
                if (comment.size() >= 2 && comment[1] == '!') {
                    auto text = comment.substr(2);
                    const auto b = text.find_first_not_of(" \t\r");
                    const auto e = text.find_last_not_of(" \t\r");
                    if (b != std::string::npos) label_ = text.substr(b, e - b + 1);
                }
            } else {
                break;
            }
        }
    }

    std::string read_quoted(const Token& start) {
        const char quote = advance();
        std::string out;
        while (true) {
            if (pos_ >= src_.size())
                throw ParseError(start.line, start.column, "unterminated quoted constant");
            const char c = advance();
            if (c == quote) break;
            if (c == '\\') {
                if (pos_ >= src_.size())
                    throw ParseError(start.line, start.column, "unterminated quoted constant");
                const char e = advance();
                if (e != '\\' && e != '\'' && e != '"')
                    throw ParseError(line_, column_ - 1, fmt::format("unknown escape '\\{}'", e));
                out.push_back(e);
                continue;
            }
            if (static_cast<unsigned char>(c) < 0x20 || c == 0x7f)
                throw ParseError(line_, column_ - 1, "control character in quoted constant");
            out.push_back(c);
        }
        if (out.empty()) throw ParseError(start.line, start.column, "empty quoted constant");
        return out;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::size_t column_ = 1;
    std::optional<std::string> label_;
};

class Parser {
public:
    explicit Parser(std::string_view src) : lex_(src) { bump(); }

    bool at_end() const { return cur_.kind == Tok::end; }

    std::pair<Clause, std::size_t> clause() {
        Clause out;
        out.label = lex_.take_label();
        const std::size_t line = cur_.line;
        out.head = literal();
        if (cur_.kind == Tok::neck) {
            bump();
            out.body.push_back(literal());
            while (cur_.kind == Tok::comma) {
                bump();
                out.body.push_back(literal());
            }
        }
        if (cur_.kind == Tok::period) {
            bump();
            return {std::move(out), line};
        }
        if (cur_.kind == Tok::rparen) fail("unbalanced parentheses: unexpected ')'");
        fail(fmt::format("missing period at end of clause (found {})", describe(cur_.kind)));
    }

    Literal literal() {
        if (cur_.kind != Tok::ident) {
            if (cur_.kind == Tok::lparen || cur_.kind == Tok::neck || cur_.kind == Tok::comma ||
                cur_.kind == Tok::period)
                fail("empty predicate name");
            fail(fmt::format("expected predicate name, found {}", describe(cur_.kind)));
        }
        if (!std::islower(static_cast<unsigned char>(cur_.text.front())))
            fail(fmt::format("predicate name '{}' must start with a lowercase letter", cur_.text));
        Literal lit;
        lit.predicate = cur_.text;
        bump();
        if (cur_.kind != Tok::lparen) return lit;

        const Token open = cur_;
        bump();
        while (true) {
            lit.args.push_back(term());
            if (cur_.kind == Tok::comma) {
                bump();
                continue;
            }
            if (cur_.kind == Tok::rparen) {
                bump();
                break;
            }
            if (cur_.kind == Tok::lparen) fail("compound terms are not supported");
            throw ParseError(open.line, open.column,
                             fmt::format("unbalanced parentheses: '(' is not closed (found {} at {}:{})",
                                         describe(cur_.kind), cur_.line, cur_.column));
        }
        return lit;
    }

    Term term() {
        Term t;
        switch (cur_.kind) {
            case Tok::ident: {
                const char c = cur_.text.front();
                if (c == '_')
                    t = Term::wildcard(cur_.text);
                else if (std::isupper(static_cast<unsigned char>(c)))
                    t = Term::variable(cur_.text);
                else
                    t = Term::constant(cur_.text);
                break;
            }
            case Tok::integer: t = Term::constant(cur_.text); break;
            case Tok::quoted: t = Term::constant(cur_.text, true); break;
            case Tok::rparen: fail("empty argument");
            default: fail(fmt::format("expected a term, found {}", describe(cur_.kind)));
        }
        bump();
        return t;
    }

private:
    void bump() { cur_ = lex_.next(); }

    [[noreturn]] void fail(const std::string& what) const { throw ParseError(cur_.line, cur_.column, what); }

    Lexer lex_;
    Token cur_;
};

std::string quote(std::string_view text) {
    std::string out = "'";
    for (char c : text) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        out.push_back(c);
    }
    out.push_back('\'');
    return out;
}

}  // namespace

Program parse_program(std::string_view source) {
    Parser parser(source);
    Program program;
    while (!parser.at_end()) {
        auto [clause, line] = parser.clause();
        try {
            program.add(std::move(clause));
        } catch (const ArityError&) {
            throw;
        } catch (const ProgramError& e) {
            throw ProgramError(fmt::format("line {}: {}", line, e.what()));
        }
    }
    return program;
}

Literal parse_literal(std::string_view source) {
    Parser parser(source);
    auto lit = parser.literal();
    if (!parser.at_end()) throw ParseError(1, source.size(), "trailing text after literal");
    return lit;
}

std::string canonical_constant(std::string_view text) {
    return is_bare_constant(text) ? std::string(text) : quote(text);
}

std::string format_term(const Term& term) {
    if (!term.is_constant()) return term.text;
    if (term.quoted || !is_bare_constant(term.text)) return quote(term.text);
    return term.text;
}

std::string format_literal(const Literal& literal) {
    std::string out = literal.predicate;
    if (literal.args.empty()) return out;
    out.push_back('(');
    for (std::size_t i = 0; i < literal.args.size(); ++i) {
        if (i) out += ", ";
        out += format_term(literal.args[i]);
    }
    out.push_back(')');
    return out;
}

std::string format_clause(const Clause& clause) {
    std::string out;
    if (clause.label) out += "%! " + *clause.label + "\n";
    out += format_literal(clause.head);
    if (!clause.body.empty()) {
        out += " :- ";
        for (std::size_t i = 0; i < clause.body.size(); ++i) {
            if (i) out += ", ";
            out += format_literal(clause.body[i]);
        }
    }
    out.push_back('.');
    return out;
}

std::string format_program(const Program& program) {
    std::string out;
    for (const auto& c : program.clauses()) {
        out += format_clause(c);
        out.push_back('\n');
    }
    return out;
}

}  // namespace firmgraph::logic
