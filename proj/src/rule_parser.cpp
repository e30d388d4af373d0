#include "structsel/rule_parser.hpp"

#include <cctype>
#include <unordered_set>

namespace structsel {

namespace {

bool is_name_char(char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == ':' || c == '-';
}

enum class Tok { LParen, RParen, LBrace, RBrace, Comma, Bang, Amp, Pipe, Arrow, Ident, End };

struct Token {
    Tok kind;
    std::string text;
    int line, col;
};

class Lexer {
public:
    Lexer(std::string_view src, int line, int col) : src_(src), line_(line), col_(col) { advance(); }

    const Token& peek() const { return tok_; }
    Token take() {
        Token t = tok_;
        advance();
        return t;
    }

private:
    void advance() {
        while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\r' ||
                                      src_[pos_] == '\n')) {
            bump();
        }
        tok_.line = line_;
        tok_.col = col_;
        tok_.text.clear();
        if (pos_ >= src_.size()) {
            tok_.kind = Tok::End;
            return;
        }
        const char c = src_[pos_];
        switch (c) {
            case '(': tok_.kind = Tok::LParen; bump(); return;
            case ')': tok_.kind = Tok::RParen; bump(); return;
            case '{': tok_.kind = Tok::LBrace; bump(); return;
            case '}': tok_.kind = Tok::RBrace; bump(); return;
            case ',': tok_.kind = Tok::Comma; bump(); return;
            case '!': tok_.kind = Tok::Bang; bump(); return;
            case '&': tok_.kind = Tok::Amp; bump(); return;
            case '|': tok_.kind = Tok::Pipe; bump(); return;
            default: break;
        }
        if (c == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') {
            tok_.kind = Tok::Arrow;
            bump();
            bump();
            return;
        }
        if (is_name_char(c)) {
            tok_.kind = Tok::Ident;
            while (pos_ < src_.size() && is_name_char(src_[pos_])) {
                if (src_[pos_] == '-' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '>') break;
                tok_.text += src_[pos_];
                bump();
            }
            return;
        }
        throw SyntaxError(std::string("unexpected character '") + c + "'", line_, col_);
    }

    void bump() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    std::string_view src_;
    std::size_t pos_ = 0;
    int line_, col_;
    Token tok_;
};

class Parser {
public:
    Parser(std::string_view src, RegistryPtr reg, int line, int col)
        : lex_(src, line, col), reg_(std::move(reg)) {}

    Rule parse() {
        Rule r = parse_ifthen();
        const Token& t = lex_.peek();
        if (t.kind != Tok::End)
            throw SyntaxError("unexpected trailing input", t.line, t.col);
        return r;
    }

private:
    Rule parse_ifthen() {
        Rule lhs = parse_or();
        if (lex_.peek().kind == Tok::Arrow) {
            lex_.take();
            return Rule::implication(std::move(lhs), parse_ifthen());
        }
        return lhs;
    }

    Rule parse_or() {
        Rule lhs = parse_and();
        while (lex_.peek().kind == Tok::Pipe) {
            lex_.take();
            lhs = Rule::disjunction(std::move(lhs), parse_and());
        }
        return lhs;
    }

    Rule parse_and() {
        Rule lhs = parse_unary();
        while (lex_.peek().kind == Tok::Amp) {
            lex_.take();
            lhs = Rule::conjunction(std::move(lhs), parse_unary());
        }
        return lhs;
    }

    Rule parse_unary() {
        if (lex_.peek().kind == Tok::Bang) {
            lex_.take();
            return Rule::negation(parse_unary());
        }
        return parse_primary();
    }

    Rule parse_primary() {
        Token t = lex_.peek();
        if (t.kind == Tok::LParen) {
            lex_.take();
            Rule r = parse_ifthen();
            expect(Tok::RParen, "')'");
            return r;
        }
        if (t.kind == Tok::Ident && t.text == "u") {
            lex_.take();
            return parse_unit();
        }
        throw SyntaxError("expected a unit rule, '!' or '('", t.line, t.col);
    }

    Rule parse_unit() {
        expect(Tok::LParen, "'(' after u");
        VarSet scope = parse_varset();
        expect(Tok::Comma, "',' between scope and counts");
        std::vector<int> counts;
        Token t = lex_.peek();
        bool select_all = false;
        if (t.kind == Tok::Ident && t.text == "all") {
            lex_.take();
            select_all = true;
        } else {
            expect(Tok::LBrace, "'{' or 'all'");
            while (true) {
                Token num = expect(Tok::Ident, "count");
                counts.push_back(parse_count(num));
                if (lex_.peek().kind == Tok::Comma) {
                    lex_.take();
                    continue;
                }
                break;
            }
            expect(Tok::RBrace, "'}'");
        }
        expect(Tok::RParen, "')'");
        if (select_all) return Rule::unit(UnitRule::select_all(std::move(scope)));
        return Rule::unit(UnitRule(std::move(scope), std::move(counts)));
    }

    VarSet parse_varset() {
        expect(Tok::LBrace, "'{'");
        std::uint64_t mask = 0;
        while (true) {
            Token name = expect(Tok::Ident, "variable name");
            auto idx = reg_->find(name.text);
            if (!idx)
                throw UnknownVariable("line " + std::to_string(name.line) + ", col " +
                                      std::to_string(name.col) + ": unknown variable '" +
                                      name.text + "'");
            mask |= 1ull << *idx;
            if (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                continue;
            }
            break;
        }
        expect(Tok::RBrace, "'}'");
        return VarSet(reg_, mask);
    }

    int parse_count(const Token& t) {
        for (char c : t.text)
            if (!std::isdigit(static_cast<unsigned char>(c)))
                throw SyntaxError("count '" + t.text + "' is not a non-negative integer", t.line, t.col);
        if (t.text.size() > 6)
            throw CountOutOfRange("line " + std::to_string(t.line) + ": count '" + t.text +
                                  "' is out of range");
        return std::stoi(t.text);
    }

    Token expect(Tok kind, const char* what) {
        Token t = lex_.take();
        if (t.kind != kind) throw SyntaxError(std::string("expected ") + what, t.line, t.col);
        return t;
    }

    Lexer lex_;
    RegistryPtr reg_;
};

Rule parse_rule_at(std::string_view text, const RegistryPtr& reg, int line, int col) {
    return Parser(text, reg, line, col).parse();
}

}  // namespace

Rule parse_rule(std::string_view text, const RegistryPtr& reg) {
    return parse_rule_at(text, reg, 1, 1);
}

RuleSet parse_rule_file(std::string_view text, const RegistryPtr& reg) {
    std::vector<NamedRule> rules;
    std::optional<NamedRule> forced;
    std::unordered_set<std::string> seen;

    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t eol = text.find('\n', pos);
        if (eol == std::string_view::npos) eol = text.size();
        std::string_view line = text.substr(pos, eol - pos);
        ++line_no;

        if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);

        std::size_t i = 0;
        auto skip_ws = [&] {
            while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
        };
        skip_ws();
        if (i < line.size()) {
            bool is_forced = false;
            static constexpr std::string_view kTag = "forced:";
            if (line.substr(i, kTag.size()) == kTag) {
                is_forced = true;
                i += kTag.size();
                skip_ws();
            }
            std::size_t name_start = i;
            while (i < line.size() && is_name_char(line[i]) && line[i] != ':') ++i;
            std::string name(line.substr(name_start, i - name_start));
            if (name.empty())
                throw SyntaxError("expected a rule name", line_no, static_cast<int>(name_start + 1));
            skip_ws();
            if (i >= line.size() || line[i] != ':')
                throw SyntaxError("expected ':' after rule name '" + name + "'", line_no,
                                  static_cast<int>(i + 1));
            ++i;
            if (!seen.insert(name).second)
                throw SyntaxError("duplicate rule name '" + name + "'", line_no, 1);
            Rule r = parse_rule_at(line.substr(i), reg, line_no, static_cast<int>(i + 1));
            if (is_forced) {
                if (forced) throw SyntaxError("second forced rule '" + name + "'", line_no, 1);
                forced = NamedRule{std::move(name), std::move(r)};
            } else {
                rules.push_back(NamedRule{std::move(name), std::move(r)});
            }
        }

        if (eol == text.size()) break;
        pos = eol + 1;
    }
    return RuleSet::make(reg, std::move(rules), std::move(forced));
}

std::string format_rule_file(const RuleSet& rs) {
    std::string out;
    if (rs.forced_rule) {
        out += "forced: " + rs.forced_rule->name + " : " + format_rule(rs.forced_rule->rule) + "\n";
    }
    for (const auto& nr : rs.rules) out += nr.name + " : " + format_rule(nr.rule) + "\n";
    return out;
}

}  // namespace structsel
