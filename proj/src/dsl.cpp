#include "fmrec/dsl.hpp"

#include <unordered_map>
#include <vector>

#include "fmrec/error.hpp"

namespace fmrec {

namespace {

struct Token {
    enum class Kind { ident, lbrace, rbrace, end };
    Kind kind;
    std::string text;
    std::size_t line;
    std::size_t column;
};

std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    std::size_t line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&] {
        if (src[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
        ++i;
    };
    auto ident_char = [](char c) {
        return (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') || (c >= '0' && c <= '9') || c == '_';
    };
    while (i < src.size()) {
        char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance();
        } else if (c == '#') {
            while (i < src.size() && src[i] != '\n') advance();
        } else if (c == '{' || c == '}') {
            out.push_back({c == '{' ? Token::Kind::lbrace : Token::Kind::rbrace, std::string(1, c), line, col});
            advance();
        } else if ((c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z')) {
            Token t{Token::Kind::ident, {}, line, col};
            while (i < src.size() && ident_char(src[i])) {
                t.text += src[i];
                advance();
            }
            out.push_back(std::move(t));
        } else {
            throw ParseError(std::string("unexpected character '") + c + "'", line, col);
        }
    }
    out.push_back({Token::Kind::end, "end of input", line, col});
    return out;
}

class Parser {
public:
    explicit Parser(std::vector<Token> tokens) : toks_(std::move(tokens)) {}

    FeatureModel parse() {
        expect_keyword("model");
        const Token& root = expect_ident("model name");
        model_ = FeatureModel(root.text);
        names_.emplace(root.text, 0);
        expect(Token::Kind::lbrace, "'{'");
        body(0);
        if (peek_keyword("constraints")) constraints();
        if (peek().kind != Token::Kind::end) fail("expected end of input", peek());
        return std::move(model_);
    }

private:
    // Items and groups until the closing brace of `parent`.
    void body(std::size_t parent) {
        while (peek().kind != Token::Kind::rbrace) {
            if (peek_keyword("alternative") || peek_keyword("or"))
                group(parent);
            else
                item(parent, no_index);
        }
        next();
    }

    void item(std::size_t parent, std::size_t grp) {
        Relation rel = Relation::optional;
        if (peek_keyword("mandatory")) {
            rel = Relation::mandatory;
            next();
        } else if (peek_keyword("optional")) {
            next();
        }
        expect_keyword("feature");
        const Token& name = expect_ident("feature name");
        if (names_.count(name.text)) fail("duplicate feature '" + name.text + "'", name);
        std::size_t idx = grp == no_index ? model_.add_feature(parent, name.text, rel)
                                          : model_.add_group_member(grp, name.text);
        names_.emplace(name.text, idx);
        if (peek().kind == Token::Kind::lbrace) {
            next();
            body(idx);
        }
    }

    void group(std::size_t parent) {
        const Token& kw = next();
        auto grp = model_.add_group(parent, kw.text == "alternative" ? GroupKind::alternative : GroupKind::or_group);
        expect(Token::Kind::lbrace, "'{'");
        std::size_t count = 0;
        while (peek().kind != Token::Kind::rbrace) {
            item(parent, grp);
            ++count;
        }
        if (count < 2) fail(kw.text + " group needs at least 2 features", kw);
        next();
    }

    void constraints() {
        next();
        expect(Token::Kind::lbrace, "'{'");
        while (peek().kind != Token::Kind::rbrace) {
            const Token& kw = peek();
            CrossTreeKind kind;
            if (kw.kind == Token::Kind::ident && kw.text == "requires")
                kind = CrossTreeKind::requires_;
            else if (kw.kind == Token::Kind::ident && kw.text == "excludes")
                kind = CrossTreeKind::excludes;
            else
                fail("expected 'requires' or 'excludes'", kw);
            next();
            auto a = resolve(expect_ident("feature name"));
            const Token& bt = expect_ident("feature name");
            auto b = resolve(bt);
            if (a == b) fail("constraint relates '" + bt.text + "' to itself", bt);
            model_.add_constraint(kind, a, b);
        }
        next();
    }

    std::size_t resolve(const Token& t) {
        auto it = names_.find(t.text);
        if (it == names_.end()) fail("unknown feature '" + t.text + "'", t);
        return it->second;
    }

    const Token& peek() const { return toks_[pos_]; }
    const Token& next() {
        const Token& t = toks_[pos_];
        if (t.kind != Token::Kind::end) ++pos_;
        return t;
    }
    bool peek_keyword(std::string_view kw) const {
        return peek().kind == Token::Kind::ident && peek().text == kw;
    }
    void expect_keyword(std::string_view kw) {
        if (!peek_keyword(kw)) fail("expected '" + std::string(kw) + "'", peek());
        next();
    }
    const Token& expect_ident(std::string_view what) {
        if (peek().kind != Token::Kind::ident) fail("expected " + std::string(what), peek());
        return next();
    }
    void expect(Token::Kind kind, std::string_view what) {
        if (peek().kind != kind) fail("expected " + std::string(what), peek());
        next();
    }
    [[noreturn]] static void fail(const std::string& msg, const Token& at) {
        throw ParseError(msg + " (found '" + at.text + "')", at.line, at.column);
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
    FeatureModel model_;
    std::unordered_map<std::string, std::size_t> names_;
};

class Writer {
public:
    explicit Writer(const FeatureModel& m) : m_(m) {
        children_.resize(m.size());
        for (std::size_t i = 1; i < m.size(); ++i) children_[m.feature(i).parent].push_back(i);
    }

    std::string write() {
        const auto& root = m_.root();
        if (children_[0].empty()) {
            out_ += "model " + root.name + " { }\n";
        } else {
            out_ += "model " + root.name + " {\n";
            body(0, 1);
            out_ += "}\n";
        }
        if (!m_.constraints().empty()) {
            out_ += "constraints {\n";
            for (const auto& c : m_.constraints())
                out_ += "  " + std::string(to_string(c.kind)) + " " + m_.feature(c.a).name + " " +
                        m_.feature(c.b).name + "\n";
            out_ += "}\n";
        }
        return std::move(out_);
    }

private:
    void body(std::size_t parent, int depth) {
        std::vector<bool> emitted(m_.groups().size(), false);
        for (auto c : children_[parent]) {
            auto g = m_.feature(c).group;
            if (g == no_index) {
                item(c, depth, true);
            } else if (!emitted[g]) {
                emitted[g] = true;
                const auto& grp = m_.groups()[g];
                indent(depth);
                out_ += std::string(to_string(grp.kind)) + " {\n";
                for (auto mem : grp.members) item(mem, depth + 1, false);
                indent(depth);
                out_ += "}\n";
            }
        }
    }

    void item(std::size_t f, int depth, bool with_relation) {
        indent(depth);
        if (with_relation) out_ += std::string(to_string(m_.feature(f).relation)) + " ";
        out_ += "feature " + m_.feature(f).name;
        if (children_[f].empty()) {
            out_ += "\n";
            return;
        }
        out_ += " {\n";
        body(f, depth + 1);
        indent(depth);
        out_ += "}\n";
    }

    void indent(int depth) { out_.append(static_cast<std::size_t>(depth) * 2, ' '); }

    const FeatureModel& m_;
    std::vector<std::vector<std::size_t>> children_;
    std::string out_;
};

}  // namespace

FeatureModel parse_model(std::string_view text) {
    return Parser(tokenize(text)).parse();
}

std::string serialize_model(const FeatureModel& m) {
    if (m.size() == 0) throw InvalidArgument("cannot serialize an empty model");
    return Writer(m).write();
}

}  // namespace fmrec
