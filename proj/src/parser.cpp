#include "mona/parser.hpp"

#include <cctype>
#include <charconv>
#include <cstdlib>
#include <optional>

namespace mona {

SourceProgram SourceProgram::from_text(std::string text) {
    SourceProgram p;
    p.digest = sha256(text);
    p.text = std::move(text);
    return p;
}

const char* kind_name(NodeKind k) {
    switch (k) {
        case NodeKind::Program: return "program";
        case NodeKind::FuncDecl: return "func-decl";
        case NodeKind::Params: return "params";
        case NodeKind::Body: return "body";
        case NodeKind::IfStmt: return "if-stmt";
        case NodeKind::WhileStmt: return "while-stmt";
        case NodeKind::VarDecl: return "var-decl";
        case NodeKind::Assign: return "assign";
        case NodeKind::Return: return "return";
        case NodeKind::Print: return "print";
        case NodeKind::FuncCall: return "call";
        case NodeKind::Args: return "args";
        case NodeKind::BinaryOp: return "binary-op";
        case NodeKind::BoolExpr: return "bool-expr";
        case NodeKind::ListExpr: return "list-expr";
        case NodeKind::Index: return "index";
        case NodeKind::Slice: return "slice";
        case NodeKind::Lenof: return "lenof";
        case NodeKind::Literal: return "literal";
        case NodeKind::Identifier: return "identifier";
    }
    return "?";
}

namespace {

enum class Tok : uint8_t {
    End,
    Ident,
    IntLit,
    FloatLit,
    CharLit,
    StringLit,
    KwVar,
    KwDecl,
    KwIf,
    KwElse,
    KwWhile,
    KwReturn,
    KwPrint,
    KwLenof,
    KwTrue,
    KwFalse,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Colon,
    Assign,
    Eq,
    Le,
    Lt,
    Ge,
    Gt,
    Plus,
    Minus,
    Star,
    Slash,
};

struct Token {
    Tok kind;
    uint32_t line;
    uint32_t col;
    std::string text;  // identifier name or literal spelling
};

class Lexer {
public:
    explicit Lexer(const std::string& src) : src_(src) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        for (;;) {
            skip_ws();
            uint32_t line = line_, col = col_;
            if (eof()) {
                out.push_back({Tok::End, line, col, ""});
                return out;
            }
            char c = peek();
            if (std::isalpha(uint8_t(c)) || c == '_') {
                out.push_back(ident(line, col));
            } else if (std::isdigit(uint8_t(c))) {
                out.push_back(number(line, col));
            } else if (c == '\'') {
                out.push_back(char_literal(line, col));
            } else if (c == '"') {
                out.push_back(string_literal(line, col));
            } else {
                out.push_back(punct(line, col));
            }
        }
    }

private:
    bool eof() const { return pos_ >= src_.size(); }
    char peek(size_t ahead = 0) const {
        return pos_ + ahead < src_.size() ? src_[pos_ + ahead] : '\0';
    }
    char advance() {
        char c = src_[pos_++];
        if (c == '\n') {
            line_++;
            col_ = 1;
        } else {
            col_++;
        }
        return c;
    }

    [[noreturn]] void fail(const std::string& msg) { throw SyntaxError(line_, col_, msg); }

    void skip_ws() {
        for (;;) {
            while (!eof() && std::isspace(uint8_t(peek()))) advance();
            if (peek() == '/' && peek(1) == '/') {
                while (!eof() && peek() != '\n') advance();
                continue;
            }
            break;
        }
    }

    Token ident(uint32_t line, uint32_t col) {
        std::string s;
        while (!eof() && (std::isalnum(uint8_t(peek())) || peek() == '_')) s.push_back(advance());
        Tok k = Tok::Ident;
        if (s == "var") k = Tok::KwVar;
        else if (s == "decl") k = Tok::KwDecl;
        else if (s == "if") k = Tok::KwIf;
        else if (s == "else") k = Tok::KwElse;
        else if (s == "while") k = Tok::KwWhile;
        else if (s == "return") k = Tok::KwReturn;
        else if (s == "print") k = Tok::KwPrint;
        else if (s == "lenof") k = Tok::KwLenof;
        else if (s == "True") k = Tok::KwTrue;
        else if (s == "False") k = Tok::KwFalse;
        return {k, line, col, std::move(s)};
    }

    Token number(uint32_t line, uint32_t col) {
        std::string s;
        while (!eof() && std::isdigit(uint8_t(peek()))) s.push_back(advance());
        if (peek() == '.' && std::isdigit(uint8_t(peek(1)))) {
            s.push_back(advance());
            while (!eof() && std::isdigit(uint8_t(peek()))) s.push_back(advance());
            return {Tok::FloatLit, line, col, std::move(s)};
        }
        return {Tok::IntLit, line, col, std::move(s)};
    }

    char escape(char c) {
        switch (c) {
            case 'n': return '\n';
            case 't': return '\t';
            case '\\': return '\\';
            case '\'': return '\'';
            case '"': return '"';
            case '0': return '\0';
            default: fail(std::string("unknown escape \\") + c);
        }
    }

    Token char_literal(uint32_t line, uint32_t col) {
        advance();  // opening quote
        if (eof()) fail("unterminated character literal");
        char c = advance();
        if (c == '\\') {
            if (eof()) fail("unterminated character literal");
            c = escape(advance());
        } else if (c == '\'') {
            fail("empty character literal");
        }
        if (eof() || advance() != '\'') fail("unterminated character literal");
        return {Tok::CharLit, line, col, std::string(1, c)};
    }

    Token string_literal(uint32_t line, uint32_t col) {
        advance();  // opening quote
        std::string s;
        for (;;) {
            if (eof()) fail("unterminated string literal");
            char c = advance();
            if (c == '"') break;
            if (c == '\n') fail("newline in string literal");
            if (c == '\\') {
                if (eof()) fail("unterminated string literal");
                c = escape(advance());
            }
            s.push_back(c);
        }
        return {Tok::StringLit, line, col, std::move(s)};
    }

    Token punct(uint32_t line, uint32_t col) {
        char c = advance();
        switch (c) {
            case '(': return {Tok::LParen, line, col, "("};
            case ')': return {Tok::RParen, line, col, ")"};
            case '{': return {Tok::LBrace, line, col, "{"};
            case '}': return {Tok::RBrace, line, col, "}"};
            case '[': return {Tok::LBracket, line, col, "["};
            case ']': return {Tok::RBracket, line, col, "]"};
            case ',': return {Tok::Comma, line, col, ","};
            case ';': return {Tok::Semi, line, col, ";"};
            case ':': return {Tok::Colon, line, col, ":"};
            case '+': return {Tok::Plus, line, col, "+"};
            case '-': return {Tok::Minus, line, col, "-"};
            case '*': return {Tok::Star, line, col, "*"};
            case '/': return {Tok::Slash, line, col, "/"};
            case '=':
                if (peek() == '=') {
                    advance();
                    return {Tok::Eq, line, col, "=="};
                }
                return {Tok::Assign, line, col, "="};
            case '<':
                if (peek() == '=') {
                    advance();
                    return {Tok::Le, line, col, "<="};
                }
                return {Tok::Lt, line, col, "<"};
            case '>':
                if (peek() == '=') {
                    advance();
                    return {Tok::Ge, line, col, ">="};
                }
                return {Tok::Gt, line, col, ">"};
            default: fail(std::string("unexpected character '") + c + "'");
        }
    }

    const std::string& src_;
    size_t pos_ = 0;
    uint32_t line_ = 1;
    uint32_t col_ = 1;
};

class Parser {
public:
    Parser(Ast& ast, std::vector<Token> toks) : ast_(ast), toks_(std::move(toks)) {}

    void run() {
        NodeId prog = make(NodeKind::Program, cur().line, cur().col);
        std::vector<NodeId> stmts;
        while (cur().kind != Tok::End) {
            stmts.push_back(statement(/*top_level=*/true));
        }
        node(prog).kids = std::move(stmts);
        ast_.root = prog;
    }

private:
    const Token& cur() const { return toks_[pos_]; }
    const Token& ahead(size_t n) const {
        size_t i = pos_ + n;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    Token take() { return toks_[pos_++]; }

    [[noreturn]] void fail(const Token& t, const std::string& msg) {
        throw SyntaxError(t.line, t.col, msg);
    }

    Token expect(Tok k, const char* what) {
        if (cur().kind != k) fail(cur(), std::string("expected ") + what);
        return take();
    }

    NodeId make(NodeKind k, uint32_t line, uint32_t col) {
        Node n;
        n.kind = k;
        n.line = line;
        n.col = col;
        ast_.nodes.push_back(std::move(n));
        return NodeId(ast_.nodes.size() - 1);
    }

    Node& node(NodeId id) { return ast_.at(id); }

    NodeId statement(bool top_level) {
        switch (cur().kind) {
            case Tok::KwVar: return var_decl();
            case Tok::KwDecl:
                if (!top_level) fail(cur(), "function declarations are only allowed at top level");
                return func_decl();
            case Tok::KwIf: return if_stmt();
            case Tok::KwWhile: return while_stmt();
            case Tok::KwReturn: return return_stmt();
            case Tok::KwPrint: return print_stmt();
            default: return expr_or_assign();
        }
    }

    NodeId var_decl() {
        Token kw = take();
        Token name = expect(Tok::Ident, "identifier");
        expect(Tok::Assign, "'='");
        NodeId init = expression();
        expect(Tok::Semi, "';'");
        NodeId n = make(NodeKind::VarDecl, kw.line, kw.col);
        node(n).name = name.text;
        node(n).kids = {init};
        return n;
    }

    NodeId func_decl() {
        Token kw = take();
        Token name = expect(Tok::Ident, "function name");
        expect(Tok::LParen, "'('");
        NodeId params = make(NodeKind::Params, cur().line, cur().col);
        if (cur().kind != Tok::RParen) {
            for (;;) {
                Token p = expect(Tok::Ident, "parameter name");
                NodeId pn = make(NodeKind::Identifier, p.line, p.col);
                node(pn).name = p.text;
                node(params).kids.push_back(pn);
                if (cur().kind != Tok::Comma) break;
                take();
            }
        }
        expect(Tok::RParen, "')'");
        NodeId body = block();
        NodeId n = make(NodeKind::FuncDecl, kw.line, kw.col);
        node(n).name = name.text;
        node(n).kids = {params, body};
        return n;
    }

    NodeId block() {
        Token open = expect(Tok::LBrace, "'{'");
        NodeId body = make(NodeKind::Body, open.line, open.col);
        std::vector<NodeId> stmts;
        while (cur().kind != Tok::RBrace) {
            if (cur().kind == Tok::End) fail(cur(), "unterminated block");
            stmts.push_back(statement(/*top_level=*/false));
        }
        take();
        node(body).kids = std::move(stmts);
        return body;
    }

    NodeId if_stmt() {
        Token kw = take();
        NodeId n = make(NodeKind::IfStmt, kw.line, kw.col);
        std::vector<NodeId> kids;
        expect(Tok::LParen, "'('");
        kids.push_back(expression());
        expect(Tok::RParen, "')'");
        kids.push_back(block());
        while (cur().kind == Tok::KwElse) {
            take();
            if (cur().kind == Tok::KwIf) {
                take();
                expect(Tok::LParen, "'('");
                kids.push_back(expression());
                expect(Tok::RParen, "')'");
                kids.push_back(block());
            } else {
                node(n).has_else = true;
                kids.push_back(block());
                break;
            }
        }
        node(n).kids = std::move(kids);
        return n;
    }

    NodeId while_stmt() {
        Token kw = take();
        expect(Tok::LParen, "'('");
        NodeId cond = expression();
        expect(Tok::RParen, "')'");
        NodeId body = block();
        NodeId n = make(NodeKind::WhileStmt, kw.line, kw.col);
        node(n).kids = {cond, body};
        return n;
    }

    NodeId return_stmt() {
        Token kw = take();
        NodeId n = make(NodeKind::Return, kw.line, kw.col);
        if (cur().kind != Tok::Semi) {
            node(n).kids = {expression()};
        }
        expect(Tok::Semi, "';'");
        return n;
    }

    NodeId print_stmt() {
        Token kw = take();
        expect(Tok::LParen, "'('");
        NodeId args = make(NodeKind::Args, cur().line, cur().col);
        node(args).kids = {expression()};
        expect(Tok::RParen, "')'");
        expect(Tok::Semi, "';'");
        NodeId n = make(NodeKind::Print, kw.line, kw.col);
        node(n).kids = {args};
        return n;
    }

    // Either `target = expr ;` where target is IDENT ('[' expr ']')* or a bare
    // expression statement.
    NodeId expr_or_assign() {
        if (cur().kind == Tok::Ident) {
            // Look ahead for an assignment target: IDENT ([ ... ])* '='.
            size_t save = pos_;
            if (scan_assign_target()) {
                pos_ = save;
                return assignment();
            }
            pos_ = save;
        }
        Token first = cur();
        NodeId e = expression();
        expect(Tok::Semi, "';'");
        (void)first;
        return e;
    }

    // Token-level scan used only to disambiguate assignment from expression
    // statements; tolerates nested brackets in subscripts.
    bool scan_assign_target() {
        take();  // IDENT
        while (cur().kind == Tok::LBracket) {
            int depth = 0;
            do {
                if (cur().kind == Tok::End) return false;
                if (cur().kind == Tok::LBracket) depth++;
                if (cur().kind == Tok::RBracket) depth--;
                take();
            } while (depth > 0);
        }
        return cur().kind == Tok::Assign;
    }

    NodeId assignment() {
        Token name = take();
        std::vector<NodeId> subscripts;
        while (cur().kind == Tok::LBracket) {
            take();
            subscripts.push_back(expression());
            expect(Tok::RBracket, "']'");
        }
        expect(Tok::Assign, "'='");
        NodeId value = expression();
        expect(Tok::Semi, "';'");
        NodeId n = make(NodeKind::Assign, name.line, name.col);
        node(n).name = name.text;
        node(n).index_count = uint16_t(subscripts.size());
        subscripts.push_back(value);
        node(n).kids = std::move(subscripts);
        return n;
    }

    NodeId expression() { return comparison(); }

    NodeId comparison() {
        NodeId lhs = additive();
        while (true) {
            CmpOp op;
            switch (cur().kind) {
                case Tok::Eq: op = CmpOp::Eq; break;
                case Tok::Le: op = CmpOp::Le; break;
                case Tok::Lt: op = CmpOp::Lt; break;
                case Tok::Gt: op = CmpOp::Gt; break;
                case Tok::Ge: op = CmpOp::Ge; break;
                default: return lhs;
            }
            Token t = take();
            NodeId rhs = additive();
            NodeId n = make(NodeKind::BoolExpr, t.line, t.col);
            node(n).cmp_op = op;
            node(n).kids = {lhs, rhs};
            lhs = n;
        }
    }

    NodeId additive() {
        NodeId lhs = multiplicative();
        while (cur().kind == Tok::Plus || cur().kind == Tok::Minus) {
            Token t = take();
            NodeId rhs = multiplicative();
            NodeId n = make(NodeKind::BinaryOp, t.line, t.col);
            node(n).bin_op = t.kind == Tok::Plus ? BinOp::Add : BinOp::Sub;
            node(n).kids = {lhs, rhs};
            lhs = n;
        }
        return lhs;
    }

    NodeId multiplicative() {
        NodeId lhs = unary();
        while (cur().kind == Tok::Star || cur().kind == Tok::Slash) {
            Token t = take();
            NodeId rhs = unary();
            NodeId n = make(NodeKind::BinaryOp, t.line, t.col);
            node(n).bin_op = t.kind == Tok::Star ? BinOp::Mul : BinOp::Div;
            node(n).kids = {lhs, rhs};
            lhs = n;
        }
        return lhs;
    }

    NodeId unary() {
        if (cur().kind == Tok::Minus) {
            Token t = take();
            if (cur().kind == Tok::IntLit || cur().kind == Tok::FloatLit) {
                NodeId lit = primary();
                Node& n = node(lit);
                if (n.literal.is_int()) {
                    n.literal = Value::integer(Int(0) - n.literal.as_int());
                } else {
                    n.literal = Value::floating(-n.literal.as_float());
                }
                return postfix_chain(lit);
            }
            // -x desugars to (0 - x)
            NodeId zero = make(NodeKind::Literal, t.line, t.col);
            node(zero).literal = Value::integer(Int(0));
            NodeId rhs = unary();
            NodeId n = make(NodeKind::BinaryOp, t.line, t.col);
            node(n).bin_op = BinOp::Sub;
            node(n).kids = {zero, rhs};
            return n;
        }
        return postfix_chain(primary());
    }

    NodeId postfix_chain(NodeId base) {
        while (cur().kind == Tok::LBracket) {
            Token open = take();
            // index: [expr]  slice: [expr?:expr?]
            std::optional<NodeId> lo, hi;
            bool is_slice = false;
            if (cur().kind != Tok::Colon) lo = expression();
            if (cur().kind == Tok::Colon) {
                is_slice = true;
                take();
                if (cur().kind != Tok::RBracket) hi = expression();
            }
            expect(Tok::RBracket, "']'");
            if (is_slice) {
                NodeId n = make(NodeKind::Slice, open.line, open.col);
                // kids: base, [lo], [hi]; index_count encodes which bounds exist:
                // bit0 = lo present, bit1 = hi present.
                node(n).kids = {base};
                uint16_t mask = 0;
                if (lo) {
                    node(n).kids.push_back(*lo);
                    mask |= 1;
                }
                if (hi) {
                    node(n).kids.push_back(*hi);
                    mask |= 2;
                }
                node(n).index_count = mask;
                base = n;
            } else {
                NodeId n = make(NodeKind::Index, open.line, open.col);
                node(n).kids = {base, *lo};
                base = n;
            }
        }
        return base;
    }

    NodeId primary() {
        Token t = cur();
        switch (t.kind) {
            case Tok::IntLit: {
                take();
                NodeId n = make(NodeKind::Literal, t.line, t.col);
                int64_t v = 0;
                auto [p, ec] = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
                if (ec != std::errc() || p != t.text.data() + t.text.size()) {
                    node(n).literal = Value::integer(Int(BigInt(t.text)));
                } else {
                    node(n).literal = Value::integer(Int(v));
                }
                return n;
            }
            case Tok::FloatLit: {
                take();
                NodeId n = make(NodeKind::Literal, t.line, t.col);
                node(n).literal = Value::floating(std::strtod(t.text.c_str(), nullptr));
                return n;
            }
            case Tok::CharLit: {
                take();
                NodeId n = make(NodeKind::Literal, t.line, t.col);
                node(n).literal = Value::character(t.text[0]);
                return n;
            }
            case Tok::StringLit: {
                take();
                NodeId n = make(NodeKind::Literal, t.line, t.col);
                node(n).literal = Value::from_string(t.text);
                return n;
            }
            case Tok::KwTrue:
            case Tok::KwFalse: {
                take();
                NodeId n = make(NodeKind::Literal, t.line, t.col);
                node(n).literal = Value::boolean(t.kind == Tok::KwTrue);
                return n;
            }
            case Tok::KwLenof: {
                take();
                expect(Tok::LParen, "'('");
                NodeId arg = expression();
                expect(Tok::RParen, "')'");
                NodeId n = make(NodeKind::Lenof, t.line, t.col);
                node(n).kids = {arg};
                return n;
            }
            case Tok::LBracket: {
                take();
                NodeId n = make(NodeKind::ListExpr, t.line, t.col);
                if (cur().kind != Tok::RBracket) {
                    for (;;) {
                        NodeId elem = expression();  // may reallocate the arena
                        node(n).kids.push_back(elem);
                        if (cur().kind != Tok::Comma) break;
                        take();
                    }
                }
                expect(Tok::RBracket, "']'");
                return n;
            }
            case Tok::LParen: {
                take();
                NodeId e = expression();
                expect(Tok::RParen, "')'");
                return e;
            }
            case Tok::Ident: {
                take();
                if (cur().kind == Tok::LParen) {
                    take();
                    NodeId args = make(NodeKind::Args, t.line, t.col);
                    if (cur().kind != Tok::RParen) {
                        for (;;) {
                            NodeId arg = expression();  // may reallocate the arena
                            node(args).kids.push_back(arg);
                            if (cur().kind != Tok::Comma) break;
                            take();
                        }
                    }
                    expect(Tok::RParen, "')'");
                    NodeId n = make(NodeKind::FuncCall, t.line, t.col);
                    node(n).name = t.text;
                    node(n).kids = {args};
                    return n;
                }
                NodeId n = make(NodeKind::Identifier, t.line, t.col);
                node(n).name = t.text;
                return n;
            }
            default: fail(t, "expected expression");
        }
    }

    Ast& ast_;
    std::vector<Token> toks_;
    size_t pos_ = 0;
};

// Post-order SeqID assignment plus memvar anchor/slot wiring.
class Annotator {
public:
    explicit Annotator(Ast& ast) : ast_(ast) {}

    void run() {
        if (ast_.root == kNoNode) return;
        assign_seq(ast_.root);
        uint32_t counter = 0;
        assign_slots(ast_.root, ast_.at(ast_.root).seq, counter);
        ast_.evaluable_count = next_seq_;
    }

private:
    void assign_seq(NodeId id) {
        Node& n = ast_.at(id);
        for (NodeId kid : n.kids) assign_seq(kid);
        if (n.kind == NodeKind::Program && n.kids.empty()) return;  // empty program: no SeqIDs
        if (kind_is_evaluable(n.kind)) n.seq = next_seq_++;
    }

    void assign_slots(NodeId id, int32_t anchor_seq, uint32_t& counter) {
        Node& n = ast_.at(id);
        n.anchor = anchor_seq;
        if (n.seq >= 0) {
            uint32_t fresh = 0;
            for (NodeId kid : n.kids) {
                ast_.at(kid).slot = fresh++;
                assign_slots(kid, n.seq, fresh);
            }
        } else {
            for (NodeId kid : n.kids) {
                ast_.at(kid).slot = counter++;
                assign_slots(kid, anchor_seq, counter);
            }
        }
    }

    Ast& ast_;
    int32_t next_seq_ = 0;
};

}  // namespace

Ast parse_unannotated(const SourceProgram& source) {
    Ast ast;
    ast.source_digest = source.digest;
    Lexer lexer(source.text);
    Parser parser(ast, lexer.run());
    parser.run();
    return ast;
}

void assign_seq_ids(Ast& ast) { Annotator(ast).run(); }

Ast parse(const SourceProgram& source) {
    Ast ast = parse_unannotated(source);
    assign_seq_ids(ast);
    return ast;
}

}  // namespace mona
