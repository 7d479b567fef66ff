#include <doctest.h>

#include <map>
#include <set>

#include "mona/parser.hpp"
#include "test_data.hpp"

using namespace mona;

namespace {

Ast parse_text(const std::string& text) {
    return parse(SourceProgram::from_text(text));
}

// Maps a readable label to each node with a SeqID, depth-first.
void collect(const Ast& ast, NodeId id, std::multimap<std::string, int32_t>& out) {
    const Node& n = ast.at(id);
    if (n.seq >= 0) out.emplace(kind_name(n.kind), n.seq);
    for (NodeId kid : n.kids) collect(ast, kid, out);
}

void check_seq_structure(const Ast& ast, NodeId id, std::set<int32_t>& seen, int32_t& max_kid) {
    const Node& n = ast.at(id);
    int32_t deepest = -1;
    for (NodeId kid : n.kids) {
        int32_t kid_max = -1;
        check_seq_structure(ast, kid, seen, kid_max);
        // Left-to-right siblings complete in ascending SeqID order.
        CHECK(kid_max >= deepest);
        deepest = std::max(deepest, kid_max);
    }
    if (n.seq >= 0) {
        // A node completes after everything underneath it.
        CHECK(n.seq > deepest);
        CHECK(seen.insert(n.seq).second);
        max_kid = n.seq;
    } else {
        max_kid = deepest;
    }
}

}  // namespace

TEST_CASE("minimal program parses") {
    Ast ast = parse_text("var x = 1;");
    const Node& prog = ast.at(ast.root);
    REQUIRE(prog.kind == NodeKind::Program);
    REQUIRE(prog.kids.size() == 1);
    CHECK(ast.at(prog.kids[0]).kind == NodeKind::VarDecl);
}

TEST_CASE("strlst SeqIDs match the annotated tree") {
    Ast ast = parse_text(kStrlstSource);
    const Node& prog = ast.at(ast.root);
    REQUIRE(prog.kids.size() == 2);

    const Node& decl = ast.at(prog.kids[0]);
    REQUIRE(decl.kind == NodeKind::FuncDecl);
    const Node& params = ast.at(decl.kids[0]);
    const Node& fn_body = ast.at(decl.kids[1]);
    const Node& if_stmt = ast.at(fn_body.kids[0]);
    const Node& bool_expr = ast.at(if_stmt.kids[0]);
    const Node& if_body = ast.at(if_stmt.kids[1]);
    const Node& print_stmt = ast.at(if_body.kids[0]);
    const Node& print_args = ast.at(print_stmt.kids[0]);
    const Node& rec_call = ast.at(if_body.kids[1]);
    const Node& rec_args = ast.at(rec_call.kids[0]);
    const Node& top_call = ast.at(prog.kids[1]);
    const Node& top_args = ast.at(top_call.kids[0]);

    CHECK(params.seq == 0);
    CHECK(bool_expr.seq == 1);
    CHECK(print_args.seq == 2);
    CHECK(print_stmt.seq == 3);
    CHECK(rec_args.seq == 4);
    CHECK(rec_call.seq == 5);
    CHECK(if_body.seq == 6);
    CHECK(if_stmt.seq == 7);
    CHECK(fn_body.seq == 8);
    CHECK(decl.seq == 9);
    CHECK(top_args.seq == 10);
    CHECK(top_call.seq == 11);
    CHECK(prog.seq == 12);
    CHECK(ast.evaluable_count == 13);

    // Leaves of the expressions carry no SeqID at this granularity.
    const Node& index_expr = ast.at(print_args.kids[0]);
    CHECK(index_expr.kind == NodeKind::Index);
    CHECK(index_expr.seq == -1);
}

TEST_CASE("seqids form 0..N-1 in completion order") {
    const char* samples[] = {
        kStrlstSource,
        kFibSource,
        kLoopSource,
        kListOpsSource,
        "var x = 1; var y = x + 2; print(y);",
        "decl f(a, b) { return a * b; } print(f(3, 4) + f(1, 2));",
    };
    for (const char* text : samples) {
        CAPTURE(text);
        Ast ast = parse_text(text);
        std::set<int32_t> seen;
        int32_t max_seq = -1;
        check_seq_structure(ast, ast.root, seen, max_seq);
        REQUIRE(int64_t(seen.size()) == ast.evaluable_count);
        CHECK(*seen.begin() == 0);
        CHECK(*seen.rbegin() == int32_t(ast.evaluable_count - 1));
    }
}

TEST_CASE("expression statement numbering") {
    // Leaf literals carry no SeqID at the annotated granularity, so the sum
    // completes first and the program node closes the count.
    Ast ast = parse_text("1+2;");
    const Node& prog = ast.at(ast.root);
    const Node& sum = ast.at(prog.kids[0]);
    CHECK(sum.kind == NodeKind::BinaryOp);
    CHECK(sum.seq == 0);
    CHECK(prog.seq == 1);
    CHECK(ast.evaluable_count == 2);
}

TEST_CASE("empty program has no seqids") {
    Ast ast = parse_text("");
    CHECK(ast.evaluable_count == 0);
    CHECK(ast.at(ast.root).seq == -1);
}

TEST_CASE("reparsing is deterministic") {
    SourceProgram src = SourceProgram::from_text(kStrlstSource);
    Ast a = parse(src);
    Ast b = parse(src);
    REQUIRE(a.nodes.size() == b.nodes.size());
    for (size_t i = 0; i < a.nodes.size(); ++i) {
        CHECK(a.nodes[i].kind == b.nodes[i].kind);
        CHECK(a.nodes[i].seq == b.nodes[i].seq);
        CHECK(a.nodes[i].kids == b.nodes[i].kids);
        CHECK(a.nodes[i].slot == b.nodes[i].slot);
    }
}

TEST_CASE("syntax errors carry position and leave no ast") {
    CHECK_THROWS_AS(parse_text("var x = ;"), SyntaxError);
    CHECK_THROWS_AS(parse_text("if (1 { }"), SyntaxError);
    CHECK_THROWS_AS(parse_text("print(1)"), SyntaxError);  // missing ';'
    CHECK_THROWS_AS(parse_text("var 9 = 1;"), SyntaxError);
    CHECK_THROWS_AS(parse_text("\"unterminated"), SyntaxError);
    try {
        parse_text("var x =\n  @;");
        FAIL("expected SyntaxError");
    } catch (const SyntaxError& e) {
        CHECK(e.line == 2);
        CHECK(std::string(e.what()).find("2:") == 0);
    }
}

TEST_CASE("function declarations only at top level") {
    CHECK_THROWS_AS(parse_text("decl f() { decl g() { } }"), SyntaxError);
    CHECK_NOTHROW(parse_text("decl f() { } decl g() { } f(); g();"));
}

TEST_CASE("program digest is the sha256 of the source bytes") {
    SourceProgram empty = SourceProgram::from_text("");
    CHECK(program_digest(empty).hex() ==
          "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    SourceProgram a = SourceProgram::from_text("var x = 1;");
    SourceProgram b = SourceProgram::from_text("var x = 2;");
    CHECK(program_digest(a) == program_digest(SourceProgram::from_text("var x = 1;")));
    CHECK(program_digest(a) != program_digest(b));
}

TEST_CASE("grammar corners") {
    // precedence: comparison below additive below multiplicative
    Ast ast = parse_text("print(1 + 2 * 3 <= 7);");
    CHECK(ast.evaluable_count > 0);
    // unary minus folds into literals and desugars elsewhere
    CHECK_NOTHROW(parse_text("var a = -5; var b = -a; var c = 2 - -3;"));
    // slices
    CHECK_NOTHROW(parse_text("var v = [1,2,3][:2]; var w = [1,2,3][1:]; var u = [1][:];"));
    // chained comparison parses left-associative (meaningful or not)
    CHECK_NOTHROW(parse_text("1 < 2;"));
    // else-if chains
    CHECK_NOTHROW(parse_text("if (1 < 2) { } else if (2 < 3) { } else { }"));
}
