#include <doctest.h>

#include <numeric>

#include "mona/interp.hpp"
#include "mona/parser.hpp"
#include "test_data.hpp"

using namespace mona;

namespace {

Ast parse_text(const std::string& text) { return parse(SourceProgram::from_text(text)); }

std::string run(const std::string& text) { return execute(parse_text(text)).output; }

// Chains resume() across every adjacent snapshot pair and demands canonical
// state equality; also checks the window outputs stitch into the full stdout.
void check_replay_chain(const Ast& ast, const RecordResult& rec) {
    std::string stitched;
    for (size_t k = 0; k + 1 < rec.snapshots.size(); ++k) {
        MemoryState from = canonical_decode(rec.snapshots[k].bytes);
        uint64_t s = rec.snapshots[k + 1].expr_counter - rec.snapshots[k].expr_counter;
        if (s == 0) continue;  // empty program: initial == final
        ExecOutcome got = resume(ast, std::move(from), s);
        REQUIRE(canonical_encode(got.state) == rec.snapshots[k + 1].bytes);
        CHECK(got.executed == s);
        stitched += got.output;
    }
    CHECK(stitched == rec.output);
}

}  // namespace

TEST_CASE("strlst prints the list head recursively") {
    CHECK(run(kStrlstSource) == "1\n2\n3\n");
}

TEST_CASE("strlst C and i trajectory follows the walkthrough") {
    Ast ast = parse_text(kStrlstSource);
    std::vector<std::pair<std::vector<int64_t>, int64_t>> events;
    ExecOptions opts;
    opts.observer = [&](const MemoryState& st) { events.emplace_back(st.scope_seq, st.active); };
    ExecOutcome out = execute(ast, opts);
    CHECK(out.output == "1\n2\n3\n");

    using State = std::pair<std::vector<int64_t>, int64_t>;
    std::vector<State> expected = {
        {{10}, 0},          // top-level Args completed
        {{10, -1}, 1},      // call scope opened
        {{10, 1, -1}, 2},   // BoolExpr evaluated, if body scope opened
        {{10, 1, 3}, 2},    // print completed
        {{10, 1, 4, -1}, 3},  // recursive call scope opened
        {{12}, 0},          // program completed
    };
    // The walkthrough states must appear as an ordered subsequence, starting
    // from the initial ([-1], 0).
    std::vector<State> all;
    all.push_back({{-1}, 0});
    all.insert(all.end(), events.begin(), events.end());
    CHECK(all.front() == State{{-1}, 0});
    size_t want = 0;
    for (const State& got : all) {
        if (want < expected.size() && got == expected[want]) want++;
    }
    CHECK(want == expected.size());
    REQUIRE(!events.empty());
    CHECK(events.back() == State{{12}, 0});
    // 4 top-level completions, 9 per call on a non-empty list, 4 for the
    // final empty-list call.
    CHECK(out.state.expr_counter == 4 + 3 * 9 + 4);
}

TEST_CASE("fib(17) evaluates to 1597") {
    CHECK(run(kFibSource) == "1597\n");
}

TEST_CASE("empty program") {
    Ast ast = parse_text("");
    ExecOutcome out = execute(ast);
    CHECK(out.output.empty());
    CHECK(out.state.expr_counter == 0);
    CHECK(out.executed == 0);
}

TEST_CASE("value and list semantics") {
    CHECK(run(kListOpsSource) == "[7, 1, 2, 9]\n[1, 2]\n4\nok\n");
    CHECK(run("print([1, 2] + [3]);") == "[1, 2, 3]\n");
    CHECK(run("print([1, 2, 3][0]);") == "1\n");
    CHECK(run("print([1, 2, 3][0:2]);") == "[1, 2]\n");
    CHECK(run("print([1, 2, 3][1:]);") == "[2, 3]\n");
    CHECK(run("print([1, 2, 3][:2]);") == "[1, 2]\n");
    CHECK(run("var v = [1, 2, 3]; v[0] = 0; print(v);") == "[0, 2, 3]\n");
    CHECK(run("print(\"Hello\" + \"World\");") == "HelloWorld\n");
    CHECK(run("print('h');") == "h\n");
    CHECK(run("print(lenof([1, [2, 3], []]));") == "3\n");
    CHECK(run("print([1, 2, 3][3:]);") == "[]\n");
    CHECK(run("var m = [[1, 2], [3, 4]]; m[1][0] = 9; print(m);") == "[[1, 2], [9, 4]]\n");
    CHECK(run("print(True);") == "True\n");
    CHECK(run("print(7 == 7.0);") == "True\n");
    CHECK(run("print([1, 2] == [1, 2]);") == "True\n");
    CHECK(run("print([1, 2] == [1, 3]);") == "False\n");
}

TEST_CASE("arithmetic semantics") {
    CHECK(run("print(7 / 2);") == "3\n");
    CHECK(run("print(7.0 / 2);") == "3.5\n");
    CHECK(run("print(1 + 2 * 3);") == "7\n");
    CHECK(run("print((1 + 2) * 3);") == "9\n");
    CHECK(run("print(2 - 5);") == "-3\n");
    CHECK(run("print(-3 + 1);") == "-2\n");
    CHECK(run("print(0 - 9223372036854775807 - 9223372036854775807);") ==
          "-18446744073709551614\n");  // promotes past int64
    CHECK(run("print(1.5 + 1);") == "2.5\n");
}

TEST_CASE("control flow") {
    CHECK(run(kLoopSource) == "30\n");
    CHECK(run("if (1 < 2) { print(1); } else { print(2); }") == "1\n");
    CHECK(run("if (2 < 1) { print(1); } else if (3 < 4) { print(3); } else { print(2); }") ==
          "3\n");
    CHECK(run("var k = 0; while (k < 3) { print(k); k = k + 1; }") == "0\n1\n2\n");
    CHECK(run("decl f() { return 5; } print(f());") == "5\n");
    CHECK(run("decl f(n) { if (n == 0) { return 1; } return n * f(n - 1); } print(f(5));") ==
          "120\n");
    // return unwinds nested scopes
    CHECK(run("decl f() { var k = 0; while (k < 9) { if (k == 2) { return k; } k = k + 1; } "
              "return 0; } print(f());") == "2\n");
}

TEST_CASE("runtime errors carry the offending seq") {
    auto expect_error = [](const std::string& text, RuntimeErrorKind kind) {
        try {
            run(text);
            FAIL_CHECK("expected RuntimeError for: " << text);
        } catch (const RuntimeError& e) {
            CHECK(e.kind == kind);
            CHECK(e.seq >= 0);
        }
    };
    expect_error("print(1 / 0);", RuntimeErrorKind::DivisionByZero);
    expect_error("print(1.0 / 0.0);", RuntimeErrorKind::DivisionByZero);
    expect_error("print(nope);", RuntimeErrorKind::UndefinedIdentifier);
    expect_error("nope();", RuntimeErrorKind::UndefinedFunction);
    expect_error("print([1, 2][5]);", RuntimeErrorKind::IndexOutOfBounds);
    expect_error("print([1, 2][0 - 1]);", RuntimeErrorKind::IndexOutOfBounds);
    expect_error("print(1 + [2]);", RuntimeErrorKind::TypeError);
    expect_error("if (1) { }", RuntimeErrorKind::TypeError);
    expect_error("print(lenof(4));", RuntimeErrorKind::TypeError);
    expect_error("var x = 1; var x = 2;", RuntimeErrorKind::Redeclaration);
    expect_error("decl f(a) { return a; } print(f());", RuntimeErrorKind::ArityMismatch);
    expect_error("return 1;", RuntimeErrorKind::ReturnOutsideFunction);
}

TEST_CASE("recursion limit") {
    ExecOptions opts;
    opts.recursion_limit = 10;
    Ast ast = parse_text(kFibSource);
    CHECK_THROWS_AS(execute(ast, opts), RuntimeError);
    try {
        execute(ast, opts);
    } catch (const RuntimeError& e) {
        CHECK(e.kind == RuntimeErrorKind::RecursionLimit);
    }
}

TEST_CASE("snapshot counts follow the closed form") {
    const char* programs[] = {kStrlstSource, kFibSource, kLoopSource, kListOpsSource};
    for (const char* text : programs) {
        Ast ast = parse_text(text);
        uint64_t total = execute(ast).state.expr_counter;
        for (uint64_t step : {uint64_t(1), uint64_t(2), uint64_t(3), uint64_t(7), uint64_t(10),
                              total, total + 5}) {
            CAPTURE(text);
            CAPTURE(step);
            RecordResult rec = record(ast, step);
            CHECK(rec.total_expressions == total);
            CHECK(rec.snapshots.size() == expected_snapshot_count(total, step));
            // direct count: initial + one per multiple below total + final
            uint64_t direct = 2;
            for (uint64_t c = step; c < total; c += step) direct++;
            CHECK(rec.snapshots.size() == direct);
            CHECK(rec.snapshots.front().expr_counter == 0);
            CHECK(rec.snapshots.back().expr_counter == total);
            CHECK(rec.snapshots.back().is_final);
        }
        // step larger than the program: exactly start and end
        RecordResult rec = record(ast, total + 1000);
        CHECK(rec.snapshots.size() == 2);
    }
}

TEST_CASE("record is deterministic byte for byte") {
    Ast ast = parse_text(kFibSource);
    RecordResult a = record(ast, 7);
    RecordResult b = record(ast, 7);
    REQUIRE(a.snapshots.size() == b.snapshots.size());
    for (size_t i = 0; i < a.snapshots.size(); ++i) {
        CHECK(a.snapshots[i].bytes == b.snapshots[i].bytes);
    }
    CHECK(a.output == b.output);
}

TEST_CASE("record leaves execution behavior unchanged") {
    for (const char* text : {kStrlstSource, kFibSource, kLoopSource, kListOpsSource}) {
        Ast ast = parse_text(text);
        ExecOutcome plain = execute(ast);
        RecordResult rec = record(ast, 5);
        CHECK(rec.output == plain.output);
        CHECK(canonical_decode(rec.snapshots.back().bytes).expr_counter ==
              plain.state.expr_counter);
        CHECK(canonical_encode(plain.state) == rec.snapshots.back().bytes);
    }
}

TEST_CASE("replay chains reproduce every recorded state") {
    const char* programs[] = {kStrlstSource, kFibSource, kLoopSource, kListOpsSource};
    for (const char* text : programs) {
        CAPTURE(text);
        Ast ast = parse_text(text);
        uint64_t total = execute(ast).state.expr_counter;
        for (uint64_t step : {uint64_t(1), uint64_t(3), uint64_t(10), total + 1}) {
            CAPTURE(step);
            RecordResult rec = record(ast, step);
            check_replay_chain(ast, rec);
        }
    }
}

TEST_CASE("resume from the initial snapshot is full execution") {
    Ast ast = parse_text(kFibSource);
    RecordResult rec = record(ast, 1000000);
    ExecOutcome full = execute(ast);
    MemoryState initial = canonical_decode(rec.snapshots.front().bytes);
    ExecOutcome replayed = resume(ast, std::move(initial), rec.total_expressions);
    CHECK(canonical_equal(replayed.state, full.state));
    CHECK(replayed.output == full.output);
    CHECK(replayed.executed == rec.total_expressions);
}

TEST_CASE("resume from the final snapshot halts immediately") {
    Ast ast = parse_text(kLoopSource);
    RecordResult rec = record(ast, 4);
    MemoryState final_state = canonical_decode(rec.snapshots.back().bytes);
    ExecOutcome out = resume(ast, std::move(final_state), 50);
    CHECK(out.executed == 0);
    CHECK(out.output.empty());
    CHECK(canonical_encode(out.state) == rec.snapshots.back().bytes);
}

TEST_CASE("resume overshooting the end stops at program end") {
    Ast ast = parse_text(kLoopSource);
    RecordResult rec = record(ast, 5);
    MemoryState mid = canonical_decode(rec.snapshots[1].bytes);
    ExecOutcome out = resume(ast, std::move(mid), 1000000);
    CHECK(canonical_encode(out.state) == rec.snapshots.back().bytes);
}

TEST_CASE("memvar serves loop conditions across a halt inside the body") {
    // Snapshot lands mid-iteration: the while condition's producing expression
    // is pruned on resume and its value must come from the cache.
    Ast ast = parse_text(kLoopSource);
    uint64_t total = execute(ast).state.expr_counter;
    RecordResult rec = record(ast, 1);
    REQUIRE(rec.snapshots.size() == total + 1);
    check_replay_chain(ast, rec);
    // also resume each mid-loop snapshot straight to the end
    ExecOutcome full = execute(ast);
    for (size_t k = 1; k + 1 < rec.snapshots.size(); ++k) {
        MemoryState from = canonical_decode(rec.snapshots[k].bytes);
        ExecOutcome got = resume(ast, std::move(from), total);  // overshoots, ends at program end
        CHECK(canonical_equal(got.state, full.state));
    }
}

TEST_CASE("digest stored with snapshots matches the ast source") {
    SourceProgram src = SourceProgram::from_text(kLoopSource);
    Ast ast = parse(src);
    CHECK(ast.source_digest == src.digest);
}
