#include "mona/interp.hpp"

#include <unordered_map>

namespace mona {

namespace {

struct HaltSignal {};

// Return statements propagate as a flow status rather than an exception:
// returns are the common case in recursive programs and unwinding is hot.
enum class Flow : uint8_t { Normal, Returned };

enum class Mode : uint8_t { Plain, Record, Replay };

class Interp {
public:
    Interp(const Ast& ast, const ExecOptions& opts) : ast_(ast), opts_(opts) {
        st_ = MemoryState::initial();
    }

    void load(MemoryState from) {
        st_ = std::move(from);
        st_.active = 0;  // descent re-attaches recorded scopes
    }

    void set_record(uint64_t step, std::vector<SnapshotBlob>* sink) {
        mode_ = Mode::Record;
        step_ = step;
        sink_ = sink;
    }

    void set_replay(uint64_t budget) {
        mode_ = Mode::Replay;
        budget_ = budget;
    }

    void run() {
        if (ast_.root == kNoNode) return;
        try {
            if (eval(ast_.root) == Flow::Returned) {
                const Node& r = ast_.at(ast_.root);
                throw RuntimeError(RuntimeErrorKind::ReturnOutsideFunction, r.seq, r.line, r.col,
                                   "return outside of a function");
            }
        } catch (HaltSignal&) {
            // replay budget reached; state is already consistent
        }
    }

    MemoryState take_state() { return std::move(st_); }
    std::string take_output() { return std::move(out_); }
    uint64_t executed() const { return executed_; }
    uint64_t counter() const { return st_.expr_counter; }
    const MemoryState& state() const { return st_; }

private:
    [[noreturn]] void fail(RuntimeErrorKind kind, const Node& n, const std::string& msg) {
        int64_t seq = n.seq >= 0 ? n.seq : n.anchor;
        throw RuntimeError(kind, seq, n.line, n.col, msg);
    }

    void notify() {
        if (opts_.observer) opts_.observer(st_);
    }

    void open_scope() {
        if (st_.active + 1 < int64_t(st_.scope_seq.size())) {
            st_.active++;  // re-attach a scope recorded in the loaded state
        } else {
            st_.scope_seq.push_back(-1);
            st_.frames.emplace_back();
            st_.active++;
        }
        notify();
    }

    void close_scope() {
        st_.scope_seq.pop_back();
        st_.frames.pop_back();
        st_.active--;
        notify();
    }

    void complete(const Node& n) {
        st_.scope_seq[size_t(st_.active)] = n.seq;
        st_.expr_counter++;
        executed_++;
        notify();
        if (mode_ == Mode::Record && st_.expr_counter % step_ == 0) {
            sink_->push_back({canonical_encode(st_), st_.expr_counter, 0, false});
        }
        if (mode_ == Mode::Replay && executed_ >= budget_) throw HaltSignal{};
    }

    void push(Value v) { st_.stack.push_back(std::move(v)); }

    Value pop(const Node& at) {
        if (st_.stack.empty()) {
            fail(RuntimeErrorKind::StackUnderflow, at, "operand stack underflow");
        }
        Value v = std::move(st_.stack.back());
        st_.stack.pop_back();
        return v;
    }

    // All value consumption funnels through here. The memvar cache makes the
    // read idempotent across halt/resume: the first read evaluates the child
    // (or pops the recorded stack value when the child is pruned) and caches
    // it in the current scope; later reads are served from the cache.
    Value operand(NodeId child_id) {
        const Node& child = ast_.at(child_id);
        MemvarKey key{child.anchor, child.slot};
        if (const Value* hit = st_.frames[size_t(st_.active)].find_memvar(key)) {
            return *hit;
        }
        Value v;
        if (child.seq >= 0) {
            eval(child_id);
            v = pop(child);
        } else {
            v = eval_value(child_id);
        }
        st_.frames[size_t(st_.active)].put_memvar(key, v);
        return v;
    }

    Value lookup_var(const Node& n) {
        for (int64_t d = st_.active; d >= 0; --d) {
            if (const Value* v = st_.frames[size_t(d)].find_var(n.name)) return *v;
        }
        fail(RuntimeErrorKind::UndefinedIdentifier, n, "undefined identifier '" + n.name + "'");
    }

    Value* lookup_var_slot(const Node& n) {
        for (int64_t d = st_.active; d >= 0; --d) {
            if (Value* v = st_.frames[size_t(d)].find_var(n.name)) return v;
        }
        fail(RuntimeErrorKind::UndefinedIdentifier, n, "undefined identifier '" + n.name + "'");
    }

    int64_t index_of(const Node& at, const Value& idx, size_t len, const char* what) {
        if (!idx.is_int()) fail(RuntimeErrorKind::TypeError, at, std::string(what) + " must be an integer");
        const Int& i = idx.as_int();
        if (!i.is_small() || i.small() < 0 || uint64_t(i.small()) >= len) {
            fail(RuntimeErrorKind::IndexOutOfBounds, at,
                 std::string(what) + " " + i.to_string() + " out of bounds for length " +
                     std::to_string(len));
        }
        return i.small();
    }

    Value eval_value(NodeId id) {
        const Node& n = ast_.at(id);
        switch (n.kind) {
            case NodeKind::Literal: return n.literal;
            case NodeKind::Identifier: return lookup_var(n);
            case NodeKind::ListExpr: {
                Value::List elems;
                elems.reserve(n.kids.size());
                for (NodeId kid : n.kids) elems.push_back(operand(kid));
                return Value::list(std::move(elems));
            }
            case NodeKind::Index: {
                Value base = operand(n.kids[0]);
                Value idx = operand(n.kids[1]);
                if (!base.is_list()) fail(RuntimeErrorKind::TypeError, n, "indexing a non-list");
                int64_t i = index_of(n, idx, base.list_size(), "index");
                return base.as_list()[size_t(i)];
            }
            case NodeKind::Slice: {
                Value base = operand(n.kids[0]);
                if (!base.is_list()) fail(RuntimeErrorKind::TypeError, n, "slicing a non-list");
                int64_t len = int64_t(base.list_size());
                size_t kid = 1;
                int64_t lo = 0, hi = len;
                if (n.index_count & 1) lo = slice_bound(n, operand(n.kids[kid++]), len);
                if (n.index_count & 2) hi = slice_bound(n, operand(n.kids[kid++]), len);
                if (lo > hi) lo = hi;
                Value::List out(base.as_list().begin() + lo, base.as_list().begin() + hi);
                return Value::list(std::move(out));
            }
            case NodeKind::Lenof: {
                Value v = operand(n.kids[0]);
                if (!v.is_list()) fail(RuntimeErrorKind::TypeError, n, "lenof of a non-list");
                return Value::integer(Int(int64_t(v.list_size())));
            }
            default:
                fail(RuntimeErrorKind::TypeError, n, "node is not a value expression");
        }
    }

    int64_t slice_bound(const Node& n, const Value& v, int64_t len) {
        if (!v.is_int()) fail(RuntimeErrorKind::TypeError, n, "slice bound must be an integer");
        const Int& i = v.as_int();
        int64_t b = i.is_small() ? i.small() : (i.negative() ? -len - 1 : len + 1);
        if (b < 0) b += len;  // pythonic wrap
        if (b < 0) b = 0;
        if (b > len) b = len;
        return b;
    }

    Value require_bool(const Node& n, Value v, const char* what) {
        if (!v.is_bool()) fail(RuntimeErrorKind::TypeError, n, std::string(what) + " must be a boolean");
        return v;
    }

    Value apply_binop(const Node& n, const Value& l, const Value& r) {
        if (n.bin_op == BinOp::Add && l.is_list() && r.is_list()) {
            Value::List out = l.as_list();
            const auto& rhs = r.as_list();
            out.insert(out.end(), rhs.begin(), rhs.end());
            return Value::list(std::move(out));
        }
        if (!l.is_numeric() || !r.is_numeric()) {
            fail(RuntimeErrorKind::TypeError, n, "arithmetic on non-numeric operands");
        }
        if (l.is_int() && r.is_int()) {
            const Int& a = l.as_int();
            const Int& b = r.as_int();
            switch (n.bin_op) {
                case BinOp::Add: return Value::integer(a + b);
                case BinOp::Sub: return Value::integer(a - b);
                case BinOp::Mul: return Value::integer(a * b);
                case BinOp::Div:
                    if (b == Int(0)) fail(RuntimeErrorKind::DivisionByZero, n, "division by zero");
                    return Value::integer(a.divided_by(b));
            }
        }
        double a = l.numeric_as_double();
        double b = r.numeric_as_double();
        switch (n.bin_op) {
            case BinOp::Add: return Value::floating(a + b);
            case BinOp::Sub: return Value::floating(a - b);
            case BinOp::Mul: return Value::floating(a * b);
            case BinOp::Div:
                if (b == 0.0) fail(RuntimeErrorKind::DivisionByZero, n, "division by zero");
                return Value::floating(a / b);
        }
        fail(RuntimeErrorKind::TypeError, n, "bad operator");
    }

    Value apply_cmp(const Node& n, const Value& l, const Value& r) {
        if (n.cmp_op == CmpOp::Eq) return Value::boolean(l.equals(r));
        int c;
        if (l.is_numeric() && r.is_numeric()) {
            if (l.is_int() && r.is_int()) {
                c = l.as_int().compare(r.as_int());
            } else {
                double a = l.numeric_as_double(), b = r.numeric_as_double();
                c = a < b ? -1 : (a > b ? 1 : 0);
            }
        } else if (l.is_char() && r.is_char()) {
            c = l.as_char() < r.as_char() ? -1 : (l.as_char() > r.as_char() ? 1 : 0);
        } else {
            fail(RuntimeErrorKind::TypeError, n, "ordering comparison on unsupported operands");
        }
        switch (n.cmp_op) {
            case CmpOp::Le: return Value::boolean(c <= 0);
            case CmpOp::Lt: return Value::boolean(c < 0);
            case CmpOp::Gt: return Value::boolean(c > 0);
            case CmpOp::Ge: return Value::boolean(c >= 0);
            default: return Value::boolean(false);  // unreachable
        }
    }

    Flow run_statement(NodeId id) {
        const Node& n = ast_.at(id);
        if (n.seq >= 0) {
            if (kind_pushes_value(n.kind) && n.kind != NodeKind::Return) {
                operand(id);  // expression statement: consume and discard
                return Flow::Normal;
            }
            return eval(id);
        }
        // Non-evaluable expression used as a statement: evaluate for any
        // nested calls, discard the value. Re-walks are idempotent via the
        // operand cache.
        eval_value(id);
        return Flow::Normal;
    }

    Flow statements(const Node& n) {
        for (NodeId kid : n.kids) {
            if (run_statement(kid) == Flow::Returned) return Flow::Returned;
        }
        return Flow::Normal;
    }

    // Evaluates an evaluable node; Flow::Returned propagates an active return
    // towards the enclosing call.
    Flow eval(NodeId id) {
        const Node& n = ast_.at(id);
        // Declarations register even when pruned: resume-time descent must be
        // able to resolve calls without re-executing the declaration.
        if (n.kind == NodeKind::FuncDecl) funcs_[n.name] = id;
        if (st_.scope_seq[size_t(st_.active)] >= n.seq) {
            // Pruned. A pruned return still transfers control: its value is
            // already on the recorded stack.
            return n.kind == NodeKind::Return ? Flow::Returned : Flow::Normal;
        }
        switch (n.kind) {
            case NodeKind::Program:
            case NodeKind::Body:
                if (statements(n) == Flow::Returned) return Flow::Returned;
                complete(n);
                break;
            case NodeKind::FuncDecl:
                complete(n);
                break;
            case NodeKind::Params: {
                const Value::List& args = pending_args_.as_list();
                if (args.size() != n.kids.size()) {
                    fail(RuntimeErrorKind::ArityMismatch, n,
                         "expected " + std::to_string(n.kids.size()) + " arguments, got " +
                             std::to_string(args.size()));
                }
                for (size_t i = 0; i < n.kids.size(); ++i) {
                    const Node& p = ast_.at(n.kids[i]);
                    if (!st_.frames[size_t(st_.active)].declare_var(p.name, args[i])) {
                        fail(RuntimeErrorKind::Redeclaration, p, "duplicate parameter '" + p.name + "'");
                    }
                }
                complete(n);
                break;
            }
            case NodeKind::VarDecl: {
                Value v = operand(n.kids[0]);
                if (!st_.frames[size_t(st_.active)].declare_var(n.name, std::move(v))) {
                    fail(RuntimeErrorKind::Redeclaration, n,
                         "variable '" + n.name + "' already declared in this scope");
                }
                complete(n);
                break;
            }
            case NodeKind::Assign: {
                std::vector<Value> subs;
                subs.reserve(n.index_count);
                for (size_t i = 0; i < n.index_count; ++i) subs.push_back(operand(n.kids[i]));
                Value v = operand(n.kids[n.index_count]);
                Value* slot = lookup_var_slot(n);
                for (size_t i = 0; i < subs.size(); ++i) {
                    if (!slot->is_list()) fail(RuntimeErrorKind::TypeError, n, "indexing a non-list");
                    int64_t idx = index_of(n, subs[i], slot->list_size(), "index");
                    slot = &slot->mutable_list()[size_t(idx)];
                }
                *slot = std::move(v);
                complete(n);
                break;
            }
            case NodeKind::Return: {
                Value v = n.kids.empty() ? Value::none() : operand(n.kids[0]);
                push(std::move(v));
                complete(n);
                return Flow::Returned;
            }
            case NodeKind::Print: {
                Value args = operand(n.kids[0]);
                out_ += args.as_list()[0].render();
                out_ += '\n';
                complete(n);
                break;
            }
            case NodeKind::Args: {
                Value::List elems;
                elems.reserve(n.kids.size());
                for (NodeId kid : n.kids) elems.push_back(operand(kid));
                push(Value::list(std::move(elems)));
                complete(n);
                break;
            }
            case NodeKind::BinaryOp: {
                Value l = operand(n.kids[0]);
                Value r = operand(n.kids[1]);
                push(apply_binop(n, l, r));
                complete(n);
                break;
            }
            case NodeKind::BoolExpr: {
                Value l = operand(n.kids[0]);
                Value r = operand(n.kids[1]);
                push(apply_cmp(n, l, r));
                complete(n);
                break;
            }
            case NodeKind::IfStmt: {
                size_t pairs = (n.kids.size() - (n.has_else ? 1 : 0)) / 2;
                bool taken = false;
                for (size_t k = 0; k < pairs && !taken; ++k) {
                    Value c = require_bool(n, operand(n.kids[2 * k]), "if condition");
                    if (c.as_bool()) {
                        taken = true;
                        open_scope();
                        Flow f = eval(n.kids[2 * k + 1]);
                        close_scope();
                        if (f == Flow::Returned) return Flow::Returned;
                    }
                }
                if (!taken && n.has_else) {
                    open_scope();
                    Flow f = eval(n.kids.back());
                    close_scope();
                    if (f == Flow::Returned) return Flow::Returned;
                }
                complete(n);
                break;
            }
            case NodeKind::WhileStmt: {
                for (;;) {
                    open_scope();  // per-iteration scope: fresh C entry and memvar region
                    Value c = require_bool(n, operand(n.kids[0]), "while condition");
                    if (!c.as_bool()) {
                        close_scope();
                        break;
                    }
                    Flow f = eval(n.kids[1]);
                    close_scope();
                    if (f == Flow::Returned) return Flow::Returned;
                }
                complete(n);
                break;
            }
            case NodeKind::FuncCall: {
                Value args = operand(n.kids[0]);
                auto it = funcs_.find(n.name);
                if (it == funcs_.end()) {
                    fail(RuntimeErrorKind::UndefinedFunction, n,
                         "undefined function '" + n.name + "'");
                }
                if (call_depth_ >= opts_.recursion_limit) {
                    fail(RuntimeErrorKind::RecursionLimit, n,
                         "recursion limit of " + std::to_string(opts_.recursion_limit) +
                             " frames exceeded");
                }
                const Node& fn = ast_.at(it->second);
                int64_t base = st_.active;
                call_depth_++;
                open_scope();
                pending_args_ = std::move(args);
                eval(fn.kids[0]);  // params bind in the call scope
                Flow f = eval(fn.kids[1]);
                while (st_.active > base) close_scope();
                call_depth_--;
                // A returned value rides on the stack; fallthrough yields none.
                if (f != Flow::Returned) push(Value::none());
                complete(n);
                break;
            }
            default:
                fail(RuntimeErrorKind::TypeError, n, "unexpected node");
        }
        return Flow::Normal;
    }

    const Ast& ast_;
    const ExecOptions& opts_;
    MemoryState st_;
    Mode mode_ = Mode::Plain;
    uint64_t step_ = 0;
    std::vector<SnapshotBlob>* sink_ = nullptr;
    uint64_t budget_ = 0;
    uint64_t executed_ = 0;
    std::string out_;
    std::unordered_map<std::string, NodeId> funcs_;
    Value pending_args_;
    int64_t call_depth_ = 0;
};

}  // namespace

ExecOutcome execute(const Ast& ast, const ExecOptions& opts) {
    Interp interp(ast, opts);
    interp.run();
    ExecOutcome out;
    out.executed = interp.executed();
    out.output = interp.take_output();
    out.state = interp.take_state();
    return out;
}

RecordResult record(const Ast& ast, uint64_t step, const ExecOptions& opts) {
    if (step == 0) throw std::invalid_argument("step must be >= 1");
    RecordResult result;
    Interp interp(ast, opts);
    result.snapshots.push_back({canonical_encode(interp.state()), 0, 0, false});
    interp.set_record(step, &result.snapshots);
    interp.run();
    result.total_expressions = interp.counter();
    if (result.snapshots.back().expr_counter == result.total_expressions &&
        result.snapshots.size() > 1) {
        result.snapshots.back().is_final = true;
    } else {
        result.snapshots.push_back(
            {canonical_encode(interp.state()), result.total_expressions, 0, true});
    }
    for (size_t i = 0; i < result.snapshots.size(); ++i) result.snapshots[i].index = i;
    result.output = interp.take_output();
    return result;
}

ExecOutcome resume(const Ast& ast, MemoryState from, uint64_t steps, const ExecOptions& opts) {
    if (steps == 0) throw std::invalid_argument("steps must be >= 1");
    Interp interp(ast, opts);
    interp.load(std::move(from));
    interp.set_replay(steps);
    interp.run();
    ExecOutcome out;
    out.executed = interp.executed();
    out.output = interp.take_output();
    out.state = interp.take_state();
    return out;
}

uint64_t expected_snapshot_count(uint64_t total_expressions, uint64_t step) {
    if (total_expressions == 0) return 2;  // initial + final, identical states
    return 2 + (total_expressions - 1) / step;
}

}  // namespace mona
