#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mona/hash.hpp"
#include "mona/value.hpp"

namespace mona {

// A Mona source text plus the SHA-256 of its exact bytes.
struct SourceProgram {
    std::string text;
    Hash32 digest;

    static SourceProgram from_text(std::string text);
};

enum class NodeKind : uint8_t {
    Program,
    FuncDecl,
    Params,
    Body,
    IfStmt,
    WhileStmt,
    VarDecl,
    Assign,
    Return,
    Print,
    FuncCall,
    Args,
    BinaryOp,
    BoolExpr,
    ListExpr,
    Index,
    Slice,
    Lenof,
    Literal,
    Identifier,
};

enum class BinOp : uint8_t { Add, Sub, Mul, Div };
enum class CmpOp : uint8_t { Eq, Le, Lt, Gt, Ge };

using NodeId = int32_t;
constexpr NodeId kNoNode = -1;

// One AST node in the arena. `seq` is the SeqID: assigned to evaluable node
// kinds in evaluation-completion order of a full traversal, -1 otherwise.
// `slot` keys this node's value in the memvar cache of its nearest evaluable
// ancestor (`anchor`), so a value consumed before a halt survives resumption.
struct Node {
    NodeKind kind;
    uint32_t line = 0;
    uint32_t col = 0;
    int32_t seq = -1;
    int32_t anchor = -1;
    uint32_t slot = 0;
    BinOp bin_op = BinOp::Add;
    CmpOp cmp_op = CmpOp::Eq;
    std::vector<NodeId> kids;
    std::string name;   // identifier, call target, var-decl/assign target
    Value literal;      // Literal nodes
    // Assign: number of subscript expressions before the value expression.
    uint16_t index_count = 0;
    // IfStmt layout flag: kids = cond0, body0, cond1, body1, ..., [else body].
    bool has_else = false;
};

struct Ast {
    std::vector<Node> nodes;
    NodeId root = kNoNode;
    Hash32 source_digest{};
    int64_t evaluable_count = 0;  // number of seq-bearing nodes

    const Node& at(NodeId id) const { return nodes[size_t(id)]; }
    Node& at(NodeId id) { return nodes[size_t(id)]; }
};

inline bool kind_is_evaluable(NodeKind k) {
    switch (k) {
        case NodeKind::Program:
        case NodeKind::FuncDecl:
        case NodeKind::Params:
        case NodeKind::Body:
        case NodeKind::IfStmt:
        case NodeKind::WhileStmt:
        case NodeKind::VarDecl:
        case NodeKind::Assign:
        case NodeKind::Return:
        case NodeKind::Print:
        case NodeKind::FuncCall:
        case NodeKind::Args:
        case NodeKind::BinaryOp:
        case NodeKind::BoolExpr:
            return true;
        default:
            return false;
    }
}

// True for expression kinds whose result travels on the operand stack.
inline bool kind_pushes_value(NodeKind k) {
    switch (k) {
        case NodeKind::FuncCall:
        case NodeKind::Args:
        case NodeKind::BinaryOp:
        case NodeKind::BoolExpr:
        case NodeKind::Return:
            return true;
        default:
            return false;
    }
}

const char* kind_name(NodeKind k);

}  // namespace mona
