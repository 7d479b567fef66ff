#pragma once

#include <stdexcept>
#include <string>

#include "mona/ast.hpp"

namespace mona {

class SyntaxError : public std::runtime_error {
public:
    SyntaxError(uint32_t line, uint32_t col, const std::string& msg)
        : std::runtime_error(std::to_string(line) + ":" + std::to_string(col) + ": " + msg),
          line(line),
          col(col) {}

    uint32_t line;
    uint32_t col;
};

// Parses Mona source and annotates every evaluable node with a SeqID.
// Throws SyntaxError on malformed input; never returns a partial AST.
Ast parse(const SourceProgram& source);

// Grammar pass only, no SeqIDs.
Ast parse_unannotated(const SourceProgram& source);

// Assigns SeqIDs from an ascending counter in evaluation-completion order of
// a full traversal (post-order over evaluable nodes), and operand slots for
// the memvar cache.
void assign_seq_ids(Ast& ast);

inline Hash32 program_digest(const SourceProgram& source) { return source.digest; }

}  // namespace mona
