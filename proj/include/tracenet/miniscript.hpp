// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_MINISCRIPT_HPP
#define TRACENET_MINISCRIPT_HPP

#include <tracenet/types.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace tracenet {

// One symbolic condition on a witness stack slot, or a tx-level timelock.
// Slot-bearing kinds use slot >= 0; After/Older carry slot == -1.
struct ConstraintTerm {
    enum class Kind : uint8_t { Sig, HashEq, SizeEq, ConstEq, After, Older };

    Kind kind;
    int slot = -1;
    std::string id;    // key name for Sig, digest name for HashEq
    int64_t num = 0;   // byte size, constant, or lock height
    bool negated = false;

    bool operator==(const ConstraintTerm&) const = default;
    std::string to_string() const;
};

// A conjunction of constraint terms over a contiguous block of witness slots.
// Kept normalized: slot terms ascending, then After, then Older; timelocks of
// equal kind and polarity merged to the largest bound.
struct SymbolicWitness {
    std::vector<ConstraintTerm> terms;
    int slot_count = 0;

    void normalize();
    // True when no term is negated, i.e. some assignment of concrete witness
    // data can satisfy every term.
    bool producible() const;
    bool operator==(const SymbolicWitness&) const = default;
    std::string to_string() const;
};

// Sequential composition: lhs keeps slots [0, lhs.slot_count), rhs slots are
// shifted up by lhs.slot_count. Result is normalized.
SymbolicWitness compose(const SymbolicWitness& lhs, const SymbolicWitness& rhs);

struct MiniscriptNode {
    enum class Kind : uint8_t { Andor, AndV, VerifyWrap, Pk, Sha256, Older, After };

    Kind kind;
    std::vector<MiniscriptNode> children;
    std::string id;    // key or digest name
    int64_t num = 0;   // lock height

    bool operator==(const MiniscriptNode&) const = default;
    std::string to_string() const;
};

enum class MiniscriptType : uint8_t { B, V };

struct ScriptOp {
    enum class Op : uint8_t {
        Push,
        CheckSig,
        CheckSigVerify,
        NotIf,
        Else,
        EndIf,
        Verify,
        Size,
        Equal,
        EqualVerify,
        Sha256,
        CheckSequenceVerify,
        CheckLockTimeVerify,
    };
    enum class PushKind : uint8_t { Key, Digest, Num };

    Op op;
    PushKind push_kind = PushKind::Num;
    std::string push;

    bool operator==(const ScriptOp&) const = default;
};

MiniscriptNode parse_miniscript(const std::string& text);

// Throws InputError unless the node satisfies the composition rules:
// and_v(x,y) needs x:V and y:B, v(x) wraps B-typed x other than and_v, and
// andor(x,y,z) needs a pk/sha256 condition x and B-typed branches.
MiniscriptType type_check(const MiniscriptNode& node);

std::vector<ScriptOp> compile_to_script(const MiniscriptNode& node);

// Inverse of compile_to_script on well-typed nodes.
MiniscriptNode lift_script(const std::vector<ScriptOp>& ops);

// Multi-line render with 2-space indentation inside branch bodies.
std::string render_script(const std::vector<ScriptOp>& ops);

// Single-line render, token-joined.
std::string script_text(const std::vector<ScriptOp>& ops);

// Satisfaction and dissatisfaction paths, in canonical order (hash/left
// alternatives before timeout/right ones). Dissatisfying a verify-wrapped
// expression is an error.
std::vector<SymbolicWitness> sat(const MiniscriptNode& node);
std::vector<SymbolicWitness> dsat(const MiniscriptNode& node);

} // namespace tracenet

#endif // TRACENET_MINISCRIPT_HPP
