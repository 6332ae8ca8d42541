// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <tracenet/miniscript.hpp>
#include <tracenet/util.hpp>

#include <algorithm>
#include <cctype>

namespace tracenet {

namespace {

int term_rank(const ConstraintTerm& t) {
    switch (t.kind) {
    case ConstraintTerm::Kind::After: return 1;
    case ConstraintTerm::Kind::Older: return 2;
    default: return 0;
    }
}

} // namespace

std::string ConstraintTerm::to_string() const {
    const std::string w = "w" + to_dec(slot);
    switch (kind) {
    case Kind::Sig:
        return (negated ? "!sig " : "sig ") + w + " " + id;
    case Kind::HashEq:
        return "sha256 " + w + (negated ? " != " : " = ") + id;
    case Kind::SizeEq:
        return "size " + w + (negated ? " != " : " = ") + to_dec(num);
    case Kind::ConstEq:
        return w + (negated ? " != " : " = ") + to_dec(num);
    case Kind::After:
        return (negated ? "after < " : "after >= ") + to_dec(num);
    case Kind::Older:
        return (negated ? "older < " : "older >= ") + to_dec(num);
    }
    return "?";
}

void SymbolicWitness::normalize() {
    std::stable_sort(terms.begin(), terms.end(), [](const ConstraintTerm& a, const ConstraintTerm& b) {
        const int ra = term_rank(a);
        const int rb = term_rank(b);
        if (ra != rb) return ra < rb;
        if (ra == 0) return a.slot < b.slot;
        return false;
    });
    // Collapse timelocks of the same kind and polarity to the tightest bound.
    std::vector<ConstraintTerm> out;
    out.reserve(terms.size());
    for (const auto& t : terms) {
        if (term_rank(t) != 0 && !out.empty() && out.back().kind == t.kind &&
            out.back().negated == t.negated) {
            out.back().num = std::max(out.back().num, t.num);
            continue;
        }
        out.push_back(t);
    }
    terms = std::move(out);
}

bool SymbolicWitness::producible() const {
    return std::none_of(terms.begin(), terms.end(),
                        [](const ConstraintTerm& t) { return t.negated; });
}

std::string SymbolicWitness::to_string() const {
    std::string s = "[";
    for (size_t i = 0; i < terms.size(); ++i) {
        if (i) s += ", ";
        s += terms[i].to_string();
    }
    return s + "]";
}

SymbolicWitness compose(const SymbolicWitness& lhs, const SymbolicWitness& rhs) {
    SymbolicWitness out = lhs;
    out.slot_count = lhs.slot_count + rhs.slot_count;
    for (ConstraintTerm t : rhs.terms) {
        if (t.slot >= 0) t.slot += lhs.slot_count;
        out.terms.push_back(std::move(t));
    }
    out.normalize();
    return out;
}

std::string MiniscriptNode::to_string() const {
    switch (kind) {
    case Kind::Pk: return "pk(" + id + ")";
    case Kind::Sha256: return "sha256(" + id + ")";
    case Kind::Older: return "older(" + to_dec(num) + ")";
    case Kind::After: return "after(" + to_dec(num) + ")";
    case Kind::VerifyWrap: return "v(" + children[0].to_string() + ")";
    case Kind::AndV:
        return "and_v(" + children[0].to_string() + "," + children[1].to_string() + ")";
    case Kind::Andor:
        return "andor(" + children[0].to_string() + "," + children[1].to_string() + "," +
               children[2].to_string() + ")";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Parsing

namespace {

struct Parser {
    const std::string& text;
    size_t pos = 0;

    explicit Parser(const std::string& t) : text(t) {}

    [[noreturn]] void fail(const std::string& msg, size_t at) const {
        throw InputError("miniscript parse error at position " + to_dec(static_cast<int64_t>(at)) +
                         ": " + msg);
    }

    void skip_ws() {
        while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    }

    void expect(char c) {
        skip_ws();
        if (pos >= text.size() || text[pos] != c) {
            fail(std::string("expected '") + c + "'", pos);
        }
        ++pos;
    }

    std::string ident() {
        skip_ws();
        const size_t start = pos;
        while (pos < text.size()) {
            const char c = text[pos];
            if (std::isalnum(static_cast<unsigned char>(c)) || c == '_') {
                ++pos;
            } else {
                break;
            }
        }
        if (pos == start) fail("expected identifier", pos);
        return text.substr(start, pos - start);
    }

    int64_t number() {
        skip_ws();
        const size_t start = pos;
        while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
        if (pos == start) fail("expected number", pos);
        const std::string tok = text.substr(start, pos - start);
        if (tok.size() > 10) fail("timelock out of range", start);
        const int64_t v = std::stoll(tok);
        if (v < 1 || v >= (int64_t{1} << 31)) fail("timelock out of range", start);
        return v;
    }

    std::string digest_arg() {
        skip_ws();
        const size_t start = pos;
        std::string name = ident();
        if (name.size() > 2 && name[0] == '0' && name[1] == 'x') {
            const std::string hex = name.substr(2);
            if (hex.size() != 64 || !is_hex(hex)) fail("bad digest length", start);
        }
        return name;
    }

    MiniscriptNode expr() {
        const size_t start = pos;
        const std::string head = ident();
        MiniscriptNode n;
        if (head == "pk") {
            n.kind = MiniscriptNode::Kind::Pk;
            expect('(');
            n.id = ident();
            expect(')');
        } else if (head == "sha256") {
            n.kind = MiniscriptNode::Kind::Sha256;
            expect('(');
            n.id = digest_arg();
            expect(')');
        } else if (head == "older") {
            n.kind = MiniscriptNode::Kind::Older;
            expect('(');
            n.num = number();
            expect(')');
        } else if (head == "after") {
            n.kind = MiniscriptNode::Kind::After;
            expect('(');
            n.num = number();
            expect(')');
        } else if (head == "v") {
            n.kind = MiniscriptNode::Kind::VerifyWrap;
            expect('(');
            n.children.push_back(expr());
            expect(')');
        } else if (head == "and_v") {
            n.kind = MiniscriptNode::Kind::AndV;
            expect('(');
            n.children.push_back(expr());
            expect(',');
            n.children.push_back(expr());
            expect(')');
        } else if (head == "andor") {
            n.kind = MiniscriptNode::Kind::Andor;
            expect('(');
            n.children.push_back(expr());
            expect(',');
            n.children.push_back(expr());
            expect(',');
            n.children.push_back(expr());
            expect(')');
        } else {
            fail("unknown fragment '" + head + "'", start);
        }
        return n;
    }
};

} // namespace

MiniscriptNode parse_miniscript(const std::string& text) {
    Parser p(text);
    MiniscriptNode n = p.expr();
    p.skip_ws();
    if (p.pos != text.size()) p.fail("trailing input", p.pos);
    type_check(n);
    return n;
}

MiniscriptType type_check(const MiniscriptNode& node) {
    using K = MiniscriptNode::Kind;
    switch (node.kind) {
    case K::Pk:
    case K::Sha256:
    case K::Older:
    case K::After:
        return MiniscriptType::B;
    case K::VerifyWrap: {
        if (node.children[0].kind == K::AndV) {
            throw InputError("type error: v() cannot wrap and_v(); nest the wrap instead");
        }
        if (type_check(node.children[0]) != MiniscriptType::B) {
            throw InputError("type error: v() requires a base expression");
        }
        return MiniscriptType::V;
    }
    case K::AndV: {
        if (node.children[0].kind != K::VerifyWrap) {
            throw InputError("type error: and_v() first argument must be verify-wrapped");
        }
        type_check(node.children[0]);
        if (type_check(node.children[1]) != MiniscriptType::B) {
            throw InputError("type error: and_v() second argument must be a base expression");
        }
        return MiniscriptType::B;
    }
    case K::Andor: {
        if (node.children[0].kind != K::Pk && node.children[0].kind != K::Sha256) {
            throw InputError("type error: andor() condition must be pk() or sha256()");
        }
        if (type_check(node.children[1]) != MiniscriptType::B ||
            type_check(node.children[2]) != MiniscriptType::B) {
            throw InputError("type error: andor() branches must be base expressions");
        }
        return MiniscriptType::B;
    }
    }
    throw InputError("type error: unknown node kind");
}

// ---------------------------------------------------------------------------
// Compilation

namespace {

using Op = ScriptOp::Op;
using PushKind = ScriptOp::PushKind;

void emit(std::vector<ScriptOp>& out, const MiniscriptNode& node) {
    using K = MiniscriptNode::Kind;
    switch (node.kind) {
    case K::Pk:
        out.push_back({Op::Push, PushKind::Key, node.id});
        out.push_back({Op::CheckSig});
        return;
    case K::Sha256:
        out.push_back({Op::Size});
        out.push_back({Op::Push, PushKind::Num, "32"});
        out.push_back({Op::EqualVerify});
        out.push_back({Op::Sha256});
        out.push_back({Op::Push, PushKind::Digest, node.id});
        out.push_back({Op::Equal});
        return;
    case K::Older:
        out.push_back({Op::Push, PushKind::Num, to_dec(node.num)});
        out.push_back({Op::CheckSequenceVerify});
        return;
    case K::After:
        out.push_back({Op::Push, PushKind::Num, to_dec(node.num)});
        out.push_back({Op::CheckLockTimeVerify});
        return;
    case K::VerifyWrap: {
        emit(out, node.children[0]);
        // Fuse into the verify form of the tail opcode when one exists.
        if (out.back().op == Op::CheckSig) {
            out.back().op = Op::CheckSigVerify;
        } else if (out.back().op == Op::Equal) {
            out.back().op = Op::EqualVerify;
        } else {
            out.push_back({Op::Verify});
        }
        return;
    }
    case K::AndV:
        emit(out, node.children[0]);
        emit(out, node.children[1]);
        return;
    case K::Andor:
        emit(out, node.children[0]);
        out.push_back({Op::NotIf});
        emit(out, node.children[2]);
        out.push_back({Op::Else});
        emit(out, node.children[1]);
        out.push_back({Op::EndIf});
        return;
    }
}

} // namespace

std::vector<ScriptOp> compile_to_script(const MiniscriptNode& node) {
    type_check(node);
    std::vector<ScriptOp> out;
    emit(out, node);
    return out;
}

// ---------------------------------------------------------------------------
// Lifting

namespace {

struct Lifter {
    const std::vector<ScriptOp>& ops;
    size_t pos = 0;

    explicit Lifter(const std::vector<ScriptOp>& o) : ops(o) {}

    [[noreturn]] void fail(const std::string& msg) const {
        throw InputError("script lift error at op " + to_dec(static_cast<int64_t>(pos)) + ": " + msg);
    }

    bool at(Op op) const { return pos < ops.size() && ops[pos].op == op; }

    const ScriptOp& take(Op op, const char* what) {
        if (!at(op)) fail(std::string("expected ") + what);
        return ops[pos++];
    }

    // Parses one unit: a leaf or an andor block, plus its verify marker if
    // present. Sets is_verify when the unit is V-typed.
    MiniscriptNode unit(bool& is_verify) {
        is_verify = false;
        if (at(Op::Push) && ops[pos].push_kind == PushKind::Key) {
            MiniscriptNode pk{MiniscriptNode::Kind::Pk, {}, ops[pos].push, 0};
            ++pos;
            if (at(Op::CheckSigVerify)) {
                ++pos;
                is_verify = true;
                return MiniscriptNode{MiniscriptNode::Kind::VerifyWrap, {pk}, "", 0};
            }
            take(Op::CheckSig, "OP_CHECKSIG");
            return maybe_andor(pk, is_verify);
        }
        if (at(Op::Size)) {
            ++pos;
            const ScriptOp& sz = take(Op::Push, "size push");
            if (sz.push != "32") fail("expected 32-byte size guard");
            take(Op::EqualVerify, "OP_EQUALVERIFY");
            take(Op::Sha256, "OP_SHA256");
            const ScriptOp& d = take(Op::Push, "digest push");
            MiniscriptNode h{MiniscriptNode::Kind::Sha256, {}, d.push, 0};
            if (at(Op::EqualVerify)) {
                ++pos;
                is_verify = true;
                return MiniscriptNode{MiniscriptNode::Kind::VerifyWrap, {h}, "", 0};
            }
            take(Op::Equal, "OP_EQUAL");
            return maybe_andor(h, is_verify);
        }
        if (at(Op::Push) && ops[pos].push_kind == PushKind::Num) {
            const std::string n = ops[pos].push;
            ++pos;
            MiniscriptNode lock;
            if (at(Op::CheckSequenceVerify)) {
                lock = {MiniscriptNode::Kind::Older, {}, "", std::stoll(n)};
            } else if (at(Op::CheckLockTimeVerify)) {
                lock = {MiniscriptNode::Kind::After, {}, "", std::stoll(n)};
            } else {
                fail("expected timelock opcode after number push");
            }
            ++pos;
            if (at(Op::Verify)) {
                ++pos;
                is_verify = true;
                return MiniscriptNode{MiniscriptNode::Kind::VerifyWrap, {lock}, "", 0};
            }
            return lock;
        }
        fail("expected leaf");
    }

    // After a B-typed condition leaf, an OP_NOTIF starts an andor block.
    MiniscriptNode maybe_andor(MiniscriptNode cond, bool& is_verify) {
        if (!at(Op::NotIf)) return cond;
        ++pos;
        MiniscriptNode z = sequence(Op::Else);
        take(Op::Else, "OP_ELSE");
        MiniscriptNode y = sequence(Op::EndIf);
        take(Op::EndIf, "OP_ENDIF");
        MiniscriptNode a{MiniscriptNode::Kind::Andor, {std::move(cond), std::move(y), std::move(z)}, "", 0};
        if (at(Op::Verify)) {
            ++pos;
            is_verify = true;
            return MiniscriptNode{MiniscriptNode::Kind::VerifyWrap, {a}, "", 0};
        }
        return a;
    }

    // V-typed units chained onto one trailing B-typed unit, folded to the
    // right as nested and_v.
    MiniscriptNode sequence(Op stop) {
        std::vector<MiniscriptNode> vs;
        MiniscriptNode tail;
        bool have_tail = false;
        while (pos < ops.size() && ops[pos].op != stop) {
            if (have_tail) fail("expression continues after base unit");
            bool is_verify = false;
            MiniscriptNode u = unit(is_verify);
            if (is_verify) {
                vs.push_back(std::move(u));
            } else {
                tail = std::move(u);
                have_tail = true;
            }
        }
        if (!have_tail) fail("expected base unit");
        MiniscriptNode result = std::move(tail);
        for (auto it = vs.rbegin(); it != vs.rend(); ++it) {
            result = MiniscriptNode{MiniscriptNode::Kind::AndV, {std::move(*it), std::move(result)}, "", 0};
        }
        return result;
    }
};

} // namespace

MiniscriptNode lift_script(const std::vector<ScriptOp>& ops) {
    Lifter l(ops);
    MiniscriptNode n = l.sequence(static_cast<Op>(0xff));
    if (l.pos != ops.size()) l.fail("trailing opcodes");
    type_check(n);
    return n;
}

// ---------------------------------------------------------------------------
// Rendering

namespace {

std::string op_token(const ScriptOp& op) {
    switch (op.op) {
    case Op::Push: return "<" + op.push + ">";
    case Op::CheckSig: return "OP_CHECKSIG";
    case Op::CheckSigVerify: return "OP_CHECKSIGVERIFY";
    case Op::NotIf: return "OP_NOTIF";
    case Op::Else: return "OP_ELSE";
    case Op::EndIf: return "OP_ENDIF";
    case Op::Verify: return "OP_VERIFY";
    case Op::Size: return "OP_SIZE";
    case Op::Equal: return "OP_EQUAL";
    case Op::EqualVerify: return "OP_EQUALVERIFY";
    case Op::Sha256: return "OP_SHA256";
    case Op::CheckSequenceVerify: return "OP_CHECKSEQUENCEVERIFY";
    case Op::CheckLockTimeVerify: return "OP_CHECKLOCKTIMEVERIFY";
    }
    return "?";
}

bool breaks_line(Op op) {
    switch (op) {
    case Op::CheckSig:
    case Op::CheckSigVerify:
    case Op::Equal:
    case Op::EqualVerify:
    case Op::CheckSequenceVerify:
    case Op::CheckLockTimeVerify:
        return true;
    default:
        return false;
    }
}

} // namespace

std::string render_script(const std::vector<ScriptOp>& ops) {
    std::string out;
    std::string line;
    int depth = 0;
    auto flush = [&] {
        if (line.empty()) return;
        for (int i = 0; i < depth; ++i) out += "  ";
        out += line;
        out += '\n';
        line.clear();
    };
    for (size_t i = 0; i < ops.size(); ++i) {
        const ScriptOp& op = ops[i];
        if (op.op == Op::NotIf || op.op == Op::Else || op.op == Op::EndIf) {
            flush();
            if (op.op != Op::NotIf) --depth;
            line = op_token(op);
            // OP_VERIFY closing a verify-wrapped branch stays on this line.
            if (i + 1 < ops.size() && ops[i + 1].op == Op::Verify) {
                line += " " + op_token(ops[i + 1]);
                ++i;
            }
            flush();
            if (op.op != Op::EndIf) ++depth;
            continue;
        }
        if (!line.empty()) line += ' ';
        line += op_token(op);
        if (breaks_line(op.op)) {
            if (i + 1 < ops.size() && ops[i + 1].op == Op::Verify) {
                line += " " + op_token(ops[i + 1]);
                ++i;
            }
            flush();
        }
    }
    flush();
    return out;
}

std::string script_text(const std::vector<ScriptOp>& ops) {
    std::string out;
    for (size_t i = 0; i < ops.size(); ++i) {
        if (i) out += ' ';
        out += op_token(ops[i]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Satisfactions

namespace {

std::vector<SymbolicWitness> combine(const std::vector<SymbolicWitness>& lhs,
                                     const std::vector<SymbolicWitness>& rhs) {
    std::vector<SymbolicWitness> out;
    out.reserve(lhs.size() * rhs.size());
    for (const auto& l : lhs) {
        for (const auto& r : rhs) {
            out.push_back(compose(l, r));
        }
    }
    return out;
}

SymbolicWitness single(ConstraintTerm t, int slots) {
    SymbolicWitness w;
    w.terms.push_back(std::move(t));
    w.slot_count = slots;
    return w;
}

SymbolicWitness pair(ConstraintTerm a, ConstraintTerm b, int slots) {
    SymbolicWitness w;
    w.terms.push_back(std::move(a));
    w.terms.push_back(std::move(b));
    w.slot_count = slots;
    return w;
}

} // namespace

std::vector<SymbolicWitness> sat(const MiniscriptNode& node) {
    using K = MiniscriptNode::Kind;
    using TK = ConstraintTerm::Kind;
    switch (node.kind) {
    case K::Pk:
        return {single({TK::Sig, 0, node.id, 0, false}, 1)};
    case K::Sha256:
        return {single({TK::HashEq, 0, node.id, 0, false}, 1)};
    case K::Older:
        return {single({TK::Older, -1, "", node.num, false}, 0)};
    case K::After:
        return {single({TK::After, -1, "", node.num, false}, 0)};
    case K::VerifyWrap:
        return sat(node.children[0]);
    case K::AndV:
        return combine(sat(node.children[1]), sat(node.children[0]));
    case K::Andor: {
        std::vector<SymbolicWitness> out = combine(sat(node.children[1]), sat(node.children[0]));
        for (auto& w : combine(sat(node.children[2]), dsat(node.children[0]))) {
            out.push_back(std::move(w));
        }
        return out;
    }
    }
    throw InputError("satisfaction: unknown node kind");
}

std::vector<SymbolicWitness> dsat(const MiniscriptNode& node) {
    using K = MiniscriptNode::Kind;
    using TK = ConstraintTerm::Kind;
    switch (node.kind) {
    case K::Pk:
        return {single({TK::ConstEq, 0, "", 0, false}, 1)};
    case K::Sha256:
        return {pair({TK::SizeEq, 0, "", 32, false}, {TK::HashEq, 0, node.id, 0, true}, 1)};
    case K::Older:
        return {single({TK::Older, -1, "", node.num, true}, 0)};
    case K::After:
        return {single({TK::After, -1, "", node.num, true}, 0)};
    case K::VerifyWrap:
        throw InputError("dissatisfaction undefined for verify-wrapped expression");
    case K::AndV:
        return combine(dsat(node.children[1]), sat(node.children[0]));
    case K::Andor: {
        std::vector<SymbolicWitness> out = combine(dsat(node.children[2]), sat(node.children[0]));
        for (auto& w : combine(dsat(node.children[1]), sat(node.children[0]))) {
            out.push_back(std::move(w));
        }
        return out;
    }
    }
    throw InputError("dissatisfaction: unknown node kind");
}

} // namespace tracenet
