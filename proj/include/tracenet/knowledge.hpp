// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#ifndef TRACENET_KNOWLEDGE_HPP
#define TRACENET_KNOWLEDGE_HPP

#include <tracenet/txmodel.hpp>
#include <tracenet/types.hpp>

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace tracenet {

// Facts an actor can hold. Public constants (key and digest names, script
// text) are ambient and never tracked; only capability-bearing objects are.
struct KnowledgeObject {
    enum class Kind : uint8_t {
        PrivKey,       // a = key name
        Preimage,      // a = digest name
        Template,      // a = template digest id
        Signature,     // a = key name, b = template digest id, c = adaptor or ""
        PreSignature,  // a = key name, b = template digest id, c = adaptor name
        AdaptorPriv,   // a = adaptor name
    };

    Kind kind;
    std::string a;
    std::string b;
    std::string c;

    auto operator<=>(const KnowledgeObject&) const = default;
};

// Dense bitset over the contract's object universe.
struct Bits {
    std::vector<uint64_t> w;

    void resize(size_t bits) { w.assign((bits + 63) / 64, 0); }
    bool get(size_t i) const { return (w[i / 64] >> (i % 64)) & 1; }
    void set(size_t i) { w[i / 64] |= uint64_t{1} << (i % 64); }
    bool or_with(const Bits& o) {
        bool changed = false;
        for (size_t i = 0; i < w.size(); ++i) {
            const uint64_t next = w[i] | o.w[i];
            changed |= next != w[i];
            w[i] = next;
        }
        return changed;
    }
    size_t count() const;
    bool is_subset_of(const Bits& o) const;
    auto operator<=>(const Bits&) const = default;
};

// One precompiled deduction step over object ids.
struct GroundRule {
    std::string name;
    std::vector<int> antecedents;
    int consequent;
};

struct ActorSetup {
    SecretSet secrets;
    std::set<std::string> adaptor_keys;
    std::string sweep_key;  // defaults to the first declared key
};

struct PreSignatureDecl {
    std::string signer;
    std::string tx_name;
    std::string adaptor;
    std::set<Actor> holders;
};

// The finite fact universe of one contract: declared templates, the sweep
// templates any actor could derive from outputs it can unilaterally spend,
// every signature object those templates admit, and the deduction rules
// connecting them. Object and template orders are construction-stable.
class ContractUniverse {
public:
    ContractUniverse(std::vector<TxTemplate> declared, std::vector<FundingOutput> funding,
                     std::array<ActorSetup, 2> actors, std::vector<PreSignatureDecl> presigs);

    const std::vector<KnowledgeObject>& objects() const { return objects_; }
    int find_object(const KnowledgeObject& o) const;
    std::string object_label(int id) const;

    const std::vector<TxTemplate>& templates() const { return templates_; }
    size_t declared_count() const { return declared_count_; }
    const TxTemplate* by_id(const std::string& id) const;
    const TxTemplate* by_name(const std::string& name) const;
    const std::vector<WitnessPermutation>& perms(const std::string& id) const;
    const OutputResolver& resolver() const { return resolver_; }
    const std::vector<FundingOutput>& funding() const { return funding_; }
    const std::vector<GroundRule>& rules() const { return rules_; }

    Bits initial_knowledge(Actor a) const;
    // Least fixpoint of the deduction rules over the given facts.
    void close(Bits& k) const;

    // Permutation indices the holder of k could fire: the template is known,
    // every chosen path is producible, and each signature and preimage on it
    // is held. A signature slot accepts the plain signature or any adapted
    // completion of a declared pre-signature.
    std::vector<int> deducible_perms(const Bits& k, const TxTemplate& t) const;

    // Objects the broadcaster's witness exposes to every observer. Signature
    // slots carry the plain signature when the broadcaster holds it and the
    // adapted completion otherwise; only a published completion shares the
    // pre-signature's nonce and so supports extraction.
    Bits reveal_set(const TxTemplate& t, const WitnessPermutation& p,
                    const Bits& broadcaster) const;

    // Plain signature or any adapted completion for the key and template.
    bool holds_signature(const Bits& k, const std::string& key, const std::string& tid) const;

    // Key and preimage view of a fact set, for ownership tests.
    SecretSet secrets_of(const Bits& k) const;

    Bits empty_bits() const;

private:
    int intern(const KnowledgeObject& o);
    void derive_sweeps(const std::array<ActorSetup, 2>& actors);

    std::vector<TxTemplate> templates_;
    size_t declared_count_ = 0;
    std::vector<FundingOutput> funding_;
    OutputResolver resolver_;
    std::map<std::string, size_t> by_id_;
    std::map<std::string, size_t> by_name_;
    std::map<std::string, std::vector<WitnessPermutation>> perms_;

    std::vector<KnowledgeObject> objects_;
    std::map<KnowledgeObject, int> object_ids_;
    std::vector<GroundRule> rules_;
    std::array<Bits, 2> initial_;
    // (signer, template id, adaptor) of every declared pre-signature.
    std::vector<std::array<std::string, 3>> presig_index_;
};

} // namespace tracenet

#endif // TRACENET_KNOWLEDGE_HPP
