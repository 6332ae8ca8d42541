// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <tracenet/knowledge.hpp>

#include <algorithm>
#include <bit>

namespace tracenet {

size_t Bits::count() const {
    size_t n = 0;
    for (uint64_t x : w) n += static_cast<size_t>(std::popcount(x));
    return n;
}

bool Bits::is_subset_of(const Bits& o) const {
    for (size_t i = 0; i < w.size(); ++i) {
        if (w[i] & ~o.w[i]) return false;
    }
    return true;
}

ContractUniverse::ContractUniverse(std::vector<TxTemplate> declared,
                                   std::vector<FundingOutput> funding,
                                   std::array<ActorSetup, 2> actors,
                                   std::vector<PreSignatureDecl> presigs)
    : templates_(std::move(declared)), funding_(std::move(funding)) {
    assign_template_ids(templates_, funding_);
    declared_count_ = templates_.size();
    for (const auto& f : funding_) resolver_.add_funding(f);
    for (size_t i = 0; i < templates_.size(); ++i) {
        resolver_.add_template(templates_[i]);
        by_id_[templates_[i].id] = i;
        by_name_[templates_[i].name] = i;
    }

    derive_sweeps(actors);

    for (const auto& t : templates_) {
        perms_[t.id] = permitted_permutations(t, resolver_);
    }

    // Object universe, construction-stable: secrets first, then templates,
    // then the signatures those templates admit.
    using K = KnowledgeObject::Kind;
    std::set<std::string> keys;
    std::set<std::string> preimages;
    std::set<std::string> adaptors;
    for (const auto& a : actors) {
        keys.insert(a.secrets.keys.begin(), a.secrets.keys.end());
        preimages.insert(a.secrets.preimages.begin(), a.secrets.preimages.end());
        adaptors.insert(a.adaptor_keys.begin(), a.adaptor_keys.end());
    }
    for (const auto& p : presigs) adaptors.insert(p.adaptor);
    for (const auto& k : keys) intern({K::PrivKey, k, "", ""});
    for (const auto& d : preimages) intern({K::Preimage, d, "", ""});
    for (const auto& y : adaptors) intern({K::AdaptorPriv, y, "", ""});
    for (const auto& t : templates_) intern({K::Template, t.id, "", ""});

    std::map<std::string, std::set<std::string>> sig_keys;  // template id -> key names
    for (const auto& t : templates_) {
        auto& sk = sig_keys[t.id];
        for (const auto& p : perms_.at(t.id)) {
            for (const auto& w : p.witnesses) {
                for (const auto& term : w.terms) {
                    if (term.kind == ConstraintTerm::Kind::Sig && !term.negated) {
                        sk.insert(term.id);
                    }
                }
            }
        }
        for (const auto& k : sk) intern({K::Signature, k, t.id, ""});
    }

    for (const auto& p : presigs) {
        auto it = by_name_.find(p.tx_name);
        if (it == by_name_.end()) {
            throw InputError("pre-signature references unknown template '" + p.tx_name + "'");
        }
        const std::string& tid = templates_[it->second].id;
        intern({K::PreSignature, p.signer, tid, p.adaptor});
        // The adapted completion is a distinct fact: unlike a fresh signature
        // it shares the pre-signature's nonce, so observing it leaks the
        // adaptor secret.
        intern({K::Signature, p.signer, tid, p.adaptor});
        presig_index_.push_back({p.signer, tid, p.adaptor});
    }

    // Deduction rules.
    for (const auto& [tid, sk] : sig_keys) {
        const int tmpl = find_object({K::Template, tid, "", ""});
        for (const auto& k : sk) {
            const int priv = find_object({K::PrivKey, k, "", ""});
            if (priv < 0) continue;  // nobody holds this key
            rules_.push_back(
                {"sign", {tmpl, priv}, find_object({K::Signature, k, tid, ""})});
        }
    }
    for (size_t i = declared_count_; i < templates_.size(); ++i) {
        // A sweep of a template output becomes derivable with its source; a
        // sweep of a funding output is derivable outright.
        const OutputRef& src = templates_[i].ins[0].prevout;
        const int sweep = find_object({K::Template, templates_[i].id, "", ""});
        std::vector<int> ante;
        if (auto it = by_name_.find(src.tx); it != by_name_.end() && it->second < declared_count_) {
            ante.push_back(find_object({K::Template, templates_[it->second].id, "", ""}));
        }
        rules_.push_back({"sweep", std::move(ante), sweep});
    }
    for (const auto& p : presigs) {
        const std::string& tid = templates_[by_name_.at(p.tx_name)].id;
        const int presig = find_object({K::PreSignature, p.signer, tid, p.adaptor});
        const int asig = find_object({K::Signature, p.signer, tid, p.adaptor});
        const int adaptor = find_object({K::AdaptorPriv, p.adaptor, "", ""});
        rules_.push_back({"adapt", {presig, adaptor}, asig});
        rules_.push_back({"extract", {presig, asig}, adaptor});
    }

    // Initial facts: own secrets, declared templates, held pre-signatures.
    for (int ai = 0; ai < 2; ++ai) {
        Bits k = empty_bits();
        const ActorSetup& setup = actors[ai];
        for (const auto& key : setup.secrets.keys) k.set(find_object({K::PrivKey, key, "", ""}));
        for (const auto& d : setup.secrets.preimages) k.set(find_object({K::Preimage, d, "", ""}));
        for (const auto& y : setup.adaptor_keys) k.set(find_object({K::AdaptorPriv, y, "", ""}));
        for (size_t i = 0; i < declared_count_; ++i) {
            k.set(find_object({K::Template, templates_[i].id, "", ""}));
        }
        for (const auto& p : presigs) {
            if (!p.holders.count(static_cast<Actor>(ai))) continue;
            const std::string& tid = templates_[by_name_.at(p.tx_name)].id;
            k.set(find_object({K::PreSignature, p.signer, tid, p.adaptor}));
        }
        close(k);
        initial_[ai] = std::move(k);
    }
}

int ContractUniverse::intern(const KnowledgeObject& o) {
    auto it = object_ids_.find(o);
    if (it != object_ids_.end()) return it->second;
    const int id = static_cast<int>(objects_.size());
    objects_.push_back(o);
    object_ids_[o] = id;
    return id;
}

void ContractUniverse::derive_sweeps(const std::array<ActorSetup, 2>& actors) {
    struct Source {
        OutputRef ref;
        const TxOutput* out;
        std::string prev_id;
    };
    std::vector<Source> sources;
    for (size_t i = 0; i < declared_count_; ++i) {
        for (uint32_t oi = 0; oi < templates_[i].outs.size(); ++oi) {
            sources.push_back({{templates_[i].name, oi}, &templates_[i].outs[oi], templates_[i].id});
        }
    }
    for (const auto& f : funding_) {
        sources.push_back({f.ref, &f.out, f.ref.tx});
    }

    for (int ai = 0; ai < 2; ++ai) {
        const ActorSetup& mine = actors[ai];
        const ActorSetup& theirs = actors[1 - ai];
        if (mine.secrets.keys.empty()) continue;
        const std::string dest =
            mine.sweep_key.empty() ? *mine.secrets.keys.begin() : mine.sweep_key;
        for (const auto& src : sources) {
            const auto paths = sat(src.out->script);
            for (size_t p = 0; p < paths.size(); ++p) {
                if (!paths[p].producible()) continue;
                if (!path_controlled(paths[p], mine.secrets, theirs.secrets)) continue;
                TxTemplate sweep;
                sweep.name = "sweep_" + std::string(actor_name(static_cast<Actor>(ai))) + "_" +
                             src.ref.tx + "_" + to_dec(src.ref.index) + "_p" +
                             to_dec(static_cast<int64_t>(p));
                sweep.ins = {{src.ref, 0, static_cast<int>(p)}};
                sweep.outs = {{src.out->value,
                               MiniscriptNode{MiniscriptNode::Kind::Pk, {}, dest, 0}}};
                sweep.id = template_digest(sweep, [&](const OutputRef&) -> PrevInfo {
                    return {src.prev_id, src.out->value};
                });
                if (by_id_.count(sweep.id)) continue;  // structurally present already
                if (by_name_.count(sweep.name)) {
                    throw InputError("derived template name '" + sweep.name +
                                     "' collides with a declared template");
                }
                by_id_[sweep.id] = templates_.size();
                by_name_[sweep.name] = templates_.size();
                resolver_.add_template(sweep);
                templates_.push_back(std::move(sweep));
            }
        }
    }
}

int ContractUniverse::find_object(const KnowledgeObject& o) const {
    auto it = object_ids_.find(o);
    return it == object_ids_.end() ? -1 : it->second;
}

std::string ContractUniverse::object_label(int id) const {
    const KnowledgeObject& o = objects_.at(id);
    auto tx_name = [&](const std::string& tid) {
        const TxTemplate* t = by_id(tid);
        return t ? t->name : tid;
    };
    using K = KnowledgeObject::Kind;
    switch (o.kind) {
    case K::PrivKey: return "priv(" + o.a + ")";
    case K::Preimage: return "preimage(" + o.a + ")";
    case K::Template: return "tmpl(" + tx_name(o.a) + ")";
    case K::Signature:
        if (!o.c.empty()) return "asig(" + o.a + "," + tx_name(o.b) + "," + o.c + ")";
        return "sig(" + o.a + "," + tx_name(o.b) + ")";
    case K::PreSignature: return "presig(" + o.a + "," + tx_name(o.b) + "," + o.c + ")";
    case K::AdaptorPriv: return "adaptor(" + o.a + ")";
    }
    return "?";
}

const TxTemplate* ContractUniverse::by_id(const std::string& id) const {
    auto it = by_id_.find(id);
    return it == by_id_.end() ? nullptr : &templates_[it->second];
}

const TxTemplate* ContractUniverse::by_name(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? nullptr : &templates_[it->second];
}

const std::vector<WitnessPermutation>& ContractUniverse::perms(const std::string& id) const {
    return perms_.at(id);
}

Bits ContractUniverse::initial_knowledge(Actor a) const {
    return initial_[static_cast<int>(a)];
}

void ContractUniverse::close(Bits& k) const {
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& r : rules_) {
            if (k.get(r.consequent)) continue;
            bool ready = true;
            for (int a : r.antecedents) {
                if (!k.get(a)) {
                    ready = false;
                    break;
                }
            }
            if (ready) {
                k.set(r.consequent);
                changed = true;
            }
        }
    }
}

bool ContractUniverse::holds_signature(const Bits& k, const std::string& key,
                                       const std::string& tid) const {
    using K = KnowledgeObject::Kind;
    const int sig = find_object({K::Signature, key, tid, ""});
    if (sig >= 0 && k.get(sig)) return true;
    for (const auto& [signer, tx, adaptor] : presig_index_) {
        if (signer != key || tx != tid) continue;
        const int asig = find_object({K::Signature, key, tid, adaptor});
        if (asig >= 0 && k.get(asig)) return true;
    }
    return false;
}

std::vector<int> ContractUniverse::deducible_perms(const Bits& k, const TxTemplate& t) const {
    using K = KnowledgeObject::Kind;
    std::vector<int> out;
    const int tmpl = find_object({K::Template, t.id, "", ""});
    if (tmpl < 0 || !k.get(tmpl)) return out;
    const auto& ps = perms_.at(t.id);
    for (size_t i = 0; i < ps.size(); ++i) {
        if (!ps[i].producible()) continue;
        bool ok = true;
        for (const auto& w : ps[i].witnesses) {
            for (const auto& term : w.terms) {
                if (term.kind == ConstraintTerm::Kind::Sig) {
                    if (!holds_signature(k, term.id, t.id)) ok = false;
                } else if (term.kind == ConstraintTerm::Kind::HashEq && !term.negated) {
                    const int pre = find_object({K::Preimage, term.id, "", ""});
                    if (pre < 0 || !k.get(pre)) ok = false;
                }
                if (!ok) break;
            }
            if (!ok) break;
        }
        if (ok) out.push_back(static_cast<int>(i));
    }
    return out;
}

Bits ContractUniverse::reveal_set(const TxTemplate& t, const WitnessPermutation& p,
                                  const Bits& broadcaster) const {
    using K = KnowledgeObject::Kind;
    Bits r = empty_bits();
    for (const auto& w : p.witnesses) {
        for (const auto& term : w.terms) {
            if (term.kind == ConstraintTerm::Kind::Sig && !term.negated) {
                const int sig = find_object({K::Signature, term.id, t.id, ""});
                if (sig >= 0 && broadcaster.get(sig)) {
                    r.set(sig);
                    continue;
                }
                for (const auto& [signer, tx, adaptor] : presig_index_) {
                    if (signer != term.id || tx != t.id) continue;
                    const int asig = find_object({K::Signature, term.id, t.id, adaptor});
                    if (asig >= 0 && broadcaster.get(asig)) {
                        r.set(asig);
                        break;
                    }
                }
            } else if (term.kind == ConstraintTerm::Kind::HashEq && !term.negated) {
                const int pre = find_object({K::Preimage, term.id, "", ""});
                if (pre >= 0) r.set(pre);
            }
        }
    }
    return r;
}

SecretSet ContractUniverse::secrets_of(const Bits& k) const {
    SecretSet s;
    for (size_t i = 0; i < objects_.size(); ++i) {
        if (!k.get(i)) continue;
        if (objects_[i].kind == KnowledgeObject::Kind::PrivKey) s.keys.insert(objects_[i].a);
        if (objects_[i].kind == KnowledgeObject::Kind::Preimage) {
            s.preimages.insert(objects_[i].a);
        }
    }
    return s;
}

Bits ContractUniverse::empty_bits() const {
    Bits b;
    b.resize(objects_.size());
    return b;
}

} // namespace tracenet
