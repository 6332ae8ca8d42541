// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <tracenet/txmodel.hpp>
#include <tracenet/util.hpp>

#include <algorithm>

namespace tracenet {

void OutputResolver::add_funding(const FundingOutput& f) {
    if (outs_.count(f.ref)) throw InputError("duplicate output " + f.ref.to_string());
    outs_[f.ref] = f.out;
    funding_[f.ref] = f;
}

void OutputResolver::add_template(const TxTemplate& t) {
    for (uint32_t i = 0; i < t.outs.size(); ++i) {
        OutputRef r{t.name, i};
        if (outs_.count(r)) throw InputError("duplicate output " + r.to_string());
        outs_[r] = t.outs[i];
    }
}

const TxOutput* OutputResolver::find(const OutputRef& r) const {
    auto it = outs_.find(r);
    return it == outs_.end() ? nullptr : &it->second;
}

const FundingOutput* OutputResolver::funding(const OutputRef& r) const {
    auto it = funding_.find(r);
    return it == funding_.end() ? nullptr : &it->second;
}

bool WitnessPermutation::producible() const {
    return std::all_of(witnesses.begin(), witnesses.end(),
                       [](const SymbolicWitness& w) { return w.producible(); });
}

std::string WitnessPermutation::label() const {
    if (!multi) return tx_name;
    std::string s = tx_name + "/p";
    for (size_t i = 0; i < choice.size(); ++i) {
        if (i) s += '.';
        s += to_dec(choice[i]);
    }
    return s;
}

std::vector<WitnessPermutation> permitted_permutations(const TxTemplate& tx,
                                                       const OutputResolver& res) {
    std::vector<std::vector<int>> per_input_choices;
    std::vector<std::vector<SymbolicWitness>> per_input_paths;
    for (const TxInput& in : tx.ins) {
        const TxOutput* prev = res.find(in.prevout);
        if (!prev) {
            throw InputError("template '" + tx.name + "' spends unknown output " +
                             in.prevout.to_string());
        }
        auto paths = sat(prev->script);
        std::vector<int> choices;
        if (in.committed) {
            if (*in.committed < 0 || static_cast<size_t>(*in.committed) >= paths.size()) {
                throw InputError("template '" + tx.name + "' commits to missing path " +
                                 to_dec(*in.committed) + " of " + in.prevout.to_string());
            }
            choices = {*in.committed};
        } else {
            for (size_t i = 0; i < paths.size(); ++i) choices.push_back(static_cast<int>(i));
        }
        per_input_choices.push_back(std::move(choices));
        per_input_paths.push_back(std::move(paths));
    }

    std::vector<WitnessPermutation> out;
    std::vector<int> cursor(tx.ins.size(), 0);
    size_t total = 1;
    for (const auto& c : per_input_choices) total *= c.size();
    for (size_t n = 0; n < total; ++n) {
        WitnessPermutation p;
        p.tx_name = tx.name;
        p.tx_id = tx.id;
        p.multi = total > 1;
        for (size_t i = 0; i < tx.ins.size(); ++i) {
            const int path = per_input_choices[i][cursor[i]];
            p.choice.push_back(path);
            p.witnesses.push_back(per_input_paths[i][path]);
        }
        out.push_back(std::move(p));
        // Advance with the last input varying fastest.
        for (size_t i = tx.ins.size(); i-- > 0;) {
            if (++cursor[i] < static_cast<int>(per_input_choices[i].size())) break;
            cursor[i] = 0;
        }
    }
    return out;
}

int64_t witness_older_bound(const SymbolicWitness& w) {
    int64_t bound = 0;
    for (const auto& t : w.terms) {
        if (t.kind == ConstraintTerm::Kind::Older && !t.negated) bound = std::max(bound, t.num);
    }
    return bound;
}

int64_t witness_after_bound(const SymbolicWitness& w) {
    int64_t bound = 0;
    for (const auto& t : w.terms) {
        if (t.kind == ConstraintTerm::Kind::After && !t.negated) bound = std::max(bound, t.num);
    }
    return bound;
}

bool path_owned(const SymbolicWitness& w, const SecretSet& s) {
    for (const auto& t : w.terms) {
        if (t.negated) return false;
        if (t.kind == ConstraintTerm::Kind::Sig && !s.keys.count(t.id)) return false;
        if (t.kind == ConstraintTerm::Kind::HashEq && !s.preimages.count(t.id)) return false;
    }
    return true;
}

bool path_controlled(const SymbolicWitness& w, const SecretSet& mine, const SecretSet& theirs) {
    for (const auto& t : w.terms) {
        if (t.kind != ConstraintTerm::Kind::Sig) continue;
        if (!mine.keys.count(t.id)) return false;
        if (theirs.keys.count(t.id)) return false;
    }
    return true;
}

Height earliest_broadcast(const TxTemplate& tx, const std::map<OutputRef, Height>& confirmations) {
    Height h = tx.after;
    for (const TxInput& in : tx.ins) {
        auto it = confirmations.find(in.prevout);
        if (it == confirmations.end()) {
            throw InputError("no confirmation height for " + in.prevout.to_string());
        }
        h = std::max(h, it->second + in.older);
    }
    return h;
}

std::string template_digest(const TxTemplate& t, const PrevLookup& prev) {
    std::string enc = "tx\nafter:" + to_dec(t.after) + "\n";
    Amount in_value = 0;
    for (const TxInput& in : t.ins) {
        PrevInfo p = prev(in.prevout);
        in_value += p.value;
        enc += "in:" + p.id + ":" + to_dec(in.prevout.index) + ":" + to_dec(in.older) + ":" +
               (in.committed ? to_dec(*in.committed) : std::string("-")) + "\n";
    }
    Amount out_value = 0;
    for (const TxOutput& o : t.outs) {
        enc += "out:" + to_dec(o.value) + ":" + o.script.to_string() + "\n";
        out_value += o.value;
    }
    if (!t.ins.empty() && in_value != out_value) {
        throw InputError("template '" + t.name + "' does not conserve value (" + to_dec(in_value) +
                         " in, " + to_dec(out_value) + " out)");
    }
    return sha256_hex(enc);
}

void assign_template_ids(std::vector<TxTemplate>& txs, const std::vector<FundingOutput>& funding) {
    std::map<std::string, TxTemplate*> by_name;
    for (auto& t : txs) {
        if (by_name.count(t.name)) throw InputError("duplicate template name '" + t.name + "'");
        by_name[t.name] = &t;
        t.id.clear();
    }
    std::map<OutputRef, const FundingOutput*> fund;
    for (const auto& f : funding) {
        if (by_name.count(f.ref.tx)) {
            throw InputError("funding txid '" + f.ref.tx + "' collides with a template name");
        }
        fund[f.ref] = &f;
    }

    // Depth-first id assignment over template references; a template on the
    // active path twice is a cycle.
    std::set<std::string> active;
    auto resolve = [&](auto&& self, TxTemplate& t) -> const std::string& {
        if (!t.id.empty()) return t.id;
        if (active.count(t.name)) {
            throw InputError("template reference cycle through '" + t.name + "'");
        }
        active.insert(t.name);
        t.id = template_digest(t, [&](const OutputRef& r) -> PrevInfo {
            if (auto it = by_name.find(r.tx); it != by_name.end()) {
                if (r.index >= it->second->outs.size()) {
                    throw InputError("template '" + t.name + "' spends missing output " +
                                     r.to_string());
                }
                return {self(self, *it->second), it->second->outs[r.index].value};
            }
            if (auto fit = fund.find(r); fit != fund.end()) {
                return {r.tx, fit->second->out.value};
            }
            throw InputError("template '" + t.name + "' spends unknown output " + r.to_string());
        });
        active.erase(t.name);
        return t.id;
    };
    for (auto& t : txs) resolve(resolve, t);

    std::set<std::string> ids;
    for (const auto& t : txs) {
        if (!ids.insert(t.id).second) {
            throw InputError("duplicate template structure for '" + t.name + "'");
        }
    }
}

} // namespace tracenet
