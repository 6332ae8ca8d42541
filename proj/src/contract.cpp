// Copyright (c) 2026 The Tracenet developers
// Distributed under the MIT software license, see the accompanying
// file COPYING or http://www.opensource.org/licenses/mit-license.php.

#include <tracenet/contract.hpp>
#include <tracenet/util.hpp>

#include <json.hpp>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace tracenet {

namespace {

using nlohmann::json;

std::vector<std::string> string_list(const json& j, const std::string& where) {
    if (!j.is_array()) throw InputError(where + " must be an array of strings");
    std::vector<std::string> out;
    for (const auto& e : j) {
        if (!e.is_string()) throw InputError(where + " must contain only strings");
        out.push_back(e.get<std::string>());
    }
    return out;
}

int64_t int_field(const json& j, const std::string& key, const std::string& where,
                  int64_t fallback, bool required = false) {
    if (!j.contains(key)) {
        if (required) throw InputError(where + " lacks required field '" + key + "'");
        return fallback;
    }
    if (!j.at(key).is_number_integer()) {
        throw InputError(where + "." + key + " must be an integer");
    }
    return j.at(key).get<int64_t>();
}

std::string string_field(const json& j, const std::string& key, const std::string& where,
                         bool required) {
    if (!j.contains(key)) {
        if (required) throw InputError(where + " lacks required field '" + key + "'");
        return "";
    }
    if (!j.at(key).is_string()) throw InputError(where + "." + key + " must be a string");
    return j.at(key).get<std::string>();
}

ContractDescription::ActorDecl parse_actor(const json& j, const std::string& where) {
    ContractDescription::ActorDecl a;
    if (j.contains("keys")) a.keys = string_list(j.at("keys"), where + ".keys");
    if (j.contains("preimages")) a.preimages = string_list(j.at("preimages"), where + ".preimages");
    if (j.contains("adaptor_keys")) {
        a.adaptor_keys = string_list(j.at("adaptor_keys"), where + ".adaptor_keys");
    }
    a.sweep_key = string_field(j, "sweep_key", where, false);
    return a;
}

void collect_ids(const MiniscriptNode& n, std::set<std::string>& keys,
                 std::set<std::string>& digests) {
    if (n.kind == MiniscriptNode::Kind::Pk) keys.insert(n.id);
    if (n.kind == MiniscriptNode::Kind::Sha256) digests.insert(n.id);
    for (const MiniscriptNode& c : n.children) collect_ids(c, keys, digests);
}

void require_unique(const std::vector<std::string>& xs, const std::string& what) {
    std::set<std::string> seen;
    for (const auto& x : xs) {
        if (x.empty()) throw InputError(what + " contains an empty id");
        if (!seen.insert(x).second) throw InputError(what + " declares '" + x + "' twice");
    }
}

OutputRef parse_ref(const std::string& text, const std::string& where) {
    const auto colon = text.rfind(':');
    if (colon == std::string::npos || colon == 0 || colon + 1 == text.size()) {
        throw InputError(where + " must be '<tx>:<index>', got '" + text + "'");
    }
    char* end = nullptr;
    const long idx = std::strtol(text.c_str() + colon + 1, &end, 10);
    if (*end != '\0' || idx < 0) {
        throw InputError(where + " has a bad output index in '" + text + "'");
    }
    return {text.substr(0, colon), static_cast<uint32_t>(idx)};
}

// Invariants the engine cannot see once scripts are parsed and ids interned:
// single declaration of every referenced id, per-template value conservation,
// and consistent knowledge claims.
void validate(const ContractDescription& d) {
    if (d.version != 1) {
        throw InputError("unsupported contract version " + to_dec(d.version));
    }

    std::set<std::string> keys, digests, adaptors;
    auto declare = [](std::set<std::string>& target, const std::vector<std::string>& xs,
                      const std::string& what) {
        for (const auto& x : xs) {
            if (x.empty()) throw InputError(what + " contains an empty id");
            if (!target.insert(x).second) {
                throw InputError(what + " '" + x + "' is declared twice");
            }
        }
    };
    declare(keys, d.actors[0].keys, "key");
    declare(keys, d.actors[1].keys, "key");
    declare(keys, d.publics.keys, "key");
    declare(digests, d.publics.digests, "digest");
    declare(adaptors, d.publics.adaptor_pubs, "adaptor point");

    for (int i = 0; i < 2; ++i) {
        const auto& a = d.actors[i];
        const std::string who = actor_name(static_cast<Actor>(i));
        require_unique(a.preimages, who + ".preimages");
        require_unique(a.adaptor_keys, who + ".adaptor_keys");
        for (const auto& p : a.preimages) {
            if (!digests.count(p)) {
                throw InputError(who + " holds preimage of undeclared digest '" + p + "'");
            }
        }
        for (const auto& y : a.adaptor_keys) {
            if (!adaptors.count(y)) {
                throw InputError(who + " holds undeclared adaptor secret '" + y + "'");
            }
        }
        if (!a.sweep_key.empty() &&
            std::find(a.keys.begin(), a.keys.end(), a.sweep_key) == a.keys.end()) {
            throw InputError(who + ".sweep_key '" + a.sweep_key + "' is not one of its keys");
        }
        if (a.keys.empty()) throw InputError(who + " declares no keys");
    }

    std::set<std::string> tx_names;
    std::map<OutputRef, Amount> declared_outs;
    for (const auto& f : d.funding_outputs) {
        if (f.txid.empty()) throw InputError("funding output with empty txid");
        tx_names.insert(f.txid);
        if (!declared_outs.emplace(OutputRef{f.txid, f.index}, f.value).second) {
            throw InputError("funding output '" + f.txid + ":" + to_dec(f.index) +
                             "' is declared twice");
        }
        if (f.value < 0) throw InputError("funding output '" + f.txid + "' has negative value");
        if (f.confirmed_height && *f.confirmed_height > d.initial_blockheight) {
            throw InputError("funding output '" + f.txid +
                             "' confirms above the initial blockheight");
        }
    }
    std::set<std::string> template_names;
    for (const auto& t : d.templates) {
        if (t.name.empty()) throw InputError("template with empty name");
        if (!template_names.insert(t.name).second) {
            throw InputError("template '" + t.name + "' is declared twice");
        }
        if (tx_names.count(t.name)) {
            throw InputError("template '" + t.name + "' collides with a funding txid");
        }
        if (t.ins.empty()) throw InputError("template '" + t.name + "' has no inputs");
        if (t.outs.empty()) throw InputError("template '" + t.name + "' has no outputs");
        if (t.after < 0) throw InputError("template '" + t.name + "' has a negative lock");
        for (uint32_t i = 0; i < t.outs.size(); ++i) {
            declared_outs.emplace(OutputRef{t.name, i}, t.outs[i].value);
        }
    }
    for (const auto& t : d.templates) tx_names.insert(t.name);

    // Scripts may reference only declared ids; parse also type-checks.
    auto check_script = [&](const std::string& text, const std::string& where) {
        MiniscriptNode node;
        try {
            node = parse_miniscript(text);
        } catch (const InputError& e) {
            throw InputError(where + ": " + e.what());
        }
        std::set<std::string> k, h;
        collect_ids(node, k, h);
        for (const auto& id : k) {
            if (!keys.count(id)) throw InputError(where + " references undeclared key '" + id + "'");
        }
        for (const auto& id : h) {
            if (!digests.count(id)) {
                throw InputError(where + " references undeclared digest '" + id + "'");
            }
        }
    };
    for (const auto& f : d.funding_outputs) {
        check_script(f.script, "funding output '" + f.txid + ":" + to_dec(f.index) + "'");
    }
    for (const auto& t : d.templates) {
        Amount in_sum = 0, out_sum = 0;
        for (const auto& in : t.ins) {
            const OutputRef ref = parse_ref(in.prevout, "template '" + t.name + "' input");
            const auto it = declared_outs.find(ref);
            if (it == declared_outs.end()) {
                throw InputError("template '" + t.name + "' spends undeclared output '" +
                                 in.prevout + "'");
            }
            if (in.older < 0) {
                throw InputError("template '" + t.name + "' input has a negative lock");
            }
            in_sum += it->second;
        }
        for (uint32_t i = 0; i < t.outs.size(); ++i) {
            if (t.outs[i].value < 0) {
                throw InputError("template '" + t.name + "' output has negative value");
            }
            check_script(t.outs[i].script, "template '" + t.name + "' output " + to_dec(i));
            out_sum += t.outs[i].value;
        }
        if (in_sum != out_sum) {
            throw InputError("value conservation violated in template '" + t.name + "' (in " +
                             to_dec(in_sum) + ", out " + to_dec(out_sum) + ")");
        }
    }

    for (const auto& p : d.pre_signatures) {
        if (!keys.count(p.signer)) {
            throw InputError("pre-signature by undeclared key '" + p.signer + "'");
        }
        if (!template_names.count(p.tx)) {
            throw InputError("pre-signature over undeclared template '" + p.tx + "'");
        }
        if (!p.adaptor.empty() && !adaptors.count(p.adaptor)) {
            throw InputError("pre-signature uses undeclared adaptor point '" + p.adaptor + "'");
        }
        if (p.holders.empty()) {
            throw InputError("pre-signature over '" + p.tx + "' has no holders");
        }
        std::set<std::string> seen;
        for (const auto& h : p.holders) {
            if (h != "int" && h != "ext") {
                throw InputError("pre-signature holder must be int or ext, got '" + h + "'");
            }
            if (!seen.insert(h).second) {
                throw InputError("pre-signature over '" + p.tx + "' repeats holder '" + h + "'");
            }
        }
    }

    if (d.initial_blockheight < 0) throw InputError("initial_blockheight must be non-negative");
    if (d.conf_delay[0] < 0 || d.conf_delay[1] < 0) {
        throw InputError("confirmation delays must be non-negative");
    }
    if (d.reorg_depth < 0) throw InputError("reorg_depth must be non-negative");
    for (const auto& m : d.message_payloads) {
        if (m != "preimage" && m != "adaptor" && m != "signature" && m != "presignature") {
            throw InputError("unknown message payload kind '" + m + "'");
        }
    }
    parse_policy(d.policy);
}

} // namespace

ContractDescription parse_contract(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw InputError(std::string("contract parse error: ") + e.what());
    }
    if (!j.is_object()) throw InputError("contract must be a JSON object");

    ContractDescription d;
    try {
        d.version = static_cast<int>(int_field(j, "version", "contract", 0, true));
        if (!j.contains("actors") || !j.at("actors").is_object()) {
            throw InputError("contract lacks an actors object");
        }
        const json& actors = j.at("actors");
        for (int i = 0; i < 2; ++i) {
            const std::string who = actor_name(static_cast<Actor>(i));
            if (!actors.contains(who)) throw InputError("actors lacks '" + who + "'");
            d.actors[i] = parse_actor(actors.at(who), "actors." + who);
        }
        if (j.contains("public")) {
            const json& p = j.at("public");
            if (p.contains("keys")) d.publics.keys = string_list(p.at("keys"), "public.keys");
            if (p.contains("digests")) {
                d.publics.digests = string_list(p.at("digests"), "public.digests");
            }
            if (p.contains("adaptor_pubs")) {
                d.publics.adaptor_pubs = string_list(p.at("adaptor_pubs"), "public.adaptor_pubs");
            }
        }
        for (const json& e : j.value("pre_signatures", json::array())) {
            ContractDescription::PreSigDecl p;
            p.signer = string_field(e, "signer", "pre_signature", true);
            p.tx = string_field(e, "tx", "pre_signature", true);
            p.adaptor = string_field(e, "adaptor", "pre_signature", false);
            p.holders = string_list(e.value("holders", json::array()), "pre_signature.holders");
            d.pre_signatures.push_back(std::move(p));
        }
        if (!j.contains("funding_outputs")) throw InputError("contract lacks funding_outputs");
        for (const json& e : j.at("funding_outputs")) {
            ContractDescription::FundingDecl f;
            f.txid = string_field(e, "txid", "funding output", true);
            f.index = static_cast<uint32_t>(int_field(e, "index", "funding output", 0, false));
            f.value = int_field(e, "value", "funding output '" + f.txid + "'", 0, true);
            f.script = string_field(e, "script", "funding output '" + f.txid + "'", true);
            if (e.contains("confirmed_height")) {
                f.confirmed_height =
                    int_field(e, "confirmed_height", "funding output '" + f.txid + "'", 0, true);
            }
            d.funding_outputs.push_back(std::move(f));
        }
        for (const json& e : j.value("templates", json::array())) {
            ContractDescription::TemplateDecl t;
            t.name = string_field(e, "name", "template", true);
            t.after = int_field(e, "after", "template '" + t.name + "'", 0, false);
            for (const json& ij : e.value("ins", json::array())) {
                ContractDescription::InputDecl in;
                in.prevout = string_field(ij, "prevout", "template '" + t.name + "' input", true);
                in.older = int_field(ij, "older", "template '" + t.name + "' input", 0, false);
                if (ij.contains("committed")) {
                    in.committed = static_cast<int>(
                        int_field(ij, "committed", "template '" + t.name + "' input", 0, true));
                }
                t.ins.push_back(std::move(in));
            }
            for (const json& oj : e.value("outs", json::array())) {
                ContractDescription::OutputDecl o;
                o.value = int_field(oj, "value", "template '" + t.name + "' output", 0, true);
                o.script = string_field(oj, "script", "template '" + t.name + "' output", true);
                t.outs.push_back(std::move(o));
            }
            d.templates.push_back(std::move(t));
        }
        d.initial_blockheight = int_field(j, "initial_blockheight", "contract", 0, true);
        if (j.contains("params")) {
            const json& p = j.at("params");
            d.conf_delay[0] = int_field(p, "conf_delay_int", "params", 0, false);
            d.conf_delay[1] = int_field(p, "conf_delay_ext", "params", 0, false);
            d.reorg_depth = static_cast<int>(int_field(p, "reorg_depth", "params", 0, false));
            if (p.contains("message_payloads")) {
                d.message_payloads =
                    string_list(p.at("message_payloads"), "params.message_payloads");
            }
        }
        d.policy = string_field(j, "policy", "contract", true);
        if (j.contains("initial_trace")) {
            d.initial_trace = string_list(j.at("initial_trace"), "initial_trace");
        }
    } catch (const json::exception& e) {
        throw InputError(std::string("contract field error: ") + e.what());
    }

    validate(d);
    return d;
}

ContractDescription load_contract(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open contract file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_contract(buf.str());
}

std::string serialize_contract(const ContractDescription& d) {
    json j;
    j["version"] = d.version;
    for (int i = 0; i < 2; ++i) {
        json a;
        a["keys"] = d.actors[i].keys;
        a["preimages"] = d.actors[i].preimages;
        a["adaptor_keys"] = d.actors[i].adaptor_keys;
        a["sweep_key"] = d.actors[i].sweep_key;
        j["actors"][actor_name(static_cast<Actor>(i))] = std::move(a);
    }
    j["public"]["keys"] = d.publics.keys;
    j["public"]["digests"] = d.publics.digests;
    j["public"]["adaptor_pubs"] = d.publics.adaptor_pubs;
    j["pre_signatures"] = json::array();
    for (const auto& p : d.pre_signatures) {
        json e;
        e["signer"] = p.signer;
        e["tx"] = p.tx;
        e["adaptor"] = p.adaptor;
        e["holders"] = p.holders;
        j["pre_signatures"].push_back(std::move(e));
    }
    j["funding_outputs"] = json::array();
    for (const auto& f : d.funding_outputs) {
        json e;
        e["txid"] = f.txid;
        e["index"] = f.index;
        e["value"] = f.value;
        e["script"] = f.script;
        if (f.confirmed_height) e["confirmed_height"] = *f.confirmed_height;
        j["funding_outputs"].push_back(std::move(e));
    }
    j["templates"] = json::array();
    for (const auto& t : d.templates) {
        json e;
        e["name"] = t.name;
        e["after"] = t.after;
        e["ins"] = json::array();
        for (const auto& in : t.ins) {
            json ij;
            ij["prevout"] = in.prevout;
            ij["older"] = in.older;
            if (in.committed) ij["committed"] = *in.committed;
            e["ins"].push_back(std::move(ij));
        }
        e["outs"] = json::array();
        for (const auto& o : t.outs) {
            e["outs"].push_back(json{{"value", o.value}, {"script", o.script}});
        }
        j["templates"].push_back(std::move(e));
    }
    j["initial_blockheight"] = d.initial_blockheight;
    j["params"]["conf_delay_int"] = d.conf_delay[0];
    j["params"]["conf_delay_ext"] = d.conf_delay[1];
    j["params"]["reorg_depth"] = d.reorg_depth;
    j["params"]["message_payloads"] = d.message_payloads;
    j["policy"] = d.policy;
    j["initial_trace"] = d.initial_trace;
    return j.dump(2) + "\n";
}

LoadedContract instantiate(ContractDescription desc) {
    std::vector<FundingOutput> funding;
    for (const auto& f : desc.funding_outputs) {
        FundingOutput fo;
        fo.ref = {f.txid, f.index};
        fo.out = {f.value, parse_miniscript(f.script)};
        fo.confirmed = f.confirmed_height.has_value();
        fo.conf_height = f.confirmed_height.value_or(0);
        funding.push_back(std::move(fo));
    }
    std::vector<TxTemplate> templates;
    for (const auto& t : desc.templates) {
        TxTemplate tx;
        tx.name = t.name;
        tx.after = t.after;
        for (const auto& in : t.ins) {
            tx.ins.push_back({parse_ref(in.prevout, "input"), in.older, in.committed});
        }
        for (const auto& o : t.outs) tx.outs.push_back({o.value, parse_miniscript(o.script)});
        templates.push_back(std::move(tx));
    }
    std::array<ActorSetup, 2> actors;
    for (int i = 0; i < 2; ++i) {
        actors[i].secrets.keys = {desc.actors[i].keys.begin(), desc.actors[i].keys.end()};
        actors[i].secrets.preimages = {desc.actors[i].preimages.begin(),
                                       desc.actors[i].preimages.end()};
        actors[i].adaptor_keys = {desc.actors[i].adaptor_keys.begin(),
                                  desc.actors[i].adaptor_keys.end()};
        actors[i].sweep_key = desc.actors[i].sweep_key;
    }
    std::vector<PreSignatureDecl> presigs;
    for (const auto& p : desc.pre_signatures) {
        PreSignatureDecl decl;
        decl.signer = p.signer;
        decl.tx_name = p.tx;
        decl.adaptor = p.adaptor;
        for (const auto& h : p.holders) {
            decl.holders.insert(h == "int" ? Actor::Int : Actor::Ext);
        }
        presigs.push_back(std::move(decl));
    }

    LoadedContract c;
    c.desc = std::move(desc);
    c.universe = std::make_unique<ContractUniverse>(std::move(templates), std::move(funding),
                                                    actors, std::move(presigs));
    c.net = std::make_unique<TraceNet>(build_net(*c.universe));
    c.sys.universe = c.universe.get();
    c.sys.net = c.net.get();
    c.sys.b0 = c.desc.initial_blockheight;
    c.sys.conf_delay[0] = c.desc.conf_delay[0];
    c.sys.conf_delay[1] = c.desc.conf_delay[1];
    c.sys.reorg_depth = c.desc.reorg_depth;
    for (const auto& m : c.desc.message_payloads) {
        if (m == "preimage") c.sys.message_kinds.insert(KnowledgeObject::Kind::Preimage);
        if (m == "adaptor") c.sys.message_kinds.insert(KnowledgeObject::Kind::AdaptorPriv);
        if (m == "signature") c.sys.message_kinds.insert(KnowledgeObject::Kind::Signature);
        if (m == "presignature") c.sys.message_kinds.insert(KnowledgeObject::Kind::PreSignature);
    }
    c.policy = parse_policy(c.desc.policy);
    c.root = replay_trace(c.sys, initial_state(c.sys), c.desc.initial_trace);
    return c;
}

TraceNetState replay_trace(const System& sys, TraceNetState s,
                           const std::vector<std::string>& steps) {
    for (const std::string& step : steps) {
        if (step.size() > 3 && step.compare(0, 2, "d(") == 0 && step.back() == ')') {
            char* end = nullptr;
            const int64_t n = std::strtoll(step.c_str() + 2, &end, 10);
            if (std::string(end) != ")" || n <= 0) {
                throw InputError("bad trace wait '" + step + "'");
            }
            s = fire_delay(sys, s, n);
            continue;
        }
        const int t = sys.net->transition_id(step);
        if (t < 0) throw InputError("unknown trace step '" + step + "'");

        // Broadcast for whichever actor can assemble the witness, then wait
        // out locks and the confirmation delay.
        bool confirmed = false;
        for (int tries = 0; tries < 1024 && !confirmed; ++tries) {
            for (Actor a : {Actor::Int, Actor::Ext}) {
                for (const FiredTransition& f : fireable_onchain(sys, s, a)) {
                    if (f.transition != t) continue;
                    s = fire_onchain(sys, s, a, t);
                    confirmed = true;
                    break;
                }
                if (confirmed) break;
            }
            if (confirmed) break;
            bool broadcast = false;
            if (!s.pool.count(t)) {
                for (Actor a : {Actor::Int, Actor::Ext}) {
                    for (const FiredTransition& f : fireable_broadcasts(sys, s, a)) {
                        if (f.transition != t) continue;
                        s = fire_broadcast(sys, s, a, t);
                        broadcast = true;
                        break;
                    }
                    if (broadcast) break;
                }
            }
            if (broadcast) continue;
            const std::optional<int64_t> wait = minimal_release_delay(sys, s);
            if (!wait) throw InputError("trace step '" + step + "' can never fire");
            s = fire_delay(sys, s, *wait);
        }
        if (!confirmed) throw InputError("trace step '" + step + "' can never fire");
    }
    return s;
}

} // namespace tracenet
