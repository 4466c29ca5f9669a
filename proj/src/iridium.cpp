#include "cdn/iridium.hpp"

#include <algorithm>
#include <cmath>

#include "cdn/rand_util.hpp"

namespace cdn::iridium {

double f_policy_value(FPolicy policy, double n) {
    switch (policy) {
        case FPolicy::sqrt_n: return std::sqrt(n);
        case FPolicy::n_two_thirds: return std::pow(n, 2.0 / 3.0);
        case FPolicy::log2_n: return std::max(1.0, std::log2(std::max(n, 1.0)));
    }
    return 1.0;
}

std::size_t f_policy_count(FPolicy policy, std::size_t n) {
    double v = f_policy_value(policy, double(n));
    auto c = static_cast<std::size_t>(std::ceil(v));
    return std::min(std::max<std::size_t>(c, 1), n);
}

const char* to_string(FPolicy policy) {
    switch (policy) {
        case FPolicy::sqrt_n: return "sqrt";
        case FPolicy::n_two_thirds: return "n23";
        case FPolicy::log2_n: return "log2";
    }
    return "?";
}

FPolicy f_policy_from_string(const std::string& name) {
    if (name == "sqrt") return FPolicy::sqrt_n;
    if (name == "n23") return FPolicy::n_two_thirds;
    if (name == "log2") return FPolicy::log2_n;
    throw Error(Errc::invalid_argument, "unknown f policy: " + name);
}

double expected_supernode_storage(double n, double f_of_n, int q, double bytes_per_entry) {
    if (n < 1 || f_of_n < 1 || q < 1 || bytes_per_entry <= 0)
        throw Error(Errc::invalid_argument, "bad storage parameters");
    return (double(q) * n / f_of_n + double(q) * f_of_n) * bytes_per_entry;
}

double expected_supernode_storage(double n, FPolicy policy, int q, double bytes_per_entry) {
    return expected_supernode_storage(n, f_policy_value(policy, n), q, bytes_per_entry);
}

// ---------------------------------------------------------------------------

RingState::RingState(RingConfig cfg, std::uint64_t seed)
    : cfg_(cfg), seed_(seed), rng_(seed) {
    if (cfg.m < 1 || cfg.m > 64)
        throw Error(Errc::invalid_argument, "m must be in [1, 64]");
    if (cfg.p < 1 || cfg.q < 1)
        throw Error(Errc::invalid_argument, "p and q must be >= 1");
}

RingId RingState::add_node(const std::string& address, Role role, int capacity, double now) {
    RingId id = hash_id(address, cfg_.m);
    add_node_with_id(id, address, role, capacity, now);
    return id;
}

void RingState::add_node_with_id(RingId id, const std::string& address, Role role,
                                 int capacity, double now) {
    if (cfg_.m < 64 && id >> cfg_.m)
        throw Error(Errc::id_out_of_range, "node id exceeds 2^m");
    if (nodes_.count(id))
        throw Error(Errc::duplicate_id, "node id already present");
    NodeRecord rec;
    rec.id = id;
    rec.address = address;
    rec.role = role;
    rec.capacity = capacity;
    rec.join_time = now;
    nodes_.emplace(id, std::move(rec));
    if (role == Role::supernode) {
        SupernodeState s;
        s.id = id;
        s.directory[id] = true;
        supers_.emplace(id, std::move(s));
    }
}

void RingState::add_key(RingId key) {
    if (cfg_.m < 64 && key >> cfg_.m)
        throw Error(Errc::id_out_of_range, "key exceeds 2^m");
    if (keys_.count(key))
        throw Error(Errc::duplicate_id, "key already present");
    if (live_node_count() == 0)
        throw Error(Errc::empty_ring, "no live node to hold the key");
    KeyRecord kr;
    kr.id = key;
    kr.holders = successor_window(key, std::size_t(cfg_.p));
    for (RingId h : kr.holders) nodes_[h].held_keys.insert(key);
    keys_.emplace(key, std::move(kr));
}

std::size_t RingState::live_node_count() const {
    std::size_t c = 0;
    for (const auto& [id, n] : nodes_) c += n.alive ? 1 : 0;
    return c;
}

std::size_t RingState::live_supernode_count() const {
    std::size_t c = 0;
    for (const auto& [id, n] : nodes_) c += (n.alive && n.role == Role::supernode) ? 1 : 0;
    return c;
}

std::vector<RingId> RingState::live_nodes() const {
    std::vector<RingId> out;
    for (const auto& [id, n] : nodes_)
        if (n.alive) out.push_back(id);
    return out;
}

std::vector<RingId> RingState::live_supernodes() const {
    std::vector<RingId> out;
    for (const auto& [id, n] : nodes_)
        if (n.alive && n.role == Role::supernode) out.push_back(id);
    return out;
}

std::vector<RingId> RingState::live_regulars() const {
    std::vector<RingId> out;
    for (const auto& [id, n] : nodes_)
        if (n.alive && n.role == Role::regular) out.push_back(id);
    return out;
}

const NodeRecord& RingState::node(RingId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end())
        throw Error(Errc::invalid_argument, "unknown node id");
    return it->second;
}

const KeyRecord& RingState::key(RingId id) const {
    auto it = keys_.find(id);
    if (it == keys_.end())
        throw Error(Errc::invalid_argument, "unknown key");
    return it->second;
}

const SupernodeState& RingState::supernode_state(RingId id) const {
    auto it = supers_.find(id);
    if (it == supers_.end())
        throw Error(Errc::invalid_argument, "not a supernode");
    return it->second;
}

template <typename Pred>
std::optional<RingId> RingState::first_clockwise(RingId from, Pred&& pred) const {
    auto start = nodes_.lower_bound(from);
    for (auto it = start; it != nodes_.end(); ++it)
        if (pred(it->second)) return it->first;
    for (auto it = nodes_.begin(); it != start; ++it)
        if (pred(it->second)) return it->first;
    return std::nullopt;
}

RingId RingState::successor_node(RingId k) const {
    auto r = first_clockwise(k, [](const NodeRecord& n) { return n.alive; });
    if (!r)
        throw Error(Errc::empty_ring, "no live node on the ring");
    return *r;
}

RingId RingState::associated_supernode(RingId n) const {
    auto r = first_clockwise(
        n, [](const NodeRecord& rec) { return rec.alive && rec.role == Role::supernode; });
    if (!r)
        throw Error(Errc::no_live_supernode, "no live supernode on the ring");
    return *r;
}

std::vector<RingId> RingState::successor_window(RingId from, std::size_t count) const {
    std::vector<RingId> out;
    auto start = nodes_.lower_bound(from);
    auto it = start;
    bool wrapped = false;
    while (out.size() < count) {
        if (it == nodes_.end()) {
            if (wrapped) break;
            wrapped = true;
            it = nodes_.begin();
            continue;
        }
        if (wrapped && it == start) break;
        if (it->second.alive) out.push_back(it->first);
        ++it;
    }
    return out;
}

std::vector<RingId> RingState::supernode_window(RingId from, std::size_t count) const {
    std::vector<RingId> out;
    auto start = nodes_.lower_bound(from);
    auto it = start;
    bool wrapped = false;
    while (out.size() < count) {
        if (it == nodes_.end()) {
            if (wrapped) break;
            wrapped = true;
            it = nodes_.begin();
            continue;
        }
        if (wrapped && it == start) break;
        if (it->second.alive && it->second.role == Role::supernode) out.push_back(it->first);
        ++it;
    }
    return out;
}

std::vector<RingId> RingState::bound_set(RingId s) const {
    std::vector<RingId> out;
    if (live_supernode_count() == 0) return out;
    for (const auto& [id, n] : nodes_)
        if (n.alive && n.role == Role::regular && associated_supernode(id) == s)
            out.push_back(id);
    return out;
}

nlohmann::json RingState::snapshot() const {
    nlohmann::json nodes = nlohmann::json::array();
    for (const auto& [id, n] : nodes_)
        nodes.push_back({{"id", id},
                         {"role", n.role == Role::supernode ? "supernode" : "regular"},
                         {"alive", n.alive}});
    nlohmann::json keys = nlohmann::json::array();
    for (const auto& [id, k] : keys_) keys.push_back({{"id", id}, {"holders", k.holders}});
    return {{"m", cfg_.m}, {"p", cfg_.p}, {"q", cfg_.q}, {"nodes", nodes}, {"keys", keys}};
}

// ---------------------------------------------------------------------------
// lookup

LookupTrace RingState::lookup(RingId origin, RingId key) {
    return do_lookup(origin, key, rng_, true);
}

LookupTrace RingState::lookup_probe(RingId origin, RingId key, std::mt19937_64& rng) const {
    // mutate=false guarantees no ring state is written; only `rng` advances
    return const_cast<RingState*>(this)->do_lookup(origin, key, rng, false);
}

namespace {

void finish_trace(LookupTrace& t, bool holder_reached) {
    for (auto it = t.forward_path.rbegin(); it != t.forward_path.rend(); ++it)
        t.return_path.push_back(*it);
    t.messages += int(t.forward_path.size());  // response retraces the query path
    if (holder_reached)
        t.outcome = t.timeouts > 0 ? LookupOutcome::timeout_retry : LookupOutcome::found;
    else
        t.outcome = LookupOutcome::failed;
}

}  // namespace

LookupTrace RingState::do_lookup(RingId origin, RingId key, std::mt19937_64& rng,
                                 bool mutate) {
    LookupTrace t;
    t.origin = origin;
    t.key = key;
    auto nit = nodes_.find(origin);
    if (nit == nodes_.end() || !nit->second.alive)
        throw Error(Errc::invalid_argument, "lookup origin is not a live node");
    if (!keys_.count(key))
        throw Error(Errc::invalid_argument, "unknown key");
    NodeRecord& o = nit->second;

    if (o.held_keys.count(key)) return t;  // local hit: zero hops, zero messages

    if (o.role == Role::supernode) {
        bool ok = route_via_supernode(origin, key, t, rng, mutate);
        finish_trace(t, ok);
        return t;
    }

    // Try associated supernodes in random order; a timed-out attempt is
    // retried through a different one, up to q attempts.
    std::vector<RingId> window = o.associated_supernodes;
    shuffle_vec(window, rng);
    for (RingId entry : window) {
        ++t.messages;  // origin -> entry supernode
        auto eit = nodes_.find(entry);
        if (eit == nodes_.end() || !eit->second.alive) {
            ++t.timeouts;
            if (mutate) heal_window(o, entry);
            continue;
        }
        t.forward_path.push_back(entry);
        if (mutate) supers_[entry].message_load += 2;
        bool ok = route_via_supernode(entry, key, t, rng, mutate);
        finish_trace(t, ok);
        return t;
    }
    t.outcome = LookupOutcome::failed;  // every associated supernode timed out
    return t;
}

bool RingState::route_via_supernode(RingId entry, RingId key, LookupTrace& t,
                                    std::mt19937_64& rng, bool mutate) {
    SupernodeState& entry_state = supers_.at(entry);
    const KeyRecord& kr = keys_.at(key);

    // clockwise closest supernode to the key, by the entry's beliefs
    std::set<RingId> ruled_out;
    RingId target = entry;
    while (true) {
        std::optional<RingId> best;
        auto lo = entry_state.directory.lower_bound(key);
        for (auto it = lo; it != entry_state.directory.end() && !best; ++it)
            if (it->second && !ruled_out.count(it->first)) best = it->first;
        for (auto it = entry_state.directory.begin(); it != lo && !best; ++it)
            if (it->second && !ruled_out.count(it->first)) best = it->first;
        if (!best || *best == entry) {
            target = entry;
            break;
        }
        target = *best;
        ++t.messages;  // entry -> target
        if (!nodes_.at(target).alive) {
            ++t.timeouts;
            ruled_out.insert(target);
            if (mutate) entry_state.directory[target] = false;
            continue;
        }
        t.forward_path.push_back(target);
        if (mutate) supers_[target].message_load += 2;
        break;
    }

    // A freshly promoted supernode is unknown to the entry; its previous
    // supernode forwards the query one hop further and the response carries
    // the promotee's address back (lazy propagation).
    if (!pending_propagation_.empty()) {
        if (auto truly = first_clockwise(key, [](const NodeRecord& n) {
                return n.alive && n.role == Role::supernode;
            });
            truly && *truly != target) {
            auto& dir = supers_.at(target).directory;
            auto dit = dir.find(*truly);
            if (dit != dir.end() && dit->second) {
                ++t.messages;
                t.forward_path.push_back(*truly);
                if (mutate) {
                    entry_state.directory[*truly] = true;
                    supers_[*truly].message_load += 2;
                    bool everywhere = true;
                    for (const auto& [sid, st] : supers_) {
                        if (!nodes_.at(sid).alive) continue;
                        auto f = st.directory.find(*truly);
                        if (f == st.directory.end() || !f->second) {
                            everywhere = false;
                            break;
                        }
                    }
                    if (everywhere) pending_propagation_.erase(*truly);
                }
                target = *truly;
            }
        }
    }

    if (kr.holders.empty()) return false;  // all copies crashed away
    if (std::find(kr.holders.begin(), kr.holders.end(), target) != kr.holders.end())
        return true;  // the supernode holds the key itself
    RingId holder = kr.holders[uniform_index(rng, kr.holders.size())];
    ++t.messages;
    t.forward_path.push_back(holder);
    if (mutate && nodes_.at(holder).role == Role::supernode)
        supers_[holder].message_load += 2;
    return true;
}

void RingState::heal_window(NodeRecord& n, RingId dead_super) {
    RingId tail = n.associated_supernodes.empty() ? n.id : n.associated_supernodes.back();
    auto& w = n.associated_supernodes;
    w.erase(std::remove(w.begin(), w.end(), dead_super), w.end());
    // learn one more supernode past the old window tail
    auto next = first_clockwise(tail + 1, [&](const NodeRecord& rec) {
        return rec.alive && rec.role == Role::supernode &&
               std::find(w.begin(), w.end(), rec.id) == w.end();
    });
    if (next) w.push_back(*next);
}

// ---------------------------------------------------------------------------
// churn

std::size_t RingState::reassign_key(RingId key) {
    KeyRecord& kr = keys_.at(key);
    std::vector<RingId> fresh = successor_window(key, std::size_t(cfg_.p));
    if (fresh == kr.holders) return 0;
    for (RingId h : kr.holders) nodes_[h].held_keys.erase(key);
    kr.holders = std::move(fresh);
    for (RingId h : kr.holders) nodes_[h].held_keys.insert(key);
    return 1;
}

void RingState::reassign_keys_in_arc(RingId from_exclusive, RingId to_inclusive,
                                     std::size_t* moved) {
    auto in_arc = [&](RingId k) {
        if (from_exclusive < to_inclusive)
            return k > from_exclusive && k <= to_inclusive;
        if (from_exclusive > to_inclusive)
            return k > from_exclusive || k <= to_inclusive;
        return true;  // single-node ring: the arc is the whole circle
    };
    for (auto& [k, kr] : keys_)
        if (in_arc(k)) *moved += reassign_key(k);
}

void RingState::drop_holder(RingId key, RingId dead, std::size_t* lost) {
    KeyRecord& kr = keys_.at(key);
    kr.holders.erase(std::remove(kr.holders.begin(), kr.holders.end(), dead),
                     kr.holders.end());
    if (kr.holders.empty()) ++*lost;
}

JoinReport RingState::join(const std::string& address, RingId bootstrap, int capacity,
                           double now) {
    return join_with_id(hash_id(address, cfg_.m), address, bootstrap, capacity, now);
}

JoinReport RingState::join_with_id(RingId id, const std::string& address, RingId bootstrap,
                                   int capacity, double now) {
    auto bit = nodes_.find(bootstrap);
    if (bit == nodes_.end() || !bit->second.alive)
        throw Error(Errc::dead_bootstrap, "bootstrap node is not alive; retry elsewhere");
    if (nodes_.count(id))
        throw Error(Errc::duplicate_id, "node id already present");

    add_node_with_id(id, address, Role::regular, capacity, now);
    NodeRecord& rec = nodes_[id];
    rec.associated_supernodes = supernode_window(id, std::size_t(cfg_.q));

    JoinReport report;
    report.id = id;
    // neighbor flood + supernode-set query + one registration per supernode
    report.messages = 2 + int(rec.associated_supernodes.size());

    // only keys in the arc ending at the new node can change holders
    if (live_node_count() <= std::size_t(cfg_.p) + 1) {
        for (auto& [k, kr] : keys_) {
            (void)kr;
            report.keys_moved += reassign_key(k);
        }
        return report;
    }
    // p-th live predecessor of the new node, walking counterclockwise
    RingId pred = id;
    {
        auto it = nodes_.find(id);
        int remaining = cfg_.p;
        while (remaining > 0) {
            if (it == nodes_.begin()) it = nodes_.end();
            --it;
            if (it->second.alive && it->first != id) {
                pred = it->first;
                --remaining;
            }
        }
    }
    reassign_keys_in_arc(pred, id, &report.keys_moved);
    return report;
}

ChurnReport RingState::leave_regular(RingId n) {
    auto it = nodes_.find(n);
    if (it == nodes_.end() || !it->second.alive || it->second.role != Role::regular)
        throw Error(Errc::invalid_argument, "leave_regular needs a live regular node");
    ChurnReport report;
    report.messages = int(it->second.associated_supernodes.size());  // exit notices
    it->second.alive = false;
    std::vector<RingId> held(it->second.held_keys.begin(), it->second.held_keys.end());
    for (RingId k : held) report.keys_moved += reassign_key(k);
    it->second.held_keys.clear();
    it->second.associated_supernodes.clear();
    return report;
}

ChurnReport RingState::fail_regular(RingId n) {
    auto it = nodes_.find(n);
    if (it == nodes_.end() || !it->second.alive || it->second.role != Role::regular)
        throw Error(Errc::invalid_argument, "fail_regular needs a live regular node");
    ChurnReport report;
    it->second.alive = false;
    // copies on the dead node are gone; nobody re-replicates them
    for (RingId k : it->second.held_keys) drop_holder(k, n, &report.keys_lost);
    it->second.held_keys.clear();
    it->second.associated_supernodes.clear();
    return report;
}

ChurnReport RingState::leave_supernode(RingId s) {
    auto it = nodes_.find(s);
    if (it == nodes_.end() || !it->second.alive || it->second.role != Role::supernode)
        throw Error(Errc::invalid_argument, "leave_supernode needs a live supernode");
    if (live_supernode_count() == 1)
        throw Error(Errc::last_supernode, "the last supernode cannot leave");

    std::vector<RingId> members = bound_set(s);
    it->second.alive = false;

    ChurnReport report;
    // bound set migrates to the living clockwise successor supernode
    RingId heir = associated_supernode(s);
    supers_.at(heir).directory[s] = false;
    report.messages = 1;
    // each member tops its associated set back up to q (the random jitter
    // before this step only staggers traffic; the outcome is the same)
    for (RingId n : members) {
        nodes_[n].associated_supernodes = supernode_window(n, std::size_t(cfg_.q));
        ++report.messages;
    }
    std::vector<RingId> held(it->second.held_keys.begin(), it->second.held_keys.end());
    for (RingId k : held) report.keys_moved += reassign_key(k);
    it->second.held_keys.clear();
    return report;
}

ChurnReport RingState::fail_supernode(RingId s) {
    auto it = nodes_.find(s);
    if (it == nodes_.end() || !it->second.alive || it->second.role != Role::supernode)
        throw Error(Errc::invalid_argument, "fail_supernode needs a live supernode");
    ChurnReport report;
    it->second.alive = false;
    for (RingId k : it->second.held_keys) drop_holder(k, s, &report.keys_lost);
    it->second.held_keys.clear();
    // no other state changes: directories and associated sets stay stale
    // until lookups or refreshes run into the timeout
    return report;
}

PromotionReport RingState::select_supernode(PromotionTrigger trigger) {
    if (live_supernode_count() == 0)
        throw Error(Errc::no_live_supernode, "no supernode to split load from");
    RingId source = 0;
    bool have_source = false;
    std::uint64_t best_score = 0;
    for (RingId s : live_supernodes()) {
        std::uint64_t score = trigger == PromotionTrigger::threshold
                                  ? bound_set(s).size()
                                  : supers_.at(s).message_load;
        if (!have_source || score > best_score) {
            have_source = true;
            best_score = score;
            source = s;
        }
    }
    std::vector<RingId> candidates = bound_set(source);
    if (candidates.empty())
        throw Error(Errc::no_candidate, "chosen supernode has an empty bound set");
    // capacity first, then the longest-running node, then the lowest id
    RingId best = candidates.front();
    for (RingId c : candidates) {
        const NodeRecord& a = nodes_.at(c);
        const NodeRecord& b = nodes_.at(best);
        auto key_a = std::tuple(-a.capacity, a.join_time, a.id);
        auto key_b = std::tuple(-b.capacity, b.join_time, b.id);
        if (key_a < key_b) best = c;
    }
    PromotionReport report = promote_node(best);
    report.source = source;
    return report;
}

PromotionReport RingState::promote_node(RingId candidate) {
    auto it = nodes_.find(candidate);
    if (it == nodes_.end() || !it->second.alive || it->second.role != Role::regular)
        throw Error(Errc::no_candidate, "promotion candidate must be a live regular node");
    RingId old_super = associated_supernode(candidate);

    it->second.role = Role::supernode;
    it->second.associated_supernodes.clear();
    SupernodeState st;
    st.id = candidate;
    st.directory = supers_.at(old_super).directory;  // copied from the old supernode
    st.directory[candidate] = true;
    supers_[candidate] = std::move(st);
    supers_.at(old_super).directory[candidate] = true;
    pending_propagation_.insert(candidate);

    PromotionReport report;
    report.source = old_super;
    report.promoted = candidate;
    // regular nodes whose closest supernode is now the promotee migrate
    report.migrated = bound_set(candidate);
    for (RingId n : report.migrated)
        nodes_[n].associated_supernodes = supernode_window(n, std::size_t(cfg_.q));
    return report;
}

void RingState::refresh_node(RingId n) {
    auto it = nodes_.find(n);
    if (it == nodes_.end() || !it->second.alive || it->second.role != Role::regular)
        return;
    it->second.associated_supernodes = supernode_window(n, std::size_t(cfg_.q));
}

void RingState::quiesce() {
    for (auto& [id, n] : nodes_) {
        if (!n.alive) continue;
        if (n.role == Role::regular)
            n.associated_supernodes = supernode_window(id, std::size_t(cfg_.q));
        else
            n.associated_supernodes.clear();
    }
    for (auto& [sid, st] : supers_) {
        if (!nodes_.at(sid).alive) continue;
        for (const auto& [oid, other] : supers_) {
            (void)other;
            st.directory[oid] = nodes_.at(oid).alive;
        }
    }
    pending_propagation_.clear();
}

void RingState::check_invariants(bool quiescent) const {
    auto fail = [](const std::string& what) {
        throw Error(Errc::invalid_argument, "ring invariant violated: " + what);
    };
    const std::size_t live = live_node_count();
    const std::size_t live_supers = live_supernode_count();

    for (const auto& [k, kr] : keys_) {
        for (RingId h : kr.holders) {
            auto it = nodes_.find(h);
            if (it == nodes_.end() || !it->second.alive) fail("dead holder");
            if (!it->second.held_keys.count(k)) fail("held_keys out of sync");
        }
        if (quiescent) {
            auto expect = successor_window(k, std::size_t(cfg_.p));
            if (kr.holders != expect) fail("holder set is not the successor window");
        } else if (live > 0 && !kr.holders.empty()) {
            // holders always form a subset of the p-successor window
            auto window = successor_window(k, std::size_t(cfg_.p));
            for (RingId h : kr.holders)
                if (std::find(window.begin(), window.end(), h) == window.end())
                    fail("holder outside the successor window");
        }
        if (live > 0 && live_supers > 0 && !kr.holders.empty()) {
            // routing consistency: the supernode owning the key's arc is the
            // successor node's associated supernode
            if (associated_supernode(k) != associated_supernode(successor_node(k)))
                fail("routing consistency");
            if (kr.holders.front() != successor_node(k) &&
                std::find(kr.holders.begin(), kr.holders.end(), successor_node(k)) ==
                    kr.holders.end())
                fail("successor node does not hold the key");
        }
    }
    for (const auto& [id, n] : nodes_) {
        for (RingId k : n.held_keys) {
            auto kit = keys_.find(k);
            if (kit == keys_.end() ||
                std::find(kit->second.holders.begin(), kit->second.holders.end(), id) ==
                    kit->second.holders.end())
                fail("held_keys references a key the node does not hold");
        }
        if (!n.alive) continue;
        if (n.role == Role::regular && quiescent) {
            auto expect = supernode_window(id, std::size_t(cfg_.q));
            if (n.associated_supernodes != expect) fail("stale associated supernode set");
        }
        if (n.role == Role::supernode && !supers_.count(id)) fail("missing supernode state");
    }
    if (quiescent) {
        for (const auto& [sid, st] : supers_) {
            if (!nodes_.at(sid).alive) continue;
            for (const auto& [oid, other] : nodes_) {
                if (other.role != Role::supernode) continue;
                auto f = st.directory.find(oid);
                if (f == st.directory.end() || f->second != other.alive)
                    fail("directory out of sync");
            }
        }
    }
}

RingState make_ring(const RingBuildParams& params) {
    if (params.n == 0)
        throw Error(Errc::invalid_argument, "ring needs at least one node");
    RingState ring({params.m, params.p, params.q}, params.seed);
    std::mt19937_64 build_rng(params.seed);

    struct Planned {
        RingId id;
        std::string address;
        int capacity;
    };
    std::vector<Planned> planned;
    std::set<RingId> used;
    for (std::size_t i = 0; i < params.n; ++i) {
        std::string address = "node:" + std::to_string(i);
        RingId id = hash_id(address, params.m);
        for (int salt = 2; used.count(id); ++salt) {
            address = "node:" + std::to_string(i) + "#" + std::to_string(salt);
            id = hash_id(address, params.m);
        }
        used.insert(id);
        planned.push_back({id, address, 1 + int(uniform_index(build_rng, 1000))});
    }
    // the f(N) highest-capacity nodes form the initial routing fabric
    std::size_t f = f_policy_count(params.f_policy, params.n);
    std::vector<std::size_t> order(planned.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (planned[a].capacity != planned[b].capacity)
            return planned[a].capacity > planned[b].capacity;
        return planned[a].id < planned[b].id;
    });
    std::set<std::size_t> super_idx(order.begin(), order.begin() + f);
    for (std::size_t i = 0; i < planned.size(); ++i)
        ring.add_node_with_id(planned[i].id, planned[i].address,
                              super_idx.count(i) ? Role::supernode : Role::regular,
                              planned[i].capacity);
    ring.quiesce();

    for (std::size_t i = 0; i < params.key_count; ++i) {
        std::string name = "key:" + std::to_string(i);
        RingId id = hash_id(name, params.m);
        for (int salt = 2; ring.keys().count(id); ++salt)
            id = hash_id("key:" + std::to_string(i) + "#" + std::to_string(salt), params.m);
        ring.add_key(id);
    }
    return ring;
}

}  // namespace cdn::iridium
