#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdn/errors.hpp"
#include "cdn/lookup_trace.hpp"
#include "cdn/sha1.hpp"

namespace cdn::iridium {

using RingId = std::uint64_t;

enum class Role { regular, supernode };

// Supernode population policies f(N).
enum class FPolicy { sqrt_n, n_two_thirds, log2_n };

double f_policy_value(FPolicy policy, double n);
std::size_t f_policy_count(FPolicy policy, std::size_t n);
const char* to_string(FPolicy policy);
FPolicy f_policy_from_string(const std::string& name);

// Per-supernode storage estimate in bytes: the bound set carries q
// registrations per node spread over f(N) supernodes plus the supernode
// roster kept per association slot, i.e. q * (N / f + f) entries.
double expected_supernode_storage(double n, double f_of_n, int q, double bytes_per_entry);
double expected_supernode_storage(double n, FPolicy policy, int q, double bytes_per_entry);

struct NodeRecord {
    RingId id = 0;
    std::string address;
    Role role = Role::regular;
    bool alive = true;
    int capacity = 0;
    double join_time = 0.0;
    // Cached clockwise window of q supernodes. This is the node's own routing
    // knowledge: it goes stale when supernodes die and heals only through
    // timeouts (lookups or registration refreshes).
    std::vector<RingId> associated_supernodes;
    std::set<RingId> held_keys;
};

struct SupernodeState {
    RingId id = 0;
    // supernode id -> believed alive; a dead supernode stays believed-alive
    // until a forwarded query to it times out, and a freshly promoted
    // supernode is absent until a lookup routes through its old supernode
    std::map<RingId, bool> directory;
    std::uint64_t message_load = 0;
};

struct KeyRecord {
    RingId id = 0;
    // Live holders, clockwise from the key's successor node. Grows back on
    // graceful departures; shrinks on crashes (no re-replication).
    std::vector<RingId> holders;
};

struct RingConfig {
    int m = 32;  // identifier bits, <= 64
    int p = 2;   // key replication degree
    int q = 3;   // supernode association degree
};

struct JoinReport {
    RingId id = 0;
    std::size_t keys_moved = 0;
    int messages = 0;
};

struct ChurnReport {
    std::size_t keys_moved = 0;
    std::size_t keys_lost = 0;
    int messages = 0;
};

struct PromotionReport {
    RingId source = 0;
    RingId promoted = 0;
    std::vector<RingId> migrated;  // regular nodes rebound to the promotee
};

enum class PromotionTrigger { threshold, load };

// The identifier circle with its protocol state machine. Single writer: all
// mutations run on one thread of control; distinct rings are independent.
class RingState {
public:
    RingState(RingConfig cfg, std::uint64_t seed);

    const RingConfig& config() const { return cfg_; }
    std::uint64_t seed() const { return seed_; }

    // --- construction (add nodes, call quiesce(), then add keys) ---
    RingId add_node(const std::string& address, Role role, int capacity = 0,
                    double now = 0.0);
    void add_node_with_id(RingId id, const std::string& address, Role role,
                          int capacity = 0, double now = 0.0);
    void add_key(RingId key);

    // --- queries ---
    std::size_t node_count() const { return nodes_.size(); }
    std::size_t live_node_count() const;
    std::size_t live_supernode_count() const;
    std::vector<RingId> live_nodes() const;
    std::vector<RingId> live_supernodes() const;
    std::vector<RingId> live_regulars() const;
    bool contains(RingId id) const { return nodes_.count(id) != 0; }
    const NodeRecord& node(RingId id) const;
    const KeyRecord& key(RingId id) const;
    const SupernodeState& supernode_state(RingId id) const;
    const std::map<RingId, NodeRecord>& nodes() const { return nodes_; }
    const std::map<RingId, KeyRecord>& keys() const { return keys_; }

    // First live node clockwise from k, inclusive.
    RingId successor_node(RingId k) const;
    // First live supernode clockwise from n, inclusive.
    RingId associated_supernode(RingId n) const;
    // Up to `count` distinct live nodes / supernodes clockwise from `from`.
    std::vector<RingId> successor_window(RingId from, std::size_t count) const;
    std::vector<RingId> supernode_window(RingId from, std::size_t count) const;
    // Live regular nodes whose associated supernode is s.
    std::vector<RingId> bound_set(RingId s) const;

    nlohmann::json snapshot() const;

    // --- protocol operations ---
    // Stateful lookup: timeouts teach the origin and the forwarding
    // supernodes about dead peers (lazy update).
    LookupTrace lookup(RingId origin, RingId key);
    // Measurement probe: identical routing, but leaves all state untouched.
    LookupTrace lookup_probe(RingId origin, RingId key, std::mt19937_64& rng) const;

    JoinReport join(const std::string& address, RingId bootstrap, int capacity = 0,
                    double now = 0.0);
    JoinReport join_with_id(RingId id, const std::string& address, RingId bootstrap,
                            int capacity = 0, double now = 0.0);

    ChurnReport leave_regular(RingId n);
    ChurnReport fail_regular(RingId n);
    ChurnReport leave_supernode(RingId s);
    ChurnReport fail_supernode(RingId s);

    PromotionReport select_supernode(PromotionTrigger trigger);
    PromotionReport promote_node(RingId candidate);

    // One registration round for node n: re-learns its supernode window,
    // detecting dead entries by timeout.
    void refresh_node(RingId n);
    // Complete every pending propagation: fresh windows, ground-truth
    // directories, no pending promotions.
    void quiesce();

    // Throws Error(Errc::invalid_argument) on the first violated law.
    // `quiescent` additionally demands fresh windows, full replication and
    // truthful directories.
    void check_invariants(bool quiescent) const;

    std::mt19937_64& rng() { return rng_; }

private:
    LookupTrace do_lookup(RingId origin, RingId key, std::mt19937_64& rng, bool mutate);
    bool route_via_supernode(RingId entry, RingId key, LookupTrace& t,
                             std::mt19937_64& rng, bool mutate);
    void heal_window(NodeRecord& n, RingId dead_super);
    void reassign_keys_in_arc(RingId from_exclusive, RingId to_inclusive,
                              std::size_t* moved);
    std::size_t reassign_key(RingId key);  // returns 1 if the holder set changed
    void drop_holder(RingId key, RingId node, std::size_t* lost);
    template <typename Pred>
    std::optional<RingId> first_clockwise(RingId from, Pred&& pred) const;

    RingConfig cfg_;
    std::uint64_t seed_;
    std::map<RingId, NodeRecord> nodes_;
    std::map<RingId, SupernodeState> supers_;
    std::map<RingId, KeyRecord> keys_;
    std::set<RingId> pending_propagation_;
    std::mt19937_64 rng_;
};

struct RingBuildParams {
    std::size_t n = 256;
    int m = 32;
    int p = 2;
    int q = 3;
    FPolicy f_policy = FPolicy::sqrt_n;
    std::size_t key_count = 1024;
    std::uint64_t seed = 0;
};

// Seeded ring: hashed node/key identifiers (salted on collision), random
// capacities, the f(N) highest-capacity nodes promoted to supernodes.
RingState make_ring(const RingBuildParams& params);

}  // namespace cdn::iridium
