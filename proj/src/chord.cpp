#include "cdn/chord.hpp"

#include <algorithm>

namespace cdn::chord {

namespace {

// x in (a, b] on the identifier circle; a == b spans the whole circle.
bool in_arc_open_closed(RingId a, RingId x, RingId b) {
    if (a == b) return true;
    if (a < b) return x > a && x <= b;
    return x > a || x <= b;
}

// x in (a, b) on the identifier circle.
bool in_arc_open_open(RingId a, RingId x, RingId b) {
    if (a == b) return x != a;
    if (a < b) return x > a && x < b;
    return x > a || x < b;
}

}  // namespace

ChordRing::ChordRing(std::vector<RingId> ids, int m) : m_(m), ids_(std::move(ids)) {
    if (m < 1 || m > 64)
        throw Error(Errc::invalid_argument, "m must be in [1, 64]");
    if (ids_.empty())
        throw Error(Errc::empty_ring, "ring needs at least one node");
    std::sort(ids_.begin(), ids_.end());
    if (std::adjacent_find(ids_.begin(), ids_.end()) != ids_.end())
        throw Error(Errc::duplicate_id, "duplicate node id");
    if (m < 64)
        for (RingId id : ids_)
            if (id >> m) throw Error(Errc::id_out_of_range, "node id exceeds 2^m");

    const std::uint64_t mask = m == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m) - 1;
    for (std::size_t i = 0; i < ids_.size(); ++i) {
        ChordNode n;
        n.id = ids_[i];
        n.predecessor = ids_[(i + ids_.size() - 1) % ids_.size()];
        n.fingers.reserve(std::size_t(m));
        for (int f = 0; f < m; ++f) {
            RingId start = (n.id + (std::uint64_t{1} << f)) & mask;
            n.fingers.push_back(successor_of_sorted(start));
        }
        n.successor = n.fingers.front();
        nodes_.emplace(n.id, std::move(n));
    }
}

RingId ChordRing::successor_of(RingId key) const { return successor_of_sorted(key); }

RingId ChordRing::successor_of_sorted(RingId key) const {
    auto it = std::lower_bound(ids_.begin(), ids_.end(), key);
    return it == ids_.end() ? ids_.front() : *it;
}

const ChordNode& ChordRing::node(RingId id) const {
    auto it = nodes_.find(id);
    if (it == nodes_.end())
        throw Error(Errc::invalid_argument, "unknown chord node");
    return it->second;
}

RingId ChordRing::closest_preceding_finger(const ChordNode& n, RingId key) const {
    for (auto it = n.fingers.rbegin(); it != n.fingers.rend(); ++it)
        if (*it != n.id && in_arc_open_open(n.id, *it, key)) return *it;
    return n.id;
}

LookupTrace ChordRing::lookup(RingId origin, RingId key) const {
    LookupTrace t;
    t.origin = origin;
    t.key = key;
    const RingId holder = successor_of(key);
    if (holder == origin) return t;  // the origin is the key's successor

    RingId cur = origin;
    while (true) {
        const ChordNode& n = node(cur);
        if (in_arc_open_closed(cur, key, n.successor)) {
            t.forward_path.push_back(n.successor);
            ++t.messages;
            break;
        }
        RingId next = closest_preceding_finger(n, key);
        if (next == cur) next = n.successor;  // degenerate table; fall forward
        t.forward_path.push_back(next);
        ++t.messages;
        cur = next;
    }
    return t;
}

}  // namespace cdn::chord
