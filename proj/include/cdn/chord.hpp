#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "cdn/errors.hpp"
#include "cdn/lookup_trace.hpp"

namespace cdn::chord {

using RingId = std::uint64_t;

struct ChordNode {
    RingId id = 0;
    // fingers[i] is the first node whose id >= id + 2^i (mod 2^m)
    std::vector<RingId> fingers;
    RingId successor = 0;
    RingId predecessor = 0;
};

// Static snapshot of a Chord ring: finger tables are exact for the given
// membership, lookups are pure. Membership changes rebuild the whole ring.
class ChordRing {
public:
    ChordRing(std::vector<RingId> ids, int m);

    int m() const { return m_; }
    std::size_t size() const { return ids_.size(); }
    const std::vector<RingId>& ids() const { return ids_; }
    const ChordNode& node(RingId id) const;

    // First member clockwise from key, inclusive.
    RingId successor_of(RingId key) const;

    // Iterative finger-table routing from the origin; one message per hop,
    // ending at successor_of(key).
    LookupTrace lookup(RingId origin, RingId key) const;

private:
    RingId closest_preceding_finger(const ChordNode& n, RingId key) const;
    RingId successor_of_sorted(RingId key) const;

    int m_ = 0;
    std::vector<RingId> ids_;  // sorted
    std::map<RingId, ChordNode> nodes_;
};

}  // namespace cdn::chord
