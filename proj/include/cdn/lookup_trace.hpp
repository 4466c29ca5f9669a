#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cdn {

enum class LookupOutcome { found, timeout_retry, failed };

inline std::string to_string(LookupOutcome o, int timeouts = 0) {
    switch (o) {
        case LookupOutcome::found: return "found";
        case LookupOutcome::timeout_retry: return "timeout-retry:" + std::to_string(timeouts);
        case LookupOutcome::failed: return "failed";
    }
    return "?";
}

// Record of one overlay lookup. forward_path excludes the origin; in a
// quiescent healthy ring a non-degenerate path is origin -> supernode ->
// supernode -> holder, i.e. three forward hops and six messages.
struct LookupTrace {
    std::uint64_t origin = 0;
    std::uint64_t key = 0;
    std::vector<std::uint64_t> forward_path;
    std::vector<std::uint64_t> return_path;
    int messages = 0;
    int timeouts = 0;
    LookupOutcome outcome = LookupOutcome::found;

    int hops() const { return int(forward_path.size()); }
    std::string outcome_string() const { return to_string(outcome, timeouts); }
};

}  // namespace cdn
