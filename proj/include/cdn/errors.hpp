#pragma once

#include <stdexcept>
#include <string>

namespace cdn {

// Every recoverable failure in the library carries one of these codes so
// callers (and tests) can distinguish error classes without string matching.
enum class Errc {
    // graph file parsing
    malformed_line,
    duplicate_edge,
    negative_length,
    id_out_of_range,
    // graph / placement domain errors
    disconnected_graph,
    invalid_argument,
    enumeration_cap_exceeded,
    // ring domain errors
    empty_ring,
    no_live_supernode,
    duplicate_id,
    dead_bootstrap,
    last_supernode,
    no_candidate,
    // ARL parsing
    scheme_mismatch,
    malformed_host,
    missing_segment,
    serial_mismatch,
    empty_field,
    // scenario files
    bad_scenario,
};

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message, int line = -1)
        : std::runtime_error(line >= 0 ? message + " (line " + std::to_string(line) + ")"
                                       : message),
          code_(code),
          line_(line) {}

    Errc code() const { return code_; }
    // 1-based input line for parse errors, -1 otherwise.
    int line() const { return line_; }

private:
    Errc code_;
    int line_;
};

}  // namespace cdn
