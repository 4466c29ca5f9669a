#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdn/chord.hpp"
#include "cdn/iridium.hpp"

namespace cdn::sim {

enum class Protocol { iridium, chord };
enum class Popularity { uniform, zipf };
enum class LatencyModel { constant, uniform };

// Flat key=value scenario; every field can be overridden from the CLI.
struct Scenario {
    Protocol protocol = Protocol::iridium;
    std::size_t n = 256;
    int m = 32;
    int p = 2;
    int q = 3;
    iridium::FPolicy f_policy = iridium::FPolicy::sqrt_n;
    std::size_t key_count = 1024;

    std::size_t lookup_count = 10000;
    double lookup_rate = 100.0;  // arrivals per simulated time unit
    Popularity popularity = Popularity::uniform;
    double zipf_s = 1.0;

    double join_rate = 0.0;
    double leave_regular_rate = 0.0;
    double fail_regular_rate = 0.0;
    double leave_supernode_rate = 0.0;
    double fail_supernode_rate = 0.0;

    LatencyModel latency = LatencyModel::constant;
    double latency_value = 1.0;
    double latency_min = 0.5;
    double latency_max = 1.5;

    double duration = 0.0;  // 0: horizon is the last scheduled lookup
    std::uint64_t seed = 0;

    // reliability experiments: kill each supernode with this probability at
    // t = 0, then measure with non-mutating probe lookups
    double pre_fail_supernode_prob = 0.0;
    bool probe_lookups = false;
    bool origins_regular_only = false;
    double refresh_interval = 0.0;  // 0: periodic registration disabled

    static Scenario from_text(const std::string& text);
    static Scenario from_file(const std::string& path);
    void apply_override(const std::string& key, const std::string& value);
    nlohmann::json to_json() const;
};

struct LookupRow {
    double time = 0.0;
    std::uint64_t origin = 0, key = 0;
    int hops = 0, messages = 0;
    std::string outcome;
    double duration = 0.0;  // message latencies plus timeout penalties
};

struct ChurnRow {
    double time = 0.0;
    std::string kind;
    std::size_t keys_moved = 0;
    std::size_t keys_lost = 0;
    bool applied = true;
};

struct MetricsReport {
    Scenario scenario;
    std::vector<LookupRow> lookups;
    std::vector<ChurnRow> churn;
    std::size_t found = 0, retried = 0, failed = 0;
    std::size_t messages_sent = 0, messages_delivered = 0, messages_timed_out = 0;
    std::map<std::uint64_t, std::uint64_t> supernode_load;  // relayed lookup messages
    double wall_seconds = 0.0;  // diagnostic only, never serialized

    double mean_hops() const;
    double median_hops() const;
    int max_hops() const;
    // CSV column order is frozen: time,origin,key,hops,messages,outcome,duration
    std::string to_csv() const;
    nlohmann::json summary() const;
};

MetricsReport run_scenario(const Scenario& s);

struct ProtocolComparison {
    MetricsReport iridium_report;
    MetricsReport chord_report;
    nlohmann::json summary() const;
};

// Same seed, same membership, same key set, same lookup sequence; only the
// routing protocol differs.
ProtocolComparison compare_protocols(const Scenario& base);

// Isolated engines fanned out over worker threads; results keep input order.
std::vector<MetricsReport> run_sweep(const std::vector<Scenario>& scenarios,
                                     unsigned threads);

}  // namespace cdn::sim
