#include "cdn/sim.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <memory>
#include <sstream>

#include "cdn/rand_util.hpp"

namespace cdn::sim {

namespace {

const char* to_string(Protocol p) { return p == Protocol::iridium ? "iridium" : "chord"; }
const char* to_string(Popularity p) { return p == Popularity::uniform ? "uniform" : "zipf"; }
const char* to_string(LatencyModel l) {
    return l == LatencyModel::constant ? "constant" : "uniform";
}

double parse_number(const std::string& key, const std::string& value) {
    try {
        std::size_t pos = 0;
        double v = std::stod(value, &pos);
        if (pos != value.size()) throw std::invalid_argument(value);
        return v;
    } catch (const std::exception&) {
        throw Error(Errc::bad_scenario, "bad numeric value for " + key + ": " + value);
    }
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw Error(Errc::bad_scenario, "bad boolean for " + key + ": " + value);
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

void Scenario::apply_override(const std::string& key, const std::string& value) {
    if (key == "protocol") {
        if (value == "iridium") protocol = Protocol::iridium;
        else if (value == "chord") protocol = Protocol::chord;
        else throw Error(Errc::bad_scenario, "unknown protocol: " + value);
    } else if (key == "n") n = std::size_t(parse_number(key, value));
    else if (key == "m") m = int(parse_number(key, value));
    else if (key == "p") p = int(parse_number(key, value));
    else if (key == "q") q = int(parse_number(key, value));
    else if (key == "f_policy") f_policy = iridium::f_policy_from_string(value);
    else if (key == "key_count") key_count = std::size_t(parse_number(key, value));
    else if (key == "lookup_count") lookup_count = std::size_t(parse_number(key, value));
    else if (key == "lookup_rate") lookup_rate = parse_number(key, value);
    else if (key == "popularity") {
        if (value == "uniform") popularity = Popularity::uniform;
        else if (value == "zipf") popularity = Popularity::zipf;
        else throw Error(Errc::bad_scenario, "unknown popularity: " + value);
    } else if (key == "zipf_s") zipf_s = parse_number(key, value);
    else if (key == "join_rate") join_rate = parse_number(key, value);
    else if (key == "leave_regular_rate") leave_regular_rate = parse_number(key, value);
    else if (key == "fail_regular_rate") fail_regular_rate = parse_number(key, value);
    else if (key == "leave_supernode_rate") leave_supernode_rate = parse_number(key, value);
    else if (key == "fail_supernode_rate") fail_supernode_rate = parse_number(key, value);
    else if (key == "latency") {
        if (value == "constant") latency = LatencyModel::constant;
        else if (value == "uniform") latency = LatencyModel::uniform;
        else throw Error(Errc::bad_scenario, "unknown latency model: " + value);
    } else if (key == "latency_value") latency_value = parse_number(key, value);
    else if (key == "latency_min") latency_min = parse_number(key, value);
    else if (key == "latency_max") latency_max = parse_number(key, value);
    else if (key == "duration") duration = parse_number(key, value);
    else if (key == "seed") seed = std::uint64_t(parse_number(key, value));
    else if (key == "pre_fail_supernode_prob") pre_fail_supernode_prob = parse_number(key, value);
    else if (key == "probe_lookups") probe_lookups = parse_bool(key, value);
    else if (key == "origins_regular_only") origins_regular_only = parse_bool(key, value);
    else if (key == "refresh_interval") refresh_interval = parse_number(key, value);
    else throw Error(Errc::bad_scenario, "unknown scenario key: " + key);
}

Scenario Scenario::from_text(const std::string& text) {
    Scenario s;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw Error(Errc::bad_scenario, "expected key=value", lineno);
        s.apply_override(trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
    }
    return s;
}

Scenario Scenario::from_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw Error(Errc::bad_scenario, "cannot open scenario file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str());
}

nlohmann::json Scenario::to_json() const {
    return {{"protocol", to_string(protocol)},
            {"n", n},
            {"m", m},
            {"p", p},
            {"q", q},
            {"f_policy", iridium::to_string(f_policy)},
            {"key_count", key_count},
            {"lookup_count", lookup_count},
            {"lookup_rate", lookup_rate},
            {"popularity", to_string(popularity)},
            {"zipf_s", zipf_s},
            {"join_rate", join_rate},
            {"leave_regular_rate", leave_regular_rate},
            {"fail_regular_rate", fail_regular_rate},
            {"leave_supernode_rate", leave_supernode_rate},
            {"fail_supernode_rate", fail_supernode_rate},
            {"latency", to_string(latency)},
            {"latency_value", latency_value},
            {"latency_min", latency_min},
            {"latency_max", latency_max},
            {"duration", duration},
            {"seed", seed},
            {"pre_fail_supernode_prob", pre_fail_supernode_prob},
            {"probe_lookups", probe_lookups},
            {"origins_regular_only", origins_regular_only},
            {"refresh_interval", refresh_interval}};
}

// ---------------------------------------------------------------------------
// metrics

double MetricsReport::mean_hops() const {
    if (lookups.empty()) return 0.0;
    double sum = 0.0;
    for (const auto& r : lookups) sum += r.hops;
    return sum / double(lookups.size());
}

double MetricsReport::median_hops() const {
    if (lookups.empty()) return 0.0;
    std::vector<int> hops;
    hops.reserve(lookups.size());
    for (const auto& r : lookups) hops.push_back(r.hops);
    std::sort(hops.begin(), hops.end());
    std::size_t mid = hops.size() / 2;
    return hops.size() % 2 ? double(hops[mid])
                           : (double(hops[mid - 1]) + double(hops[mid])) / 2.0;
}

int MetricsReport::max_hops() const {
    int m = 0;
    for (const auto& r : lookups) m = std::max(m, r.hops);
    return m;
}

std::string MetricsReport::to_csv() const {
    std::ostringstream out;
    out << "time,origin,key,hops,messages,outcome,duration\n";
    char buf[64];
    for (const auto& r : lookups) {
        std::snprintf(buf, sizeof buf, "%.6f", r.time);
        out << buf << ',' << r.origin << ',' << r.key << ',' << r.hops << ','
            << r.messages << ',' << r.outcome << ',';
        std::snprintf(buf, sizeof buf, "%.6f", r.duration);
        out << buf << '\n';
    }
    return out.str();
}

nlohmann::json MetricsReport::summary() const {
    std::size_t churn_applied = 0, moved_total = 0, lost_total = 0;
    for (const auto& c : churn) {
        churn_applied += c.applied ? 1 : 0;
        moved_total += c.keys_moved;
        lost_total += c.keys_lost;
    }
    std::uint64_t load_max = 0, load_sum = 0;
    for (const auto& [id, l] : supernode_load) {
        load_max = std::max(load_max, l);
        load_sum += l;
    }
    return {{"scenario", scenario.to_json()},
            {"lookups",
             {{"total", lookups.size()},
              {"found", found},
              {"timeout_retry", retried},
              {"failed", failed}}},
            {"hops", {{"mean", mean_hops()}, {"median", median_hops()}, {"max", max_hops()}}},
            {"messages",
             {{"sent", messages_sent},
              {"delivered", messages_delivered},
              {"timed_out", messages_timed_out}}},
            {"churn",
             {{"events", churn.size()},
              {"applied", churn_applied},
              {"keys_moved_total", moved_total},
              {"keys_lost_total", lost_total}}},
            {"supernode_load",
             {{"max", load_max},
              {"mean", supernode_load.empty() ? 0.0
                                              : double(load_sum) / double(supernode_load.size())}}}};
}

// ---------------------------------------------------------------------------
// engine

namespace {

enum class EventKind { lookup, join, leave_regular, fail_regular, leave_supernode, fail_supernode, refresh };

struct WorkItem {
    double time = 0.0;
    EventKind kind = EventKind::lookup;
    std::uint64_t r1 = 0, r2 = 0;
};

// The schedule is derived from the seed alone, so matched runs of different
// protocols see the same arrival times and the same random draws.
std::vector<WorkItem> build_schedule(const Scenario& s) {
    std::mt19937_64 rng(s.seed * 0x9E3779B97F4A7C15ull + 1);
    std::vector<WorkItem> items;

    double horizon = s.duration;
    {
        double t = 0.0;
        for (std::size_t i = 0; i < s.lookup_count; ++i) {
            t += -std::log(1.0 - canonical_double(rng)) / s.lookup_rate;
            if (s.duration > 0 && t > s.duration) break;
            items.push_back({t, EventKind::lookup, rng(), rng()});
            horizon = std::max(horizon, t);
        }
    }
    auto churn_stream = [&](double rate, EventKind kind) {
        if (rate <= 0) return;
        double t = 0.0;
        while (true) {
            t += -std::log(1.0 - canonical_double(rng)) / rate;
            if (t > horizon) break;
            items.push_back({t, kind, rng(), rng()});
        }
    };
    churn_stream(s.join_rate, EventKind::join);
    churn_stream(s.leave_regular_rate, EventKind::leave_regular);
    churn_stream(s.fail_regular_rate, EventKind::fail_regular);
    churn_stream(s.leave_supernode_rate, EventKind::leave_supernode);
    churn_stream(s.fail_supernode_rate, EventKind::fail_supernode);
    if (s.refresh_interval > 0)
        for (double t = s.refresh_interval; t <= horizon; t += s.refresh_interval)
            items.push_back({t, EventKind::refresh, 0, 0});

    // (time, insertion sequence) order
    std::stable_sort(items.begin(), items.end(),
                     [](const WorkItem& a, const WorkItem& b) { return a.time < b.time; });
    return items;
}

class Engine {
public:
    Engine(const Scenario& s, std::vector<WorkItem> schedule)
        : s_(s),
          schedule_(std::move(schedule)),
          run_rng_(s.seed * 0x9E3779B97F4A7C15ull + 2),
          probe_rng_(s.seed * 0x9E3779B97F4A7C15ull + 3) {
        report_.scenario = s_;
        build_membership();
        if (s_.popularity == Popularity::zipf) {
            zipf_cum_.reserve(s_.key_count);
            double acc = 0.0;
            for (std::size_t i = 0; i < s_.key_count; ++i) {
                acc += 1.0 / std::pow(double(i + 1), s_.zipf_s);
                zipf_cum_.push_back(acc);
            }
        }
    }

    MetricsReport run() {
        auto start = std::chrono::steady_clock::now();
        pre_fail_burst();
        std::size_t join_seq = 0;
        for (const WorkItem& item : schedule_) {
            switch (item.kind) {
                case EventKind::lookup: dispatch_lookup(item); break;
                case EventKind::join: dispatch_join(item, join_seq++); break;
                case EventKind::leave_regular: dispatch_leave(item, false); break;
                case EventKind::fail_regular: dispatch_fail(item, false); break;
                case EventKind::leave_supernode: dispatch_leave(item, true); break;
                case EventKind::fail_supernode: dispatch_fail(item, true); break;
                case EventKind::refresh: dispatch_refresh(); break;
            }
        }
        report_.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        return std::move(report_);
    }

private:
    void build_membership() {
        iridium::RingBuildParams params;
        params.n = s_.n;
        params.m = s_.m;
        params.p = s_.p;
        params.q = s_.q;
        params.f_policy = s_.f_policy;
        params.key_count = s_.key_count;
        params.seed = s_.seed;
        ring_ = std::make_unique<iridium::RingState>(iridium::make_ring(params));
        for (const auto& [id, kr] : ring_->keys()) key_ids_.push_back(id);
        if (s_.protocol == Protocol::chord) rebuild_chord();
    }

    void rebuild_chord() {
        chord_ = std::make_unique<chord::ChordRing>(ring_->live_nodes(), s_.m);
    }

    void pre_fail_burst() {
        if (s_.pre_fail_supernode_prob <= 0) return;
        for (iridium::RingId id : ring_->live_supernodes()) {
            if (ring_->live_supernode_count() <= 1) break;  // keep the ring routable
            if (canonical_double(run_rng_) < s_.pre_fail_supernode_prob)
                ring_->fail_supernode(id);
        }
        if (s_.protocol == Protocol::chord) rebuild_chord();
    }

    std::uint64_t pick_origin(std::uint64_t r) const {
        std::vector<std::uint64_t> pool =
            s_.origins_regular_only ? ring_->live_regulars() : ring_->live_nodes();
        return pool[r % pool.size()];
    }

    std::uint64_t pick_key(std::uint64_t r) const {
        if (s_.popularity == Popularity::uniform) return key_ids_[r % key_ids_.size()];
        double u = double(r >> 11) * 0x1.0p-53 * zipf_cum_.back();
        std::size_t idx =
            std::lower_bound(zipf_cum_.begin(), zipf_cum_.end(), u) - zipf_cum_.begin();
        if (idx >= key_ids_.size()) idx = key_ids_.size() - 1;
        return key_ids_[idx];
    }

    double message_latency() {
        return s_.latency == LatencyModel::constant
                   ? s_.latency_value
                   : uniform_real(run_rng_, s_.latency_min, s_.latency_max);
    }

    void dispatch_lookup(const WorkItem& item) {
        LookupTrace trace;
        std::uint64_t origin = pick_origin(item.r1);
        std::uint64_t key = pick_key(item.r2);
        if (s_.protocol == Protocol::iridium) {
            trace = s_.probe_lookups ? ring_->lookup_probe(origin, key, probe_rng_)
                                     : ring_->lookup(origin, key);
        } else {
            trace = chord_->lookup(origin, key);
        }
        LookupRow row;
        row.time = item.time;
        row.origin = origin;
        row.key = key;
        row.hops = trace.hops();
        row.messages = trace.messages;
        row.outcome = trace.outcome_string();
        const double timeout_penalty = 5.0 * s_.latency_value;
        for (int i = 0; i < trace.messages - trace.timeouts; ++i)
            row.duration += message_latency();
        row.duration += timeout_penalty * trace.timeouts;
        report_.lookups.push_back(std::move(row));

        switch (trace.outcome) {
            case LookupOutcome::found: ++report_.found; break;
            case LookupOutcome::timeout_retry: ++report_.retried; break;
            case LookupOutcome::failed: ++report_.failed; break;
        }
        report_.messages_sent += std::size_t(trace.messages);
        report_.messages_timed_out += std::size_t(trace.timeouts);
        report_.messages_delivered += std::size_t(trace.messages - trace.timeouts);
        if (s_.protocol == Protocol::iridium)
            for (std::uint64_t hop : trace.forward_path)
                if (ring_->node(hop).role == iridium::Role::supernode)
                    report_.supernode_load[hop] += 2;
    }

    void dispatch_join(const WorkItem& item, std::size_t seq) {
        std::vector<std::uint64_t> pool = ring_->live_nodes();
        std::uint64_t bootstrap = pool[item.r1 % pool.size()];
        std::string address = "join:" + std::to_string(seq);
        ChurnRow row;
        row.time = item.time;
        row.kind = "join";
        try {
            auto rep = ring_->join(address, bootstrap, 1 + int(item.r2 % 1000), item.time);
            row.keys_moved = rep.keys_moved;
            report_.messages_sent += std::size_t(rep.messages);
            report_.messages_delivered += std::size_t(rep.messages);
        } catch (const Error&) {
            row.applied = false;  // e.g. hash collision with an existing id
        }
        if (row.applied && s_.protocol == Protocol::chord) row.keys_moved = chord_churn();
        report_.churn.push_back(std::move(row));
    }

    void dispatch_leave(const WorkItem& item, bool supernode) {
        std::vector<std::uint64_t> pool =
            supernode ? ring_->live_supernodes() : ring_->live_regulars();
        ChurnRow row;
        row.time = item.time;
        row.kind = supernode ? "leave_supernode" : "leave_regular";
        if (pool.empty() || (supernode && pool.size() <= 1)) {
            row.applied = false;
            report_.churn.push_back(std::move(row));
            return;
        }
        std::uint64_t victim = pool[item.r1 % pool.size()];
        auto rep = supernode ? ring_->leave_supernode(victim) : ring_->leave_regular(victim);
        row.keys_moved = rep.keys_moved;
        row.keys_lost = rep.keys_lost;
        report_.messages_sent += std::size_t(rep.messages);
        report_.messages_delivered += std::size_t(rep.messages);
        if (s_.protocol == Protocol::chord) row.keys_moved = chord_churn();
        report_.churn.push_back(std::move(row));
    }

    void dispatch_fail(const WorkItem& item, bool supernode) {
        std::vector<std::uint64_t> pool =
            supernode ? ring_->live_supernodes() : ring_->live_regulars();
        ChurnRow row;
        row.time = item.time;
        row.kind = supernode ? "fail_supernode" : "fail_regular";
        if (pool.empty() || (supernode && pool.size() <= 1)) {
            row.applied = false;
            report_.churn.push_back(std::move(row));
            return;
        }
        std::uint64_t victim = pool[item.r1 % pool.size()];
        auto rep = supernode ? ring_->fail_supernode(victim) : ring_->fail_regular(victim);
        row.keys_moved = rep.keys_moved;
        row.keys_lost = rep.keys_lost;
        if (s_.protocol == Protocol::chord) row.keys_moved = chord_churn();
        report_.churn.push_back(std::move(row));
    }

    // Chord rebuilds its static snapshot after every membership change; the
    // reported movement is the number of keys whose successor changed.
    std::size_t chord_churn() {
        std::map<std::uint64_t, std::uint64_t> before;
        for (std::uint64_t k : key_ids_) before[k] = chord_->successor_of(k);
        rebuild_chord();
        std::size_t moved = 0;
        for (std::uint64_t k : key_ids_)
            if (chord_->successor_of(k) != before[k]) ++moved;
        return moved;
    }

    void dispatch_refresh() {
        if (s_.protocol != Protocol::iridium) return;
        for (std::uint64_t id : ring_->live_regulars()) {
            const auto& window = ring_->node(id).associated_supernodes;
            for (std::uint64_t s : window) {
                ++report_.messages_sent;
                if (ring_->node(s).alive) ++report_.messages_delivered;
                else ++report_.messages_timed_out;
            }
            ring_->refresh_node(id);
        }
    }

    Scenario s_;
    std::vector<WorkItem> schedule_;
    std::unique_ptr<iridium::RingState> ring_;
    std::unique_ptr<chord::ChordRing> chord_;
    std::vector<std::uint64_t> key_ids_;
    std::vector<double> zipf_cum_;
    std::mt19937_64 run_rng_, probe_rng_;
    MetricsReport report_;
};

}  // namespace

MetricsReport run_scenario(const Scenario& s) {
    if (s.n == 0)
        throw Error(Errc::bad_scenario, "n must be >= 1");
    if (s.key_count == 0)
        throw Error(Errc::bad_scenario, "key_count must be >= 1");
    if (s.lookup_rate <= 0)
        throw Error(Errc::bad_scenario, "lookup_rate must be > 0");
    if (s.duration < 0 || s.lookup_count == 0)
        throw Error(Errc::bad_scenario, "need a positive lookup_count");
    Engine engine(s, build_schedule(s));
    return engine.run();
}

ProtocolComparison compare_protocols(const Scenario& base) {
    ProtocolComparison cmp;
    Scenario a = base;
    a.protocol = Protocol::iridium;
    Scenario b = base;
    b.protocol = Protocol::chord;
    cmp.iridium_report = run_scenario(a);
    cmp.chord_report = run_scenario(b);
    return cmp;
}

nlohmann::json ProtocolComparison::summary() const {
    return {{"n", iridium_report.scenario.n},
            {"seed", iridium_report.scenario.seed},
            {"lookups", iridium_report.lookups.size()},
            {"iridium",
             {{"mean_hops", iridium_report.mean_hops()},
              {"median_hops", iridium_report.median_hops()},
              {"max_hops", iridium_report.max_hops()}}},
            {"chord",
             {{"mean_hops", chord_report.mean_hops()},
              {"median_hops", chord_report.median_hops()},
              {"max_hops", chord_report.max_hops()}}}};
}

std::vector<MetricsReport> run_sweep(const std::vector<Scenario>& scenarios,
                                     unsigned threads) {
    if (threads == 0) threads = 1;
    std::vector<MetricsReport> out(scenarios.size());
    std::vector<std::future<void>> slots;
    std::size_t next = 0;
    while (next < scenarios.size()) {
        while (slots.size() < threads && next < scenarios.size()) {
            std::size_t i = next++;
            slots.push_back(std::async(std::launch::async,
                                       [&out, &scenarios, i] { out[i] = run_scenario(scenarios[i]); }));
        }
        for (auto& f : slots) f.wait();
        slots.clear();
    }
    return out;
}

}  // namespace cdn::sim
