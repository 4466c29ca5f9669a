// cdnw: command-line workbench for replica placement, ring protocol
// simulation, and ARL handling. Every subcommand is deterministic under a
// fixed --seed (default 0); machine output formats are documented in the
// README and frozen.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cdn/arl.hpp"
#include "cdn/chord.hpp"
#include "cdn/errors.hpp"
#include "cdn/iridium.hpp"
#include "cdn/placement.hpp"
#include "cdn/sim.hpp"
#include "cdn/topology.hpp"

namespace {

using nlohmann::json;

void write_output(const std::string& out_path, const std::string& content) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f)
        throw cdn::Error(cdn::Errc::invalid_argument, "cannot write " + out_path);
    f << content;
}

std::string json_dump(const json& j) { return j.dump(2) + "\n"; }

json placement_json(const cdn::placement::PlacementResult& r) {
    return {{"algorithm", r.algorithm},
            {"centers", r.centers},
            {"objective", r.objective},
            {"parameters", r.parameters}};
}

std::vector<double> load_demands(const std::string& path, std::size_t n) {
    std::vector<double> demands(n, 1.0);
    if (path.empty()) return demands;
    std::ifstream in(path);
    if (!in)
        throw cdn::Error(cdn::Errc::invalid_argument, "cannot open demands file: " + path);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::istringstream iss(line);
        std::string first;
        if (!(iss >> first)) continue;
        if (first[0] == '#') continue;
        unsigned long node = 0;
        double weight = 0.0;
        try {
            node = std::stoul(first);
        } catch (const std::exception&) {
            throw cdn::Error(cdn::Errc::malformed_line, "bad demand node id", lineno);
        }
        if (!(iss >> weight) || weight < 0.0)
            throw cdn::Error(cdn::Errc::malformed_line, "bad demand weight", lineno);
        if (node >= n)
            throw cdn::Error(cdn::Errc::id_out_of_range, "demand node out of range", lineno);
        demands[node] = weight;
    }
    return demands;
}

std::vector<std::string> split_csv_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---------------------------------------------------------------------------

int cmd_topo_gen(std::size_t n, double prob, std::uint64_t seed, const std::string& out) {
    cdn::WeightedGraph g = cdn::random_graph(n, prob, seed);
    write_output(out, cdn::serialize_graph(g));
    return 0;
}

int cmd_topo_info(const std::string& path, const std::string& format,
                  const std::string& out) {
    cdn::WeightedGraph g = cdn::load_graph_file(path);
    cdn::DistanceMatrix d = cdn::all_pairs_distances(g);
    if (format == "human") {
        std::ostringstream s;
        s << "nodes:    " << g.node_count() << "\n"
          << "edges:    " << g.edge_count() << "\n"
          << "diameter: " << d.max_distance() << "\n";
        write_output(out, s.str());
    } else {
        write_output(out, json_dump({{"nodes", g.node_count()},
                                     {"edges", g.edge_count()},
                                     {"diameter", d.max_distance()}}));
    }
    return 0;
}

struct PlaceArgs {
    std::string algorithm;
    std::string graph_path;
    std::string demands_path;
    std::string objective = "total-cost";
    std::size_t M = 1;
    std::size_t K = 1;
    double D = 0.0;
    double k_factor = 2.0;
    std::size_t ell = 0;
    std::uint64_t seed = 0;
    std::string out;
};

int cmd_place(const PlaceArgs& a) {
    using namespace cdn::placement;
    cdn::WeightedGraph g = cdn::load_graph_file(a.graph_path);
    PlacementResult result;
    if (a.algorithm == "khst-d" || a.algorithm == "khst-k") {
        cdn::DistanceMatrix d = cdn::all_pairs_distances(g);
        PartitionTree tree = build_khst(d, a.k_factor, a.seed);
        result = a.algorithm == "khst-d" ? khst_centers_by_diameter(tree, d, a.D)
                                         : khst_centers_by_budget(tree, d, a.K);
    } else if (a.algorithm == "kcenter") {
        result = min_kcenter_2approx(g, a.K);
    } else if (a.algorithm == "kcenter-d") {
        result = min_kcenter_count_for_diameter(cdn::all_pairs_distances(g), a.D);
    } else if (a.algorithm == "transit") {
        result = transit_node_placement(g, a.M);
    } else {
        PlacementProblem p = PlacementProblem::uniform(cdn::all_pairs_distances(g));
        p.demands = load_demands(a.demands_path, g.node_count());
        if (a.algorithm == "greedy")
            result = greedy_placement(p, a.M);
        else if (a.algorithm == "backtrack")
            result = backtracking_greedy(p, a.M, a.ell);
        else if (a.algorithm == "optimal")
            result = brute_force_optimal(p, a.M,
                                         a.objective == "max-radius"
                                             ? Objective::max_radius
                                             : Objective::total_cost);
        else
            throw cdn::Error(cdn::Errc::invalid_argument,
                             "unknown algorithm: " + a.algorithm);
    }
    write_output(a.out, json_dump(placement_json(result)));
    return 0;
}

cdn::sim::Scenario load_scenario(const std::string& path,
                                 const std::vector<std::string>& overrides,
                                 std::uint64_t seed, bool seed_given) {
    cdn::sim::Scenario s =
        path.empty() ? cdn::sim::Scenario{} : cdn::sim::Scenario::from_file(path);
    for (const std::string& kv : overrides) {
        std::size_t eq = kv.find('=');
        if (eq == std::string::npos)
            throw cdn::Error(cdn::Errc::bad_scenario, "--set expects key=value: " + kv);
        s.apply_override(kv.substr(0, eq), kv.substr(eq + 1));
    }
    if (seed_given) s.seed = seed;
    return s;
}

int cmd_sim_run(const cdn::sim::Scenario& s, const std::string& out,
                const std::string& summary_path, const std::string& format) {
    cdn::sim::MetricsReport report = cdn::sim::run_scenario(s);
    if (format == "human") {
        std::ostringstream os;
        os << "lookups:  " << report.lookups.size() << " (found " << report.found
           << ", retried " << report.retried << ", failed " << report.failed << ")\n"
           << "hops:     mean " << report.mean_hops() << ", median "
           << report.median_hops() << ", max " << report.max_hops() << "\n"
           << "messages: sent " << report.messages_sent << ", delivered "
           << report.messages_delivered << ", timed out " << report.messages_timed_out
           << "\n";
        write_output(out, os.str());
    } else if (format == "json") {
        write_output(out, json_dump(report.summary()));
    } else {
        write_output(out, report.to_csv());
    }
    if (!summary_path.empty()) write_output(summary_path, json_dump(report.summary()));
    return 0;
}

int cmd_sim_compare(const cdn::sim::Scenario& base, const std::string& n_list,
                    const std::string& out, const std::string& format) {
    std::vector<std::size_t> sizes;
    for (const std::string& tok : split_csv_list(n_list)) sizes.push_back(std::stoul(tok));
    if (sizes.empty()) sizes.push_back(base.n);

    json rows = json::array();
    std::ostringstream table;
    table << "n,protocol,mean_hops,median_hops,max_hops\n";
    for (std::size_t n : sizes) {
        cdn::sim::Scenario s = base;
        s.n = n;
        cdn::sim::ProtocolComparison cmp = cdn::sim::compare_protocols(s);
        rows.push_back(cmp.summary());
        char buf[160];
        std::snprintf(buf, sizeof buf, "%zu,iridium,%.4f,%.1f,%d\n", n,
                      cmp.iridium_report.mean_hops(), cmp.iridium_report.median_hops(),
                      cmp.iridium_report.max_hops());
        table << buf;
        std::snprintf(buf, sizeof buf, "%zu,chord,%.4f,%.1f,%d\n", n,
                      cmp.chord_report.mean_hops(), cmp.chord_report.median_hops(),
                      cmp.chord_report.max_hops());
        table << buf;
    }
    if (format == "json")
        write_output(out, json_dump(rows));
    else
        write_output(out, table.str());
    return 0;
}

int cmd_sim_sweep(const cdn::sim::Scenario& base, const std::string& policies,
                  const std::string& n_list, unsigned threads, const std::string& out) {
    std::vector<cdn::sim::Scenario> scenarios;
    std::vector<std::string> policy_names = split_csv_list(policies);
    if (policy_names.empty()) policy_names.push_back(cdn::iridium::to_string(base.f_policy));
    std::vector<std::size_t> sizes;
    for (const std::string& tok : split_csv_list(n_list)) sizes.push_back(std::stoul(tok));
    if (sizes.empty()) sizes.push_back(base.n);

    for (const std::string& name : policy_names) {
        for (std::size_t n : sizes) {
            cdn::sim::Scenario s = base;
            s.f_policy = cdn::iridium::f_policy_from_string(name);
            s.n = n;
            scenarios.push_back(s);
        }
    }
    auto reports = cdn::sim::run_sweep(scenarios, threads);
    std::ostringstream csv;
    csv << "f_policy,n,lookups,found,retried,failed,mean_hops,max_hops,messages_sent\n";
    for (const auto& r : reports) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "%s,%zu,%zu,%zu,%zu,%zu,%.4f,%d,%zu\n",
                      cdn::iridium::to_string(r.scenario.f_policy), r.scenario.n,
                      r.lookups.size(), r.found, r.retried, r.failed, r.mean_hops(),
                      r.max_hops(), r.messages_sent);
        csv << buf;
    }
    write_output(out, csv.str());
    return 0;
}

int cmd_arl_parse(const std::string& url, bool lenient, const std::string& format,
                  const std::string& out) {
    cdn::arl::Arl a = cdn::arl::parse_arl(url, lenient);
    if (format == "human") {
        std::ostringstream os;
        os << "serial:        " << a.serial << "\n"
           << "akamai_domain: " << a.akamai_domain << "\n"
           << "type:          " << a.type_field << "\n"
           << "provider_code: " << a.provider_code << "\n"
           << "object_data:   " << a.object_data << "\n"
           << "absolute_url:  " << a.absolute_url << "\n";
        write_output(out, os.str());
    } else {
        write_output(out, json_dump({{"serial", a.serial},
                                     {"akamai_domain", a.akamai_domain},
                                     {"type", a.type_field},
                                     {"provider_code", a.provider_code},
                                     {"object_data", a.object_data},
                                     {"absolute_url", a.absolute_url}}));
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"CDN algorithms workbench: topology, replica placement, "
                 "ring-protocol simulation, ARL tools"};
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_path;
    std::string format = "json";

    // ---- topo ----
    auto* topo = app.add_subcommand("topo", "generate or inspect topologies");
    topo->require_subcommand(1);
    auto* topo_gen = topo->add_subcommand("gen", "generate a seeded random graph");
    std::size_t gen_n = 50;
    double gen_p = 0.2;
    topo_gen->add_option("-n,--nodes", gen_n, "node count")->required();
    topo_gen->add_option("-p,--prob", gen_p, "edge probability");
    topo_gen->add_option("--seed", seed, "RNG seed (default 0)");
    topo_gen->add_option("--out", out_path, "output file (default stdout)");
    auto* topo_info = topo->add_subcommand("info", "show graph statistics");
    std::string topo_path;
    topo_info->add_option("graph", topo_path, "graph file")->required();
    topo_info->add_option("--format", format, "json|human");
    topo_info->add_option("--out", out_path, "output file (default stdout)");

    // ---- place ----
    auto* place = app.add_subcommand("place", "run a placement algorithm");
    PlaceArgs pa;
    place->add_option("algorithm", pa.algorithm,
                      "khst-d|khst-k|kcenter|kcenter-d|greedy|backtrack|transit|optimal")
        ->required();
    place->add_option("graph", pa.graph_path, "graph file")->required();
    place->add_option("-M,--servers", pa.M, "server budget");
    place->add_option("-K,--centers", pa.K, "center budget");
    place->add_option("-D,--diameter", pa.D, "distance bound");
    place->add_option("--k-factor", pa.k_factor, "k-HST shrink factor");
    place->add_option("--ell", pa.ell, "backtracking depth");
    place->add_option("--demands", pa.demands_path, "demands file (node weight per line)");
    place->add_option("--objective", pa.objective, "total-cost|max-radius (optimal only)");
    place->add_option("--seed", pa.seed, "RNG seed (default 0)");
    place->add_option("--out", pa.out, "output file (default stdout)");

    // ---- sim ----
    auto* sim = app.add_subcommand("sim", "discrete-event protocol simulation");
    sim->require_subcommand(1);
    std::string scenario_path, summary_path, n_list, policies;
    std::vector<std::string> overrides;
    unsigned threads = 4;

    auto* sim_run = sim->add_subcommand("run", "run one scenario");
    sim_run->add_option("scenario", scenario_path, "scenario file (defaults apply if omitted)");
    auto* run_seed = sim_run->add_option("--seed", seed, "override scenario seed");
    sim_run->add_option("--set", overrides, "override scenario keys (key=value)");
    sim_run->add_option("--out", out_path, "output file (default stdout)");
    sim_run->add_option("--summary", summary_path, "also write a JSON summary here");
    sim_run->add_option("--format", format, "csv|json|human (default csv)");

    auto* sim_compare = sim->add_subcommand("compare", "iridium vs chord on matched workloads");
    sim_compare->add_option("scenario", scenario_path, "scenario file");
    auto* cmp_seed = sim_compare->add_option("--seed", seed, "override scenario seed");
    sim_compare->add_option("--set", overrides, "override scenario keys");
    sim_compare->add_option("-N,--sizes", n_list, "comma-separated ring sizes");
    sim_compare->add_option("--out", out_path, "output file (default stdout)");
    sim_compare->add_option("--format", format, "csv|json (default csv)");

    auto* sim_sweep = sim->add_subcommand("sweep", "sweep f(N) policies / sizes");
    sim_sweep->add_option("scenario", scenario_path, "scenario file");
    auto* sweep_seed = sim_sweep->add_option("--seed", seed, "override scenario seed");
    sim_sweep->add_option("--set", overrides, "override scenario keys");
    sim_sweep->add_option("--f-policy", policies, "comma-separated: sqrt,n23,log2");
    sim_sweep->add_option("-N,--sizes", n_list, "comma-separated ring sizes");
    sim_sweep->add_option("--threads", threads, "worker threads (default 4)");
    sim_sweep->add_option("--out", out_path, "output file (default stdout)");

    // ---- arl ----
    auto* arl = app.add_subcommand("arl", "Akamai Resource Locator tools");
    arl->require_subcommand(1);
    auto* arl_parse = arl->add_subcommand("parse", "parse an ARL into its fields");
    std::string arl_url;
    bool lenient = false;
    arl_parse->add_option("url", arl_url, "ARL to parse")->required();
    arl_parse->add_flag("--lenient", lenient, "allow hostname/path serial mismatch");
    arl_parse->add_option("--format", format, "json|human");
    arl_parse->add_option("--out", out_path, "output file (default stdout)");
    auto* arl_make = arl->add_subcommand("make", "akamaize an origin URL");
    std::string origin, a_serial, a_domain, a_type, a_provider, a_object;
    arl_make->add_option("--origin", origin, "origin URL, e.g. http://www.foo.com/a.gif")
        ->required();
    arl_make->add_option("--serial", a_serial, "serial number")->required();
    arl_make->add_option("--domain", a_domain, "Akamai domain")->required();
    arl_make->add_option("--type", a_type, "type field")->required();
    arl_make->add_option("--provider", a_provider, "provider code")->required();
    arl_make->add_option("--object-data", a_object, "object data token")->required();
    arl_make->add_option("--out", out_path, "output file (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 1;  // usage problems exit 1
    }

    try {
        if (topo_gen->parsed()) return cmd_topo_gen(gen_n, gen_p, seed, out_path);
        if (topo_info->parsed()) return cmd_topo_info(topo_path, format, out_path);
        if (place->parsed()) return cmd_place(pa);
        if (sim_run->parsed()) {
            if (format == "json" && sim_run->count("--format") == 0) format = "csv";
            auto s = load_scenario(scenario_path, overrides, seed, run_seed->count() > 0);
            return cmd_sim_run(s, out_path, summary_path, format);
        }
        if (sim_compare->parsed()) {
            if (format == "json" && sim_compare->count("--format") == 0) format = "csv";
            auto s = load_scenario(scenario_path, overrides, seed, cmp_seed->count() > 0);
            return cmd_sim_compare(s, n_list, out_path, format);
        }
        if (sim_sweep->parsed()) {
            auto s = load_scenario(scenario_path, overrides, seed, sweep_seed->count() > 0);
            return cmd_sim_sweep(s, policies, n_list, threads, out_path);
        }
        if (arl_parse->parsed()) return cmd_arl_parse(arl_url, lenient, format, out_path);
        if (arl_make->parsed()) {
            write_output(out_path, cdn::arl::akamaize(origin, a_serial, a_domain, a_type,
                                                      a_provider, a_object) +
                                       "\n");
            return 0;
        }
    } catch (const cdn::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}
