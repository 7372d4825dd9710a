#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "accord/harness/runner.hpp"
#include "accord/harness/stats.hpp"

namespace fs = std::filesystem;
using accord::harness::CompareRow;
using accord::harness::RepResult;
using accord::harness::Scenario;

namespace {

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + p.string());
    f << content;
}

std::string rep_name(int rep, const char* suffix) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "rep%03d%s", rep, suffix);
    return buf;
}

struct RunArgs {
    std::string scenario_path;
    int repetitions = 0;  // 0 = scenario default
    std::uint64_t seed = 0;
    std::string out_dir = "out";
    bool long_ok = false;
    bool trace = false;
    bool realtime = false;
    double time_scale = 50.0;
    bool dump_inputs = false;
};

int do_run(const RunArgs& args) {
    Scenario sc = Scenario::load(args.scenario_path);
    if (sc.long_running && !args.long_ok) {
        std::cerr << "scenario '" << sc.name
                  << "' is marked long_running; pass --long-ok to run it\n";
        return 2;
    }
    int reps = args.repetitions > 0 ? args.repetitions : sc.repetitions;
    fs::path dir = fs::path(args.out_dir) / sc.name;
    fs::create_directories(dir);

    if (args.dump_inputs) {
        auto cfg = sc.world_config(0, args.seed);
        auto topo = accord::topology::build_topology(cfg.topo);
        accord::workload::assign_profiles(topo.agents, cfg.profiles, cfg.seed);
        auto jobs = accord::workload::generate_jobs(cfg.workload, topo.agents, cfg.seed);
        write_file(dir / "population.json",
                   accord::workload::population_to_json(topo.agents).dump(2));
        write_file(dir / "workload.json", accord::workload::jobs_to_json(jobs).dump(2));
    }

    bool all_ok = true;
    nlohmann::json combined = nlohmann::json::array();
    for (int rep = 0; rep < reps; ++rep) {
        accord::runtime::RunOptions opts;
        std::ofstream trace_out;
        if (args.trace) {
            trace_out.open(dir / rep_name(rep, "_trace.jsonl"));
            opts.trace_out = &trace_out;
        }
        opts.realtime = args.realtime;
        opts.time_scale = args.time_scale;

        RepResult res = accord::harness::run_scenario(sc, rep, args.seed, opts);
        write_file(dir / rep_name(rep, ".csv"), res.csv);
        write_file(dir / rep_name(rep, "_summary.json"), res.summary.dump(2) + "\n");
        combined.push_back(res.summary);

        const auto& cs = res.csv_summary;
        std::printf("%s rep %d: jobs=%zu complete=%.1f%% mean_sel=%.3fs p95=%.3fs "
                    "entropy=%.2f msgs=%llu%s\n",
                    sc.name.c_str(), rep, cs.jobs, cs.completion_pct,
                    res.selection_mean_all_levels_s, cs.selection.p95, cs.entropy,
                    static_cast<unsigned long long>(res.messages_total),
                    res.invariants_ok() ? "" : "  [INVARIANT VIOLATION]");
        if (res.report.livelock_aborted) {
            std::printf("  aborted: %s\n", res.report.diagnostic.c_str());
        }
        if (!res.invariants_ok()) {
            all_ok = false;
            for (const auto& v : res.cas_violations) std::printf("  cas: %s\n", v.c_str());
            for (const auto& v : res.orphan_violations) std::printf("  orphan: %s\n", v.c_str());
        }
    }
    write_file(dir / "combined.json", combined.dump(2) + "\n");
    return all_ok ? 0 : 1;
}

int do_compare(const std::vector<std::string>& paths, int reps, std::uint64_t seed,
               const std::string& out_dir) {
    std::vector<CompareRow> rows;
    for (const auto& p : paths) {
        Scenario sc = Scenario::load(p);
        int n = reps > 0 ? reps : sc.repetitions;
        std::vector<RepResult> results;
        for (int rep = 0; rep < n; ++rep) {
            results.push_back(accord::harness::run_scenario(sc, rep, seed));
        }
        rows.push_back(accord::harness::summarize_reps(sc, results));
    }

    std::printf("%-20s %6s %14s %12s %14s\n", "scenario", "reps", "sel mean±std", "completion",
                "msgs/job");
    for (const auto& r : rows) {
        std::printf("%-20s %6d %7.3f±%-6.3f %11.1f%% %14.1f\n", r.name.c_str(), r.repetitions,
                    r.selection_mean_s, r.selection_std_s, r.completion_pct,
                    r.messages_per_job);
    }

    // trend check over the canonical 30-agent/500-job triple
    const CompareRow *hier = nullptr, *mesh = nullptr, *ring = nullptr;
    for (const auto& r : rows) {
        if (r.name.rfind("hier", 0) == 0) hier = &r;
        if (r.name.rfind("mesh", 0) == 0) mesh = &r;
        if (r.name.rfind("ring", 0) == 0) ring = &r;
    }
    int rc = 0;
    if (hier && mesh && ring) {
        bool ordered = hier->selection_mean_s <= mesh->selection_mean_s &&
                       mesh->selection_mean_s <= ring->selection_mean_s;
        std::printf("trend hier <= mesh <= ring: %s\n", ordered ? "holds" : "VIOLATED");
        if (!ordered) rc = 1;
    }
    if (!out_dir.empty()) {
        fs::create_directories(out_dir);
        std::string csv = "scenario,reps,selection_mean_s,selection_std_s,completion_pct,"
                          "messages_per_job\n";
        for (const auto& r : rows) {
            csv += r.name + "," + std::to_string(r.repetitions) + "," +
                   std::to_string(r.selection_mean_s) + "," + std::to_string(r.selection_std_s) +
                   "," + std::to_string(r.completion_pct) + "," +
                   std::to_string(r.messages_per_job) + "\n";
        }
        write_file(fs::path(out_dir) / "comparison.csv", csv);
    }
    return rc;
}

std::vector<double> csv_means(const std::vector<std::string>& files) {
    std::vector<double> means;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open " + f);
        std::string text((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        auto rows = accord::harness::parse_csv(text);
        auto s = accord::harness::summarize_csv(rows);
        means.push_back(s.selection.mean);
    }
    return means;
}

int do_stats(const std::vector<std::string>& a, const std::vector<std::string>& b,
             double alpha) {
    auto ma = csv_means(a);
    auto mb = csv_means(b);
    auto r = accord::harness::welch_t_test(ma, mb);
    std::printf("group A: n=%zu mean selection %.4f s\n", ma.size(), r.mean_a);
    std::printf("group B: n=%zu mean selection %.4f s\n", mb.size(), r.mean_b);
    std::printf("Welch t = %.4f, df = %.2f, two-tailed p = %.6g, Cohen's d = %.3f\n", r.t,
                r.df, r.p, r.cohens_d);
    std::printf("%s at alpha=%.2f\n",
                r.p < alpha ? "difference is significant" : "no significant difference", alpha);
    return 0;
}

int do_audit(const std::string& dir) {
    int checked = 0, failures = 0;
    for (const auto& entry : fs::directory_iterator(dir)) {
        const auto p = entry.path();
        if (p.extension() != ".csv" || p.filename() == "comparison.csv") continue;
        fs::path summary_path = p.parent_path() / (p.stem().string() + "_summary.json");
        if (!fs::exists(summary_path)) continue;
        ++checked;

        std::ifstream cf(p, std::ios::binary);
        std::string text((std::istreambuf_iterator<char>(cf)),
                         std::istreambuf_iterator<char>());
        std::ifstream sf(summary_path);
        nlohmann::json summary = nlohmann::json::parse(sf);

        auto rows = accord::harness::parse_csv(text);
        auto recomputed = accord::harness::summarize_csv(rows);
        auto stored =
            accord::harness::csv_summary_from_json(summary.at("csv_stats"));

        bool ok = accord::harness::csv_summary_equal(recomputed, stored);
        std::set<std::string> ids;
        for (const auto& r : rows) {
            if (!ids.insert(r.job_id).second) {
                ok = false;
                std::printf("  duplicate job row %s\n", r.job_id.c_str());
            }
        }
        const auto& audits = summary.at("audits");
        if (!audits.at("cas").empty() || !audits.at("safety_violations").empty() ||
            !audits.at("orphans").empty()) {
            ok = false;
        }
        std::printf("%s: %s\n", p.filename().string().c_str(),
                    ok ? "ok" : "AUDIT FAILED");
        if (!ok) ++failures;
    }
    std::printf("audited %d repetition(s), %d failure(s)\n", checked, failures);
    return failures == 0 && checked > 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"decentralized job-selection engine and deterministic network simulator"};
    app.require_subcommand(1);

    RunArgs run_args;
    auto* run = app.add_subcommand("run", "run a scenario and export metrics CSVs");
    run->add_option("-s,--scenario", run_args.scenario_path, "scenario JSON file")->required();
    run->add_option("-r,--reps", run_args.repetitions, "repetition count override");
    run->add_option("--seed", run_args.seed, "seed base override");
    run->add_option("-o,--out", run_args.out_dir, "output directory (default: out)");
    run->add_flag("--long-ok", run_args.long_ok, "allow long-running scenarios");
    run->add_flag("--trace", run_args.trace, "write the event trace (JSONL)");
    run->add_flag("--realtime", run_args.realtime, "wall-clock paced soak mode");
    run->add_option("--time-scale", run_args.time_scale,
                    "simulated seconds per wall second in realtime mode");
    run->add_flag("--dump-inputs", run_args.dump_inputs,
                  "export the generated population and workload");

    std::vector<std::string> compare_paths;
    int compare_reps = 0;
    std::uint64_t compare_seed = 0;
    std::string compare_out;
    auto* cmp = app.add_subcommand("compare", "run several scenarios and tabulate trends");
    cmp->add_option("-s,--scenario", compare_paths, "scenario files")->required();
    cmp->add_option("-r,--reps", compare_reps, "repetition count override");
    cmp->add_option("--seed", compare_seed, "seed base override");
    cmp->add_option("-o,--out", compare_out, "directory for comparison.csv");

    std::vector<std::string> stats_a, stats_b;
    double alpha = 0.05;
    auto* st = app.add_subcommand("stats", "two-tailed Welch t-test over metric CSVs");
    st->add_option("--a", stats_a, "group A CSV files")->required();
    st->add_option("--b", stats_b, "group B CSV files")->required();
    st->add_option("--alpha", alpha, "significance level (default 0.05)");

    std::string audit_dir;
    auto* au = app.add_subcommand("audit", "re-check CSVs against stored summaries");
    au->add_option("-d,--dir", audit_dir, "run output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return do_run(run_args);
        if (cmp->parsed()) return do_compare(compare_paths, compare_reps, compare_seed, compare_out);
        if (st->parsed()) return do_stats(stats_a, stats_b, alpha);
        if (au->parsed()) return do_audit(audit_dir);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
