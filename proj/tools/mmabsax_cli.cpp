// Command-line front end: single episodes, horizon sweeps, the built-in
// property checks, and trace pretty-printing.  Exit codes: 0 success,
// 1 failed check suite, 2 configuration error.
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "mmabsax/check.hpp"
#include "mmabsax/env.hpp"
#include "mmabsax/harness.hpp"

namespace {

using mmabsax::ConfigError;

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<long long> horizon;
    std::optional<std::string> delta;  // numeric text, or "theorem"
    std::optional<std::string> feedback_mode;
};

// Parses the config file, layers CLI overrides on top, and re-validates.
// Extra top-level keys understood here (not part of the instance schema):
//   policy ("protocol" | "simple_rr_baseline"), delta_policy
//   ("explicit" | "theorem_default"), seeds [..], horizons [..].
mmabsax::RunConfig build_run_config(const std::string& config_path,
                                    const Overrides& ov,
                                    nlohmann::json* raw_out) {
    const std::string text = read_file(config_path);
    mmabsax::RunConfig rc;
    rc.instance = mmabsax::InstanceConfig::from_json_text(text);

    nlohmann::json raw;
    try {
        raw = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    if (raw.contains("policy"))
        rc.policy = mmabsax::policy_from_string(raw.at("policy").get<std::string>());
    if (raw.contains("delta_policy")) {
        const auto s = raw.at("delta_policy").get<std::string>();
        if (s == "theorem_default")
            rc.delta_policy = mmabsax::DeltaPolicy::theorem_default;
        else if (s == "explicit")
            rc.delta_policy = mmabsax::DeltaPolicy::explicit_value;
        else
            throw ConfigError("unknown delta_policy: " + s);
    }

    if (ov.seed) rc.instance.seed = *ov.seed;
    if (ov.horizon) rc.instance.horizon = *ov.horizon;
    if (ov.delta) {
        if (*ov.delta == "theorem" || *ov.delta == "theorem_default") {
            rc.delta_policy = mmabsax::DeltaPolicy::theorem_default;
        } else {
            try {
                rc.instance.delta = std::stod(*ov.delta);
            } catch (const std::exception&) {
                throw ConfigError("--delta expects a number or 'theorem': " + *ov.delta);
            }
            rc.delta_policy = mmabsax::DeltaPolicy::explicit_value;
        }
    }
    if (ov.feedback_mode)
        rc.instance.feedback_mode = mmabsax::feedback_mode_from_string(*ov.feedback_mode);

    rc.instance.validate();
    if (raw_out) *raw_out = raw;
    return rc;
}

nlohmann::json result_to_json(const mmabsax::RunResult& r) {
    nlohmann::json j;
    j["instance"] = nlohmann::json::parse(r.instance.to_json_text());
    j["horizon"] = r.horizon;
    j["steps_simulated"] = r.steps_run;
    j["cumulative_regret"] = r.ledger.cumulative;
    j["regret_buckets"] = {{"phase1", r.ledger.phase1},
                           {"phase2_explore", r.ledger.phase2_explore},
                           {"communication", r.ledger.communication},
                           {"phase3", r.ledger.phase3},
                           {"exploitation", r.ledger.exploitation}};
    j["good_event"] = r.good_event;
    j["good_event_violations"] = r.good_event_violations;
    j["desync_flagged"] = r.desync.flagged;
    if (r.desync.flagged) {
        j["desync_first_t"] = r.desync.first_t;
        j["desync_detail"] = r.desync.detail;
    }
    j["phase1_steps"] = r.phase1_steps;
    j["partition_epochs"] = r.partition_epochs;
    j["incomplete"] = r.incomplete;
    j["all_committed"] = r.all_committed;
    j["any_ucb"] = r.any_ucb;
    j["commit_step"] = r.commit_step;
    j["post_commit_regret"] = r.post_commit_regret;
    j["final_assignment"] = r.final_assignment;
    nlohmann::json series = nlohmann::json::array();
    for (const auto& pt : r.ledger.series)
        series.push_back({{"t", pt.t}, {"cumulative", pt.cumulative}});
    j["regret_series"] = std::move(series);
    return j;
}

std::string sibling_json_path(const std::string& csv_path) {
    const auto dot = csv_path.find_last_of('.');
    const auto slash = csv_path.find_last_of("/\\");
    if (dot == std::string::npos || (slash != std::string::npos && dot < slash))
        return csv_path + ".json";
    return csv_path.substr(0, dot) + ".json";
}

int resolve_jobs(int flag_value) {
    if (flag_value > 0) return flag_value;
    if (const char* env = std::getenv("MMAB_SAX_JOBS")) {
        try {
            const int v = std::stoi(env);
            if (v > 0) return v;
        } catch (const std::exception&) {
            throw ConfigError(std::string("MMAB_SAX_JOBS is not a number: ") + env);
        }
    }
    return 1;
}

int cmd_run(const std::string& config_path, const Overrides& ov,
            const std::string& out_path, const std::string& trace_path) {
    mmabsax::RunConfig rc = build_run_config(config_path, ov, nullptr);
    if (!trace_path.empty()) {
        rc.trace_verbosity = 1;
        rc.trace_path = trace_path;
    }
    const mmabsax::RunResult res = mmabsax::run_episode(rc);

    if (!out_path.empty()) {
        mmabsax::write_results_csv(out_path, {res});
        const std::string jpath = sibling_json_path(out_path);
        std::ofstream jf(jpath);
        if (!jf) throw ConfigError("cannot open output file: " + jpath);
        jf << result_to_json(res).dump(2) << "\n";
        std::cout << "wrote " << out_path << " and " << jpath << "\n";
    } else {
        std::cout << mmabsax::run_result_csv_header() << "\n"
                  << mmabsax::run_result_csv_row(res) << "\n"
                  << result_to_json(res).dump(2) << "\n";
    }
    return 0;
}

int cmd_sweep(const std::string& config_path, const Overrides& ov,
              const std::string& out_path, int jobs_flag) {
    nlohmann::json raw;
    mmabsax::SweepSpec spec;
    spec.base = build_run_config(config_path, ov, &raw);
    spec.jobs = resolve_jobs(jobs_flag);

    try {
        if (raw.contains("seeds"))
            for (const auto& s : raw.at("seeds"))
                spec.seeds.push_back(s.get<std::uint64_t>());
        if (raw.contains("horizons"))
            for (const auto& h : raw.at("horizons"))
                spec.horizons.push_back(h.get<long long>());
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid sweep list: ") + e.what());
    }
    // Singular CLI overrides collapse the corresponding sweep axis.
    if (ov.seed) spec.seeds = {*ov.seed};
    if (ov.horizon) spec.horizons = {*ov.horizon};
    for (const long long h : spec.horizons)
        if (h <= 0) throw ConfigError("horizons must be positive");

    const auto results = mmabsax::run_sweep(spec);

    if (!out_path.empty()) {
        mmabsax::write_results_csv(out_path, results);
        std::cout << "wrote " << results.size() << " rows to " << out_path << "\n";
    } else {
        std::cout << mmabsax::run_result_csv_header() << "\n";
        for (const auto& r : results) std::cout << mmabsax::run_result_csv_row(r) << "\n";
    }

    // Per-horizon summary: mean +/- sample standard deviation of final regret.
    std::map<long long, std::vector<double>> by_h;
    for (const auto& r : results) by_h[r.horizon].push_back(r.ledger.cumulative);
    std::cout << std::setprecision(6);
    for (const auto& [h, xs] : by_h) {
        double mean = 0;
        for (double x : xs) mean += x;
        mean /= static_cast<double>(xs.size());
        double var = 0;
        for (double x : xs) var += (x - mean) * (x - mean);
        const double sd = xs.size() > 1 ? std::sqrt(var / static_cast<double>(xs.size() - 1)) : 0.0;
        std::cout << "horizon " << h << ": regret " << mean << " +/- " << sd
                  << " (n=" << xs.size() << ")\n";
    }
    return 0;
}

int cmd_check(std::uint64_t seed) {
    const auto results = mmabsax::run_all_checks(seed);
    int failures = 0;
    for (const auto& r : results) {
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << r.name;
        if (!r.detail.empty()) std::cout << " — " << r.detail;
        std::cout << "\n";
        if (!r.pass) ++failures;
    }
    std::cout << results.size() - static_cast<std::size_t>(failures) << "/" << results.size()
              << " checks passed\n";
    return failures == 0 ? 0 : 1;
}

int cmd_trace_replay(const std::string& trace_path) {
    std::ifstream in(trace_path);
    if (!in) throw ConfigError("cannot read trace file: " + trace_path);
    std::string line;
    long long n = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        nlohmann::json ev;
        try {
            ev = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("malformed trace line " + std::to_string(n + 1) + ": " + e.what());
        }
        std::cout << "t=" << std::setw(10) << ev.value("t", -1LL) << "  player "
                  << ev.value("player", 0) << "  " << std::left << std::setw(18)
                  << ev.value("kind", std::string("?")) << std::right << "  "
                  << ev.value("detail", std::string()) << "\n";
        ++n;
    }
    std::cout << n << " events\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Decentralized multi-player bandit simulator with shareable, "
                 "capacity-limited arms"};
    app.require_subcommand(1);

    std::string config_path, out_path, trace_path, fb_mode;
    Overrides ov;
    std::uint64_t seed_flag = 0;
    long long horizon_flag = 0;
    std::string delta_flag;
    int jobs_flag = 0;
    std::uint64_t check_seed = 12345;

    auto add_common = [&](CLI::App* sub, bool with_jobs) {
        sub->add_option("--config", config_path, "instance config JSON")->required();
        sub->add_option("--seed", seed_flag, "override the config seed");
        sub->add_option("--horizon", horizon_flag, "override the config horizon");
        sub->add_option("--delta", delta_flag,
                        "override delta (number, or 'theorem' for 1/(T^2 M K^2))");
        sub->add_option("--feedback-mode", fb_mode,
                        "override feedback mode (hard_sax | aggregate_soft)");
        sub->add_option("--out", out_path, "output CSV path");
        if (with_jobs)
            sub->add_option("--jobs", jobs_flag,
                            "parallel episodes (env MMAB_SAX_JOBS as fallback)");
    };

    CLI::App* run = app.add_subcommand("run", "simulate one episode (CSV + JSON output)");
    add_common(run, false);
    run->add_option("--trace", trace_path, "write a protocol event trace (JSONL)");

    CLI::App* sweep = app.add_subcommand(
        "sweep", "run a seeds x horizons grid ('seeds'/'horizons' arrays in the config)");
    add_common(sweep, true);

    CLI::App* check = app.add_subcommand("check", "run the built-in property checks");
    check->add_option("--seed", check_seed, "seed for randomized checks");

    CLI::App* replay = app.add_subcommand("trace-replay", "pretty-print a stored trace");
    replay->add_option("--trace", trace_path, "trace JSONL path")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        if (code == 0) return 0;  // --help and friends
        std::cerr << app.help() << "\n";
        return 2;
    }

    // Collect only the overrides the user actually passed.
    auto sub = app.get_subcommands().front();
    auto passed = [&](const std::string& name) {
        return sub->count(name) > 0;
    };
    if (sub == run || sub == sweep) {
        if (passed("--seed")) ov.seed = seed_flag;
        if (passed("--horizon")) ov.horizon = horizon_flag;
        if (passed("--delta")) ov.delta = delta_flag;
        if (passed("--feedback-mode")) ov.feedback_mode = fb_mode;
    }

    try {
        if (sub == run) return cmd_run(config_path, ov, out_path, trace_path);
        if (sub == sweep) return cmd_sweep(config_path, ov, out_path, jobs_flag);
        if (sub == check) return cmd_check(check_seed);
        if (sub == replay) return cmd_trace_replay(trace_path);
    } catch (const mmabsax::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const mmabsax::InfeasibleError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
