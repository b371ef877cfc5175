#include "mmabsax/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "mmabsax/schedule.hpp"
#include "mmabsax/stats.hpp"

namespace mmabsax {

std::string to_string(Policy p) {
    return p == Policy::protocol ? "protocol" : "simple_rr_baseline";
}

Policy policy_from_string(const std::string& s) {
    if (s == "protocol") return Policy::protocol;
    if (s == "simple_rr_baseline" || s == "simple_rr") return Policy::simple_rr_baseline;
    throw ConfigError("unknown policy: " + s);
}

double group_mean(const InstanceConfig& instance, int arm, int psi) {
    const auto& spec = instance.arms.at(static_cast<std::size_t>(arm - 1));
    if (instance.feedback_mode == FeedbackMode::aggregate_soft)
        return spec.mean * std::min(psi, spec.capacity) / psi;
    return psi <= spec.capacity ? spec.mean : 0.0;
}

namespace {

std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    return out;
}

} // namespace

RunResult run_episode(const RunConfig& cfg_in) {
    RunConfig cfg = cfg_in;
    InstanceConfig& inst = cfg.instance;
    if (cfg.delta_policy == DeltaPolicy::theorem_default) {
        const double T = static_cast<double>(std::max<long long>(inst.horizon, 1));
        const double MK2 = static_cast<double>(inst.players) * inst.K() * inst.K();
        inst.delta = std::min(1.0 / (T * T * MK2), 0.4999);
    }
    inst.validate();

    const int M = inst.players;
    const int K = inst.K();
    const long long T = inst.horizon;
    long long budget = T;
    if (cfg.max_wall_steps > 0) budget = std::min(budget, cfg.max_wall_steps);

    RunResult res;
    res.instance = inst;
    res.horizon = T;
    res.ledger.stride = std::max<long long>(1, T / 10000);

    const ConfidenceParams params =
        inst.feedback_mode == FeedbackMode::aggregate_soft
            ? ConfidenceParams::variant(inst.delta, M, K)
            : ConfidenceParams::hard(inst.delta, M, K);

    std::ofstream trace;
    const bool tracing = cfg.trace_verbosity >= 1 && !cfg.trace_path.empty();
    if (tracing) {
        trace.open(cfg.trace_path);
        if (!trace) throw ConfigError("cannot open trace file: " + cfg.trace_path);
    }

    const bool proto = cfg.policy == Policy::protocol;
    std::vector<Player> players;
    if (proto) {
        players.reserve(static_cast<std::size_t>(M));
        for (int p = 1; p <= M; ++p) players.emplace_back(inst, p);
        if (cfg.monitor_good_event) {
            for (auto& pl : players)
                pl.set_counted_update_hook(
                    [&res, &inst, params](int, int arm, int psi, double mu_hat, long long count) {
                        const double mu = group_mean(inst, arm, psi);
                        if (std::fabs(mu_hat - mu) > B_value(count, params) + 1e-12) {
                            res.good_event = false;
                            res.good_event_violations += 1;
                        }
                    });
        }
        if (tracing) {
            for (auto& pl : players)
                pl.set_trace([&trace](const TraceEvent& ev) {
                    trace << "{\"t\":" << ev.t << ",\"player\":" << ev.player << ",\"kind\":\""
                          << json_escape(ev.kind) << "\",\"detail\":\"" << json_escape(ev.detail)
                          << "\"}\n";
                });
        }
    }

    const OptimalAllocation opt = optimal_allocation(inst);

    ActionProfile prof;
    prof.choices.resize(static_cast<std::size_t>(M));
    bool all_committed = false;
    bool fast_forwarded = false;
    long long simulated = 0;
    long long ff_at = 0;
    double ff_base = 0.0;
    double ff_rate = 0.0;

    for (long long t = 0; t < budget; ++t) {
        SegmentKind seg1 = SegmentKind::Terminal;
        if (proto) {
            for (int p = 1; p <= M; ++p)
                prof.choices[static_cast<std::size_t>(p - 1)] =
                    players[static_cast<std::size_t>(p - 1)].choose_arm(t);
            seg1 = players[0].segment();
        } else {
            for (int p = 1; p <= M; ++p)
                prof.choices[static_cast<std::size_t>(p - 1)] =
                    simple_rr_arm(p, static_cast<int>(t % K) + 1, K);
        }

        const FeedbackVector fb = sample_feedback(inst, prof, t);
        const double r = step_regret(inst, opt, prof);
        res.ledger.cumulative += r;
        if (all_committed) res.post_commit_regret += r;

        if (!proto) {
            res.ledger.exploitation += r;
        } else {
            switch (seg1) {
                case SegmentKind::Phase1Session:
                    res.ledger.phase1 += r;
                    res.phase1_steps += 1;
                    break;
                case SegmentKind::Phase1Block:
                case SegmentKind::CommBlock:
                    res.ledger.communication += r;
                    if (seg1 == SegmentKind::Phase1Block) res.phase1_steps += 1;
                    break;
                case SegmentKind::Phase2Explore:
                    res.ledger.phase2_explore += r;
                    break;
                case SegmentKind::Phase3Window:
                    res.ledger.phase3 += r;
                    break;
                case SegmentKind::Terminal:
                case SegmentKind::UcbFallback:
                    res.ledger.exploitation += r;
                    break;
            }
        }

        if (proto) {
            for (int p = 1; p <= M; ++p)
                players[static_cast<std::size_t>(p - 1)].observe(
                    t, prof.choices[static_cast<std::size_t>(p - 1)],
                    fb.rewards[static_cast<std::size_t>(p - 1)]);

            if (!all_committed) {
                bool all = true;
                for (const auto& pl : players)
                    if (!pl.committed()) {
                        all = false;
                        break;
                    }
                if (all) {
                    all_committed = true;
                    res.commit_step = t;
                }
            }

            if (cfg.monitor_desync && !res.desync.flagged && t % cfg.desync_stride == 0) {
                bool have = false;
                std::uint64_t fp = 0;
                int fp_player = 0;
                for (const auto& pl : players) {
                    if (pl.in_ucb()) continue;
                    const std::uint64_t f = pl.fingerprint();
                    if (!have) {
                        have = true;
                        fp = f;
                        fp_player = pl.index();
                    } else if (f != fp) {
                        res.desync.flagged = true;
                        res.desync.first_t = t;
                        std::ostringstream os;
                        os << "players " << fp_player << " and " << pl.index()
                           << " diverged (segments " << to_string(players[0].segment()) << "/"
                           << to_string(pl.segment()) << ")";
                        res.desync.detail = os.str();
                        if (tracing)
                            trace << "{\"t\":" << t
                                  << ",\"player\":0,\"kind\":\"desync\",\"detail\":\""
                                  << json_escape(res.desync.detail) << "\"}\n";
                        break;
                    }
                }
            }
        }

        simulated = t + 1;
        if (simulated % res.ledger.stride == 0)
            res.ledger.series.push_back({simulated, res.ledger.cumulative});

        if (proto && !fast_forwarded && simulated < budget) {
            bool all_terminal = true;
            for (const auto& pl : players)
                if (!pl.terminal()) {
                    all_terminal = false;
                    break;
                }
            if (all_terminal) {
                // Every player holds a fixed arm forever: the profile is
                // constant, so the remaining pseudo-regret is linear.
                for (int p = 1; p <= M; ++p)
                    prof.choices[static_cast<std::size_t>(p - 1)] =
                        players[static_cast<std::size_t>(p - 1)].committed_arm();
                ff_rate = step_regret(inst, opt, prof);
                ff_at = simulated;
                ff_base = res.ledger.cumulative;
                const long long rem = budget - simulated;
                res.ledger.cumulative += ff_rate * rem;
                res.ledger.exploitation += ff_rate * rem;
                res.post_commit_regret += ff_rate * rem;
                fast_forwarded = true;
                if (tracing)
                    trace << "{\"t\":" << t << ",\"player\":0,\"kind\":\"fast_forward\","
                          << "\"detail\":\"rate=" << ff_rate << " remaining=" << rem << "\"}\n";
                break;
            }
        }
    }

    if (fast_forwarded) {
        for (long long s = (ff_at / res.ledger.stride + 1) * res.ledger.stride; s <= budget;
             s += res.ledger.stride)
            res.ledger.series.push_back({s, ff_base + ff_rate * (s - ff_at)});
    }
    if (res.ledger.series.empty() || res.ledger.series.back().t != budget)
        res.ledger.series.push_back({budget, res.ledger.cumulative});
    res.steps_run = simulated;

    res.final_assignment.assign(static_cast<std::size_t>(M), 0);
    if (proto) {
        bool allc = true;
        for (const auto& pl : players) {
            res.players.push_back(pl.telemetry());
            res.final_assignment[static_cast<std::size_t>(pl.index() - 1)] = pl.committed_arm();
            res.partition_epochs = std::max(res.partition_epochs, pl.epoch());
            if (pl.in_ucb()) res.any_ucb = true;
            if (!pl.committed()) allc = false;
        }
        res.all_committed = allc;
    }
    res.incomplete = !res.all_committed;
    return res;
}

std::vector<RunResult> run_sweep(const SweepSpec& spec) {
    std::vector<std::uint64_t> seeds = spec.seeds;
    if (seeds.empty()) seeds.push_back(spec.base.instance.seed);
    std::vector<long long> horizons = spec.horizons;
    if (horizons.empty()) horizons.push_back(spec.base.instance.horizon);

    struct Job {
        std::uint64_t seed;
        long long horizon;
    };
    std::vector<Job> jobs;
    for (long long h : horizons)
        for (std::uint64_t s : seeds) jobs.push_back({s, h});

    std::vector<RunResult> results(jobs.size());
    const int workers = std::max(1, spec.jobs);
    std::atomic<std::size_t> cursor{0};
    auto run_jobs = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= jobs.size()) return;
            RunConfig rc = spec.base;
            rc.instance.seed = jobs[i].seed;
            rc.instance.horizon = jobs[i].horizon;
            rc.trace_path.clear(); // per-episode traces are single-run only
            rc.trace_verbosity = 0;
            results[i] = run_episode(rc);
        }
    };

    if (workers == 1) {
        run_jobs();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(run_jobs);
        for (auto& th : pool) th.join();
    }
    return results;
}

double good_event_rate(const std::vector<RunResult>& results) {
    if (results.empty()) return 1.0;
    std::size_t ok = 0;
    for (const auto& r : results)
        if (r.good_event) ++ok;
    return static_cast<double>(ok) / static_cast<double>(results.size());
}

std::string run_result_csv_header() {
    return "horizon,seed,cumulative_regret,good_event,phase1_steps,partition_epochs,"
           "final_assignment";
}

std::string run_result_csv_row(const RunResult& r) {
    std::ostringstream os;
    os.precision(12);
    os << r.horizon << ',' << r.instance.seed << ',' << r.ledger.cumulative << ','
       << (r.good_event ? 1 : 0) << ',' << r.phase1_steps << ',' << r.partition_epochs << ',';
    for (std::size_t i = 0; i < r.final_assignment.size(); ++i) {
        if (i) os << ';';
        os << r.final_assignment[i];
    }
    return os.str();
}

void write_results_csv(const std::string& path, const std::vector<RunResult>& rows) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot open results file: " + path);
    out << run_result_csv_header() << '\n';
    for (const auto& r : rows) out << run_result_csv_row(r) << '\n';
    if (!out) throw ConfigError("failed writing results file: " + path);
}

} // namespace mmabsax
