#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "mmabsax/env.hpp"
#include "mmabsax/protocol.hpp"

namespace mmabsax {

// ---------------------------------------------------------------------------
// Reproducible experiment harness: lockstep episode driver, regret ledger,
// estimator-accuracy monitor, schedule-desync monitor, and parallel sweeps.
// ---------------------------------------------------------------------------

enum class Policy { protocol, simple_rr_baseline };
enum class DeltaPolicy { explicit_value, theorem_default };

std::string to_string(Policy p);
Policy policy_from_string(const std::string& s);

struct RunConfig {
    InstanceConfig instance;
    Policy policy = Policy::protocol;
    // theorem_default replaces instance.delta with 1/(T^2 M K^2).
    DeltaPolicy delta_policy = DeltaPolicy::explicit_value;
    long long max_wall_steps = 0;  // 0 = simulate the whole horizon
    int trace_verbosity = 0;       // 0 silent, >=1 protocol events to trace_path
    std::string trace_path;
    bool monitor_good_event = true;
    bool monitor_desync = true;
    long long desync_stride = 101;  // fingerprint comparison cadence (steps)
};

struct RegretSeriesPoint {
    long long t = 0;        // steps elapsed (1-based count)
    double cumulative = 0;  // pseudo-regret accrued through step t
};

struct RegretLedger {
    double cumulative = 0.0;
    long long stride = 1;
    std::vector<RegretSeriesPoint> series;
    // Buckets keyed by the coordinator's current activity.
    double phase1 = 0.0;
    double phase2_explore = 0.0;
    double communication = 0.0;
    double phase3 = 0.0;
    double exploitation = 0.0;
};

struct DesyncReport {
    bool flagged = false;
    long long first_t = -1;
    std::string detail;
};

struct RunResult {
    InstanceConfig instance;  // with the resolved delta
    long long steps_run = 0;  // steps actually simulated (fast-forward excluded)
    long long horizon = 0;
    RegretLedger ledger;

    bool good_event = true;
    long long good_event_violations = 0;
    DesyncReport desync;

    long long phase1_steps = 0;
    int partition_epochs = 0;
    bool incomplete = true;  // horizon ended before every player committed
    bool all_committed = false;
    bool any_ucb = false;
    long long commit_step = -1;        // 0-based step after which all were committed
    double post_commit_regret = 0.0;   // regret accrued after commit_step
    std::vector<int> final_assignment; // per player, 0 when uncommitted

    std::vector<PlayerTelemetry> players;
};

RunResult run_episode(const RunConfig& cfg);

struct SweepSpec {
    RunConfig base;
    std::vector<std::uint64_t> seeds;     // empty: just the instance seed
    std::vector<long long> horizons;      // empty: just the instance horizon
    int jobs = 1;
};

// Cartesian product of seeds x horizons, deterministic result order.
std::vector<RunResult> run_sweep(const SweepSpec& spec);

double good_event_rate(const std::vector<RunResult>& results);

// Results CSV: horizon,seed,cumulative_regret,good_event,phase1_steps,
//              partition_epochs,final_assignment
std::string run_result_csv_header();
std::string run_result_csv_row(const RunResult& r);
void write_results_csv(const std::string& path, const std::vector<RunResult>& rows);

// True arm mean seen by a nominal group of size psi (the quantity the
// per-(arm, group-size) estimators track).
double group_mean(const InstanceConfig& instance, int arm, int psi);

} // namespace mmabsax
