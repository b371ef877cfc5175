#pragma once
#include <cstdint>
#include <functional>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "mmabsax/env.hpp"
#include "mmabsax/schedule.hpp"
#include "mmabsax/stats.hpp"

namespace mmabsax {

// ---------------------------------------------------------------------------
// Decentralized player state machines. Players interact only through the
// environment's feedback: choose_arm(t) -> observe(t, arm, own reward).
// Player 1 is the coordinator; everyone else listens. All inter-player
// coordination flows through deliberate capacity overloads (hard mode) or
// per-capita raises (aggregate mode) on an elected communication arm.
// ---------------------------------------------------------------------------

enum class SegmentKind {
    Phase1Session,  // grouped RR session over all arms, all players
    Phase1Block,    // cohort signal-testing block at a computable checkpoint
    Phase2Explore,  // (super-)passes over the active arm set
    CommBlock,      // one broadcast bit: G rounds x omega_signal steps
    Phase3Window,   // capacity probe sessions over the active arm set
    Terminal,       // all players committed
    UcbFallback,    // absorbing per-player fallback
};

std::string to_string(SegmentKind k);

// What a CommBlock bit means right now.
enum class CommStage { Idle, ArmFrame, GammaFrame };

struct TraceEvent {
    long long t = 0;
    int player = 0;
    std::string kind;
    std::string detail;
};

using TraceFn = std::function<void(const TraceEvent&)>;
// Oracle hook for Eq-1 monitoring: (player, arm, psi, mu_hat, count).
using CountedUpdateFn = std::function<void(int, int, int, double, long long)>;

// Pure arm-set codec: bit i (MSB first, i = 1..K) set iff arm i in subset.
std::vector<int> encode_arms(const std::set<int>& subset, int K);
std::set<int> decode_arms(const std::vector<int>& bits);

// Shared communication layout agreed at Phase-2 entry and kept for the whole
// run: the comm arm, listener batches, bit duration, complement arms.
struct CommLayout {
    int M = 0;
    int K = 0;
    int nu_star = 0;
    int park_group_size = 0;                // C (hard) or C_eff - 1 (variant)
    long long w = 0;                        // omega_signal: steps per round
    std::vector<std::vector<int>> groups;   // listener batches
    std::vector<int> comp_arms;             // sorted [K] \ {nu_star}

    long long block_length() const {
        return static_cast<long long>(groups.size()) * w;
    }
    // Arm for a player at block step s. transmit: the coordinator's bit
    // (ignored for everyone else); players in the parked group pull nu_star.
    int arm_at(long long s, int player, int transmit_bit) const;
    // Round index (0-based) of block step s.
    int round_of(long long s) const { return static_cast<int>(s / w); }
    bool player_parked_in_round(int round, int player) const;
};

CommLayout make_comm_layout(int M, int K, int nu_star, int park_group_size, long long w);

struct PlayerTelemetry {
    SegmentKind segment = SegmentKind::Phase1Session;
    long long segment_pos = 0;
    int epoch = 1;
    long long n_clock = 0;
    bool triggered = false;
    long long t0_n = -1;
    int trigger_arm = 0;          // arm whose inflated test fired first
    long long trigger_count = 0;  // own solo-pull count of that arm at the trigger
    long long t_comm_n = -1;
    std::optional<int> nu_star;
    long long omega_signal = 0;
    bool committed = false;
    int committed_arm = 0;
    bool in_ucb = false;
    bool terminal = false;
    std::set<int> candidates;
    std::vector<int> active_arms;
    int active_players = 0;
};

class Player {
public:
    Player(const InstanceConfig& cfg, int index);

    int choose_arm(long long t);
    void observe(long long t, int arm, double reward);

    int index() const { return p_; }
    bool is_coordinator() const { return p_ == 1; }

    PlayerTelemetry telemetry() const;
    // Master-schedule fingerprint: equal across all synchronized non-UCB
    // players at every step. Committed riders share it too.
    std::uint64_t fingerprint() const;

    bool in_ucb() const { return ucb_active_; }
    bool committed() const { return committed_arm_ != 0; }
    int committed_arm() const { return committed_arm_; }
    bool terminal() const { return seg_ == SegmentKind::Terminal; }
    SegmentKind segment() const { return seg_; }
    int epoch() const { return epoch_; }
    const EstimatorState& estimator() const { return est_; }
    // Own inferred capacity for an arm (0 = unknown; m-marker = at least m).
    std::optional<int> known_capacity(int arm) const;

    void set_trace(TraceFn fn) { trace_ = std::move(fn); }
    void set_counted_update_hook(CountedUpdateFn fn) { counted_hook_ = std::move(fn); }

private:
    // --- static configuration -------------------------------------------
    InstanceConfig cfg_;
    ConfidenceParams params_;
    int p_ = 1;
    int M_ = 1;
    int K_ = 1;
    bool variant_ = false;

    // --- master schedule (shared across synchronized players) -----------
    SegmentKind seg_ = SegmentKind::Phase1Session;
    long long seg_pos_ = 0;
    long long seg_len_ = 0;
    int epoch_ = 1;
    NominalCounts nominal_;
    long long last_boundary_n_ = 0;
    GroupedSessionPlan plan_all_;     // phase-1 sessions, all M players
    GroupedSessionPlan plan_cohort_;  // phase-1 blocks, listeners only

    // epoch state
    std::vector<int> active_arms_;    // A, sorted
    std::vector<int> active_players_; // sorted
    std::vector<int> fixed_arms_;     // absorbed arms, sorted
    std::vector<std::pair<int, int>> commitments_; // (player, arm)
    std::set<int> known_set_;         // arms probed by a capacity window
    UnitRRPlan explore_plan_;
    long long explore_round_ = 0;

    // --- estimation ------------------------------------------------------
    EstimatorState est_;
    PullCounters counters_;
    std::vector<bool> nonzero_seen_;   // per (arm, psi): exploration zeros
    std::vector<int> caps_;            // inferred capacity; -1 unknown
    std::vector<bool> caps_inconsistent_;

    // --- phase 1 ---------------------------------------------------------
    bool triggered_ = false;
    long long t0_n_ = -1;
    int trigger_arm_ = 0;
    long long trigger_count_ = 0;
    std::set<int> candidates_;
    bool skipped_once_ = false;
    bool signaling_block_ = false;     // coordinator: parking this block
    int quota_missed_ = 0;
    long long block_omega_ = 0;        // omega for the running block
    long long block_crossing_n_ = 0;
    struct WatchStat {
        long long count = 0;
        bool clean = true;
    };
    std::vector<WatchStat> watch_;     // per arm, reset each block

    // --- communication ---------------------------------------------------
    std::optional<int> nu_star_;
    long long t_comm_n_ = -1;
    long long omega_signal_ = 0;
    CommLayout layout_;
    CommStage comm_stage_ = CommStage::Idle;
    std::vector<int> frame_bits_;
    int transmit_bit_ = 0;
    WatchStat read_stat_;
    double read_sum_ = 0.0;
    bool bit_read_valid_ = false;
    std::set<int> v_top_;
    bool partition_latched_ = false;
    bool start_pending_ = false;       // coordinator: partition waiting for checkpoint
    long long t_first_n_ = -1;
    int gamma_ = 0;

    // --- phase 3 ---------------------------------------------------------
    struct WindowLayout {
        struct Part {
            int psi = 1;
            int pass = 1;
            GroupPlan plan;
            UnitRRPlan units;
            long long rounds = 0;
        };
        std::vector<Part> parts;
        long long session_rounds = 0;
    };
    WindowLayout window_;
    long long window_sessions_ = 0;
    long long window_need_ = 0;        // conclusive informative-pull count
    std::vector<WatchStat> window_flags_;  // per (arm, psi)
    EstimatorState window_est_;            // variant drop tests

    // --- commitment / fallback -------------------------------------------
    int committed_arm_ = 0;
    bool ucb_active_ = false;
    std::vector<double> ucb_sums_;
    std::vector<long long> ucb_counts_;
    std::set<int> ucb_arms_;

    TraceFn trace_;
    CountedUpdateFn counted_hook_;

    // --- helpers ----------------------------------------------------------
    std::size_t ap_idx(int arm, int psi) const;
    double mu1(int arm) const;
    int rank_of(int player) const;
    bool capacity_value_known(int arm) const;
    void refresh_capacities();
    void session_boundary_update(long long t);
    void maybe_trigger();
    void enter_phase1_block(long long crossing_n, long long t);
    void enter_phase2(long long t);
    void enter_explore(long long t);
    void enter_comm_block(long long t);
    void enter_window(long long t);
    void enter_ucb(long long t);
    void finish_block_phase1(long long t);
    void finish_comm_block(long long t);
    void finish_window(long long t);
    void recursion_step(long long t);
    void commit_players(const std::vector<int>& arms_sorted, bool include_p1,
                        long long t);
    void rebuild_explore_plan();
    void rebuild_window(long long gamma_dec);
    void update_graph_latch();
    int explore_arm(long long round, int rank, bool* probing) const;
    void record_exploration(int arm, int psi, double reward, long long t);
    void emit(long long t, const char* kind, const std::string& detail);
    long long crossing_omega(long long n) const;
    bool crossing_computable(long long n) const;
    double shared_B() const;
    int cap_eff(int arm) const;
    int ucb_pick() const;
    void finish_boundary_checks(long long t);
};

// Drives a complete frame exchange (start bit excluded) through a real
// environment with the given layout: the coordinator transmits `bits`, every
// listener reads its own copy. Returns per-listener decoded bit strings
// indexed by player (2..M). Used by codec round-trip tests.
std::vector<std::vector<int>> run_frame_exchange(const InstanceConfig& instance,
                                                 const CommLayout& layout,
                                                 const std::vector<int>& bits,
                                                 long long t_start);

} // namespace mmabsax
