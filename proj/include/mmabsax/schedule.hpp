#pragma once
#include <vector>

namespace mmabsax {

// ---------------------------------------------------------------------------
// Deterministic round-robin machinery. Every player derives identical plans
// from shared knowledge (player count, arm count, own index) with no
// communication. Players, arms, units, and positions are 1-based.
// ---------------------------------------------------------------------------

// Cyclic rule: in round i, unit j occupies slot [(j + i - 1) mod K] + 1.
int simple_rr_arm(int p, int i, int K);
int unit_rr_arm(int j, int i, int K);

struct GroupPlan {
    // Groups in schedule order; a group's 1-based position is its unit index
    // for arm cycling. All groups have size psi except at most one remainder.
    std::vector<std::vector<int>> groups;
};

// pass 1: consecutive ascending-index blocks (remainder last).
// pass 2: consecutive descending-index blocks, so pass-1 leftovers land in a
// full group (the two leftover sets are disjoint because rho <= m/2).
GroupPlan grouped_rr_plan(int psi, const std::vector<int>& active_players, int pass);

long long session_length(int m, int K); // 2*m*K steps

struct StepDuty {
    int arm = 0;             // 1..K
    int psi = 0;             // nominal group size of this segment
    bool in_full_group = false;
    int group_index = 0;     // 1-based unit index
};

// One complete grouped round-robin session (psi = 1..m, two passes each, K
// rounds per pass) over all K arms for a fixed roster of active players.
class GroupedSessionPlan {
public:
    GroupedSessionPlan() = default;
    GroupedSessionPlan(std::vector<int> actives, int K);

    long long length() const { return session_length(m_, K_); }
    StepDuty duty(long long step, int player) const;

    // Arm pulled by an extra "ghost" unit (unit index G+1 of the current
    // segment): collision-free company for a player outside every group.
    int ghost_arm(long long step) const;

    int m() const { return m_; }
    int K() const { return K_; }
    const std::vector<int>& actives() const { return actives_; }

    // Full-group pulls a given player records per arm for group size psi in
    // one session (2 when in a full group both passes, else 1; schedule-
    // determined, identical for every arm).
    int full_pulls_per_session(int player, int psi) const;

private:
    struct Segment {
        GroupPlan plan_pass1, plan_pass2;
    };
    std::vector<int> actives_;
    int K_ = 0;
    int m_ = 0;
    std::vector<Segment> segments_; // by psi-1
    int group_of(const GroupPlan& plan, int player) const;
};

// Round-robin of units (players or whole groups) over a position set of size
// Kp. With at most Kp units, all units probe every round. With more, units
// are sliced into cohorts of at most Kp-1; cohorts take turns running a full
// pass while every other unit parks on the lowest-indexed position untouched
// by probers that round. A super-pass gives every unit one probe per position.
class UnitRRPlan {
public:
    UnitRRPlan() = default;
    UnitRRPlan(int num_units, int Kp);

    long long super_pass_rounds() const;

    struct UnitDuty {
        int position = 0; // 1..Kp
        bool probing = false;
    };
    // round is 0-based and taken modulo the super-pass length.
    UnitDuty duty(long long round, int unit /*1-based*/) const;

private:
    int U_ = 0;
    int Kp_ = 0;
    int cohort_size_ = 0;
    int num_cohorts_ = 0;
};

// Listener batches of size exactly C for collision signaling: consecutive
// ascending blocks; when the listener count is not divisible by C the final
// batch is the last C listeners (some serve double duty so that every batch
// can be overloaded by one extra player).
std::vector<std::vector<int>> listener_groups(const std::vector<int>& listeners, int C);

// ---------------------------------------------------------------------------
// Counters
// ---------------------------------------------------------------------------

// Per-player exploration tallies N^p(arm, psi); only full-group exploration
// pulls are recorded (signal-testing pulls are never passed in).
class PullCounters {
public:
    PullCounters() = default;
    PullCounters(int K, int max_psi);
    void record_pull(int arm, int psi, bool in_full_group);
    long long count(int arm, int psi) const;

private:
    int K_ = 0, max_psi_ = 0;
    std::vector<long long> counts_;
};

// Schedule-determined session-boundary minima N(., psi): arm-uniform and
// identical across players, so each player tracks them locally.
class NominalCounts {
public:
    NominalCounts() = default;
    explicit NominalCounts(int max_psi);
    void advance_grouped_session(int m);
    void advance_solo_pass(); // one solo-grade pass: N(.,1) += 1
    long long at(int psi) const;
    long long n_clock() const { return at(1); }

private:
    std::vector<long long> per_psi_;
};

} // namespace mmabsax
