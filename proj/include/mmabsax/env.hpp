#pragma once
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace mmabsax {

// ---------------------------------------------------------------------------
// Bandit instances: shareable arms with hidden capacities, two feedback modes.
// Arm and player indices are 1-based throughout the public API.
// ---------------------------------------------------------------------------

enum class Dist { bernoulli, point_mass, beta_like };
enum class FeedbackMode { hard_sax, aggregate_soft };

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct InfeasibleError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ArmSpec {
    double mean = 0.0;   // in [0,1]
    int capacity = 1;    // >= 1
    Dist dist = Dist::bernoulli;
};

struct InstanceConfig {
    std::vector<ArmSpec> arms;
    int players = 1;          // M
    long long horizon = 0;    // T
    double delta = 0.01;      // confidence parameter, must be < 1/2
    FeedbackMode feedback_mode = FeedbackMode::hard_sax;
    std::uint64_t seed = 0;

    int K() const { return static_cast<int>(arms.size()); }

    // Throws ConfigError on malformed fields, InfeasibleError when the total
    // capacity cannot host all players.
    void validate() const;

    static InstanceConfig from_json_text(const std::string& text);
    std::string to_json_text() const;
};

struct ActionProfile {
    std::vector<int> choices; // choices[p-1] in [1..K], one per player
};

struct FeedbackVector {
    std::vector<double> rewards; // rewards[p-1]; raw arm totals in aggregate mode
};

struct OptimalAllocation {
    int V = 0;                 // number of top arms used
    std::vector<int> counts;   // counts[a-1] = players assigned to arm a
    double value = 0.0;        // per-step optimal expected reward
};

// Per-arm occupancy of a profile (index 0 unused; 1..K).
std::vector<int> occupancy(const ActionProfile& profile, int K);

// Samples one step of feedback. Draws are keyed by (instance.seed, t, player),
// so the result is a pure function of its arguments.
//   hard_sax: within capacity every player on the arm gets an independent
//     draw; above capacity everyone on the arm gets exactly 0.
//   aggregate_soft: every player on the arm observes the same raw arm total,
//     the sum of draws of the min(occupancy, C) lowest-indexed players there.
FeedbackVector sample_feedback(const InstanceConfig& instance,
                               const ActionProfile& profile,
                               long long t);

// Greedy water-fill over arms sorted by descending mean.
OptimalAllocation optimal_allocation(const InstanceConfig& instance);

// Exhaustive reference (small instances only; counts canonicalized to the
// same descending-mean greedy tie-break so results are comparable).
OptimalAllocation optimal_allocation_bruteforce(const InstanceConfig& instance);

// Per-step pseudo-regret of a profile against the optimal allocation:
//   hard_sax:        value* - sum_p mu(a_p) * 1{occupancy(a_p) <= C(a_p)}
//   aggregate_soft:  value* - sum_a mu(a) * min(occupancy(a), C(a))
double step_regret(const InstanceConfig& instance,
                   const OptimalAllocation& opt,
                   const ActionProfile& profile);

// Mean of one draw from an arm's reward distribution given (seed, t, player).
double sample_arm_draw(const ArmSpec& arm, std::uint64_t seed,
                       long long t, int player);

std::string to_string(Dist d);
std::string to_string(FeedbackMode m);
Dist dist_from_string(const std::string& s);
FeedbackMode feedback_mode_from_string(const std::string& s);

} // namespace mmabsax
