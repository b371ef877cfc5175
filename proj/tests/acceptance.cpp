// Acceptance suite: ten end-to-end checks of the shipped behavior, one
// verdict line each. Every tolerance is pinned next to the check it guards.
// The binary exits nonzero when any criterion fails and never stops early.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "mmabsax/env.hpp"
#include "mmabsax/harness.hpp"
#include "mmabsax/protocol.hpp"
#include "mmabsax/rng.hpp"
#include "mmabsax/schedule.hpp"
#include "mmabsax/stats.hpp"

using namespace mmabsax;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::ostringstream os;
    os << (pass ? "[PASS]" : "[FAIL]") << " criterion " << id << ": " << name
       << " — " << detail << " (" << std::fixed << std::setprecision(1) << seconds
       << "s)";
    std::cout << os.str() << std::endl;
    if (!pass) ++g_failures;
}

class Timer {
public:
    Timer() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                             start_)
            .count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

InstanceConfig make_pm(const std::vector<double>& means, const std::vector<int>& caps,
                       int M, long long horizon, double delta, std::uint64_t seed,
                       FeedbackMode mode = FeedbackMode::hard_sax) {
    InstanceConfig cfg;
    for (std::size_t i = 0; i < means.size(); ++i)
        cfg.arms.push_back({means[i], caps[i], Dist::point_mass});
    cfg.players = M;
    cfg.horizon = horizon;
    cfg.delta = delta;
    cfg.seed = seed;
    cfg.feedback_mode = mode;
    return cfg;
}

std::vector<double> take(const std::vector<double>& v, int k) {
    return std::vector<double>(v.begin(), v.begin() + k);
}
std::vector<int> take(const std::vector<int>& v, int k) {
    return std::vector<int>(v.begin(), v.begin() + k);
}

// ---------------------------------------------------------------------------
// 1. Sublinear regret growth across decade horizons.
//
// K=5, M=3, unit capacities, top-three vs rest mean gap 0.5, Bernoulli
// rewards, horizon-dependent confidence (delta = 1/(T^2 M K^2)), 10 seeds per
// horizon. Checks, on mean cumulative regret: R(10T)/R(T) < 10 for each
// consecutive pair, and the pair ratios strictly decrease.
//
// The first pair is expected to sit exactly at 10.0: at this instance size
// both 9e3 and 9e4 steps end inside the initial grouped-exploration stage,
// whose pseudo-regret is schedule-determined and exactly linear in t, so the
// first decade carries ratio 10 by construction and only the later decades
// can exhibit curvature. The check is kept strict rather than widened.
// ---------------------------------------------------------------------------
void criterion_1() {
    Timer timer;
    const std::vector<long long> horizons = {9000, 90000, 900000, 9000000};
    const int seeds = 10;
    std::vector<double> mean_regret;
    for (long long T : horizons) {
        double acc = 0.0;
        for (int s = 1; s <= seeds; ++s) {
            InstanceConfig cfg;
            cfg.arms = {{0.95, 1, Dist::bernoulli},
                        {0.90, 1, Dist::bernoulli},
                        {0.85, 1, Dist::bernoulli},
                        {0.35, 1, Dist::bernoulli},
                        {0.30, 1, Dist::bernoulli}};
            cfg.players = 3;
            cfg.horizon = T;
            cfg.delta = 0.1;  // replaced by the horizon-dependent rule below
            cfg.seed = static_cast<std::uint64_t>(s);
            RunConfig rc;
            rc.instance = cfg;
            rc.delta_policy = DeltaPolicy::theorem_default;
            acc += run_episode(rc).ledger.cumulative;
        }
        mean_regret.push_back(acc / seeds);
    }
    std::vector<double> ratios;
    for (std::size_t i = 1; i < mean_regret.size(); ++i)
        ratios.push_back(mean_regret[i] / mean_regret[i - 1]);
    bool all_below = true;
    for (double r : ratios) all_below = all_below && (r < 10.0);  // strict
    const bool decreasing = ratios[0] > ratios[1] && ratios[1] > ratios[2];
    std::ostringstream os;
    os << std::setprecision(6) << "decade ratios " << ratios[0] << ", " << ratios[1]
       << ", " << ratios[2] << "; all <10: " << (all_below ? "yes" : "no")
       << ", decreasing: " << (decreasing ? "yes" : "no")
       << "; first pair lies inside the linear exploration stage";
    report(1, "sublinear regret growth", all_below && decreasing, os.str(),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// 2. Greedy allocation oracle equals brute-force enumeration.
// Grid: K in 2..5, M in 2..min(K,4), capacities in {1,2,3}, 60 seeded random
// mean vectors per shape (>=500 instances). Counts must match exactly and
// values to 1e-12 absolute.
// ---------------------------------------------------------------------------
void criterion_2() {
    Timer timer;
    int checked = 0, mismatches = 0;
    for (int K = 2; K <= 5; ++K) {
        for (int M = 2; M <= std::min(K, 4); ++M) {
            int collected = 0;
            for (int rep = 0; collected < 60 && rep < 400; ++rep) {
                const std::uint64_t seed =
                    9000ULL + 31ULL * static_cast<std::uint64_t>(K) +
                    7ULL * static_cast<std::uint64_t>(M);
                InstanceConfig inst;
                int total_cap = 0;
                for (int a = 1; a <= K; ++a) {
                    const double mu =
                        0.01 + 0.97 * rng::uniform(seed, static_cast<std::uint64_t>(rep),
                                                   static_cast<std::uint64_t>(a)) +
                        a * 1e-6;  // force distinct means
                    const int cap = 1 + static_cast<int>(
                                            rng::draw(seed ^ 0xabcdULL,
                                                      static_cast<std::uint64_t>(rep),
                                                      static_cast<std::uint64_t>(a)) %
                                            3);
                    inst.arms.push_back({mu, cap, Dist::point_mass});
                    total_cap += cap;
                }
                inst.players = M;
                inst.horizon = 10;
                inst.delta = 0.05;
                if (total_cap < M) continue;
                ++collected;
                ++checked;
                const auto g = optimal_allocation(inst);
                const auto b = optimal_allocation_bruteforce(inst);
                if (g.counts != b.counts || std::fabs(g.value - b.value) > 1e-12)
                    ++mismatches;
            }
        }
    }
    std::ostringstream os;
    os << checked << " instances, " << mismatches << " mismatches (counts exact, value tol 1e-12)";
    report(2, "allocation oracle equivalence", checked >= 500 && mismatches == 0,
           os.str(), timer.seconds());
}

// ---------------------------------------------------------------------------
// 3. Arm-set codec soundness: exhaustive round-trip over all 2^K subsets for
// K <= 8, both as a pure bit codec and through the collision channel on
// deterministic instances (every listener must recover the subset exactly).
// ---------------------------------------------------------------------------
void criterion_3() {
    Timer timer;
    long long pure_checked = 0, pure_bad = 0;
    for (int K = 1; K <= 8; ++K) {
        for (int mask = 0; mask < (1 << K); ++mask) {
            std::set<int> subset;
            for (int a = 1; a <= K; ++a)
                if (mask & (1 << (a - 1))) subset.insert(a);
            const auto bits = encode_arms(subset, K);
            ++pure_checked;
            if (static_cast<int>(bits.size()) != K || decode_arms(bits) != subset)
                ++pure_bad;
        }
    }
    long long chan_checked = 0, chan_bad = 0;
    for (int K = 2; K <= 8; ++K) {
        InstanceConfig inst;
        for (int a = 1; a <= K; ++a)
            inst.arms.push_back({0.9 - 0.08 * (a - 1), 1, Dist::point_mass});
        inst.players = 2;
        inst.horizon = 10;
        inst.delta = 0.05;
        inst.seed = 77;
        const auto layout = make_comm_layout(2, K, /*nu_star=*/1,
                                             /*park_group_size=*/1, /*w=*/6);
        for (int mask = 0; mask < (1 << K); ++mask) {
            std::set<int> subset;
            for (int a = 1; a <= K; ++a)
                if (mask & (1 << (a - 1))) subset.insert(a);
            const auto bits = encode_arms(subset, K);
            const auto reads =
                run_frame_exchange(inst, layout, bits, 512LL * mask);
            ++chan_checked;
            for (const auto& r : reads)
                if (decode_arms(r) != subset) ++chan_bad;
        }
    }
    std::ostringstream os;
    os << pure_checked << " pure round-trips (" << pure_bad << " bad), "
       << chan_checked << " channel round-trips (" << chan_bad << " bad)";
    report(3, "arm-set codec soundness", pure_bad == 0 && chan_bad == 0, os.str(),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// 4. Election agreement on deterministic instances: on every grid instance,
// either all players end with the same elected arm and the same signal
// duration, or all players end in the UCB fallback.
//
// Grid: 96 instances with a guaranteed overloadable candidate (top arm has
// capacity 1 < M), 8 single-player instances (the election degenerates to the
// fallback), and 2 instances whose candidate arms all have capacity >= M, so
// no start signal is transmittable: the coordinator falls back at its first
// usable checkpoint and every listener follows after three signal-less
// testing blocks, which needs an 12.5M-step horizon at this delta.
// ---------------------------------------------------------------------------
void criterion_4() {
    Timer timer;
    const std::vector<std::vector<double>> ladders = {
        {0.90, 0.80, 0.70, 0.60, 0.50, 0.40},
        {0.95, 0.85, 0.60, 0.45, 0.30, 0.20},
        {0.80, 0.75, 0.50, 0.35, 0.25, 0.15},
        {0.90, 0.60, 0.55, 0.30, 0.20, 0.10}};
    const std::vector<std::vector<int>> cap_patterns = {
        {1, 1, 1, 1, 1, 1}, {1, 2, 1, 2, 1, 2}, {1, 1, 2, 2, 1, 1},
        {1, 3, 1, 2, 1, 3}};
    const std::vector<std::pair<int, int>> shapes = {{2, 2}, {3, 2}, {3, 3},
                                                     {4, 2}, {4, 3}, {5, 3}};
    int checked = 0, agreed = 0, all_ucb = 0, violations = 0;
    std::string first_bad;

    auto judge = [&](const RunResult& res, const std::string& tag) {
        ++checked;
        bool everyone_ucb = true;
        for (const auto& pt : res.players) everyone_ucb = everyone_ucb && pt.in_ucb;
        if (everyone_ucb) {
            ++all_ucb;
            return;
        }
        bool ok = true;
        const auto& first = res.players.front();
        ok = ok && first.nu_star.has_value() && first.omega_signal >= 1;
        for (const auto& pt : res.players) {
            ok = ok && pt.nu_star.has_value() && first.nu_star == pt.nu_star &&
                 pt.omega_signal == first.omega_signal;
        }
        if (ok) {
            ++agreed;
        } else {
            ++violations;
            if (first_bad.empty()) first_bad = tag;
        }
    };

    for (const auto& [K, M] : shapes) {
        for (std::size_t li = 0; li < ladders.size(); ++li) {
            for (std::size_t ci = 0; ci < cap_patterns.size(); ++ci) {
                const auto cfg = make_pm(take(ladders[li], K),
                                         take(cap_patterns[ci], K), M,
                                         /*horizon=*/600000, /*delta=*/0.3,
                                         /*seed=*/100 + li * 10 + ci);
                RunConfig rc;
                rc.instance = cfg;
                judge(run_episode(rc),
                      "K" + std::to_string(K) + "M" + std::to_string(M) + "L" +
                          std::to_string(li) + "C" + std::to_string(ci));
            }
        }
    }
    for (int K = 2; K <= 5; ++K) {
        for (std::size_t li = 0; li < 2; ++li) {
            const auto cfg = make_pm(take(ladders[li], K),
                                     take(cap_patterns[0], K), /*M=*/1,
                                     /*horizon=*/100000, /*delta=*/0.3,
                                     /*seed=*/300 + K);
            RunConfig rc;
            rc.instance = cfg;
            judge(run_episode(rc), "K" + std::to_string(K) + "M1");
        }
    }
    // No overloadable candidate: all high-mean arms can host both players.
    {
        RunConfig rc;
        rc.instance = make_pm({0.90, 0.70, 0.20}, {2, 2, 1}, 2, 12500000, 0.3, 401);
        judge(run_episode(rc), "non-viable-a");
        rc.instance = make_pm({0.90, 0.80, 0.50}, {3, 2, 2}, 2, 12500000, 0.3, 402);
        judge(run_episode(rc), "non-viable-b");
    }
    std::ostringstream os;
    os << checked << " instances: " << agreed << " agreed on (arm, duration), "
       << all_ucb << " all-UCB, " << violations << " violations";
    if (!first_bad.empty()) os << " (first: " << first_bad << ")";
    report(4, "election agreement", checked >= 100 && violations == 0, os.str(),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// 5. End-to-end optimality on deterministic instances, K <= 6, M <= 4: every
// run commits fully, the committed occupancy equals the oracle allocation,
// post-commit per-step regret is exactly 0, and the lockstep fingerprints
// never diverge. Horizons sized to each instance's commit timeline.
// ---------------------------------------------------------------------------
void criterion_5() {
    Timer timer;
    struct Case {
        std::vector<double> means;
        std::vector<int> caps;
        int M;
        long long horizon;
    };
    // Intra-top gaps of 0.02 keep the top block connected at the first
    // partition (radius sum ~0.035); gaps >= 0.2 split it from the rest.
    const std::vector<Case> cases = {
        {{0.90, 0.60}, {2, 1}, 2, 600000},                            // stack both on arm 1
        {{0.90, 0.60}, {1, 1}, 2, 600000},                            // split via single leftover arm
        {{0.90, 0.88, 0.30}, {1, 1, 1}, 2, 900000},                   // two-arm top block
        {{0.90, 0.70, 0.40}, {1, 2, 1}, 2, 4500000},                  // two rounds of narrowing
        {{0.90, 0.88, 0.40}, {2, 1, 2}, 3, 1000000},                  // mixed capacities cover M
        {{0.90, 0.88, 0.60}, {1, 1, 1}, 3, 3000000},                  // absorb two, finish solo
        {{0.90, 0.88, 0.40, 0.20}, {1, 1, 1, 1}, 2, 1200000},         //
        {{0.90, 0.88, 0.30, 0.10}, {1, 2, 1, 1}, 3, 1300000},         //
        {{0.90, 0.88, 0.40, 0.20}, {2, 2, 1, 1}, 4, 1400000},         //
        {{0.90, 0.88, 0.86, 0.40, 0.20}, {1, 1, 1, 2, 1}, 3, 1600000},
        {{0.90, 0.88, 0.86, 0.84, 0.40, 0.20}, {1, 1, 1, 1, 1, 1}, 4, 2000000},
        {{0.90, 0.88, 0.30}, {3, 2, 1}, 3, 12000000},                 // top block over-covers, shrink first
    };
    int checked = 0, bad = 0;
    std::string first_bad;
    for (std::size_t i = 0; i < cases.size(); ++i) {
        const auto& c = cases[i];
        RunConfig rc;
        rc.instance = make_pm(c.means, c.caps, c.M, c.horizon, 0.3, 500 + i);
        const auto res = run_episode(rc);
        ++checked;
        const auto opt = optimal_allocation(rc.instance);
        bool ok = res.all_committed && !res.any_ucb && res.good_event &&
                  !res.desync.flagged && res.post_commit_regret == 0.0;  // exact
        if (ok) {
            ActionProfile prof{res.final_assignment};
            const auto occ = occupancy(prof, rc.instance.K());  // index 0 unused
            for (int a = 1; a <= rc.instance.K(); ++a)
                ok = ok && occ[static_cast<std::size_t>(a)] ==
                               opt.counts[static_cast<std::size_t>(a - 1)];
        }
        if (!ok) {
            ++bad;
            if (first_bad.empty()) {
                std::ostringstream fb;
                fb << "case " << i << " (committed=" << res.all_committed
                   << " ucb=" << res.any_ucb << " post=" << res.post_commit_regret
                   << ")";
                first_bad = fb.str();
            }
        }
    }
    std::ostringstream os;
    os << checked << " instances, " << bad
       << " failures; committed occupancy == oracle counts, post-commit regret == 0 exactly";
    if (!first_bad.empty()) os << " (first: " << first_bad << ")";
    report(5, "end-to-end optimality", bad == 0, os.str(), timer.seconds());
}

// ---------------------------------------------------------------------------
// 6. Regret ledger vs closed form: the forced round-robin baseline on a
// horizon of R full cycles accrues exactly R*(K*opt_value - M*sum(mu));
// relative tolerance 1e-9 (absolute 1e-12 when the closed form is 0).
// ---------------------------------------------------------------------------
void criterion_6() {
    Timer timer;
    int checked = 0, bad = 0;
    for (int rep = 0; checked < 50 && rep < 300; ++rep) {
        const std::uint64_t seed = 4200 + rep;
        const int K = 2 + static_cast<int>(rng::draw(seed, 0, 1) % 5);
        const int M =
            2 + static_cast<int>(rng::draw(seed, 0, 2) % std::min(K - 1, 3));
        InstanceConfig inst;
        int total_cap = 0;
        double mu_sum = 0.0;
        for (int a = 1; a <= K; ++a) {
            const double mu = 0.05 + 0.9 * rng::uniform(seed, 1, a) + a * 1e-7;
            const int cap = 1 + static_cast<int>(rng::draw(seed, 2, a) % 3);
            inst.arms.push_back({mu, cap, Dist::bernoulli});
            total_cap += cap;
            mu_sum += mu;
        }
        if (total_cap < M) continue;
        const long long R = 20 + static_cast<long long>(rng::draw(seed, 3, 0) % 41);
        inst.players = M;
        inst.horizon = R * K;
        inst.delta = 0.05;
        inst.seed = seed;
        ++checked;
        RunConfig rc;
        rc.instance = inst;
        rc.policy = Policy::simple_rr_baseline;
        const auto res = run_episode(rc);
        const double expected =
            static_cast<double>(R) *
            (K * optimal_allocation(inst).value - M * mu_sum);
        const double diff = std::fabs(res.ledger.cumulative - expected);
        const double tol = expected == 0.0 ? 1e-12 : 1e-9 * std::fabs(expected);
        if (diff > tol) ++bad;
    }
    std::ostringstream os;
    os << checked << " random instances, " << bad << " outside tolerance (rel 1e-9)";
    report(6, "baseline ledger closed form", checked == 50 && bad == 0, os.str(),
           timer.seconds());
}

// ---------------------------------------------------------------------------
// 7 + 8. A shared 1000-seed Bernoulli suite (K=3, M=2, delta=0.05).
//
// 7: the frequency of runs where any confidence interval ever fails stays
//    within delta plus a 0.02 Monte-Carlo margin (<= 0.07).
// 8: on every clean run, each player's first trigger lands where the clock
//    sandwich says it must: 32/mu^2 <= N/g(N) < 288/mu^2 for the true mean mu
//    of the triggering arm (inflation factor 5).
// ---------------------------------------------------------------------------
void criteria_7_and_8() {
    Timer t7;
    const int seeds = 1000;
    int violating_runs = 0;
    long long sandwich_checked = 0, sandwich_bad = 0, untriggered = 0;
    const ConfidenceParams params = ConfidenceParams::hard(0.05, 2, 3);
    const std::vector<double> true_means = {0.9, 0.6, 0.3};
    for (int s = 1; s <= seeds; ++s) {
        InstanceConfig cfg;
        cfg.arms = {{0.9, 1, Dist::bernoulli},
                    {0.6, 1, Dist::bernoulli},
                    {0.3, 1, Dist::bernoulli}};
        cfg.players = 2;
        cfg.horizon = 30000;
        cfg.delta = 0.05;
        cfg.seed = static_cast<std::uint64_t>(s);
        RunConfig rc;
        rc.instance = cfg;
        const auto res = run_episode(rc);
        if (!res.good_event) {
            ++violating_runs;
            continue;  // the sandwich is only promised on clean runs
        }
        for (const auto& pt : res.players) {
            if (!pt.triggered) {
                ++untriggered;
                continue;
            }
            ++sandwich_checked;
            const double mu = true_means[pt.trigger_arm - 1];
            const double v = clock_value(pt.trigger_count, params);
            if (!(32.0 / (mu * mu) <= v && v < 288.0 / (mu * mu))) ++sandwich_bad;
        }
    }
    const double freq = static_cast<double>(violating_runs) / seeds;
    {
        std::ostringstream os;
        os << violating_runs << "/" << seeds
           << " runs with an interval failure (freq " << std::setprecision(4)
           << freq << ", bound 0.07)";
        report(7, "confidence-interval failure frequency", freq <= 0.07, os.str(),
               t7.seconds());
    }
    {
        std::ostringstream os;
        os << sandwich_checked << " triggers on clean runs, " << sandwich_bad
           << " outside [32/mu^2, 288/mu^2), " << untriggered
           << " players never triggered";
        report(8, "trigger-time clock sandwich",
               sandwich_bad == 0 && untriggered == 0 && sandwich_checked > 0,
               os.str(), 0.0);
    }
}

// ---------------------------------------------------------------------------
// 9. Zero-test sample size is minimal: over a 20x20 (mu, delta') grid the
// returned n is the smallest integer with (1-mu)^n <= delta', verified by a
// long-double cumulative-product scan.
// ---------------------------------------------------------------------------
void criterion_9() {
    Timer timer;
    int checked = 0, bad = 0;
    for (int i = 1; i <= 20; ++i) {
        const double mu = 0.01 + 0.05 * (i - 1);  // 0.01 .. 0.96
        for (int j = 1; j <= 20; ++j) {
            const double dp = 0.45 * std::pow(10.0, -6.0 * (j - 1) / 19.0);
            ++checked;
            const long long got = zero_test_samples(mu, dp);
            long long minimal = -1;
            long double prod = 1.0L;
            for (long long n = 1; n <= 2000000; ++n) {
                prod *= static_cast<long double>(1.0 - mu);
                if (prod <= static_cast<long double>(dp)) {
                    minimal = n;
                    break;
                }
            }
            if (got != minimal) ++bad;
        }
    }
    std::ostringstream os;
    os << checked << " grid points, " << bad << " not minimal (exact match required)";
    report(9, "zero-test sample minimality", bad == 0, os.str(), timer.seconds());
}

// ---------------------------------------------------------------------------
// 10. Aggregate-feedback capacity identification: on 50 deterministic
// instances in aggregate mode (inflation 2M, widened checkpoint base), every
// player ends knowing each arm's capacity exactly below M and as the
// saturation marker M otherwise. Players are driven in lockstep directly so
// the per-arm knowledge is inspectable.
//
// Mean ladders are chosen so every capacity comparison is exact in floating
// point; instances with a capacity of M-1 at M=3 use means that are 3 times a
// dyadic rational, making the per-capita drop land exactly on its threshold.
// ---------------------------------------------------------------------------
void criterion_10() {
    Timer timer;
    struct Case {
        int K;
        int M;
        std::vector<int> caps;
        const std::vector<double>* means;
    };
    static const std::vector<double> free2 = {0.9, 0.7, 0.45, 0.25};
    static const std::vector<double> dy3 = {0.75, 0.5625, 0.375, 0.1875};
    std::vector<Case> cases;
    auto add = [&](int K, int M, std::vector<int> caps, const std::vector<double>* m) {
        cases.push_back({K, M, std::move(caps), m});
    };
    // (2,2): any capacities; a top-band arm with capacity >= 2 keeps the
    // signaling path alive so grouped estimates stay uncontaminated.
    add(2, 2, {2, 1}, &free2); add(2, 2, {1, 2}, &free2);
    add(2, 2, {2, 2}, &free2); add(2, 2, {3, 1}, &free2);
    add(2, 2, {1, 3}, &free2); add(2, 2, {2, 3}, &free2);
    add(2, 2, {3, 2}, &free2); add(2, 2, {3, 3}, &free2);
    // (3,2)
    add(3, 2, {2, 1, 1}, &free2); add(3, 2, {1, 2, 1}, &free2);
    add(3, 2, {2, 1, 2}, &free2); add(3, 2, {1, 2, 3}, &free2);
    add(3, 2, {3, 2, 1}, &free2); add(3, 2, {2, 2, 2}, &free2);
    add(3, 2, {3, 1, 1}, &free2); add(3, 2, {1, 3, 2}, &free2);
    add(3, 2, {2, 1, 3}, &free2); add(3, 2, {1, 2, 2}, &free2);
    add(3, 2, {3, 3, 3}, &free2); add(3, 2, {2, 3, 1}, &free2);
    // (3,3) without the M-1 capacity: free means
    add(3, 3, {3, 1, 1}, &free2); add(3, 3, {1, 3, 1}, &free2);
    add(3, 3, {3, 1, 4}, &free2); add(3, 3, {4, 3, 1}, &free2);
    add(3, 3, {3, 3, 3}, &free2); add(3, 3, {1, 4, 1}, &free2);
    add(3, 3, {4, 1, 3}, &free2); add(3, 3, {3, 4, 1}, &free2);
    // (3,3) with capacity 2 arms: exact-threshold means
    add(3, 3, {2, 1, 1}, &dy3); add(3, 3, {1, 2, 1}, &dy3);
    add(3, 3, {2, 2, 2}, &dy3); add(3, 3, {2, 3, 1}, &dy3);
    add(3, 3, {1, 2, 3}, &dy3); add(3, 3, {2, 2, 1}, &dy3);
    // (4,2)
    add(4, 2, {2, 1, 1, 2}, &free2); add(4, 2, {1, 2, 2, 1}, &free2);
    add(4, 2, {3, 2, 1, 1}, &free2); add(4, 2, {1, 2, 1, 3}, &free2);
    add(4, 2, {2, 2, 2, 2}, &free2); add(4, 2, {3, 1, 1, 3}, &free2);
    add(4, 2, {1, 3, 3, 1}, &free2); add(4, 2, {2, 1, 3, 1}, &free2);
    // (4,3)
    add(4, 3, {3, 1, 1, 1}, &free2); add(4, 3, {1, 3, 1, 4}, &free2);
    add(4, 3, {3, 1, 4, 3}, &free2); add(4, 3, {1, 4, 3, 1}, &free2);
    add(4, 3, {2, 1, 1, 1}, &dy3); add(4, 3, {1, 2, 1, 2}, &dy3);
    add(4, 3, {2, 2, 3, 1}, &dy3); add(4, 3, {3, 2, 1, 2}, &dy3);

    int checked = 0, bad = 0;
    std::string first_bad;
    for (std::size_t ci = 0; ci < cases.size(); ++ci) {
        const auto& c = cases[ci];
        const auto cfg = make_pm(take(*c.means, c.K), c.caps, c.M,
                                 /*horizon=*/150000, /*delta=*/0.3,
                                 /*seed=*/800 + ci, FeedbackMode::aggregate_soft);
        std::vector<Player> players;
        players.reserve(static_cast<std::size_t>(c.M));
        for (int p = 1; p <= c.M; ++p) players.emplace_back(cfg, p);
        ActionProfile prof;
        prof.choices.assign(static_cast<std::size_t>(c.M), 1);
        for (long long t = 1; t <= cfg.horizon; ++t) {
            for (int p = 1; p <= c.M; ++p)
                prof.choices[static_cast<std::size_t>(p - 1)] =
                    players[static_cast<std::size_t>(p - 1)].choose_arm(t);
            const auto fb = sample_feedback(cfg, prof, t);
            for (int p = 1; p <= c.M; ++p)
                players[static_cast<std::size_t>(p - 1)].observe(
                    t, prof.choices[static_cast<std::size_t>(p - 1)],
                    fb.rewards[static_cast<std::size_t>(p - 1)]);
        }
        ++checked;
        bool ok = true;
        for (int p = 1; p <= c.M && ok; ++p) {
            for (int a = 1; a <= c.K && ok; ++a) {
                const auto known =
                    players[static_cast<std::size_t>(p - 1)].known_capacity(a);
                const int want = std::min(c.caps[static_cast<std::size_t>(a - 1)], c.M);
                ok = known.has_value() && known.value() == want;
            }
        }
        if (!ok) {
            ++bad;
            if (first_bad.empty())
                first_bad = "case " + std::to_string(ci) + " (K=" +
                            std::to_string(c.K) + ",M=" + std::to_string(c.M) + ")";
        }
    }
    std::ostringstream os;
    os << checked << " aggregate-mode instances, " << bad
       << " with a wrong or missing capacity";
    if (!first_bad.empty()) os << " (first: " << first_bad << ")";
    report(10, "aggregate-mode capacity identification", checked == 50 && bad == 0,
           os.str(), timer.seconds());
}

} // namespace

int main() {
    Timer total;
    std::cout << "acceptance suite: 10 criteria" << std::endl;
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criteria_7_and_8();
    criterion_9();
    criterion_10();
    std::cout << (10 - g_failures) << "/10 criteria passed in " << std::fixed
              << std::setprecision(1) << total.seconds() << "s" << std::endl;
    return g_failures > 0 ? 1 : 0;
}
