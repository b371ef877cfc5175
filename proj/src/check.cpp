#include "mmabsax/check.hpp"

#include <cmath>
#include <map>
#include <set>
#include <sstream>

#include "mmabsax/env.hpp"
#include "mmabsax/harness.hpp"
#include "mmabsax/protocol.hpp"
#include "mmabsax/rng.hpp"
#include "mmabsax/schedule.hpp"
#include "mmabsax/stats.hpp"

namespace mmabsax {
namespace {

CheckResult check_simple_rr_collisions() {
    CheckResult res{"simple-rr-collision-freedom", true, ""};
    for (int K = 1; K <= 8 && res.pass; ++K)
        for (int M = 1; M <= K && res.pass; ++M)
            for (int i = 1; i <= 2 * K && res.pass; ++i) {
                std::set<int> seen;
                for (int p = 1; p <= M; ++p) {
                    const int a = simple_rr_arm(p, i, K);
                    if (!seen.insert(a).second) {
                        res.pass = false;
                        std::ostringstream os;
                        os << "collision at K=" << K << " M=" << M << " i=" << i;
                        res.detail = os.str();
                    }
                }
            }
    if (res.pass) res.detail = "K<=8, all rosters, two full cycles";
    return res;
}

CheckResult check_grouped_session_coverage() {
    CheckResult res{"grouped-session-coverage", true, ""};
    for (int m = 1; m <= 8 && res.pass; ++m) {
        for (int K = std::max(2, m); K <= 8 && res.pass; ++K) {
            std::vector<int> actives;
            for (int p = 1; p <= m; ++p) actives.push_back(p);
            GroupedSessionPlan plan(actives, K);
            // full-group pulls per (player, psi, arm) over one session
            std::map<std::tuple<int, int, int>, int> full;
            for (long long s = 0; s < plan.length(); ++s) {
                std::set<int> group_arms;
                for (int p = 1; p <= m; ++p) {
                    const auto d = plan.duty(s, p);
                    if (d.in_full_group) full[{p, d.psi, d.arm}] += 1;
                }
            }
            for (int p = 1; p <= m && res.pass; ++p)
                for (int psi = 1; psi <= m && res.pass; ++psi)
                    for (int a = 1; a <= K && res.pass; ++a) {
                        const auto it = full.find({p, psi, a});
                        const int c = it == full.end() ? 0 : it->second;
                        if (c < 1 || c > 2) {
                            res.pass = false;
                            std::ostringstream os;
                            os << "coverage m=" << m << " K=" << K << " p=" << p
                               << " psi=" << psi << " arm=" << a << " pulls=" << c;
                            res.detail = os.str();
                        }
                    }
        }
    }
    if (res.pass) res.detail = "every (player, group size, arm) gets 1-2 full pulls/session";
    return res;
}

CheckResult check_greedy_vs_bruteforce(std::uint64_t seed) {
    CheckResult res{"greedy-matches-bruteforce", true, ""};
    int n = 0;
    for (int rep = 0; rep < 120 && res.pass; ++rep) {
        InstanceConfig inst;
        const int K = 2 + static_cast<int>(rng::draw(seed, rep, 1) % 4); // 2..5
        const int M = 1 + static_cast<int>(rng::draw(seed, rep, 2) % std::min(K, 4));
        int total_cap = 0;
        for (int a = 0; a < K; ++a) {
            ArmSpec s;
            s.mean = 0.05 + 0.9 * rng::uniform(seed, rep * 31 + a, 3);
            s.mean += a * 1e-6; // keep means distinct
            s.capacity = 1 + static_cast<int>(rng::draw(seed, rep * 31 + a, 4) % 3);
            s.dist = Dist::point_mass;
            total_cap += s.capacity;
            inst.arms.push_back(s);
        }
        if (total_cap < M) continue;
        inst.players = M;
        inst.horizon = 10;
        inst.delta = 0.05;
        const auto g = optimal_allocation(inst);
        const auto b = optimal_allocation_bruteforce(inst);
        ++n;
        if (g.counts != b.counts || std::fabs(g.value - b.value) > 1e-12) {
            res.pass = false;
            res.detail = "mismatch on random instance rep=" + std::to_string(rep);
        }
    }
    if (res.pass) res.detail = std::to_string(n) + " random instances, exact match";
    return res;
}

CheckResult check_codec_roundtrip() {
    CheckResult res{"codec-roundtrip", true, ""};
    const int K = 5;
    InstanceConfig inst;
    const double means[] = {0.9, 0.8, 0.7, 0.6, 0.5};
    for (int a = 0; a < K; ++a)
        inst.arms.push_back({means[a], 1, Dist::point_mass});
    inst.players = 3;
    inst.horizon = 10;
    inst.delta = 0.05;
    inst.seed = 17;
    const auto layout = make_comm_layout(inst.players, K, /*nu_star=*/2,
                                         /*park_group_size=*/1, /*w=*/12);
    for (int mask = 0; mask < (1 << K) && res.pass; ++mask) {
        std::set<int> subset;
        for (int a = 1; a <= K; ++a)
            if (mask & (1 << (a - 1))) subset.insert(a);
        const auto bits = encode_arms(subset, K);
        const auto reads = run_frame_exchange(inst, layout, bits, /*t_start=*/1000 * mask);
        for (const auto& r : reads) {
            if (decode_arms(r) != subset) {
                res.pass = false;
                res.detail = "subset mask " + std::to_string(mask) + " misread";
            }
        }
    }
    if (res.pass) res.detail = "all 2^5 subsets through collision channel";
    return res;
}

CheckResult check_zero_test_minimality() {
    CheckResult res{"zero-test-minimality", true, ""};
    for (int i = 1; i <= 19 && res.pass; ++i) {
        const double mu = i * 0.05;
        for (int j = 1; j <= 6 && res.pass; ++j) {
            const double dp = std::pow(10.0, -j);
            const long long n = zero_test_samples(mu, dp);
            const double atn = std::pow(1.0 - mu, static_cast<double>(n));
            const double before = std::pow(1.0 - mu, static_cast<double>(n - 1));
            if (!(atn <= dp * (1 + 1e-9)) || (n > 1 && before <= dp * (1 - 1e-9))) {
                res.pass = false;
                std::ostringstream os;
                os << "mu=" << mu << " dp=" << dp << " n=" << n;
                res.detail = os.str();
            }
        }
    }
    if (res.pass) res.detail = "minimal sample counts on 114-point grid";
    return res;
}

CheckResult check_reproducibility(std::uint64_t seed) {
    CheckResult res{"episode-reproducibility", true, ""};
    RunConfig rc;
    rc.instance.arms = {{0.9, 1, Dist::bernoulli},
                        {0.7, 2, Dist::bernoulli},
                        {0.4, 1, Dist::bernoulli}};
    rc.instance.players = 2;
    rc.instance.horizon = 20000;
    rc.instance.delta = 0.1;
    rc.instance.seed = seed;
    const auto a = run_episode(rc);
    const auto b = run_episode(rc);
    if (a.ledger.cumulative != b.ledger.cumulative ||
        a.final_assignment != b.final_assignment ||
        a.good_event_violations != b.good_event_violations ||
        a.phase1_steps != b.phase1_steps) {
        res.pass = false;
        res.detail = "same seed produced different results";
    } else {
        res.detail = "identical ledger, assignment, and monitors across two runs";
    }
    return res;
}

} // namespace

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
    std::vector<CheckResult> out;
    out.push_back(check_simple_rr_collisions());
    out.push_back(check_grouped_session_coverage());
    out.push_back(check_greedy_vs_bruteforce(seed));
    out.push_back(check_codec_roundtrip());
    out.push_back(check_zero_test_minimality());
    out.push_back(check_reproducibility(seed));
    return out;
}

} // namespace mmabsax
