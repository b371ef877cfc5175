#include "mmabsax/env.hpp"
#include "mmabsax/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include <json.hpp>

namespace mmabsax {

void InstanceConfig::validate() const {
    const int k = K();
    if (k == 0) throw ConfigError("instance has no arms");
    if (players < 1) throw ConfigError("players must be >= 1");
    if (players > k) throw ConfigError("players must not exceed arm count");
    if (horizon < 0) throw ConfigError("horizon must be >= 0");
    if (!(delta > 0.0 && delta < 0.5)) throw ConfigError("delta must lie in (0, 1/2)");
    std::set<double> means;
    long long total_capacity = 0;
    for (const ArmSpec& a : arms) {
        if (!(a.mean >= 0.0 && a.mean <= 1.0)) throw ConfigError("arm mean must lie in [0,1]");
        if (a.capacity < 1) throw ConfigError("arm capacity must be >= 1");
        means.insert(a.mean);
        total_capacity += a.capacity;
    }
    if (static_cast<int>(means.size()) != k)
        throw ConfigError("arm means must be pairwise distinct");
    if (total_capacity < players)
        throw InfeasibleError("total capacity below player count");
}

std::vector<int> occupancy(const ActionProfile& profile, int K) {
    std::vector<int> occ(static_cast<std::size_t>(K) + 1, 0);
    for (int arm : profile.choices) {
        if (arm < 1 || arm > K) throw ConfigError("arm index out of range in profile");
        ++occ[static_cast<std::size_t>(arm)];
    }
    return occ;
}

double sample_arm_draw(const ArmSpec& arm, std::uint64_t seed, long long t, int player) {
    switch (arm.dist) {
    case Dist::point_mass:
        return arm.mean;
    case Dist::bernoulli: {
        const double u = rng::uniform(seed, static_cast<std::uint64_t>(t),
                                      static_cast<std::uint64_t>(player));
        return u < arm.mean ? 1.0 : 0.0;
    }
    case Dist::beta_like: {
        // X = U^((1-mu)/mu) has E[X] = mu and support [0,1].
        if (arm.mean <= 0.0) return 0.0;
        if (arm.mean >= 1.0) return 1.0;
        const double u = rng::uniform(seed, static_cast<std::uint64_t>(t),
                                      static_cast<std::uint64_t>(player));
        return std::pow(u, (1.0 - arm.mean) / arm.mean);
    }
    }
    return 0.0;
}

FeedbackVector sample_feedback(const InstanceConfig& instance,
                               const ActionProfile& profile,
                               long long t) {
    const int M = instance.players;
    const int K = instance.K();
    if (static_cast<int>(profile.choices.size()) != M)
        throw ConfigError("profile must contain exactly one choice per player");
    const std::vector<int> occ = occupancy(profile, K);

    FeedbackVector fb;
    fb.rewards.assign(static_cast<std::size_t>(M), 0.0);

    if (instance.feedback_mode == FeedbackMode::hard_sax) {
        for (int p = 1; p <= M; ++p) {
            const int a = profile.choices[static_cast<std::size_t>(p - 1)];
            const ArmSpec& arm = instance.arms[static_cast<std::size_t>(a - 1)];
            if (occ[static_cast<std::size_t>(a)] > arm.capacity) {
                fb.rewards[static_cast<std::size_t>(p - 1)] = 0.0;
            } else {
                fb.rewards[static_cast<std::size_t>(p - 1)] =
                    sample_arm_draw(arm, instance.seed, t, p);
            }
        }
        return fb;
    }

    // aggregate_soft: the min(occupancy, C) lowest-indexed players on each arm
    // contribute a draw; every player on the arm observes the same raw total.
    std::vector<double> totals(static_cast<std::size_t>(K) + 1, 0.0);
    std::vector<int> contributors(static_cast<std::size_t>(K) + 1, 0);
    for (int p = 1; p <= M; ++p) {
        const int a = profile.choices[static_cast<std::size_t>(p - 1)];
        const ArmSpec& arm = instance.arms[static_cast<std::size_t>(a - 1)];
        if (contributors[static_cast<std::size_t>(a)] < arm.capacity) {
            ++contributors[static_cast<std::size_t>(a)];
            totals[static_cast<std::size_t>(a)] += sample_arm_draw(arm, instance.seed, t, p);
        }
    }
    for (int p = 1; p <= M; ++p) {
        const int a = profile.choices[static_cast<std::size_t>(p - 1)];
        fb.rewards[static_cast<std::size_t>(p - 1)] = totals[static_cast<std::size_t>(a)];
    }
    return fb;
}

namespace {

std::vector<int> arms_by_descending_mean(const InstanceConfig& instance) {
    std::vector<int> order(static_cast<std::size_t>(instance.K()));
    std::iota(order.begin(), order.end(), 1);
    std::sort(order.begin(), order.end(), [&](int x, int y) {
        const double mx = instance.arms[static_cast<std::size_t>(x - 1)].mean;
        const double my = instance.arms[static_cast<std::size_t>(y - 1)].mean;
        if (mx != my) return mx > my;
        return x < y;
    });
    return order;
}

double allocation_value(const InstanceConfig& instance, const std::vector<int>& counts) {
    // Canonical summation order (arm index) so greedy and brute force agree
    // to the last bit whenever their counts agree.
    double v = 0.0;
    for (int a = 1; a <= instance.K(); ++a)
        v += instance.arms[static_cast<std::size_t>(a - 1)].mean *
             counts[static_cast<std::size_t>(a - 1)];
    return v;
}

} // namespace

OptimalAllocation optimal_allocation(const InstanceConfig& instance) {
    instance.validate();
    const int M = instance.players;
    const std::vector<int> order = arms_by_descending_mean(instance);

    OptimalAllocation out;
    out.counts.assign(static_cast<std::size_t>(instance.K()), 0);
    int placed = 0;
    for (int a : order) {
        if (placed >= M) break;
        const int take = std::min(instance.arms[static_cast<std::size_t>(a - 1)].capacity,
                                  M - placed);
        out.counts[static_cast<std::size_t>(a - 1)] = take;
        placed += take;
        ++out.V;
    }
    out.value = allocation_value(instance, out.counts);
    return out;
}

OptimalAllocation optimal_allocation_bruteforce(const InstanceConfig& instance) {
    instance.validate();
    const int M = instance.players;
    const int K = instance.K();

    std::vector<int> counts(static_cast<std::size_t>(K), 0);
    std::vector<int> best_counts;
    double best_value = -1.0;

    // Enumerate all feasible count vectors recursively.
    auto recurse = [&](auto&& self, int arm, int remaining) -> void {
        if (arm > K) {
            if (remaining == 0) {
                const double v = allocation_value(instance, counts);
                if (v > best_value + 1e-15) {
                    best_value = v;
                    best_counts = counts;
                }
            }
            return;
        }
        const int cap = std::min(instance.arms[static_cast<std::size_t>(arm - 1)].capacity,
                                 remaining);
        for (int c = 0; c <= cap; ++c) {
            counts[static_cast<std::size_t>(arm - 1)] = c;
            self(self, arm + 1, remaining - c);
        }
        counts[static_cast<std::size_t>(arm - 1)] = 0;
    };
    recurse(recurse, 1, M);

    // Canonicalize: among value-optimal allocations pick the one the greedy
    // descending-mean fill would produce, by re-running the fill restricted to
    // the optimum value (distinct means make genuine ties measure-zero, but a
    // deterministic representative keeps comparisons exact).
    OptimalAllocation out;
    out.counts = best_counts;
    const std::vector<int> order = arms_by_descending_mean(instance);
    std::vector<int> greedy_counts(static_cast<std::size_t>(K), 0);
    int placed = 0, V = 0;
    for (int a : order) {
        if (placed >= M) break;
        const int take = std::min(instance.arms[static_cast<std::size_t>(a - 1)].capacity,
                                  M - placed);
        greedy_counts[static_cast<std::size_t>(a - 1)] = take;
        placed += take;
        ++V;
    }
    if (allocation_value(instance, greedy_counts) >= best_value - 1e-12 * std::max(1.0, best_value)) {
        out.counts = greedy_counts;
        out.V = V;
    } else {
        out.V = 0;
        for (int c : out.counts) out.V += (c > 0) ? 1 : 0;
    }
    out.value = allocation_value(instance, out.counts);
    return out;
}

double step_regret(const InstanceConfig& instance,
                   const OptimalAllocation& opt,
                   const ActionProfile& profile) {
    const int K = instance.K();
    const std::vector<int> occ = occupancy(profile, K);
    double collected = 0.0;
    if (instance.feedback_mode == FeedbackMode::hard_sax) {
        for (int arm : profile.choices) {
            const ArmSpec& a = instance.arms[static_cast<std::size_t>(arm - 1)];
            if (occ[static_cast<std::size_t>(arm)] <= a.capacity) collected += a.mean;
        }
    } else {
        for (int arm = 1; arm <= K; ++arm) {
            const ArmSpec& a = instance.arms[static_cast<std::size_t>(arm - 1)];
            collected += a.mean * std::min(occ[static_cast<std::size_t>(arm)], a.capacity);
        }
    }
    const double r = opt.value - collected;
    return r < 0.0 && r > -1e-12 ? 0.0 : r;
}

// ----------------------------- JSON plumbing ------------------------------

std::string to_string(Dist d) {
    switch (d) {
    case Dist::bernoulli: return "bernoulli";
    case Dist::point_mass: return "point_mass";
    case Dist::beta_like: return "beta_like";
    }
    return "bernoulli";
}

std::string to_string(FeedbackMode m) {
    return m == FeedbackMode::hard_sax ? "hard_sax" : "aggregate_soft";
}

Dist dist_from_string(const std::string& s) {
    if (s == "bernoulli") return Dist::bernoulli;
    if (s == "point_mass") return Dist::point_mass;
    if (s == "beta_like") return Dist::beta_like;
    throw ConfigError("unknown distribution: " + s);
}

FeedbackMode feedback_mode_from_string(const std::string& s) {
    if (s == "hard_sax") return FeedbackMode::hard_sax;
    if (s == "aggregate_soft") return FeedbackMode::aggregate_soft;
    throw ConfigError("unknown feedback mode: " + s);
}

InstanceConfig InstanceConfig::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid JSON: ") + e.what());
    }
    InstanceConfig cfg;
    try {
        for (const auto& arm : j.at("arms")) {
            ArmSpec a;
            a.mean = arm.at("mean").get<double>();
            a.capacity = arm.at("capacity").get<int>();
            a.dist = arm.contains("dist") ? dist_from_string(arm.at("dist").get<std::string>())
                                          : Dist::bernoulli;
            cfg.arms.push_back(a);
        }
        cfg.players = j.at("players").get<int>();
        cfg.horizon = j.at("horizon").get<long long>();
        cfg.delta = j.at("delta").get<double>();
        if (j.contains("feedback_mode"))
            cfg.feedback_mode = feedback_mode_from_string(j.at("feedback_mode").get<std::string>());
        if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("invalid config field: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string InstanceConfig::to_json_text() const {
    nlohmann::json j;
    j["arms"] = nlohmann::json::array();
    for (const ArmSpec& a : arms) {
        j["arms"].push_back({{"mean", a.mean},
                             {"capacity", a.capacity},
                             {"dist", to_string(a.dist)}});
    }
    j["players"] = players;
    j["horizon"] = horizon;
    j["delta"] = delta;
    j["feedback_mode"] = to_string(feedback_mode);
    j["seed"] = seed;
    return j.dump(2);
}

} // namespace mmabsax
