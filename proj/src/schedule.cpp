#include "mmabsax/schedule.hpp"

#include <algorithm>
#include <stdexcept>

namespace mmabsax {

int simple_rr_arm(int p, int i, int K) {
    return ((p + i - 1) % K) + 1;
}

int unit_rr_arm(int j, int i, int K) {
    return ((j + i - 1) % K) + 1;
}

GroupPlan grouped_rr_plan(int psi, const std::vector<int>& active_players, int pass) {
    const int m = static_cast<int>(active_players.size());
    if (psi < 1 || psi > m) throw std::invalid_argument("grouped_rr_plan: psi out of range");
    if (pass != 1 && pass != 2) throw std::invalid_argument("grouped_rr_plan: pass must be 1 or 2");

    GroupPlan plan;
    if (pass == 1) {
        for (int start = 0; start < m; start += psi) {
            const int end = std::min(start + psi, m);
            plan.groups.emplace_back(active_players.begin() + start,
                                     active_players.begin() + end);
        }
    } else {
        for (int start = m; start > 0; start -= psi) {
            const int begin = std::max(start - psi, 0);
            std::vector<int> group(active_players.begin() + begin,
                                   active_players.begin() + start);
            std::reverse(group.begin(), group.end());
            plan.groups.push_back(std::move(group));
        }
    }
    return plan;
}

long long session_length(int m, int K) {
    return 2LL * m * K;
}

GroupedSessionPlan::GroupedSessionPlan(std::vector<int> actives, int K)
    : actives_(std::move(actives)), K_(K), m_(static_cast<int>(actives_.size())) {
    std::sort(actives_.begin(), actives_.end());
    segments_.reserve(static_cast<std::size_t>(m_));
    for (int psi = 1; psi <= m_; ++psi) {
        Segment seg;
        seg.plan_pass1 = grouped_rr_plan(psi, actives_, 1);
        seg.plan_pass2 = grouped_rr_plan(psi, actives_, 2);
        segments_.push_back(std::move(seg));
    }
}

int GroupedSessionPlan::group_of(const GroupPlan& plan, int player) const {
    for (std::size_t gi = 0; gi < plan.groups.size(); ++gi) {
        for (int q : plan.groups[gi]) {
            if (q == player) return static_cast<int>(gi) + 1;
        }
    }
    return 0;
}

StepDuty GroupedSessionPlan::duty(long long step, int player) const {
    const long long seg_len = 2LL * K_;
    const int psi = static_cast<int>(step / seg_len) + 1;
    const long long rem = step % seg_len;
    const int pass = static_cast<int>(rem / K_) + 1;
    const int round = static_cast<int>(rem % K_) + 1;
    const Segment& seg = segments_[static_cast<std::size_t>(psi - 1)];
    const GroupPlan& plan = (pass == 1) ? seg.plan_pass1 : seg.plan_pass2;
    const int gi = group_of(plan, player);
    if (gi == 0) throw std::invalid_argument("duty: player not active in this plan");
    StepDuty d;
    d.psi = psi;
    d.group_index = gi;
    d.arm = unit_rr_arm(gi, round, K_);
    d.in_full_group =
        static_cast<int>(plan.groups[static_cast<std::size_t>(gi - 1)].size()) == psi;
    return d;
}

int GroupedSessionPlan::ghost_arm(long long step) const {
    const long long seg_len = 2LL * K_;
    const int psi = static_cast<int>(step / seg_len) + 1;
    const long long rem = step % seg_len;
    const int pass = static_cast<int>(rem / K_) + 1;
    const int round = static_cast<int>(rem % K_) + 1;
    const Segment& seg = segments_[static_cast<std::size_t>(psi - 1)];
    const GroupPlan& plan = (pass == 1) ? seg.plan_pass1 : seg.plan_pass2;
    const int G = static_cast<int>(plan.groups.size());
    return unit_rr_arm(G + 1, round, K_);
}

int GroupedSessionPlan::full_pulls_per_session(int player, int psi) const {
    const Segment& seg = segments_[static_cast<std::size_t>(psi - 1)];
    int pulls = 0;
    for (const GroupPlan* plan : {&seg.plan_pass1, &seg.plan_pass2}) {
        const int gi = group_of(*plan, player);
        if (gi > 0 &&
            static_cast<int>(plan->groups[static_cast<std::size_t>(gi - 1)].size()) == psi)
            ++pulls;
    }
    return pulls;
}

UnitRRPlan::UnitRRPlan(int num_units, int Kp) : U_(num_units), Kp_(Kp) {
    if (U_ < 1 || Kp_ < 1) throw std::invalid_argument("UnitRRPlan: empty plan");
    if (U_ <= Kp_) {
        cohort_size_ = U_;
        num_cohorts_ = 1;
    } else {
        if (Kp_ < 2)
            throw std::invalid_argument("UnitRRPlan: more units than positions needs Kp >= 2");
        cohort_size_ = Kp_ - 1;
        num_cohorts_ = (U_ + cohort_size_ - 1) / cohort_size_;
    }
}

long long UnitRRPlan::super_pass_rounds() const {
    return static_cast<long long>(num_cohorts_) * Kp_;
}

UnitRRPlan::UnitDuty UnitRRPlan::duty(long long round, int unit) const {
    round %= super_pass_rounds();
    const int pass = static_cast<int>(round / Kp_);          // cohort index
    const int i = static_cast<int>(round % Kp_) + 1;         // round in pass
    UnitDuty d;
    if (num_cohorts_ == 1) {
        d.probing = true;
        d.position = unit_rr_arm(unit, i, Kp_);
        return d;
    }
    const int cohort_of_unit = (unit - 1) / cohort_size_;
    if (cohort_of_unit == pass) {
        const int j = (unit - 1) % cohort_size_ + 1; // rank within cohort
        d.probing = true;
        d.position = unit_rr_arm(j, i, Kp_);
        return d;
    }
    // Parked: lowest-indexed position untouched by this round's probers.
    const int cohort_begin = pass * cohort_size_ + 1;
    const int cohort_end = std::min(U_, cohort_begin + cohort_size_ - 1);
    std::vector<bool> taken(static_cast<std::size_t>(Kp_) + 1, false);
    for (int u = cohort_begin; u <= cohort_end; ++u) {
        const int j = (u - 1) % cohort_size_ + 1;
        taken[static_cast<std::size_t>(unit_rr_arm(j, i, Kp_))] = true;
    }
    for (int pos = 1; pos <= Kp_; ++pos) {
        if (!taken[static_cast<std::size_t>(pos)]) {
            d.probing = false;
            d.position = pos;
            return d;
        }
    }
    throw std::logic_error("UnitRRPlan: no free position for parked unit");
}

std::vector<std::vector<int>> listener_groups(const std::vector<int>& listeners, int C) {
    if (C < 1) throw std::invalid_argument("listener_groups: C must be >= 1");
    const int L = static_cast<int>(listeners.size());
    if (L < C) throw std::invalid_argument("listener_groups: fewer listeners than group size");
    std::vector<std::vector<int>> groups;
    for (int start = 0; start + C <= L; start += C)
        groups.emplace_back(listeners.begin() + start, listeners.begin() + start + C);
    if (L % C != 0)
        groups.emplace_back(listeners.end() - C, listeners.end());
    return groups;
}

PullCounters::PullCounters(int K, int max_psi)
    : K_(K), max_psi_(max_psi),
      counts_(static_cast<std::size_t>(K) * static_cast<std::size_t>(max_psi), 0) {}

void PullCounters::record_pull(int arm, int psi, bool in_full_group) {
    if (!in_full_group) return;
    counts_[static_cast<std::size_t>(arm - 1) * static_cast<std::size_t>(max_psi_) +
            static_cast<std::size_t>(psi - 1)] += 1;
}

long long PullCounters::count(int arm, int psi) const {
    return counts_[static_cast<std::size_t>(arm - 1) * static_cast<std::size_t>(max_psi_) +
                   static_cast<std::size_t>(psi - 1)];
}

NominalCounts::NominalCounts(int max_psi)
    : per_psi_(static_cast<std::size_t>(max_psi) + 1, 0) {}

void NominalCounts::advance_grouped_session(int m) {
    for (int psi = 1; psi <= m && psi < static_cast<int>(per_psi_.size()); ++psi)
        per_psi_[static_cast<std::size_t>(psi)] += (m % psi == 0) ? 2 : 1;
}

void NominalCounts::advance_solo_pass() {
    per_psi_[1] += 1;
}

long long NominalCounts::at(int psi) const {
    if (psi < 1 || psi >= static_cast<int>(per_psi_.size())) return 0;
    return per_psi_[static_cast<std::size_t>(psi)];
}

} // namespace mmabsax
