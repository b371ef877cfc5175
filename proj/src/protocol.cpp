#include "mmabsax/protocol.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace mmabsax {
namespace {

constexpr double kZeroEps = 1e-12;

bool contains_sorted(const std::vector<int>& v, int x) {
    return std::binary_search(v.begin(), v.end(), x);
}

void erase_sorted(std::vector<int>& v, const std::vector<int>& remove) {
    std::vector<int> out;
    out.reserve(v.size());
    for (int x : v)
        if (!std::binary_search(remove.begin(), remove.end(), x)) out.push_back(x);
    v.swap(out);
}

void merge_sorted(std::vector<int>& v, const std::vector<int>& add) {
    std::vector<int> out;
    out.reserve(v.size() + add.size());
    std::merge(v.begin(), v.end(), add.begin(), add.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    v.swap(out);
}

std::uint64_t fnv_mix(std::uint64_t h, std::uint64_t x) {
    for (int i = 0; i < 8; ++i) {
        h ^= (x >> (8 * i)) & 0xffULL;
        h *= 1099511628211ULL;
    }
    return h;
}

std::string join_ints(const std::vector<int>& v) {
    std::ostringstream os;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) os << ',';
        os << v[i];
    }
    return os.str();
}

std::string join_ints(const std::set<int>& v) {
    return join_ints(std::vector<int>(v.begin(), v.end()));
}

// Union-find over a small arm set.
struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) {
        for (int i = 0; i < n; ++i) parent[i] = i;
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

} // namespace

std::string to_string(SegmentKind k) {
    switch (k) {
        case SegmentKind::Phase1Session: return "phase1_session";
        case SegmentKind::Phase1Block: return "phase1_block";
        case SegmentKind::Phase2Explore: return "phase2_explore";
        case SegmentKind::CommBlock: return "comm_block";
        case SegmentKind::Phase3Window: return "phase3_window";
        case SegmentKind::Terminal: return "terminal";
        case SegmentKind::UcbFallback: return "ucb";
    }
    return "?";
}

// ---------------------------------------------------------------------------
// Arm-set codec
// ---------------------------------------------------------------------------

std::vector<int> encode_arms(const std::set<int>& subset, int K) {
    std::vector<int> bits(static_cast<std::size_t>(K), 0);
    for (int a : subset) {
        if (a < 1 || a > K) throw std::out_of_range("encode_arms: arm out of range");
        bits[static_cast<std::size_t>(a - 1)] = 1;
    }
    return bits;
}

std::set<int> decode_arms(const std::vector<int>& bits) {
    std::set<int> out;
    for (std::size_t i = 0; i < bits.size(); ++i)
        if (bits[i]) out.insert(static_cast<int>(i) + 1);
    return out;
}

// ---------------------------------------------------------------------------
// CommLayout
// ---------------------------------------------------------------------------

CommLayout make_comm_layout(int M, int K, int nu_star, int park_group_size, long long w) {
    if (M < 2) throw std::invalid_argument("comm layout needs at least one listener");
    if (nu_star < 1 || nu_star > K) throw std::invalid_argument("comm arm out of range");
    if (w < 1) throw std::invalid_argument("bit duration must be positive");
    CommLayout lay;
    lay.M = M;
    lay.K = K;
    lay.nu_star = nu_star;
    lay.park_group_size = park_group_size;
    lay.w = w;
    std::vector<int> listeners;
    for (int p = 2; p <= M; ++p) listeners.push_back(p);
    lay.groups = listener_groups(listeners, park_group_size);
    for (int a = 1; a <= K; ++a)
        if (a != nu_star) lay.comp_arms.push_back(a);
    return lay;
}

bool CommLayout::player_parked_in_round(int round, int player) const {
    const auto& g = groups[static_cast<std::size_t>(round)];
    return std::find(g.begin(), g.end(), player) != g.end();
}

int CommLayout::arm_at(long long s, int player, int transmit_bit) const {
    const int round = round_of(s);
    const long long i = s % w + 1; // 1-based step index inside the round
    if (player == 1) {
        if (transmit_bit == 1) return nu_star;
    } else if (player_parked_in_round(round, player)) {
        return nu_star;
    }
    // Complement round-robin. Roster: every player not parked this round; the
    // coordinator always holds roster rank 1 (its slot simply goes unused
    // while it parks, which keeps listener ranks independent of the bit).
    int rank = 0;
    for (int q = 1; q <= player; ++q) {
        if (q != 1 && player_parked_in_round(round, q)) continue;
        ++rank;
    }
    const int Kp = static_cast<int>(comp_arms.size());
    const int pos = unit_rr_arm(rank, static_cast<int>((i - 1) % Kp) + 1, Kp);
    return comp_arms[static_cast<std::size_t>(pos - 1)];
}

// ---------------------------------------------------------------------------
// Player
// ---------------------------------------------------------------------------

Player::Player(const InstanceConfig& cfg, int index)
    : cfg_(cfg), p_(index), M_(cfg.players), K_(cfg.K()) {
    variant_ = cfg.feedback_mode == FeedbackMode::aggregate_soft;
    params_ = variant_ ? ConfidenceParams::variant(cfg.delta, M_, K_)
                       : ConfidenceParams::hard(cfg.delta, M_, K_);
    nominal_ = NominalCounts(M_);
    std::vector<int> everyone;
    for (int p = 1; p <= M_; ++p) everyone.push_back(p);
    plan_all_ = GroupedSessionPlan(everyone, K_);
    if (M_ >= 2) {
        std::vector<int> listeners(everyone.begin() + 1, everyone.end());
        plan_cohort_ = GroupedSessionPlan(listeners, K_);
    }
    est_ = EstimatorState(K_, M_);
    window_est_ = EstimatorState(K_, M_);
    counters_ = PullCounters(K_, M_);
    nonzero_seen_.assign(static_cast<std::size_t>(K_) * M_, false);
    caps_.assign(static_cast<std::size_t>(K_) + 1, -1);
    caps_inconsistent_.assign(static_cast<std::size_t>(K_) + 1, false);
    watch_.assign(static_cast<std::size_t>(K_) + 1, {});
    ucb_sums_.assign(static_cast<std::size_t>(K_) + 1, 0.0);
    ucb_counts_.assign(static_cast<std::size_t>(K_) + 1, 0);
    for (int a = 1; a <= K_; ++a) active_arms_.push_back(a);
    active_players_ = everyone;
    seg_ = SegmentKind::Phase1Session;
    seg_len_ = plan_all_.length();
}

std::size_t Player::ap_idx(int arm, int psi) const {
    return static_cast<std::size_t>(arm - 1) * M_ + static_cast<std::size_t>(psi - 1);
}

double Player::mu1(int arm) const { return est_.mean_or_zero(arm, 1); }

int Player::rank_of(int player) const {
    auto it = std::lower_bound(active_players_.begin(), active_players_.end(), player);
    return static_cast<int>(it - active_players_.begin()) + 1;
}

bool Player::capacity_value_known(int arm) const {
    return caps_[static_cast<std::size_t>(arm)] >= 1;
}

int Player::cap_eff(int arm) const {
    const int m = static_cast<int>(active_players_.size());
    const int c = caps_[static_cast<std::size_t>(arm)];
    if (c < 1) return m; // unknown: conservative "at least m" marker
    return std::min(c, m);
}

std::optional<int> Player::known_capacity(int arm) const {
    if (arm < 1 || arm > K_ || caps_[static_cast<std::size_t>(arm)] < 1) return std::nullopt;
    return caps_[static_cast<std::size_t>(arm)];
}

double Player::shared_B() const { return B_value(nominal_.n_clock(), params_); }

long long Player::crossing_omega(long long n) const {
    const double B = B_value(n, params_);
    if (variant_) return omega_prime(B, cfg_.delta, K_, M_);
    return omega(12.0, B, cfg_.delta, K_, M_);
}

bool Player::crossing_computable(long long n) const {
    if (variant_) return true;
    return omega_computable(12.0, B_value(n, params_));
}

void Player::emit(long long t, const char* kind, const std::string& detail) {
    if (!trace_) return;
    TraceEvent ev;
    ev.t = t;
    ev.player = p_;
    ev.kind = kind;
    ev.detail = detail;
    trace_(ev);
}

void Player::record_exploration(int arm, int psi, double reward, long long t) {
    const double value = variant_ ? reward / psi : reward;
    est_.update(arm, psi, value);
    counters_.record_pull(arm, psi, true);
    if (reward > kZeroEps) nonzero_seen_[ap_idx(arm, psi)] = true;
    if (counted_hook_)
        counted_hook_(p_, arm, psi, est_.mean_or_zero(arm, psi), est_.count(arm, psi));
    (void)t;
}

// ---------------------------------------------------------------------------
// Capacity inference from cumulative exploration statistics (phase 1)
// ---------------------------------------------------------------------------

void Player::refresh_capacities() {
    const long long n2 = M_ >= 2 ? nominal_.at(2) : 0;
    for (int a = 1; a <= K_; ++a) {
        if (caps_inconsistent_[static_cast<std::size_t>(a)]) continue;
        auto mu = est_.mean(a, 1);
        if (!mu) continue;
        if (!capacity_known(n2, *mu, B_value(n2, params_), cfg_.delta, M_, K_)) continue;

        int found = 0; // first group size that tests as saturated
        bool coverage = true;
        for (int psi = 1; psi <= M_; ++psi) {
            if (counters_.count(a, psi) <= 0) {
                coverage = false;
                break;
            }
            bool saturated;
            if (variant_) {
                const double m1 = est_.mean_or_zero(a, 1);
                const double mp = est_.mean_or_zero(a, psi);
                saturated = (m1 - mp) >= m1 / M_;
            } else {
                saturated = !nonzero_seen_[ap_idx(a, psi)];
            }
            if (saturated) {
                found = psi;
                break;
            }
        }
        if (!coverage) continue;
        if (found == 1) {
            // An arm can never saturate alone; record the contradiction and
            // stop trusting this arm's statistics.
            caps_inconsistent_[static_cast<std::size_t>(a)] = true;
            caps_[static_cast<std::size_t>(a)] = 1;
        } else if (found > 1) {
            caps_[static_cast<std::size_t>(a)] = found - 1;
        } else {
            caps_[static_cast<std::size_t>(a)] = M_; // marker: at least M
        }
    }
}

// ---------------------------------------------------------------------------
// Phase-1 session boundary: trigger, checkpoint, block / skip decisions
// ---------------------------------------------------------------------------

void Player::maybe_trigger() {
    if (triggered_) return;
    int trig = 0;
    for (int a = 1; a <= K_; ++a) {
        auto mu = est_.mean(a, 1);
        if (!mu) continue;
        if (inflated_trigger(*mu, est_.count(a, 1), params_)) {
            trig = a;
            break;
        }
    }
    if (!trig) return;
    triggered_ = true;
    t0_n_ = nominal_.n_clock();
    trigger_arm_ = trig;
    trigger_count_ = est_.count(trig, 1);
    const double theta = is_coordinator() ? 3.0 / 5.0 : 9.0 / 25.0;
    const double bar = theta * est_.mean_or_zero(trig, 1);
    candidates_.clear();
    for (int a = 1; a <= K_; ++a) {
        auto mu = est_.mean(a, 1);
        if (mu && *mu >= bar) candidates_.insert(a);
    }
    candidates_.insert(trig);
}

void Player::session_boundary_update(long long t) {
    refresh_capacities();
    const bool was_triggered = triggered_;
    maybe_trigger();
    if (!was_triggered && triggered_)
        emit(t, "trigger", "n=" + std::to_string(t0_n_) + " candidates=" + join_ints(candidates_));

    const long long n = nominal_.n_clock();
    const bool crossed = is_checkpoint(last_boundary_n_, n, params_);
    last_boundary_n_ = n;
    seg_pos_ = 0;
    if (!crossed || !crossing_computable(n)) return;

    if (M_ == 1) {
        // No co-players: nothing to signal, no capacities below M to find.
        if (triggered_) enter_ucb(t);
        return;
    }

    signaling_block_ = false;
    if (is_coordinator() && triggered_) {
        bool all_known = true;
        for (int a : candidates_)
            if (!capacity_value_known(a) && !caps_inconsistent_[static_cast<std::size_t>(a)])
                all_known = false;
        if (all_known) {
            std::vector<int> viable;
            for (int a : candidates_) {
                if (caps_inconsistent_[static_cast<std::size_t>(a)]) continue;
                const int c = caps_[static_cast<std::size_t>(a)];
                if (variant_ ? (std::min(c, M_) >= 2) : (c < M_)) viable.push_back(a);
            }
            if (viable.empty()) {
                emit(t, "ucb", "no viable communication arm");
                enter_ucb(t);
                return;
            }
            double mu_best = 0.0;
            for (int a : candidates_) mu_best = std::max(mu_best, mu1(a));
            const double Bn = B_value(n, params_);
            const double v = clock_value(n, params_);
            bool cond = false;
            if (mu_best > Bn) {
                const double margin = mu_best - Bn;
                cond = v >= 8.0 * (params_.h + 1.0) * (params_.h + 1.0) / (margin * margin);
            }
            if (cond || skipped_once_) {
                signaling_block_ = true;
                int best = 0;
                double best_mu = -1.0;
                for (int a : viable) {
                    const double mu = mu1(a);
                    if (mu > best_mu) {
                        best_mu = mu;
                        best = a;
                    }
                }
                nu_star_ = best;
                emit(t, "signal", "arm=" + std::to_string(best) + " n=" + std::to_string(n));
            } else {
                skipped_once_ = true;
                emit(t, "skip", "n=" + std::to_string(n));
            }
        }
        // Capacities of some candidate still unresolved: hold the signal
        // without consuming the one allowed skip.
    }
    enter_phase1_block(n, t);
}

void Player::enter_phase1_block(long long crossing_n, long long t) {
    block_crossing_n_ = crossing_n;
    block_omega_ = crossing_omega(crossing_n);
    seg_ = SegmentKind::Phase1Block;
    seg_pos_ = 0;
    seg_len_ = block_omega_ * plan_cohort_.length();
    std::fill(watch_.begin(), watch_.end(), WatchStat{});
    emit(t, "block", "n=" + std::to_string(crossing_n) + " omega=" + std::to_string(block_omega_));
}

void Player::finish_block_phase1(long long t) {
    if (is_coordinator()) {
        if (signaling_block_) {
            enter_phase2(t);
        } else {
            seg_ = SegmentKind::Phase1Session;
            seg_pos_ = 0;
            seg_len_ = plan_all_.length();
        }
        return;
    }
    if (triggered_ && t0_n_ <= block_crossing_n_) {
        int detected = 0;
        for (int a = 1; a <= K_; ++a) {
            const auto& wsa = watch_[static_cast<std::size_t>(a)];
            if (wsa.count >= block_omega_ && wsa.clean && wsa.count > 0) {
                detected = a;
                break;
            }
        }
        if (detected) {
            nu_star_ = detected;
            emit(t, "detect", "arm=" + std::to_string(detected));
            enter_phase2(t);
            return;
        }
        ++quota_missed_;
        if (quota_missed_ >= 3) {
            emit(t, "ucb", "quota exhausted");
            enter_ucb(t);
            return;
        }
    }
    seg_ = SegmentKind::Phase1Session;
    seg_pos_ = 0;
    seg_len_ = plan_all_.length();
}

// Watch target: the nominal group size whose overload carries the signal.
// Hard mode: groups at exactly the arm's capacity (one extra player zeroes
// them). Variant: groups one below effective capacity (one extra player
// raises the per-capita total).
namespace {
int signal_psi_for(bool variant, int cap, int M) {
    if (variant) {
        const int ce = std::min(cap, M);
        return ce - 1; // requires ce >= 2
    }
    return cap;
}
} // namespace

// ---------------------------------------------------------------------------
// Phase 2 entry and exploration
// ---------------------------------------------------------------------------

void Player::enter_phase2(long long t) {
    t_comm_n_ = block_crossing_n_;
    omega_signal_ = block_omega_;
    const int cap = caps_[static_cast<std::size_t>(*nu_star_)];
    const int pgs = variant_ ? std::min(cap, M_) - 1 : cap;
    layout_ = make_comm_layout(M_, K_, *nu_star_, pgs, omega_signal_);
    active_arms_.clear();
    for (int a = 1; a <= K_; ++a) active_arms_.push_back(a);
    active_players_.clear();
    for (int p = 1; p <= M_; ++p) active_players_.push_back(p);
    fixed_arms_.clear();
    commitments_.clear();
    known_set_.clear();
    epoch_ = 1;
    comm_stage_ = CommStage::Idle;
    partition_latched_ = false;
    start_pending_ = false;
    frame_bits_.clear();
    rebuild_explore_plan();
    emit(t, "phase2", "nu_star=" + std::to_string(*nu_star_) +
                          " omega=" + std::to_string(omega_signal_) +
                          " groups=" + std::to_string(layout_.groups.size()));
    enter_explore(t);
}

void Player::rebuild_explore_plan() {
    explore_plan_ = UnitRRPlan(static_cast<int>(active_players_.size()),
                               static_cast<int>(active_arms_.size()));
}

void Player::enter_explore(long long t) {
    seg_ = SegmentKind::Phase2Explore;
    seg_pos_ = 0;
    seg_len_ = 0; // open-ended; checkpoints end it
    if (is_coordinator()) update_graph_latch();
    (void)t;
}

int Player::explore_arm(long long round, int rank, bool* probing) const {
    const auto ud = explore_plan_.duty(round, rank);
    if (probing) *probing = ud.probing;
    return active_arms_[static_cast<std::size_t>(ud.position - 1)];
}

void Player::update_graph_latch() {
    if (partition_latched_) return;
    const int n_arms = static_cast<int>(active_arms_.size());
    if (n_arms < 2) return;
    std::vector<double> mu(static_cast<std::size_t>(n_arms));
    std::vector<long long> cnt(static_cast<std::size_t>(n_arms));
    for (int i = 0; i < n_arms; ++i) {
        const int a = active_arms_[static_cast<std::size_t>(i)];
        cnt[static_cast<std::size_t>(i)] = est_.count(a, 1);
        if (cnt[static_cast<std::size_t>(i)] == 0) return; // infinite radii: connected
        mu[static_cast<std::size_t>(i)] = est_.mean_or_zero(a, 1);
    }
    UnionFind uf(n_arms);
    for (int i = 0; i < n_arms; ++i)
        for (int j = i + 1; j < n_arms; ++j) {
            const double r = B_value(cnt[static_cast<std::size_t>(i)], params_) +
                             B_value(cnt[static_cast<std::size_t>(j)], params_);
            if (std::fabs(mu[static_cast<std::size_t>(i)] - mu[static_cast<std::size_t>(j)]) <= r)
                uf.unite(i, j);
        }
    int best = 0;
    for (int i = 1; i < n_arms; ++i)
        if (mu[static_cast<std::size_t>(i)] > mu[static_cast<std::size_t>(best)]) best = i;
    const int root = uf.find(best);
    std::set<int> top;
    for (int i = 0; i < n_arms; ++i)
        if (uf.find(i) == root) top.insert(active_arms_[static_cast<std::size_t>(i)]);
    if (static_cast<int>(top.size()) == n_arms) return;
    partition_latched_ = true;
    start_pending_ = true;
    v_top_ = std::move(top);
}

// ---------------------------------------------------------------------------
// Communication blocks and frames
// ---------------------------------------------------------------------------

void Player::enter_comm_block(long long t) {
    seg_ = SegmentKind::CommBlock;
    seg_pos_ = 0;
    seg_len_ = layout_.block_length();
    read_stat_ = WatchStat{};
    read_sum_ = 0.0;
    transmit_bit_ = 0;
    if (comm_stage_ == CommStage::Idle) t_first_n_ = nominal_.n_clock();
    if (is_coordinator()) {
        switch (comm_stage_) {
            case CommStage::Idle:
                transmit_bit_ = start_pending_ ? 1 : 0;
                break;
            case CommStage::ArmFrame: {
                const auto bits = encode_arms(v_top_, K_);
                transmit_bit_ = bits[frame_bits_.size()];
                break;
            }
            case CommStage::GammaFrame: {
                const int digit = static_cast<int>(gamma_ % 10);
                transmit_bit_ = (digit >> (3 - static_cast<int>(frame_bits_.size()))) & 1;
                break;
            }
        }
    }
    emit(t, "comm_block", "stage=" + std::to_string(static_cast<int>(comm_stage_)) +
                              " bit=" + std::to_string(transmit_bit_));
}

namespace {
long long gamma_from_means(double mu_min, double B) {
    if (!(B > 0.0) || mu_min - B <= B) return 0;
    auto g = static_cast<long long>(std::floor((mu_min - B) / B));
    while (g > 0 && static_cast<double>(g) * B >= mu_min - B) --g;
    while (static_cast<double>(g + 1) * B < mu_min - B) ++g;
    return std::max<long long>(g, 0);
}

long long decode_gamma_digit(int digit, long long gamma_own) {
    long long best = digit;
    long long best_d = std::llabs(static_cast<long long>(digit) - gamma_own);
    for (long long c = digit; c <= gamma_own + 10; c += 10) {
        const long long d = std::llabs(c - gamma_own);
        if (d < best_d) {
            best_d = d;
            best = c;
        }
    }
    return best;
}
} // namespace

void Player::finish_comm_block(long long t) {
    int bit;
    if (is_coordinator()) {
        bit = transmit_bit_;
    } else if (variant_) {
        const double mean = read_stat_.count > 0 ? read_sum_ / read_stat_.count : 0.0;
        const double thr =
            mu1(*nu_star_) * (1.0 + 1.0 / (2.0 * layout_.park_group_size));
        bit = mean >= thr ? 1 : 0;
    } else {
        bit = (read_stat_.count > 0 && read_stat_.clean) ? 1 : 0;
    }
    emit(t, "bit", "stage=" + std::to_string(static_cast<int>(comm_stage_)) +
                       " bit=" + std::to_string(bit));

    switch (comm_stage_) {
        case CommStage::Idle: {
            if (bit == 1) {
                comm_stage_ = CommStage::ArmFrame;
                frame_bits_.clear();
                enter_comm_block(t);
            } else {
                enter_explore(t);
            }
            return;
        }
        case CommStage::ArmFrame: {
            frame_bits_.push_back(bit);
            if (static_cast<int>(frame_bits_.size()) < K_) {
                enter_comm_block(t);
                return;
            }
            const std::set<int> D = decode_arms(frame_bits_);
            frame_bits_.clear();
            bool valid = !D.empty() && static_cast<int>(D.size()) < static_cast<int>(active_arms_.size());
            for (int a : D)
                if (!contains_sorted(active_arms_, a)) valid = false;
            if (!valid) {
                emit(t, "spurious", "D=" + join_ints(D));
                comm_stage_ = CommStage::Idle;
                enter_explore(t);
                return;
            }
            if (!is_coordinator()) v_top_ = D;
            emit(t, "frame", "V_top=" + join_ints(v_top_));
            bool skip_window = true;
            for (int a : v_top_)
                if (!known_set_.count(a)) skip_window = false;
            if (skip_window) {
                comm_stage_ = CommStage::Idle;
                start_pending_ = false;
                recursion_step(t);
            } else {
                comm_stage_ = CommStage::GammaFrame;
                if (is_coordinator()) {
                    double mu_min = std::numeric_limits<double>::infinity();
                    for (int a : active_arms_) mu_min = std::min(mu_min, mu1(a));
                    gamma_ = static_cast<int>(gamma_from_means(mu_min, shared_B()));
                }
                enter_comm_block(t);
            }
            return;
        }
        case CommStage::GammaFrame: {
            frame_bits_.push_back(bit);
            if (static_cast<int>(frame_bits_.size()) < 4) {
                enter_comm_block(t);
                return;
            }
            const int digit = frame_bits_[0] * 8 + frame_bits_[1] * 4 +
                              frame_bits_[2] * 2 + frame_bits_[3];
            frame_bits_.clear();
            comm_stage_ = CommStage::Idle;
            long long gamma_dec;
            if (is_coordinator()) {
                gamma_dec = gamma_;
            } else {
                double mu_min = std::numeric_limits<double>::infinity();
                for (int a : active_arms_) mu_min = std::min(mu_min, mu1(a));
                gamma_dec = decode_gamma_digit(digit, gamma_from_means(mu_min, shared_B()));
            }
            if (gamma_dec == 0) {
                emit(t, "postpone", "digit=" + std::to_string(digit));
                enter_explore(t); // coordinator keeps start_pending_ for the next checkpoint
                return;
            }
            start_pending_ = false;
            rebuild_window(gamma_dec);
            emit(t, "window", "gamma=" + std::to_string(gamma_dec) +
                                  " sessions=" + std::to_string(window_sessions_) +
                                  " need=" + std::to_string(window_need_));
            enter_window(t);
            return;
        }
    }
}

// ---------------------------------------------------------------------------
// Phase-3 capacity probe window
// ---------------------------------------------------------------------------

void Player::rebuild_window(long long gamma_dec) {
    const double Bsh = shared_B();
    window_sessions_ = omega(1.0, Bsh, cfg_.delta, K_, M_);
    long long g = gamma_dec;
    while (g > 1 && !omega_computable(static_cast<double>(g), Bsh)) --g;
    window_need_ = omega(static_cast<double>(g), Bsh, cfg_.delta, K_, M_);
    window_.parts.clear();
    window_.session_rounds = 0;
    const int m = static_cast<int>(active_players_.size());
    const int Kp = static_cast<int>(active_arms_.size());
    for (int psi = 1; psi <= m; ++psi) {
        for (int pass = 1; pass <= 2; ++pass) {
            WindowLayout::Part part;
            part.psi = psi;
            part.pass = pass;
            part.plan = grouped_rr_plan(psi, active_players_, pass);
            part.units = UnitRRPlan(static_cast<int>(part.plan.groups.size()), Kp);
            part.rounds = part.units.super_pass_rounds();
            window_.session_rounds += part.rounds;
            window_.parts.push_back(std::move(part));
        }
    }
    window_flags_.assign(static_cast<std::size_t>(K_) * M_, WatchStat{});
    window_est_ = EstimatorState(K_, M_);
}

void Player::enter_window(long long t) {
    seg_ = SegmentKind::Phase3Window;
    seg_pos_ = 0;
    seg_len_ = window_sessions_ * window_.session_rounds;
    (void)t;
}

void Player::finish_window(long long t) {
    if (!committed()) {
        const int m = static_cast<int>(active_players_.size());
        for (int a : active_arms_) {
            int found = 0;
            bool conclusive = true;
            for (int psi = 1; psi <= m; ++psi) {
                bool saturated;
                if (variant_) {
                    if (window_est_.count(a, psi) < window_need_ ||
                        window_est_.count(a, 1) < window_need_) {
                        conclusive = false;
                        break;
                    }
                    const double m1 = window_est_.mean_or_zero(a, 1);
                    const double mp = window_est_.mean_or_zero(a, psi);
                    saturated = (m1 - mp) >= m1 / M_;
                } else {
                    const auto& f = window_flags_[ap_idx(a, psi)];
                    if (f.count < window_need_) {
                        conclusive = false;
                        break;
                    }
                    saturated = f.clean;
                }
                if (saturated) {
                    found = psi;
                    break;
                }
            }
            if (!conclusive) continue; // keep earlier knowledge
            if (found == 1) {
                caps_inconsistent_[static_cast<std::size_t>(a)] = true;
                caps_[static_cast<std::size_t>(a)] = 1;
            } else if (found > 1) {
                caps_[static_cast<std::size_t>(a)] = found - 1;
            } else {
                caps_[static_cast<std::size_t>(a)] = m; // marker: at least m
            }
        }
    }
    for (int a : active_arms_) known_set_.insert(a);
    recursion_step(t);
}

// ---------------------------------------------------------------------------
// Recursion
// ---------------------------------------------------------------------------

void Player::commit_players(const std::vector<int>& arms_sorted, bool include_p1,
                            long long t) {
    std::vector<int> pool;
    for (int q : active_players_)
        if (include_p1 || q != 1) pool.push_back(q);
    std::size_t next = 0;
    std::vector<int> done_players;
    for (int a : arms_sorted) {
        int quota = cap_eff(a);
        if (include_p1 && a == arms_sorted.back())
            quota = static_cast<int>(pool.size() - next); // terminal: place everyone
        for (int s = 0; s < quota && next < pool.size(); ++s) {
            const int q = pool[next++];
            commitments_.emplace_back(q, a);
            done_players.push_back(q);
            if (q == p_) {
                committed_arm_ = a;
                emit(t, "commit", "arm=" + std::to_string(a));
            }
        }
    }
    std::sort(done_players.begin(), done_players.end());
    erase_sorted(active_players_, done_players);
}

void Player::recursion_step(long long t) {
    std::vector<int> vt(v_top_.begin(), v_top_.end());
    std::sort(vt.begin(), vt.end());
    const int m = static_cast<int>(active_players_.size());
    long long kappa = 0;
    for (int a : vt) kappa += cap_eff(a);
    emit(t, "recursion", "V_top=" + join_ints(vt) + " kappa=" + std::to_string(kappa) +
                             " m=" + std::to_string(m));

    auto go_terminal = [&]() {
        seg_ = SegmentKind::Terminal;
        seg_pos_ = 0;
        seg_len_ = 0;
        emit(t, "terminal", "assignments=" + std::to_string(commitments_.size()));
    };
    auto next_epoch = [&]() {
        ++epoch_;
        partition_latched_ = false;
        start_pending_ = false;
        v_top_.clear();
        comm_stage_ = CommStage::Idle;
        rebuild_explore_plan();
        enter_explore(t);
    };

    if (kappa < m) {
        // Absorb the top cluster; the coordinator stays to lead the rest.
        commit_players(vt, /*include_p1=*/false, t);
        merge_sorted(fixed_arms_, vt);
        erase_sorted(active_arms_, vt);
        if (active_arms_.size() == 1) {
            // Everyone left fits on the single remaining arm.
            v_top_ = {active_arms_.front()};
            commit_players({active_arms_.front()}, /*include_p1=*/true, t);
            go_terminal();
            return;
        }
        next_epoch();
        return;
    }
    if (kappa == m) {
        commit_players(vt, /*include_p1=*/true, t);
        merge_sorted(fixed_arms_, vt);
        erase_sorted(active_arms_, vt);
        go_terminal();
        return;
    }
    // Top cluster alone over-provisions the remaining players: zoom in.
    active_arms_ = vt;
    if (active_arms_.size() == 1) {
        commit_players({active_arms_.front()}, /*include_p1=*/true, t);
        go_terminal();
        return;
    }
    next_epoch();
}

// ---------------------------------------------------------------------------
// UCB fallback
// ---------------------------------------------------------------------------

void Player::enter_ucb(long long t) {
    ucb_active_ = true;
    seg_ = SegmentKind::UcbFallback;
    seg_pos_ = 0;
    ucb_arms_ = candidates_;
    if (ucb_arms_.empty())
        for (int a = 1; a <= K_; ++a) ucb_arms_.insert(a);
    for (int a : ucb_arms_) {
        ucb_sums_[static_cast<std::size_t>(a)] = est_.sum(a, 1);
        ucb_counts_[static_cast<std::size_t>(a)] = est_.count(a, 1);
    }
    emit(t, "ucb", "arms=" + join_ints(ucb_arms_));
}

int Player::ucb_pick() const {
    int best = 0;
    double best_v = -std::numeric_limits<double>::infinity();
    for (int a : ucb_arms_) {
        const long long c = ucb_counts_[static_cast<std::size_t>(a)];
        double v;
        if (c == 0) {
            v = std::numeric_limits<double>::infinity();
        } else {
            v = ucb_sums_[static_cast<std::size_t>(a)] / c + B_value(c, params_);
        }
        if (v > best_v) {
            best_v = v;
            best = a;
        }
    }
    return best;
}

// ---------------------------------------------------------------------------
// Top-level dispatch
// ---------------------------------------------------------------------------

int Player::choose_arm(long long t) {
    (void)t;
    if (ucb_active_) return ucb_pick();
    switch (seg_) {
        case SegmentKind::Terminal:
            return committed_arm_;
        case SegmentKind::Phase1Session:
            return plan_all_.duty(seg_pos_, p_).arm;
        case SegmentKind::Phase1Block: {
            const long long sub = seg_pos_ % plan_cohort_.length();
            if (is_coordinator()) {
                if (!signaling_block_) return plan_cohort_.ghost_arm(sub);
                if (!variant_) return *nu_star_;
                // Variant: join the communication arm exactly when a full
                // group of size C_eff - 1 is scheduled on it.
                const int psi = static_cast<int>(sub / (2 * K_)) + 1;
                const int pass = static_cast<int>((sub % (2 * K_)) / K_) + 1;
                const int round = static_cast<int>(sub % K_) + 1;
                const int target = signal_psi_for(true, caps_[static_cast<std::size_t>(*nu_star_)], M_);
                if (psi == target) {
                    int j = ((*nu_star_ - round) % K_ + K_) % K_;
                    if (j == 0) j = K_;
                    const auto plan = grouped_rr_plan(psi, plan_cohort_.actives(), pass);
                    if (j <= static_cast<int>(plan.groups.size()) &&
                        static_cast<int>(plan.groups[static_cast<std::size_t>(j - 1)].size()) == psi)
                        return *nu_star_;
                }
                return plan_cohort_.ghost_arm(sub);
            }
            return plan_cohort_.duty(sub, p_).arm;
        }
        case SegmentKind::Phase2Explore: {
            if (committed()) return committed_arm_;
            return explore_arm(seg_pos_, rank_of(p_), nullptr);
        }
        case SegmentKind::CommBlock:
            return layout_.arm_at(seg_pos_, p_, transmit_bit_);
        case SegmentKind::Phase3Window: {
            if (committed()) return committed_arm_;
            long long r = seg_pos_ % window_.session_rounds;
            for (const auto& part : window_.parts) {
                if (r >= part.rounds) {
                    r -= part.rounds;
                    continue;
                }
                int g = 0;
                for (std::size_t i = 0; i < part.plan.groups.size(); ++i) {
                    const auto& grp = part.plan.groups[i];
                    if (std::find(grp.begin(), grp.end(), p_) != grp.end()) {
                        g = static_cast<int>(i) + 1;
                        break;
                    }
                }
                const auto ud = part.units.duty(r, g);
                return active_arms_[static_cast<std::size_t>(ud.position - 1)];
            }
            return active_arms_.front(); // unreachable
        }
        case SegmentKind::UcbFallback:
            return ucb_pick();
    }
    return 1;
}

void Player::observe(long long t, int arm, double reward) {
    if (ucb_active_) {
        ucb_sums_[static_cast<std::size_t>(arm)] += variant_ ? reward : reward;
        ucb_counts_[static_cast<std::size_t>(arm)] += 1;
        return;
    }
    switch (seg_) {
        case SegmentKind::Terminal:
            return;
        case SegmentKind::Phase1Session: {
            const auto duty = plan_all_.duty(seg_pos_, p_);
            if (duty.in_full_group) record_exploration(arm, duty.psi, reward, t);
            ++seg_pos_;
            if (seg_pos_ == seg_len_) {
                nominal_.advance_grouped_session(M_);
                session_boundary_update(t);
            }
            return;
        }
        case SegmentKind::Phase1Block: {
            if (!is_coordinator() && triggered_ && t0_n_ <= block_crossing_n_) {
                const long long sub = seg_pos_ % plan_cohort_.length();
                const auto duty = plan_cohort_.duty(sub, p_);
                if (duty.in_full_group && candidates_.count(arm) &&
                    !caps_inconsistent_[static_cast<std::size_t>(arm)] &&
                    capacity_value_known(arm)) {
                    const int cap = caps_[static_cast<std::size_t>(arm)];
                    const bool watchable = variant_ ? std::min(cap, M_) >= 2 : cap < M_;
                    if (watchable && duty.psi == signal_psi_for(variant_, cap, M_)) {
                        auto& wsa = watch_[static_cast<std::size_t>(arm)];
                        wsa.count += 1;
                        if (variant_) {
                            const double thr =
                                mu1(arm) * (1.0 + 1.0 / (2.0 * duty.psi));
                            if (reward / duty.psi < thr) wsa.clean = false;
                        } else if (reward > kZeroEps) {
                            wsa.clean = false;
                        }
                    }
                }
            }
            ++seg_pos_;
            if (seg_pos_ == seg_len_) finish_block_phase1(t);
            return;
        }
        case SegmentKind::Phase2Explore: {
            if (!committed()) {
                bool probing = false;
                explore_arm(seg_pos_, rank_of(p_), &probing);
                if (probing) {
                    record_exploration(arm, 1, reward, t);
                    if (is_coordinator()) update_graph_latch();
                }
            }
            ++seg_pos_;
            if (seg_pos_ % explore_plan_.super_pass_rounds() == 0) {
                nominal_.advance_solo_pass();
                const long long n = nominal_.n_clock();
                const bool crossed = is_checkpoint(last_boundary_n_, n, params_);
                last_boundary_n_ = n;
                if (crossed && crossing_computable(n)) enter_comm_block(t);
            }
            return;
        }
        case SegmentKind::CommBlock: {
            if (!is_coordinator()) {
                const int round = layout_.round_of(seg_pos_);
                if (layout_.player_parked_in_round(round, p_)) {
                    // Double-duty listeners read in their first batch only.
                    int first_round = -1;
                    for (std::size_t r = 0; r < layout_.groups.size(); ++r)
                        if (layout_.player_parked_in_round(static_cast<int>(r), p_)) {
                            first_round = static_cast<int>(r);
                            break;
                        }
                    if (round == first_round) {
                        read_stat_.count += 1;
                        if (variant_) {
                            read_sum_ += reward / layout_.park_group_size;
                        } else if (reward > kZeroEps) {
                            read_stat_.clean = false;
                        }
                    }
                }
            }
            ++seg_pos_;
            if (seg_pos_ == seg_len_) finish_comm_block(t);
            return;
        }
        case SegmentKind::Phase3Window: {
            if (!committed()) {
                long long r = seg_pos_ % window_.session_rounds;
                for (const auto& part : window_.parts) {
                    if (r >= part.rounds) {
                        r -= part.rounds;
                        continue;
                    }
                    int g = 0;
                    bool full = false;
                    for (std::size_t i = 0; i < part.plan.groups.size(); ++i) {
                        const auto& grp = part.plan.groups[i];
                        if (std::find(grp.begin(), grp.end(), p_) != grp.end()) {
                            g = static_cast<int>(i) + 1;
                            full = static_cast<int>(grp.size()) == part.psi;
                            break;
                        }
                    }
                    const auto ud = part.units.duty(r, g);
                    if (ud.probing && full) {
                        auto& f = window_flags_[ap_idx(arm, part.psi)];
                        f.count += 1;
                        if (reward > kZeroEps) f.clean = false;
                        if (variant_) window_est_.update(arm, part.psi, reward / part.psi);
                    }
                    break;
                }
            }
            ++seg_pos_;
            if (seg_pos_ == seg_len_) finish_window(t);
            return;
        }
        case SegmentKind::UcbFallback:
            return;
    }
}

// ---------------------------------------------------------------------------
// Telemetry
// ---------------------------------------------------------------------------

PlayerTelemetry Player::telemetry() const {
    PlayerTelemetry tel;
    tel.segment = seg_;
    tel.segment_pos = seg_pos_;
    tel.epoch = epoch_;
    tel.n_clock = nominal_.n_clock();
    tel.triggered = triggered_;
    tel.t0_n = t0_n_;
    tel.trigger_arm = trigger_arm_;
    tel.trigger_count = trigger_count_;
    tel.t_comm_n = t_comm_n_;
    tel.nu_star = nu_star_;
    tel.omega_signal = omega_signal_;
    tel.committed = committed();
    tel.committed_arm = committed_arm_;
    tel.in_ucb = ucb_active_;
    tel.terminal = seg_ == SegmentKind::Terminal;
    tel.candidates = candidates_;
    tel.active_arms = active_arms_;
    tel.active_players = static_cast<int>(active_players_.size());
    return tel;
}

std::uint64_t Player::fingerprint() const {
    std::uint64_t h = 1469598103934665603ULL;
    h = fnv_mix(h, static_cast<std::uint64_t>(seg_));
    h = fnv_mix(h, static_cast<std::uint64_t>(seg_pos_));
    h = fnv_mix(h, static_cast<std::uint64_t>(epoch_));
    h = fnv_mix(h, static_cast<std::uint64_t>(nominal_.n_clock()));
    h = fnv_mix(h, static_cast<std::uint64_t>(comm_stage_));
    // The election outcome becomes common knowledge only when phase 1 ends;
    // during a signaling block the coordinator already holds it privately.
    if (seg_ != SegmentKind::Phase1Session && seg_ != SegmentKind::Phase1Block) {
        h = fnv_mix(h, static_cast<std::uint64_t>(nu_star_.value_or(0)));
        h = fnv_mix(h, static_cast<std::uint64_t>(omega_signal_));
        h = fnv_mix(h, static_cast<std::uint64_t>(layout_.park_group_size));
    }
    h = fnv_mix(h, static_cast<std::uint64_t>(active_players_.size()));
    for (int a : active_arms_) h = fnv_mix(h, static_cast<std::uint64_t>(a));
    for (int b : frame_bits_) h = fnv_mix(h, static_cast<std::uint64_t>(b + 2));
    return h;
}

// ---------------------------------------------------------------------------
// Frame-exchange driver for codec tests (hard feedback mode)
// ---------------------------------------------------------------------------

std::vector<std::vector<int>> run_frame_exchange(const InstanceConfig& instance,
                                                 const CommLayout& layout,
                                                 const std::vector<int>& bits,
                                                 long long t_start) {
    if (instance.feedback_mode != FeedbackMode::hard_sax)
        throw std::invalid_argument("frame exchange driver supports hard feedback only");
    const int M = layout.M;
    std::vector<std::vector<int>> decoded(static_cast<std::size_t>(M - 1));
    std::vector<int> first_round(static_cast<std::size_t>(M + 1), -1);
    for (int p = 2; p <= M; ++p)
        for (std::size_t r = 0; r < layout.groups.size(); ++r)
            if (layout.player_parked_in_round(static_cast<int>(r), p)) {
                first_round[static_cast<std::size_t>(p)] = static_cast<int>(r);
                break;
            }
    long long t = t_start;
    for (int bit : bits) {
        std::vector<long long> count(static_cast<std::size_t>(M + 1), 0);
        std::vector<bool> clean(static_cast<std::size_t>(M + 1), true);
        for (long long s = 0; s < layout.block_length(); ++s, ++t) {
            ActionProfile prof;
            prof.choices.resize(static_cast<std::size_t>(M));
            for (int p = 1; p <= M; ++p)
                prof.choices[static_cast<std::size_t>(p - 1)] = layout.arm_at(s, p, bit);
            const auto fb = sample_feedback(instance, prof, t);
            const int round = layout.round_of(s);
            for (int p = 2; p <= M; ++p) {
                if (round != first_round[static_cast<std::size_t>(p)]) continue;
                if (!layout.player_parked_in_round(round, p)) continue;
                count[static_cast<std::size_t>(p)] += 1;
                if (fb.rewards[static_cast<std::size_t>(p - 1)] > kZeroEps)
                    clean[static_cast<std::size_t>(p)] = false;
            }
        }
        for (int p = 2; p <= M; ++p)
            decoded[static_cast<std::size_t>(p - 2)].push_back(
                count[static_cast<std::size_t>(p)] > 0 && clean[static_cast<std::size_t>(p)] ? 1 : 0);
    }
    return decoded;
}

} // namespace mmabsax
