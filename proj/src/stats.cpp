#include "mmabsax/stats.hpp"

#include <cmath>
#include <stdexcept>

namespace mmabsax {

ConfidenceParams ConfidenceParams::hard(double delta, int M, int K) {
    ConfidenceParams p;
    p.delta = delta;
    p.M = M;
    p.K = K;
    p.h = 5.0;
    p.checkpoint_base = 9.0;
    return p;
}

ConfidenceParams ConfidenceParams::variant(double delta, int M, int K) {
    ConfidenceParams p;
    p.delta = delta;
    p.M = M;
    p.K = K;
    p.h = (M >= 2) ? 2.0 * M : 5.0;
    p.checkpoint_base = variant_checkpoint_base(M);
    return p;
}

double g_value(long long n, const ConfidenceParams& p) {
    if (n < 1) throw std::domain_error("g(n) requires n >= 1");
    const double nn = static_cast<double>(n);
    return std::log(4.0 * nn * nn * p.M * p.K / p.delta);
}

double B_value(long long n, const ConfidenceParams& p) {
    if (n <= 0) return std::numeric_limits<double>::infinity();
    return std::sqrt(2.0 * g_value(n, p) / static_cast<double>(n));
}

double base_floor(double x, double base) {
    if (!(x >= 1.0)) throw std::domain_error("base_floor requires x >= 1");
    if (!(base > 1.0)) throw std::domain_error("base_floor requires base > 1");
    // Integer exponent via log, with an exactness fixup at power boundaries.
    long long a = static_cast<long long>(std::floor(std::log(x) / std::log(base)));
    if (a < 0) a = 0;
    double pw = std::pow(base, static_cast<double>(a));
    while (pw * base <= x) pw *= base, ++a;
    while (pw > x && a > 0) pw /= base, --a;
    return pw;
}

double base_floor_or_zero(double x, double base) {
    if (x < 1.0) return 0.0;
    return base_floor(x, base);
}

double clock_value(long long n, const ConfidenceParams& p) {
    if (n <= 0) return 0.0;
    return static_cast<double>(n) / g_value(n, p);
}

bool is_checkpoint(long long n_prev, long long n_curr, const ConfidenceParams& p) {
    const double prev = base_floor_or_zero(clock_value(n_prev, p), p.checkpoint_base);
    const double curr = base_floor_or_zero(clock_value(n_curr, p), p.checkpoint_base);
    return curr > prev;
}

bool inflated_trigger(double mu_hat, long long n, const ConfidenceParams& p) {
    const double b = B_value(n, p);
    if (std::isinf(b)) return false;
    return mu_hat - p.h * b >= 0.0;
}

bool omega_computable(double gamma, double B_val) {
    return gamma * B_val < 1.0 && gamma > 0.0 && B_val > 0.0;
}

long long omega(double gamma, double B_val, double delta, int K, int M) {
    if (!omega_computable(gamma, B_val))
        throw std::domain_error("omega requires 0 < gamma*B < 1");
    const double num = std::log(delta / (4.0 * K * static_cast<double>(K) * M));
    const double den = std::log(1.0 - gamma * B_val);
    const long long w = static_cast<long long>(std::ceil(num / den));
    return w < 1 ? 1 : w;
}

long long zero_test_samples(double mu, double delta_prime) {
    if (!(delta_prime > 0.0 && delta_prime < 1.0))
        throw std::domain_error("zero_test_samples requires delta' in (0,1)");
    if (mu >= 1.0) return 1;
    if (!(mu > 0.0)) throw std::domain_error("zero_test_samples requires mu > 0");
    const long long n = static_cast<long long>(std::ceil(std::log(delta_prime) / std::log(1.0 - mu)));
    return n < 1 ? 1 : n;
}

bool capacity_known(long long n2, double mu_hat, double B_val,
                    double delta, int M, int K) {
    if (n2 < 1) return false;
    if (!(mu_hat > B_val)) return false;
    const double lhs = std::log(static_cast<double>(n2) * M * K * static_cast<double>(K) / delta) /
                       (mu_hat - B_val);
    return lhs <= static_cast<double>(n2);
}

int infer_capacity(const std::vector<bool>& all_zero_by_psi) {
    const int m = static_cast<int>(all_zero_by_psi.size());
    for (int psi = 1; psi <= m; ++psi) {
        if (all_zero_by_psi[static_cast<std::size_t>(psi - 1)]) return psi - 1;
    }
    return m; // capacity at least m
}

double variant_checkpoint_base(int M) {
    const double mm = static_cast<double>(M);
    return 4.0 * (2.0 * mm + 1.0) / (2.0 * mm - 1.0 > 0.0 ? 2.0 * mm - 1.0 : 1.0);
}

long long omega_prime(double B_val, double delta, int K, int M) {
    if (!(B_val > 0.0)) throw std::domain_error("omega_prime requires B > 0");
    const double num = std::log(4.0 * K * static_cast<double>(K) * M / delta);
    const long long w = static_cast<long long>(std::ceil(num / (B_val * B_val)));
    return w < 1 ? 1 : w;
}

std::vector<double> variant_checkpoints(double alpha_max, int M) {
    std::vector<double> out;
    const double base = variant_checkpoint_base(M);
    for (double v = base; v <= alpha_max; v *= base) out.push_back(v);
    return out;
}

// ------------------------------ EstimatorState -----------------------------

EstimatorState::EstimatorState(int K, int max_psi)
    : K_(K), max_psi_(max_psi),
      sums_(static_cast<std::size_t>(K) * static_cast<std::size_t>(max_psi), 0.0),
      counts_(static_cast<std::size_t>(K) * static_cast<std::size_t>(max_psi), 0) {}

std::size_t EstimatorState::idx(int arm, int psi) const {
    return static_cast<std::size_t>(arm - 1) * static_cast<std::size_t>(max_psi_) +
           static_cast<std::size_t>(psi - 1);
}

void EstimatorState::update(int arm, int psi, double reward) {
    sums_[idx(arm, psi)] += reward;
    counts_[idx(arm, psi)] += 1;
}

long long EstimatorState::count(int arm, int psi) const { return counts_[idx(arm, psi)]; }
double EstimatorState::sum(int arm, int psi) const { return sums_[idx(arm, psi)]; }

std::optional<double> EstimatorState::mean(int arm, int psi) const {
    const long long c = counts_[idx(arm, psi)];
    if (c == 0) return std::nullopt;
    return sums_[idx(arm, psi)] / static_cast<double>(c);
}

double EstimatorState::mean_or_zero(int arm, int psi) const {
    return mean(arm, psi).value_or(0.0);
}

EstimatorState::Snapshot EstimatorState::snapshot() const {
    return Snapshot{sums_, counts_};
}

std::optional<double> EstimatorState::mean_since(const Snapshot& s, int arm, int psi) const {
    const std::size_t i = idx(arm, psi);
    const long long c = counts_[i] - s.counts[i];
    if (c <= 0) return std::nullopt;
    return (sums_[i] - s.sums[i]) / static_cast<double>(c);
}

long long EstimatorState::count_since(const Snapshot& s, int arm, int psi) const {
    return counts_[idx(arm, psi)] - s.counts[idx(arm, psi)];
}

} // namespace mmabsax
