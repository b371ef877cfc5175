#pragma once
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

namespace mmabsax {

// ---------------------------------------------------------------------------
// Confidence machinery: radii, checkpoints, duration functions, trigger and
// capacity predicates, and the per-player mean estimator.
// ---------------------------------------------------------------------------

struct ConfidenceParams {
    double delta = 0.01;
    int M = 1;
    int K = 1;
    double h = 5.0;              // inflation factor (5 hard, 2M variant)
    double checkpoint_base = 9.0;

    static ConfidenceParams hard(double delta, int M, int K);
    // Aggregate-feedback variant: h = 2M (M = 1 degenerates to 5 so h > 2
    // always holds), checkpoint base 4(2M+1)/(2M-1).
    static ConfidenceParams variant(double delta, int M, int K);
};

// g(n) = ln(4 n^2 M K / delta), natural log.
double g_value(long long n, const ConfidenceParams& p);

// B(n) = sqrt(2 g(n)/n); B(0) = +infinity (untouched arms never trigger).
double B_value(long long n, const ConfidenceParams& p);

// Largest power base^a <= x (a integer >= 0). Throws std::domain_error for x < 1.
double base_floor(double x, double base);

// Internal-friendly variant: returns 0 for x < 1 instead of throwing.
double base_floor_or_zero(double x, double base);

// n/g(n), the quantity whose base-floor crossings define the checkpoint set.
// Equals 2/B(n)^2. Zero for n <= 0.
double clock_value(long long n, const ConfidenceParams& p);

// True iff the base-floor of n/g(n) strictly increased between the two
// session-boundary counter values.
bool is_checkpoint(long long n_prev, long long n_curr, const ConfidenceParams& p);

// mu_hat - h*B(n) >= 0
bool inflated_trigger(double mu_hat, long long n, const ConfidenceParams& p);

// ceil( ln(delta / 4K^2M) / ln(1 - gamma*B) ). Requires gamma*B_val < 1.
// Always >= 1. Throws std::domain_error when gamma*B_val >= 1.
long long omega(double gamma, double B_val, double delta, int K, int M);
bool omega_computable(double gamma, double B_val);

// Smallest n with (1-mu)^n <= delta_prime; mu = 1 returns 1; mu <= 0 throws.
long long zero_test_samples(double mu, double delta_prime);

// Capacity-knowledge predicate: ln(n2*M*K^2/delta) / (mu_hat - B_val) <= n2.
// False whenever mu_hat <= B_val (not yet testable).
bool capacity_known(long long n2, double mu_hat, double B_val,
                    double delta, int M, int K);

// First index psi (1-based) with all_zero_by_psi[psi-1] true, minus one;
// m marker when none qualifies. Flags must have one entry per group size 1..m.
int infer_capacity(const std::vector<bool>& all_zero_by_psi);

// Variant checkpoint base 4(2M+1)/(2M-1).
double variant_checkpoint_base(int M);

// Variant bit duration: ceil( ln(4K^2M/delta) / B_val^2 ) — the magnitude of
// the printed formula, which is negative as written.
long long omega_prime(double B_val, double delta, int K, int M);

// Checkpoint values below horizon for the variant base (diagnostic helper).
std::vector<double> variant_checkpoints(double alpha_max, int M);

// ---------------------------------------------------------------------------
// Estimator state: running mean per (arm, group size), full-group pulls only,
// with snapshot/diff support for windowed estimates mu_hat[s1, s2].
// ---------------------------------------------------------------------------

class EstimatorState {
public:
    EstimatorState() = default;
    EstimatorState(int K, int max_psi);

    void update(int arm, int psi, double reward);
    long long count(int arm, int psi) const;
    double sum(int arm, int psi) const;
    // Mean, or nullopt when no samples.
    std::optional<double> mean(int arm, int psi) const;
    // Mean with 0 fallback (convenient for comparisons that guard on count).
    double mean_or_zero(int arm, int psi) const;

    struct Snapshot {
        std::vector<double> sums;
        std::vector<long long> counts;
    };
    Snapshot snapshot() const;
    // Windowed estimate between an old snapshot and now.
    std::optional<double> mean_since(const Snapshot& s, int arm, int psi) const;
    long long count_since(const Snapshot& s, int arm, int psi) const;

    int arms() const { return K_; }
    int max_psi() const { return max_psi_; }

private:
    int K_ = 0;
    int max_psi_ = 0;
    std::vector<double> sums_;
    std::vector<long long> counts_;
    std::size_t idx(int arm, int psi) const;
};

} // namespace mmabsax
