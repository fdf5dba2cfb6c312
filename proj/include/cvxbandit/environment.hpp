#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

#include "cvxbandit/policy_engine.hpp"
#include "cvxbandit/types.hpp"

namespace cvxbandit {

/// Deterministic random stream for one run.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    double uniform() { return uniform_(gen_); }
    double gaussian() { return normal_(gen_); }

private:
    std::mt19937_64 gen_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};
    std::normal_distribution<double> normal_{0.0, 1.0};
};

/// Ground truth of the simulated bandit.
struct BanditEnvironment {
    Vec theta_star;
    Mat gamma_star;  // one cost row per constraint
    Vec tau;
    double noise_scale = 0.0;

    int dim() const { return static_cast<int>(theta_star.size()); }
    int cost_dim() const { return static_cast<int>(gamma_star.rows()); }
};

struct Observation {
    double reward = 0.0;
    Vec cost;
};

/// Draws a support point with probability equal to its weight.
Vec sample_action(const Policy& policy, Rng& rng);

/// Noisy reward and cost at the played action. The reward noise is drawn
/// first, then the cost rows in order, so streams are reproducible.
Observation observe(const BanditEnvironment& env, const Vec& x, Rng& rng);

/// Expected-reward gap to the optimal policy mean, floored at -1e-9 to
/// absorb solver gap.
double regret_increment(const BanditEnvironment& env, const Vec& optimal_mean,
                        const Policy& policy);

/// True iff any true expected cost row exceeds its threshold by more than 1e-9.
bool violation_check(const BanditEnvironment& env, const Policy& policy);

struct LedgerRow {
    int t = 0;
    double optimal_value = 0.0;
    double policy_value = 0.0;
    double regret_increment = 0.0;
    double cumulative_regret = 0.0;
    Vec true_expected_cost;
    bool violation = false;
    StepBranch branch = StepBranch::SafeFallback;
};

/// Per-round record of the run; cumulative regret is maintained on append.
class RegretLedger {
public:
    explicit RegretLedger(int cost_dim) : cost_dim_(cost_dim) {}

    /// Appends a row; its cumulative_regret field is overwritten with the
    /// running sum.
    void append(LedgerRow row);

    const std::vector<LedgerRow>& rows() const { return rows_; }
    int cost_dim() const { return cost_dim_; }
    double cumulative_regret() const { return cumulative_; }
    int violation_count() const;

    void write_csv(std::ostream& out) const;
    static RegretLedger read_csv(std::istream& in);

private:
    int cost_dim_;
    std::vector<LedgerRow> rows_;
    double cumulative_ = 0.0;
};

/// Shortest decimal form that round-trips a double ("%.17g" when needed).
std::string format_double(double v);

} // namespace cvxbandit
