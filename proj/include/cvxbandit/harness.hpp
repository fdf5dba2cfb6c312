#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cvxbandit/decision_set.hpp"
#include "cvxbandit/environment.hpp"
#include "cvxbandit/policy_engine.hpp"
#include "cvxbandit/types.hpp"

namespace cvxbandit {

/// Invalid or inconsistent configuration; maps to CLI exit code 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// One decision-set piece as configured (kept symbolic so plots can draw
/// outlines without reverse-engineering cone blocks).
struct PieceSpec {
    enum class Kind { Ball, Box, Polytope, Point };
    Kind kind = Kind::Ball;
    Vec center;       // ball
    double radius = 0.0;
    Vec lower, upper; // box
    Mat A;            // polytope rows A z <= b
    Vec b;
    Vec location;     // point

    ConicPiece to_conic_piece() const;
    static PieceSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
};

enum class Algorithm { L1Oplb, UbmOplb, OracleOnly };
const char* to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& s);

struct ExperimentConfig {
    std::vector<PieceSpec> decision_set;
    Vec safe_action;
    Vec theta_star;
    Mat gamma_star;
    Vec tau;
    Algorithm algorithm = Algorithm::L1Oplb;
    int horizon = 1;
    int replicates = 1;
    std::uint64_t master_seed = 0;
    double lambda = 1.0;
    double delta = 0.05;
    double noise_scale = 0.1;
    double param_bound = 1.0;
    bool use_literal_gram_norm = false;
    std::string output_dir = "out";

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    nlohmann::json to_json() const;

    /// Rejects violated invariants (dimensions, ranges, safe-action margin).
    void validate() const;
    DecisionSet build_decision_set() const;
    BanditEnvironment build_environment() const;
};

struct TrajectoryRow {
    int t = 0;
    StepBranch branch = StepBranch::SafeFallback;
    Vec action;
    double reward = 0.0;
    Vec cost;
    Vec policy_mean;
    double sampled_regret_cum = 0.0;
    std::vector<WeightedPoint> support;
};

struct RunSummary {
    double optimal_value = 0.0;
    double final_cumulative_regret = 0.0;
    int violation_count = 0;
    std::map<std::string, int> branch_counts;
};

struct RunResult {
    RegretLedger ledger{1};
    std::vector<TrajectoryRow> trajectory;
    RunSummary summary;
};

/// One full bandit loop with the given seed; no file output.
RunResult simulate_run(const ExperimentConfig& config, std::uint64_t seed);

struct RunArtifacts {
    std::string ledger_csv;
    std::string trajectory_csv;
    std::string summary_json;
    std::string config_json;
    RunSummary summary;
};

/// Runs once with the master seed and writes ledger.csv, trajectory.csv,
/// summary.json and resolved_config.json under config.output_dir.
RunArtifacts run_experiment(const ExperimentConfig& config);

struct AggregateResult {
    int replicates = 0;
    std::vector<double> mean_curve;  // per round, cumulative regret
    std::vector<double> p10_curve;
    std::vector<double> p90_curve;
    std::vector<double> terminal_regret;       // per run, in run-index order
    std::vector<int> violation_counts;         // per run
    std::vector<double> histogram_edges;       // 41 edges for 40 bins
    std::vector<int> histogram_counts;
    double mean_terminal_regret = 0.0;
    double zero_violation_fraction = 0.0;
};

/// Runs config.replicates seeded runs (seed_i = master_seed xor i) on a
/// small worker pool; aggregation is a fold in run-index order so thread
/// scheduling cannot change the output.
AggregateResult replicate_experiment(const ExperimentConfig& config, int workers = 0);

/// Writes aggregate_regret.csv, terminal_histogram.csv and summary.json
/// under config.output_dir, plus resolved_config.json.
struct AggregateArtifacts {
    std::string aggregate_csv;
    std::string histogram_csv;
    std::string summary_json;
    std::string config_json;
    AggregateResult result;
};
AggregateArtifacts replicate_and_write(const ExperimentConfig& config, int workers = 0);

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows,
                          int dim, int cost_dim);
std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in, int dim, int cost_dim);

/// Quantile with linear interpolation on the sorted sample (q in [0,1]).
double interpolated_quantile(std::vector<double> values, double q);

/// Renders trajectory.svg and regret.svg for a single-run artifact
/// directory, or regret.svg and histogram.svg for an aggregate one.
/// Returns the paths written.
std::vector<std::string> emit_plots(const std::string& artifact_dir);

} // namespace cvxbandit
