#include "cvxbandit/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <thread>

namespace cvxbandit {

namespace {

Vec vec_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty())
        throw ConfigError(what + ": expected a nonempty array of numbers");
    Vec v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ConfigError(what + ": expected numbers");
        v(static_cast<int>(i)) = j[i].get<double>();
    }
    return v;
}

Mat mat_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty())
        throw ConfigError(what + ": expected a nonempty array of rows");
    const Vec first = vec_from_json(j[0], what);
    Mat m(j.size(), first.size());
    m.row(0) = first.transpose();
    for (std::size_t i = 1; i < j.size(); ++i) {
        const Vec row = vec_from_json(j[i], what);
        if (row.size() != first.size()) throw ConfigError(what + ": ragged rows");
        m.row(static_cast<int>(i)) = row.transpose();
    }
    return m;
}

nlohmann::json vec_to_json(const Vec& v) {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < v.size(); ++i) j.push_back(v(i));
    return j;
}

nlohmann::json mat_to_json(const Mat& m) {
    nlohmann::json j = nlohmann::json::array();
    for (int i = 0; i < m.rows(); ++i) j.push_back(vec_to_json(m.row(i).transpose()));
    return j;
}

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& context) {
    for (const auto& item : j.items()) {
        bool known = false;
        for (const char* k : allowed)
            if (item.key() == k) { known = true; break; }
        if (!known) throw ConfigError(context + ": unknown key '" + item.key() + "'");
    }
}

const nlohmann::json& require_key(const nlohmann::json& j, const char* key,
                                  const std::string& context) {
    auto it = j.find(key);
    if (it == j.end()) throw ConfigError(context + ": missing key '" + std::string(key) + "'");
    return *it;
}

} // namespace

ConicPiece PieceSpec::to_conic_piece() const {
    switch (kind) {
    case Kind::Ball: return ConicPiece::ball(center, radius);
    case Kind::Box: return ConicPiece::box(lower, upper);
    case Kind::Polytope: return ConicPiece::polytope(A, b);
    case Kind::Point: return ConicPiece::point(location);
    }
    throw ConfigError("piece: bad kind");
}

PieceSpec PieceSpec::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("piece: expected an object");
    const std::string type = require_key(j, "type", "piece").get<std::string>();
    PieceSpec p;
    if (type == "ball") {
        reject_unknown_keys(j, {"type", "center", "radius"}, "ball piece");
        p.kind = Kind::Ball;
        p.center = vec_from_json(require_key(j, "center", "ball piece"), "ball center");
        p.radius = require_key(j, "radius", "ball piece").get<double>();
        if (p.radius < 0.0) throw ConfigError("ball piece: negative radius");
    } else if (type == "box") {
        reject_unknown_keys(j, {"type", "lower", "upper"}, "box piece");
        p.kind = Kind::Box;
        p.lower = vec_from_json(require_key(j, "lower", "box piece"), "box lower");
        p.upper = vec_from_json(require_key(j, "upper", "box piece"), "box upper");
    } else if (type == "polytope") {
        reject_unknown_keys(j, {"type", "A", "b"}, "polytope piece");
        p.kind = Kind::Polytope;
        p.A = mat_from_json(require_key(j, "A", "polytope piece"), "polytope A");
        p.b = vec_from_json(require_key(j, "b", "polytope piece"), "polytope b");
    } else if (type == "point") {
        reject_unknown_keys(j, {"type", "location"}, "point piece");
        p.kind = Kind::Point;
        p.location = vec_from_json(require_key(j, "location", "point piece"), "point location");
    } else {
        throw ConfigError("piece: unknown type '" + type + "'");
    }
    return p;
}

nlohmann::json PieceSpec::to_json() const {
    nlohmann::json j;
    switch (kind) {
    case Kind::Ball:
        j["type"] = "ball";
        j["center"] = vec_to_json(center);
        j["radius"] = radius;
        break;
    case Kind::Box:
        j["type"] = "box";
        j["lower"] = vec_to_json(lower);
        j["upper"] = vec_to_json(upper);
        break;
    case Kind::Polytope:
        j["type"] = "polytope";
        j["A"] = mat_to_json(A);
        j["b"] = vec_to_json(b);
        break;
    case Kind::Point:
        j["type"] = "point";
        j["location"] = vec_to_json(location);
        break;
    }
    return j;
}

const char* to_string(Algorithm a) {
    switch (a) {
    case Algorithm::L1Oplb: return "l1_oplb";
    case Algorithm::UbmOplb: return "ubm_oplb";
    case Algorithm::OracleOnly: return "oracle_only";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& s) {
    if (s == "l1_oplb") return Algorithm::L1Oplb;
    if (s == "ubm_oplb") return Algorithm::UbmOplb;
    if (s == "oracle_only") return Algorithm::OracleOnly;
    throw ConfigError("algorithm: expected l1_oplb, ubm_oplb or oracle_only, got '" + s + "'");
}

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    reject_unknown_keys(j,
                        {"decision_set", "safe_action", "theta_star", "gamma_star", "tau",
                         "algorithm", "horizon", "replicates", "master_seed", "lambda", "delta",
                         "noise_scale", "param_bound", "use_literal_gram_norm", "output_dir"},
                        "config");
    ExperimentConfig c;
    const auto& pieces = require_key(j, "decision_set", "config");
    if (!pieces.is_array() || pieces.empty())
        throw ConfigError("config: decision_set must be a nonempty array");
    for (const auto& pj : pieces) c.decision_set.push_back(PieceSpec::from_json(pj));
    c.safe_action = vec_from_json(require_key(j, "safe_action", "config"), "safe_action");
    c.theta_star = vec_from_json(require_key(j, "theta_star", "config"), "theta_star");
    c.gamma_star = mat_from_json(require_key(j, "gamma_star", "config"), "gamma_star");
    c.tau = vec_from_json(require_key(j, "tau", "config"), "tau");
    c.algorithm = parse_algorithm(require_key(j, "algorithm", "config").get<std::string>());
    c.horizon = require_key(j, "horizon", "config").get<int>();
    if (j.contains("replicates")) c.replicates = j["replicates"].get<int>();
    if (j.contains("master_seed")) c.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("lambda")) c.lambda = j["lambda"].get<double>();
    if (j.contains("delta")) c.delta = j["delta"].get<double>();
    if (j.contains("noise_scale")) c.noise_scale = j["noise_scale"].get<double>();
    if (j.contains("param_bound")) c.param_bound = j["param_bound"].get<double>();
    if (j.contains("use_literal_gram_norm"))
        c.use_literal_gram_norm = j["use_literal_gram_norm"].get<bool>();
    if (j.contains("output_dir")) c.output_dir = j["output_dir"].get<std::string>();
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config: parse error in " + path + ": " + e.what());
    }
    return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    j["decision_set"] = nlohmann::json::array();
    for (const PieceSpec& p : decision_set) j["decision_set"].push_back(p.to_json());
    j["safe_action"] = vec_to_json(safe_action);
    j["theta_star"] = vec_to_json(theta_star);
    j["gamma_star"] = mat_to_json(gamma_star);
    j["tau"] = vec_to_json(tau);
    j["algorithm"] = to_string(algorithm);
    j["horizon"] = horizon;
    j["replicates"] = replicates;
    j["master_seed"] = master_seed;
    j["lambda"] = lambda;
    j["delta"] = delta;
    j["noise_scale"] = noise_scale;
    j["param_bound"] = param_bound;
    j["use_literal_gram_norm"] = use_literal_gram_norm;
    j["output_dir"] = output_dir;
    return j;
}

void ExperimentConfig::validate() const {
    const int d = static_cast<int>(theta_star.size());
    const int m = static_cast<int>(gamma_star.rows());
    if (d <= 0) throw ConfigError("config: theta_star must be nonempty");
    if (decision_set.empty()) throw ConfigError("config: decision_set must be nonempty");
    if (safe_action.size() != d) throw ConfigError("config: safe_action dimension mismatch");
    if (gamma_star.cols() != d) throw ConfigError("config: gamma_star column count mismatch");
    if (tau.size() != m) throw ConfigError("config: tau size must match gamma_star rows");
    if (horizon < 1) throw ConfigError("config: horizon must be >= 1");
    if (replicates < 1) throw ConfigError("config: replicates must be >= 1");
    if (lambda <= 0.0) throw ConfigError("config: lambda must be positive");
    if (delta <= 0.0 || delta >= 1.0) throw ConfigError("config: delta must be in (0,1)");
    if (noise_scale < 0.0) throw ConfigError("config: noise_scale must be nonnegative");
    if (param_bound <= 0.0) throw ConfigError("config: param_bound must be positive");
    if (algorithm == Algorithm::UbmOplb && m != 1)
        throw ConfigError("config: ubm_oplb supports a single cost row");
    const Vec safe_cost = gamma_star * safe_action;
    for (int r = 0; r < m; ++r)
        if (safe_cost(r) >= tau(r))
            throw ConfigError("config: safe action must have cost strictly below tau");
    try {
        build_decision_set();
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: decision set invalid: ") + e.what());
    }
}

DecisionSet ExperimentConfig::build_decision_set() const {
    std::vector<ConicPiece> pieces;
    pieces.reserve(decision_set.size());
    for (const PieceSpec& p : decision_set) pieces.push_back(p.to_conic_piece());
    return DecisionSet(std::move(pieces), safe_action);
}

BanditEnvironment ExperimentConfig::build_environment() const {
    return BanditEnvironment{theta_star, gamma_star, tau, noise_scale};
}

namespace {

struct RunError : std::runtime_error {
    RunError(const std::string& msg, RunResult partial_result)
        : std::runtime_error(msg), partial(std::move(partial_result)) {}
    RunResult partial;
};

} // namespace

RunResult simulate_run(const ExperimentConfig& config, std::uint64_t seed) {
    const DecisionSet set = config.build_decision_set();
    const BanditEnvironment env = config.build_environment();
    const int d = env.dim();
    const int m = env.cost_dim();

    const Policy oracle = oracle_policy(config.theta_star, config.gamma_star, config.tau, set);
    const double optimal_value = config.theta_star.dot(oracle.mean);

    ConfidenceParams params;
    params.lambda = config.lambda;
    params.noise_scale = config.noise_scale;
    params.param_bound = config.param_bound;
    params.delta = config.delta;
    params.action_bound = set.radius_bound();
    params.tau = config.tau;
    params.safe_cost_level = 0.0;
    params.use_literal_gram_norm = config.use_literal_gram_norm;

    ConfidenceState state(d, m, params);
    Rng rng(seed);

    RunResult result;
    result.ledger = RegretLedger(m);
    result.summary.optimal_value = optimal_value;
    const double activity_tol = default_activity_tol(config.tau);
    double sampled_cum = 0.0;

    for (int t = 1; t <= config.horizon; ++t) {
        try {
            Policy policy;
            StepBranch branch;
            if (config.algorithm == Algorithm::OracleOnly) {
                policy = oracle;
                branch = StepBranch::Oracle;
            } else {
                const ConfidenceGeometry geom = state.geometry();
                const StepOutcome outcome = config.algorithm == Algorithm::L1Oplb
                                                ? l1_oplb_step(geom, set)
                                                : ubm_step(geom, set, activity_tol);
                policy = outcome.policy;
                branch = outcome.branch;
            }

            const Vec x = sample_action(policy, rng);
            const Observation obs = observe(env, x, rng);

            LedgerRow row;
            row.t = t;
            row.optimal_value = optimal_value;
            row.policy_value = env.theta_star.dot(policy.mean);
            row.regret_increment = regret_increment(env, oracle.mean, policy);
            row.true_expected_cost = env.gamma_star * policy.mean;
            row.violation = violation_check(env, policy);
            row.branch = branch;
            result.ledger.append(row);

            sampled_cum += optimal_value - env.theta_star.dot(x);
            TrajectoryRow traj;
            traj.t = t;
            traj.branch = branch;
            traj.action = x;
            traj.reward = obs.reward;
            traj.cost = obs.cost;
            traj.policy_mean = policy.mean;
            traj.sampled_regret_cum = sampled_cum;
            traj.support = policy.support;
            result.trajectory.push_back(std::move(traj));

            result.summary.branch_counts[to_string(branch)] += 1;
            if (config.algorithm != Algorithm::OracleOnly)
                state.update(x, obs.reward, obs.cost);
        } catch (const std::exception& e) {
            result.summary.final_cumulative_regret = result.ledger.cumulative_regret();
            result.summary.violation_count = result.ledger.violation_count();
            throw RunError("round " + std::to_string(t) + ": " + e.what(), std::move(result));
        }
    }

    result.summary.final_cumulative_regret = result.ledger.cumulative_regret();
    result.summary.violation_count = result.ledger.violation_count();
    return result;
}

void write_trajectory_csv(std::ostream& out, const std::vector<TrajectoryRow>& rows,
                          int dim, int cost_dim) {
    out << "t,branch";
    for (int i = 0; i < dim; ++i) out << ",x_" << (i + 1);
    out << ",reward";
    for (int r = 0; r < cost_dim; ++r) out << ",cost_" << (r + 1);
    for (int i = 0; i < dim; ++i) out << ",mean_" << (i + 1);
    out << ",sampled_regret_cum,support\n";
    for (const TrajectoryRow& row : rows) {
        out << row.t << ',' << to_string(row.branch);
        for (int i = 0; i < dim; ++i) out << ',' << format_double(row.action(i));
        out << ',' << format_double(row.reward);
        for (int r = 0; r < cost_dim; ++r) out << ',' << format_double(row.cost(r));
        for (int i = 0; i < dim; ++i) out << ',' << format_double(row.policy_mean(i));
        out << ',' << format_double(row.sampled_regret_cum) << ',';
        for (std::size_t s = 0; s < row.support.size(); ++s) {
            if (s) out << ';';
            for (int i = 0; i < dim; ++i) out << format_double(row.support[s].point(i)) << ' ';
            out << format_double(row.support[s].weight);
        }
        out << '\n';
    }
}

std::vector<TrajectoryRow> read_trajectory_csv(std::istream& in, int dim, int cost_dim) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("trajectory csv: empty stream");
    std::vector<TrajectoryRow> rows;
    const int base = 2 + dim + 1 + cost_dim + dim + 1;  // columns before support
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string field;
        std::istringstream ss(line);
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (static_cast<int>(f.size()) == base) f.emplace_back();  // empty support field
        if (static_cast<int>(f.size()) != base + 1)
            throw std::runtime_error("trajectory csv: bad row width");
        TrajectoryRow row;
        row.t = std::atoi(f[0].c_str());
        if (f[1] == "l1") row.branch = StepBranch::L1;
        else if (f[1] == "ubm_exact") row.branch = StepBranch::UbmExact;
        else if (f[1] == "safe_fallback") row.branch = StepBranch::SafeFallback;
        else if (f[1] == "oracle") row.branch = StepBranch::Oracle;
        else throw std::runtime_error("trajectory csv: unknown branch");
        row.action = Vec(dim);
        for (int i = 0; i < dim; ++i) row.action(i) = std::strtod(f[2 + i].c_str(), nullptr);
        row.reward = std::strtod(f[2 + dim].c_str(), nullptr);
        row.cost = Vec(cost_dim);
        for (int r = 0; r < cost_dim; ++r)
            row.cost(r) = std::strtod(f[3 + dim + r].c_str(), nullptr);
        row.policy_mean = Vec(dim);
        for (int i = 0; i < dim; ++i)
            row.policy_mean(i) = std::strtod(f[3 + dim + cost_dim + i].c_str(), nullptr);
        row.sampled_regret_cum = std::strtod(f[3 + 2 * dim + cost_dim].c_str(), nullptr);
        std::istringstream sup(f[base]);
        std::string entry;
        while (std::getline(sup, entry, ';')) {
            std::istringstream es(entry);
            WeightedPoint wp;
            wp.point = Vec(dim);
            for (int i = 0; i < dim; ++i) es >> wp.point(i);
            es >> wp.weight;
            row.support.push_back(std::move(wp));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

namespace {

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << content;
}

nlohmann::json summary_to_json(const RunSummary& s) {
    nlohmann::json j;
    j["optimal_value"] = s.optimal_value;
    j["final_cumulative_regret"] = s.final_cumulative_regret;
    j["violation_count"] = s.violation_count;
    j["branch_counts"] = nlohmann::json::object();
    for (const auto& [k, v] : s.branch_counts) j["branch_counts"][k] = v;
    return j;
}

RunArtifacts write_run_artifacts(const ExperimentConfig& config, const RunResult& result) {
    namespace fs = std::filesystem;
    fs::create_directories(config.output_dir);
    const int d = static_cast<int>(config.theta_star.size());
    const int m = static_cast<int>(config.gamma_star.rows());

    RunArtifacts art;
    art.summary = result.summary;
    art.ledger_csv = (fs::path(config.output_dir) / "ledger.csv").string();
    art.trajectory_csv = (fs::path(config.output_dir) / "trajectory.csv").string();
    art.summary_json = (fs::path(config.output_dir) / "summary.json").string();
    art.config_json = (fs::path(config.output_dir) / "resolved_config.json").string();

    {
        std::ostringstream ss;
        result.ledger.write_csv(ss);
        write_text_file(art.ledger_csv, ss.str());
    }
    {
        std::ostringstream ss;
        write_trajectory_csv(ss, result.trajectory, d, m);
        write_text_file(art.trajectory_csv, ss.str());
    }
    write_text_file(art.summary_json, summary_to_json(result.summary).dump(2) + "\n");
    write_text_file(art.config_json, config.to_json().dump(2) + "\n");
    return art;
}

} // namespace

RunArtifacts run_experiment(const ExperimentConfig& config) {
    config.validate();
    try {
        const RunResult result = simulate_run(config, config.master_seed);
        return write_run_artifacts(config, result);
    } catch (const RunError& e) {
        // flush whatever completed before the failing round, then surface it
        write_run_artifacts(config, e.partial);
        throw std::runtime_error(e.what());
    }
}

double interpolated_quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("interpolated_quantile: empty sample");
    std::sort(values.begin(), values.end());
    const double rank = q * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    if (lo + 1 >= values.size()) return values.back();
    const double frac = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[lo + 1] * frac;
}

AggregateResult replicate_experiment(const ExperimentConfig& config, int workers) {
    config.validate();
    const int n = config.replicates;
    const int horizon = config.horizon;

    struct Reduced {
        std::vector<double> cum;
        int violations = 0;
    };
    std::vector<std::optional<Reduced>> results(n);
    std::vector<std::string> errors(n);
    std::atomic<int> next{0};

    auto worker_body = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                const RunResult run = simulate_run(config, config.master_seed ^
                                                               static_cast<std::uint64_t>(i));
                Reduced red;
                red.cum.reserve(horizon);
                for (const LedgerRow& row : run.ledger.rows())
                    red.cum.push_back(row.cumulative_regret);
                red.violations = run.summary.violation_count;
                results[i] = std::move(red);
            } catch (const std::exception& e) {
                errors[i] = std::string("run ") + std::to_string(i) + ": " + e.what();
            }
        }
    };

    int pool = workers;
    if (pool <= 0) {
        const unsigned hw = std::thread::hardware_concurrency();
        pool = hw == 0 ? 1 : static_cast<int>(hw);
    }
    pool = std::min(pool, n);
    if (pool <= 1) {
        worker_body();
    } else {
        std::vector<std::thread> threads;
        threads.reserve(pool);
        for (int w = 0; w < pool; ++w) threads.emplace_back(worker_body);
        for (std::thread& th : threads) th.join();
    }

    for (int i = 0; i < n; ++i)
        if (!errors[i].empty()) throw std::runtime_error(errors[i]);

    AggregateResult agg;
    agg.replicates = n;
    agg.mean_curve.assign(horizon, 0.0);
    agg.p10_curve.resize(horizon);
    agg.p90_curve.resize(horizon);
    agg.terminal_regret.resize(n);
    agg.violation_counts.resize(n);

    // index-ordered fold: identical output regardless of thread scheduling
    for (int i = 0; i < n; ++i) {
        const Reduced& red = *results[i];
        for (int t = 0; t < horizon; ++t) agg.mean_curve[t] += red.cum[t];
        agg.terminal_regret[i] = red.cum.back();
        agg.violation_counts[i] = red.violations;
    }
    for (int t = 0; t < horizon; ++t) agg.mean_curve[t] /= n;

    std::vector<double> column(n);
    for (int t = 0; t < horizon; ++t) {
        for (int i = 0; i < n; ++i) column[i] = (*results[i]).cum[t];
        agg.p10_curve[t] = interpolated_quantile(column, 0.10);
        agg.p90_curve[t] = interpolated_quantile(column, 0.90);
    }

    double terminal_sum = 0.0;
    double terminal_max = 0.0;
    int zero_violation_runs = 0;
    for (int i = 0; i < n; ++i) {
        terminal_sum += agg.terminal_regret[i];
        terminal_max = std::max(terminal_max, agg.terminal_regret[i]);
        if (agg.violation_counts[i] == 0) ++zero_violation_runs;
    }
    agg.mean_terminal_regret = terminal_sum / n;
    agg.zero_violation_fraction = static_cast<double>(zero_violation_runs) / n;

    const int bins = 40;
    agg.histogram_counts.assign(bins, 0);
    agg.histogram_edges.resize(bins + 1);
    const double width = terminal_max > 0.0 ? terminal_max / bins : 1.0;
    for (int b = 0; b <= bins; ++b) agg.histogram_edges[b] = b * width;
    for (int i = 0; i < n; ++i) {
        int b = static_cast<int>(std::floor(agg.terminal_regret[i] / width));
        b = std::clamp(b, 0, bins - 1);
        agg.histogram_counts[b] += 1;
    }
    return agg;
}

AggregateArtifacts replicate_and_write(const ExperimentConfig& config, int workers) {
    namespace fs = std::filesystem;
    AggregateArtifacts art;
    art.result = replicate_experiment(config, workers);
    fs::create_directories(config.output_dir);
    art.aggregate_csv = (fs::path(config.output_dir) / "aggregate_regret.csv").string();
    art.histogram_csv = (fs::path(config.output_dir) / "terminal_histogram.csv").string();
    art.summary_json = (fs::path(config.output_dir) / "summary.json").string();
    art.config_json = (fs::path(config.output_dir) / "resolved_config.json").string();

    {
        std::ostringstream ss;
        ss << "t,mean_cumulative_regret,p10,p90\n";
        for (int t = 0; t < config.horizon; ++t)
            ss << (t + 1) << ',' << format_double(art.result.mean_curve[t]) << ','
               << format_double(art.result.p10_curve[t]) << ','
               << format_double(art.result.p90_curve[t]) << '\n';
        write_text_file(art.aggregate_csv, ss.str());
    }
    {
        std::ostringstream ss;
        ss << "bin_low,bin_high,count\n";
        for (std::size_t b = 0; b < art.result.histogram_counts.size(); ++b)
            ss << format_double(art.result.histogram_edges[b]) << ','
               << format_double(art.result.histogram_edges[b + 1]) << ','
               << art.result.histogram_counts[b] << '\n';
        write_text_file(art.histogram_csv, ss.str());
    }
    {
        int runs_with_violations = 0;
        for (int v : art.result.violation_counts)
            if (v > 0) ++runs_with_violations;
        nlohmann::json j;
        j["replicates"] = art.result.replicates;
        j["mean_terminal_regret"] = art.result.mean_terminal_regret;
        j["zero_violation_fraction"] = art.result.zero_violation_fraction;
        j["runs_with_violations"] = runs_with_violations;
        write_text_file(art.summary_json, j.dump(2) + "\n");
    }
    write_text_file(art.config_json, config.to_json().dump(2) + "\n");
    return art;
}

} // namespace cvxbandit
