#include "cvxbandit/environment.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace cvxbandit {

Vec sample_action(const Policy& policy, Rng& rng) {
    if (policy.support.empty())
        throw std::invalid_argument("sample_action: empty policy");
    const double u = rng.uniform();
    double acc = 0.0;
    for (const WeightedPoint& wp : policy.support) {
        acc += wp.weight;
        if (u < acc) return wp.point;
    }
    return policy.support.back().point;
}

Observation observe(const BanditEnvironment& env, const Vec& x, Rng& rng) {
    Observation obs;
    obs.reward = env.theta_star.dot(x) + env.noise_scale * rng.gaussian();
    obs.cost = env.gamma_star * x;
    for (int r = 0; r < obs.cost.size(); ++r)
        obs.cost(r) += env.noise_scale * rng.gaussian();
    return obs;
}

double regret_increment(const BanditEnvironment& env, const Vec& optimal_mean,
                        const Policy& policy) {
    const double gap = env.theta_star.dot(optimal_mean) - env.theta_star.dot(policy.mean);
    return std::max(gap, -1e-9);
}

bool violation_check(const BanditEnvironment& env, const Policy& policy) {
    const Vec cost = env.gamma_star * policy.mean;
    for (int r = 0; r < cost.size(); ++r)
        if (cost(r) > env.tau(r) + 1e-9) return true;
    return false;
}

void RegretLedger::append(LedgerRow row) {
    if (row.true_expected_cost.size() != cost_dim_)
        throw std::invalid_argument("RegretLedger::append: cost size mismatch");
    cumulative_ += row.regret_increment;
    row.cumulative_regret = cumulative_;
    rows_.push_back(std::move(row));
}

int RegretLedger::violation_count() const {
    int n = 0;
    for (const LedgerRow& row : rows_) n += row.violation ? 1 : 0;
    return n;
}

std::string format_double(double v) {
    char buf[40];
    for (int prec = 15; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

void RegretLedger::write_csv(std::ostream& out) const {
    out << "t,optimal_value,policy_value,regret_increment,cumulative_regret";
    for (int r = 0; r < cost_dim_; ++r) out << ",cost_" << (r + 1);
    out << ",violation,branch\n";
    for (const LedgerRow& row : rows_) {
        out << row.t << ',' << format_double(row.optimal_value) << ','
            << format_double(row.policy_value) << ',' << format_double(row.regret_increment)
            << ',' << format_double(row.cumulative_regret);
        for (int r = 0; r < cost_dim_; ++r) out << ',' << format_double(row.true_expected_cost(r));
        out << ',' << (row.violation ? 1 : 0) << ',' << to_string(row.branch) << '\n';
    }
}

namespace {

std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

StepBranch parse_branch(const std::string& s) {
    if (s == "l1") return StepBranch::L1;
    if (s == "ubm_exact") return StepBranch::UbmExact;
    if (s == "safe_fallback") return StepBranch::SafeFallback;
    if (s == "oracle") return StepBranch::Oracle;
    throw std::runtime_error("ledger csv: unknown branch '" + s + "'");
}

} // namespace

RegretLedger RegretLedger::read_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("ledger csv: empty stream");
    const auto header = split_line(line);
    if (header.size() < 7 || header[0] != "t")
        throw std::runtime_error("ledger csv: bad header");
    const int cost_dim = static_cast<int>(header.size()) - 7;
    if (cost_dim < 1) throw std::runtime_error("ledger csv: no cost columns");

    RegretLedger ledger(cost_dim);
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto f = split_line(line);
        if (static_cast<int>(f.size()) != 7 + cost_dim)
            throw std::runtime_error("ledger csv: bad row width");
        LedgerRow row;
        row.t = std::atoi(f[0].c_str());
        row.optimal_value = std::strtod(f[1].c_str(), nullptr);
        row.policy_value = std::strtod(f[2].c_str(), nullptr);
        row.regret_increment = std::strtod(f[3].c_str(), nullptr);
        row.true_expected_cost = Vec(cost_dim);
        for (int r = 0; r < cost_dim; ++r)
            row.true_expected_cost(r) = std::strtod(f[5 + r].c_str(), nullptr);
        row.violation = f[5 + cost_dim] == "1";
        row.branch = parse_branch(f[6 + cost_dim]);
        ledger.append(row);
        // append recomputes the running sum; a mismatch with the stored
        // column means the file was not produced by write_csv
        if (ledger.rows().back().cumulative_regret != std::strtod(f[4].c_str(), nullptr))
            throw std::runtime_error("ledger csv: cumulative regret column inconsistent");
    }
    return ledger;
}

} // namespace cvxbandit
