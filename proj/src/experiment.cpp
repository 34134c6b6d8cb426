#include "mgme/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>
#include <tuple>

#include "mgme/error.hpp"
#include "mgme/policies.hpp"

namespace mgme {

namespace {

constexpr std::uint64_t kInstanceTag = 0x494e5354ULL;
constexpr std::uint64_t kRunTag = 0x52554eULL;

std::uint64_t run_seed(std::uint64_t master, std::int64_t horizon, int trial) {
    return mix_seed(mix_seed(master ^ kRunTag) ^ mix_seed(static_cast<std::uint64_t>(horizon)) ^
                    mix_seed(0x9e3779b97f4a7c15ULL + static_cast<std::uint64_t>(trial)));
}

struct ContextualInstance {
    std::vector<Eigen::VectorXd> betas;
    std::vector<ArmSpec> noise;
};

ContextualInstance draw_contextual(const ContextualSetup& s, std::uint64_t master, int trial) {
    auto rng = make_stream(master, {kInstanceTag, static_cast<std::uint64_t>(trial)});
    std::uniform_real_distribution<double> beta(s.beta_lo, s.beta_hi);
    std::uniform_real_distribution<double> var(s.var_lo, s.var_hi);
    ContextualInstance inst;
    for (int k = 0; k < s.arms; ++k) {
        Eigen::VectorXd b(s.dimension);
        for (int j = 0; j < s.dimension; ++j) b[j] = beta(rng);
        inst.betas.push_back(std::move(b));
        inst.noise.push_back(ArmSpec::gaussian(0.0, var(rng)));
    }
    return inst;
}

double effective_proxy(const ExperimentConfig& cfg, const std::vector<double>& variances) {
    if (cfg.proxy) return *cfg.proxy;
    return *std::max_element(variances.begin(), variances.end());
}

PolicyConfig policy_config(const ExperimentConfig& cfg, std::int64_t horizon,
                           const std::vector<double>& variances) {
    PolicyConfig pc;
    pc.horizon = horizon;
    pc.norm = cfg.norm;
    pc.regime = NoiseRegime{cfg.regime, effective_proxy(cfg, variances)};
    pc.lower_bound = cfg.lower_bound;
    pc.phase3_ucb_mode = cfg.phase3_ucb_mode;
    pc.batch_growth = cfg.batch_growth;
    pc.lcb_margin = cfg.lcb_margin;
    pc.tail_form = cfg.tail_form;
    if (cfg.contextual) pc.context_lambda_min = ContextSpec::uniform_hypercube(cfg.contextual->dimension).lambda_min;
    return pc;
}

TrialResult run_one(const ExperimentConfig& cfg, std::int64_t horizon, int trial) {
    TrialResult r;
    r.horizon = horizon;
    r.trial = trial;
    r.seed = run_seed(cfg.seed, horizon, trial);

    const auto start = std::chrono::steady_clock::now();
    PolicyTrace trace;
    std::vector<double> variances;
    if (cfg.policy == PolicyKind::Contextual) {
        auto inst = draw_contextual(*cfg.contextual, cfg.seed, trial);
        for (const auto& a : inst.noise) variances.push_back(a.variance);
        const auto pc = policy_config(cfg, horizon, variances);
        LinearContextualEnvironment env(std::move(inst.betas), std::move(inst.noise),
                                        ContextSpec::uniform_hypercube(cfg.contextual->dimension), r.seed);
        trace = run_contextual(pc, env);
    } else {
        for (const auto& a : cfg.arms) variances.push_back(a.variance);
        const auto pc = policy_config(cfg, horizon, variances);
        ArmEnvironment env(cfg.arms, r.seed);
        trace = cfg.policy == PolicyKind::NonAdaptive ? run_nonadaptive(pc, env) : run_adaptive(pc, env);
    }
    const auto stop = std::chrono::steady_clock::now();

    r.arms = static_cast<int>(variances.size());
    r.regret = trace.realized_regret;
    r.objective = trace.realized_objective;
    r.optimal_objective = trace.optimal_objective;
    r.good_event = trace.good_event_held;
    r.runtime_ms = cfg.record_timing ? std::chrono::duration<double, std::milli>(stop - start).count() : 0.0;

    const auto profile = bound_profile(cfg, variances);
    const auto extras = bound_extras(cfg);
    for (auto curve : cfg.bounds) r.bound_values.push_back(bound_value(curve, profile, cfg.norm, horizon, extras));
    return r;
}

std::string p_label(const NormOrder& p) { return p.is_infinite() ? "inf" : format_real(p.p()); }

// Linear interpolation between order statistics.
double quantile(std::vector<double> xs, double level) {
    std::sort(xs.begin(), xs.end());
    const double pos = level * static_cast<double>(xs.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, xs.size() - 1);
    return xs[lo] + (pos - static_cast<double>(lo)) * (xs[hi] - xs[lo]);
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ',')) out.push_back(cell);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string_view policy_name(PolicyKind kind) {
    switch (kind) {
    case PolicyKind::NonAdaptive: return "nonadaptive";
    case PolicyKind::Adaptive: return "adaptive";
    case PolicyKind::Contextual: return "contextual";
    }
    return "unknown";
}

std::string_view regime_name(NoiseKind kind) {
    switch (kind) {
    case NoiseKind::GSG: return "gsg";
    case NoiseKind::SSG: return "ssg";
    case NoiseKind::GaussianExact: return "gaussian";
    }
    return "unknown";
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.horizons.empty()) throw ConfigError("no horizons configured");
    if (!std::is_sorted(cfg.horizons.begin(), cfg.horizons.end()))
        throw ConfigError("horizons must be sorted ascending");
    if (cfg.trials < 1) throw ConfigError("trials must be at least 1");
    if (cfg.workers < 1) throw ConfigError("workers must be at least 1");
    if (cfg.proxy && !(*cfg.proxy > 0.0)) throw ConfigError("proxy must be positive");
    if (cfg.policy == PolicyKind::Contextual) {
        if (!cfg.contextual) throw ConfigError("contextual policy needs a [contextual] section");
        if (cfg.norm.p() != 1.0) throw ConfigError("contextual policy requires p = 1");
        const auto& s = *cfg.contextual;
        if (s.arms < 1 || s.dimension < 1) throw ConfigError("contextual arms and dimension must be positive");
        if (!(s.beta_lo <= s.beta_hi)) throw ConfigError("beta range is empty");
        if (!(s.var_lo > 0.0 && s.var_lo <= s.var_hi)) throw ConfigError("noise variance range must be positive");
        if (cfg.proxy && *cfg.proxy < s.var_hi) throw ConfigError("proxy must cover the noise variance range");
        if (cfg.lower_bound && *cfg.lower_bound > s.var_lo)
            throw ConfigError("lower bound exceeds the noise variance range");
    } else {
        if (cfg.arms.empty()) throw ConfigError("no arms configured");
        std::vector<double> v;
        for (const auto& a : cfg.arms) {
            validate(a);
            v.push_back(a.variance);
        }
        validate(bound_profile(cfg, v));
        if (cfg.policy == PolicyKind::NonAdaptive && !cfg.lower_bound)
            throw ConfigError("the non-adaptive policy needs lower_bound");
    }
    const auto k = static_cast<std::int64_t>(cfg.policy == PolicyKind::Contextual ? cfg.contextual->arms
                                                                                   : cfg.arms.size());
    if (cfg.horizons.front() < 2 * k) throw ConfigError("every horizon must be at least 2K");
}

std::vector<double> instance_variances(const ExperimentConfig& cfg, int trial) {
    std::vector<double> v;
    if (cfg.policy == PolicyKind::Contextual) {
        for (const auto& a : draw_contextual(*cfg.contextual, cfg.seed, trial).noise) v.push_back(a.variance);
    } else {
        for (const auto& a : cfg.arms) v.push_back(a.variance);
    }
    return v;
}

VarianceProfile bound_profile(const ExperimentConfig& cfg, const std::vector<double>& variances) {
    return VarianceProfile{variances, cfg.lower_bound, effective_proxy(cfg, variances)};
}

BoundExtras bound_extras(const ExperimentConfig& cfg) {
    BoundExtras e;
    if (cfg.contextual) {
        e.dimension = cfg.contextual->dimension;
        e.context_lambda_min = ContextSpec::uniform_hypercube(cfg.contextual->dimension).lambda_min;
    }
    return e;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    validate(cfg);
    std::vector<std::pair<std::int64_t, int>> jobs;
    for (auto t : cfg.horizons)
        for (int i = 0; i < cfg.trials; ++i) jobs.emplace_back(t, i);

    ExperimentResult result{cfg, std::vector<TrialResult>(jobs.size())};
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto worker = [&] {
        for (std::size_t j = next++; j < jobs.size(); j = next++) {
            try {
                result.trials[j] = run_one(cfg, jobs[j].first, jobs[j].second);
            } catch (...) {
                std::lock_guard lock(failure_mu);
                if (!failure) failure = std::current_exception();
                next = jobs.size();
            }
        }
    };
    const auto n_workers = std::min<std::size_t>(static_cast<std::size_t>(cfg.workers), jobs.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (failure) std::rethrow_exception(failure);
    return result;
}

void write_csv(std::ostream& out, const ExperimentResult& result) {
    const auto& cfg = result.config;
    out << kCsvHeader << '\n';
    const std::string prefix = cfg.name + ',' + std::string(policy_name(cfg.policy)) + ',' +
                               std::string(regime_name(cfg.regime)) + ',' + p_label(cfg.norm) + ',';
    for (const auto& r : result.trials) {
        const std::string head = prefix + std::to_string(r.arms) + ',' + std::to_string(r.horizon) + ',' +
                                 std::to_string(r.trial) + ',' + std::to_string(r.seed) + ',' +
                                 format_real(r.regret) + ',' + format_real(r.objective) + ',' +
                                 format_real(r.optimal_objective) + ',';
        const std::string tail = std::string(",") + (r.good_event ? "1" : "0") + ',' + format_real(r.runtime_ms);
        if (cfg.bounds.empty()) {
            out << head << ',' << tail << '\n';
            continue;
        }
        for (std::size_t b = 0; b < cfg.bounds.size(); ++b)
            out << head << bound_name(cfg.bounds[b]) << ',' << format_real(r.bound_values[b]) << tail << '\n';
    }
    if (!out) throw IoError("failed writing results CSV");
}

std::vector<SummaryRow> summarize(const ExperimentResult& result) {
    std::map<std::int64_t, std::vector<const TrialResult*>> by_t;
    for (const auto& r : result.trials) by_t[r.horizon].push_back(&r);
    std::vector<SummaryRow> rows;
    for (const auto& [t, rs] : by_t) {
        SummaryRow row;
        row.horizon = t;
        row.trials = static_cast<int>(rs.size());
        std::vector<double> regrets;
        int good = 0;
        row.mean_bounds.assign(result.config.bounds.size(), 0.0);
        for (const auto* r : rs) {
            regrets.push_back(r->regret);
            good += r->good_event ? 1 : 0;
            for (std::size_t b = 0; b < r->bound_values.size(); ++b) row.mean_bounds[b] += r->bound_values[b];
        }
        const double n = static_cast<double>(rs.size());
        for (auto& b : row.mean_bounds) b /= n;
        row.mean_regret = std::accumulate(regrets.begin(), regrets.end(), 0.0) / n;
        row.median_regret = quantile(regrets, 0.5);
        row.q10_regret = quantile(regrets, 0.1);
        row.q90_regret = quantile(regrets, 0.9);
        row.good_event_rate = good / n;
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_summary(std::ostream& out, const ExperimentResult& result) {
    const auto& cfg = result.config;
    out << "# bound columns are leading terms only; lower-order remainders are not included\n";
    out << "experiment,policy,regime,p,T,trials,mean_regret,median_regret,q10_regret,q90_regret,good_event_rate";
    for (auto b : cfg.bounds) out << ",mean_" << bound_name(b);
    out << '\n';
    for (const auto& row : summarize(result)) {
        out << cfg.name << ',' << policy_name(cfg.policy) << ',' << regime_name(cfg.regime) << ','
            << p_label(cfg.norm) << ',' << row.horizon << ',' << row.trials << ',' << format_real(row.mean_regret)
            << ',' << format_real(row.median_regret) << ',' << format_real(row.q10_regret) << ','
            << format_real(row.q90_regret) << ',' << format_real(row.good_event_rate);
        for (double b : row.mean_bounds) out << ',' << format_real(b);
        out << '\n';
    }
    if (!out) throw IoError("failed writing summary CSV");
}

void write_bound_curves(std::ostream& out, const ExperimentConfig& cfg) {
    validate(cfg);
    const auto profile = bound_profile(cfg, instance_variances(cfg, 0));
    const auto extras = bound_extras(cfg);
    out << "# leading terms only; lower-order remainders are not included\n";
    out << "experiment,bound_name,p,K,T,t_exponent,log_exponent,bound_value\n";
    for (auto curve : cfg.bounds) {
        const auto rate = bound_rate(curve, cfg.norm);
        for (auto t : cfg.horizons)
            out << cfg.name << ',' << bound_name(curve) << ',' << p_label(cfg.norm) << ','
                << profile.variances.size() << ',' << t << ',' << format_real(rate.t_exponent) << ','
                << format_real(rate.log_exponent) << ','
                << format_real(bound_value(curve, profile, cfg.norm, t, extras)) << '\n';
    }
    if (!out) throw IoError("failed writing bound curves");
}

std::vector<std::int64_t> oracle_best_allocation(const VarianceProfile& profile, const NormOrder& p,
                                                 std::int64_t horizon) {
    validate(profile);
    const auto k = static_cast<std::int64_t>(profile.variances.size());
    if (k > 4 || horizon > 60) throw SizeError("oracle is limited to K <= 4 and T <= 60");
    if (horizon < k) throw ConfigError("oracle needs T >= K");

    std::vector<std::int64_t> cur(static_cast<std::size_t>(k), 1);
    std::vector<std::int64_t> best;
    double best_value = std::numeric_limits<double>::infinity();
    // Enumerate the first K-1 parts in lexicographic order; the last takes the rest.
    auto visit = [&](auto&& self, std::size_t pos, std::int64_t left) -> void {
        if (pos + 1 == cur.size()) {
            cur[pos] = left;
            const double v = objective_rp(cur, profile.variances, p);
            if (v < best_value) {
                best_value = v;
                best = cur;
            }
            return;
        }
        const auto slots_after = static_cast<std::int64_t>(cur.size() - pos - 1);
        for (std::int64_t n = 1; n <= left - slots_after; ++n) {
            cur[pos] = n;
            self(self, pos + 1, left - n);
        }
    };
    visit(visit, 0, horizon);
    return best;
}

double slope_estimate(const std::vector<RatePoint>& points) {
    std::vector<double> xs, ys;
    for (const auto& pt : points) {
        if (!(pt.regret > 0.0) || !(pt.horizon > 0.0)) continue;
        xs.push_back(std::log(pt.horizon));
        ys.push_back(std::log(pt.regret));
    }
    if (xs.size() < 4) throw EstimationError("slope fit needs at least 4 positive points");
    const auto [lo, hi] = std::minmax_element(xs.begin(), xs.end());
    if (*hi - *lo < std::log(10.0) - 1e-12) throw EstimationError("horizons must span at least a decade");
    const double n = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

std::vector<SlopeGroup> read_rate_groups(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    std::string line;
    while (std::getline(in, line) && (line.empty() || line[0] == '#')) {
    }
    if (line != kCsvHeader) throw IoError(path + ": unexpected CSV header");

    // (experiment, policy, p) -> T -> trial -> regret; duplicate bound rows collapse.
    using Key = std::tuple<std::string, std::string, std::string>;
    std::map<Key, std::map<double, std::map<int, double>>> acc;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split_csv_line(line);
        if (cells.size() != 15) throw IoError(path + ":" + std::to_string(lineno) + ": expected 15 columns");
        try {
            acc[{cells[0], cells[1], cells[3]}][std::stod(cells[5])][std::stoi(cells[6])] = std::stod(cells[8]);
        } catch (const std::logic_error&) {
            throw IoError(path + ":" + std::to_string(lineno) + ": malformed number");
        }
    }
    std::vector<SlopeGroup> groups;
    for (const auto& [key, by_t] : acc) {
        SlopeGroup g{std::get<0>(key), std::get<1>(key), std::get<2>(key), {}};
        for (const auto& [t, trials] : by_t) {
            double s = 0.0;
            for (const auto& [i, r] : trials) s += r;
            g.points.push_back({t, s / static_cast<double>(trials.size())});
        }
        groups.push_back(std::move(g));
    }
    return groups;
}

}  // namespace mgme
