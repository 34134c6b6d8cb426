#include "mgme/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <optional>
#include <fstream>
#include <istream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "mgme/error.hpp"

namespace mgme {

namespace {

namespace pt = boost::property_tree;

std::string trimmed(std::string s) {
    boost::algorithm::trim(s);
    return s;
}

std::vector<std::string> split_list(const std::string& s, const char* seps = ",") {
    std::vector<std::string> parts;
    boost::algorithm::split(parts, s, boost::algorithm::is_any_of(seps));
    std::vector<std::string> out;
    for (auto& p : parts) {
        auto t = trimmed(p);
        if (!t.empty()) out.push_back(std::move(t));
    }
    return out;
}

double to_real(const std::string& s, const std::string& what) {
    const auto t = trimmed(s);
    if (t == "inf") return std::numeric_limits<double>::infinity();
    try {
        std::size_t used = 0;
        const double v = std::stod(t, &used);
        if (used != t.size()) throw std::invalid_argument(t);
        return v;
    } catch (const std::logic_error&) {
        throw ConfigError(what + ": '" + s + "' is not a number");
    }
}

std::int64_t to_int(const std::string& s, const std::string& what) {
    const double v = to_real(s, what);
    if (!std::isfinite(v) || v != std::floor(v)) throw ConfigError(what + ": '" + s + "' is not an integer");
    return static_cast<std::int64_t>(v);
}

bool to_bool(const std::string& s, const std::string& what) {
    const auto t = boost::algorithm::to_lower_copy(trimmed(s));
    if (t == "true" || t == "yes" || t == "1" || t == "on") return true;
    if (t == "false" || t == "no" || t == "0" || t == "off") return false;
    throw ConfigError(what + ": '" + s + "' is not a boolean");
}

pt::ptree read_tree(std::istream& in, const std::vector<std::string>& overrides) {
    // Boost's INI reader only knows full-line comments; drop trailing ones too.
    std::stringstream text;
    for (std::string line; std::getline(in, line);) {
        const auto cut = line.find_first_of(";#");
        text << (cut == std::string::npos ? line : line.substr(0, cut)) << '\n';
    }
    pt::ptree tree;
    try {
        pt::read_ini(text, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    // "section.key=value"; the tree uses '/' paths so dots in values never split.
    for (const auto& o : overrides) {
        const auto eq = o.find('=');
        const auto dot = o.find('.');
        if (eq == std::string::npos || dot == std::string::npos || dot > eq)
            throw ConfigError("override '" + o + "' is not of the form section.key=value");
        const auto section = trimmed(o.substr(0, dot));
        const auto key = trimmed(o.substr(dot + 1, eq - dot - 1));
        tree.put(pt::ptree::path_type(section + "/" + key, '/'), trimmed(o.substr(eq + 1)));
    }
    return tree;
}

std::optional<std::string> get(const pt::ptree& tree, const std::string& section, const std::string& key) {
    const auto v = tree.get_optional<std::string>(pt::ptree::path_type(section + "/" + key, '/'));
    if (!v) return std::nullopt;
    return trimmed(*v);
}

void reject_unknown(const pt::ptree& tree, const std::string& section, std::initializer_list<const char*> keys) {
    const auto child = tree.get_child_optional(section);
    if (!child) return;
    for (const auto& [k, _] : *child)
        if (std::none_of(keys.begin(), keys.end(), [&](const char* known) { return k == known; }))
            throw ConfigError("unknown key '" + k + "' in [" + section + "]");
}

std::pair<double, double> to_range(const std::string& s, const std::string& what) {
    const auto parts = split_list(s);
    if (parts.size() != 2) throw ConfigError(what + " needs two values lo,hi");
    return {to_real(parts[0], what), to_real(parts[1], what)};
}

ExperimentConfig from_tree(const pt::ptree& tree) {
    for (const auto& [section, _] : tree)
        if (section != "experiment" && section != "policy" && section != "arms" && section != "contextual" &&
            section != "bounds")
            throw ConfigError("unknown section [" + section + "]");
    reject_unknown(tree, "experiment",
                   {"name", "policy", "horizons", "trials", "seed", "output", "summary", "workers", "timing"});
    reject_unknown(tree, "policy", {"p", "regime", "proxy", "lower_bound", "phase3_ucb", "batch_growth",
                                    "lcb_margin", "tail_form"});
    reject_unknown(tree, "arms", {"arms"});
    reject_unknown(tree, "contextual", {"arms", "dimension", "beta_range", "noise_variance_range"});
    reject_unknown(tree, "bounds", {"curves"});

    ExperimentConfig cfg;
    if (auto v = get(tree, "experiment", "name")) cfg.name = *v;
    if (cfg.name.find(',') != std::string::npos) throw ConfigError("experiment name may not contain commas");
    if (auto v = get(tree, "experiment", "policy")) cfg.policy = parse_policy(*v);
    if (auto v = get(tree, "experiment", "horizons")) {
        cfg.horizons.clear();
        for (const auto& h : split_list(*v)) cfg.horizons.push_back(to_int(h, "horizons"));
    }
    if (auto v = get(tree, "experiment", "trials")) cfg.trials = static_cast<int>(to_int(*v, "trials"));
    if (auto v = get(tree, "experiment", "seed")) {
        const auto s = to_int(*v, "seed");
        if (s < 0) throw ConfigError("seed must be nonnegative");
        cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = get(tree, "experiment", "output")) cfg.output = *v;
    if (auto v = get(tree, "experiment", "summary")) cfg.summary_output = *v;
    if (auto v = get(tree, "experiment", "workers")) cfg.workers = static_cast<int>(to_int(*v, "workers"));
    if (auto v = get(tree, "experiment", "timing")) cfg.record_timing = to_bool(*v, "timing");

    if (auto v = get(tree, "policy", "p")) cfg.norm = parse_norm(*v);
    if (auto v = get(tree, "policy", "regime")) cfg.regime = parse_regime(*v);
    if (auto v = get(tree, "policy", "proxy")) cfg.proxy = to_real(*v, "proxy");
    if (auto v = get(tree, "policy", "lower_bound")) cfg.lower_bound = to_real(*v, "lower_bound");
    if (auto v = get(tree, "policy", "phase3_ucb")) cfg.phase3_ucb_mode = to_bool(*v, "phase3_ucb");
    if (auto v = get(tree, "policy", "batch_growth")) cfg.batch_growth = to_real(*v, "batch_growth");
    if (auto v = get(tree, "policy", "lcb_margin")) cfg.lcb_margin = to_real(*v, "lcb_margin");
    if (auto v = get(tree, "policy", "tail_form")) {
        const auto t = boost::algorithm::to_lower_copy(*v);
        if (t == "refined") cfg.tail_form = TailForm::Refined;
        else if (t == "symmetric") cfg.tail_form = TailForm::Symmetric;
        else throw ConfigError("tail_form must be refined or symmetric");
    }
    if (!(cfg.batch_growth > 1.0)) throw ConfigError("batch_growth must exceed 1");
    if (!(cfg.lcb_margin > 0.0)) throw ConfigError("lcb_margin must be positive");

    if (auto v = get(tree, "arms", "arms"))
        for (const auto& a : split_list(*v)) cfg.arms.push_back(parse_arm(a));

    if (tree.get_child_optional("contextual")) {
        ContextualSetup s;
        if (auto v = get(tree, "contextual", "arms")) s.arms = static_cast<int>(to_int(*v, "contextual arms"));
        if (auto v = get(tree, "contextual", "dimension")) s.dimension = static_cast<int>(to_int(*v, "dimension"));
        if (auto v = get(tree, "contextual", "beta_range")) std::tie(s.beta_lo, s.beta_hi) = to_range(*v, "beta_range");
        if (auto v = get(tree, "contextual", "noise_variance_range"))
            std::tie(s.var_lo, s.var_hi) = to_range(*v, "noise_variance_range");
        cfg.contextual = s;
    }

    if (auto v = get(tree, "bounds", "curves"))
        for (const auto& c : split_list(*v)) cfg.bounds.push_back(parse_bound(c));

    validate(cfg);
    return cfg;
}

}  // namespace

NormOrder parse_norm(const std::string& text) {
    const auto t = boost::algorithm::to_lower_copy(trimmed(text));
    if (t == "inf" || t == "infinity") return NormOrder::infinity();
    return NormOrder(to_real(t, "p"));
}

NoiseKind parse_regime(const std::string& text) {
    const auto t = boost::algorithm::to_lower_copy(trimmed(text));
    if (t == "gsg") return NoiseKind::GSG;
    if (t == "ssg") return NoiseKind::SSG;
    if (t == "gaussian") return NoiseKind::GaussianExact;
    throw ConfigError("regime must be gsg, ssg or gaussian");
}

PolicyKind parse_policy(const std::string& text) {
    const auto t = boost::algorithm::to_lower_copy(trimmed(text));
    if (t == "nonadaptive") return PolicyKind::NonAdaptive;
    if (t == "adaptive") return PolicyKind::Adaptive;
    if (t == "contextual") return PolicyKind::Contextual;
    throw ConfigError("policy must be nonadaptive, adaptive or contextual");
}

ArmSpec parse_arm(const std::string& text) {
    const auto parts = split_list(text, ":");
    if (parts.empty()) throw ConfigError("empty arm specification");
    const auto family = boost::algorithm::to_lower_copy(parts[0]);
    std::vector<double> args;
    for (std::size_t i = 1; i < parts.size(); ++i) args.push_back(to_real(parts[i], "arm '" + text + "'"));
    ArmSpec arm;
    if (family == "gaussian" && args.size() == 1) arm = ArmSpec::gaussian(0.0, args[0]);
    else if (family == "gaussian" && args.size() == 2) arm = ArmSpec::gaussian(args[0], args[1]);
    else if (family == "rademacher" && args.size() <= 1) arm = ArmSpec::rademacher(args.empty() ? 0.0 : args[0]);
    else if (family == "beta" && args.size() == 1) arm = ArmSpec::symmetric_beta(0.0, args[0]);
    else if (family == "beta" && args.size() == 2) arm = ArmSpec::symmetric_beta(args[0], args[1]);
    else if (family == "constant" && args.size() == 1) arm = ArmSpec::constant(args[0]);
    else throw ConfigError("cannot parse arm '" + text + "'");
    validate(arm);
    return arm;
}

ExperimentConfig parse_experiment_config(std::istream& in, const std::vector<std::string>& overrides) {
    return from_tree(read_tree(in, overrides));
}

ExperimentConfig load_experiment_config(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return parse_experiment_config(in, overrides);
}

OracleProfile load_oracle_profile(const std::string& path, const std::vector<std::string>& overrides) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    const auto tree = read_tree(in, overrides);
    reject_unknown(tree, "profile", {"variances", "p", "horizon", "lower_bound", "proxy"});
    OracleProfile out;
    const auto vars = get(tree, "profile", "variances");
    const auto horizon = get(tree, "profile", "horizon");
    if (!vars || !horizon) throw ConfigError("[profile] needs variances and horizon");
    for (const auto& v : split_list(*vars)) out.profile.variances.push_back(to_real(v, "variances"));
    if (auto v = get(tree, "profile", "lower_bound")) out.profile.lower_bound = to_real(*v, "lower_bound");
    if (auto v = get(tree, "profile", "proxy")) out.profile.proxy = to_real(*v, "proxy");
    if (auto v = get(tree, "profile", "p")) out.norm = parse_norm(*v);
    out.horizon = to_int(*horizon, "horizon");
    validate(out.profile);
    return out;
}

}  // namespace mgme
