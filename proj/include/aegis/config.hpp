#pragma once

/**
 * @file config.hpp
 * @brief Flat `key = value` scenario files and the builders that turn them
 * into model objects.
 *
 *     # comment
 *     wealth.w0 = 1
 *     losses.f_s = beta
 *     losses.f_s.p = 2
 *
 * Keys are dotted, one per line; `#` starts a comment. Unknown keys and
 * duplicates are rejected. Every error names the file, line and key.
 *
 * List values are whitespace- or comma-separated. Battery lists use compact
 * tokens: utilities `cara:0.5 crra:2 log linear`, distributions
 * `uniform trunc_exp:1 beta:2:5`, (alpha, beta) pairs `0.4:0.2`, result ids
 * `T1 T2 T3 T4 P1 T5`; the single word `none` is an empty list.
 */

#include <aegis/contracts.hpp>
#include <aegis/errors.hpp>
#include <aegis/losses.hpp>
#include <aegis/preferences.hpp>
#include <aegis/solver.hpp>
#include <aegis/verification.hpp>

#include <charconv>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace aegis {

/// Malformed or invalid configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

namespace config {

namespace detail {

inline std::string_view trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<std::string> split_list(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',' || c == ' ' || c == '\t') {
            if (!cur.empty()) out.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    if (out.size() == 1 && out[0] == "none") out.clear();
    return out;
}

inline std::optional<double> to_double(std::string_view s) {
    double x = 0.0;
    const auto* end = s.data() + s.size();
    const auto [ptr, ec] = std::from_chars(s.data(), end, x);
    if (ec != std::errc() || ptr != end || !std::isfinite(x)) return std::nullopt;
    return x;
}

}  // namespace detail

/// Every key a scenario file may contain.
inline const std::set<std::string>& known_keys() {
    static const std::set<std::string> keys = [] {
        std::set<std::string> k = {
            "wealth.w0", "wealth.v",
            "losses.alpha", "losses.beta",
            "contract.indemnity", "contract.deductible", "contract.lambda", "contract.theta_default",
            "utility.family", "utility.a", "utility.gamma",
            "sensitivity.loss", "sensitivity.insurable_mean", "sensitivity.lambda_prime",
            "run.seed", "run.output", "run.n", "run.sweep", "run.lambda_grid", "run.t_grid", "run.theta_grid",
            "battery.w0", "battery.v", "battery.utilities", "battery.f_s", "battery.f_ns", "battery.alpha_beta",
            "battery.lambdas", "battery.control_alpha_beta", "battery.t_grid", "battery.theta_fixed",
            "battery.sensitivity_w0", "battery.t4_lambda_primes", "battery.l_grid", "battery.t5_lambda_grid",
            "battery.theorems", "battery.t1_foc_margin", "battery.t2_step_tol", "battery.t3_step_tol",
            "battery.t5_noise_factor",
        };
        for (const char* d : {"losses.f_s", "losses.f_ns", "sensitivity.loss"}) {
            for (const char* p : {"", ".rate", ".p", ".q", ".shift"}) k.insert(std::string(d) + p);
        }
        return k;
    }();
    return keys;
}

class Config {
public:
    static Config parse(std::istream& in, std::string source = "<config>") {
        Config c;
        c.source_ = std::move(source);
        std::string line;
        int number = 0;
        while (std::getline(in, line)) {
            ++number;
            std::string_view view = line;
            if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
            view = detail::trim(view);
            if (view.empty()) continue;
            const auto eq = view.find('=');
            if (eq == std::string_view::npos) {
                throw ConfigError(c.source_ + ":" + std::to_string(number) + ": expected `key = value`");
            }
            const std::string key(detail::trim(view.substr(0, eq)));
            const std::string value(detail::trim(view.substr(eq + 1)));
            const std::string where = c.source_ + ":" + std::to_string(number) + ": " + key;
            if (key.empty()) throw ConfigError(c.source_ + ":" + std::to_string(number) + ": empty key");
            if (!known_keys().contains(key)) throw ConfigError(where + ": unknown key");
            if (c.entries_.contains(key)) {
                throw ConfigError(where + ": duplicate key (first set on line " +
                                  std::to_string(c.entries_.at(key).line) + ")");
            }
            c.entries_[key] = {value, number, {}};
        }
        return c;
    }

    static Config parse_string(const std::string& text, std::string source = "<config>") {
        std::istringstream in(text);
        return parse(in, std::move(source));
    }

    static Config load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw ConfigError(path + ": cannot open config file");
        return parse(in, path);
    }

    /// Command-line override; replaces any value from the file.
    void set(const std::string& key, const std::string& value, const std::string& origin = "command line") {
        if (!known_keys().contains(key)) throw ConfigError(origin + ": " + key + ": unknown key");
        entries_[key] = {value, 0, origin};
    }

    bool has(const std::string& key) const { return entries_.contains(key); }

    /// "file:line: key" for messages.
    std::string where(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) return source_ + ": " + key;
        if (it->second.line == 0) return it->second.origin + ": " + key;
        return source_ + ":" + std::to_string(it->second.line) + ": " + key;
    }

    std::string string(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw ConfigError(source_ + ": missing required key " + key);
        return it->second.value;
    }

    std::string string(const std::string& key, const std::string& fallback) const {
        return has(key) ? string(key) : fallback;
    }

    double number(const std::string& key) const {
        const auto x = detail::to_double(string(key));
        if (!x) throw ConfigError(where(key) + ": expected a finite number, got `" + string(key) + "`");
        return *x;
    }

    double number(const std::string& key, double fallback) const { return has(key) ? number(key) : fallback; }

    std::int64_t integer(const std::string& key, std::int64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string s = string(key);
        std::int64_t x = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw ConfigError(where(key) + ": expected an integer, got `" + s + "`");
        }
        return x;
    }

    std::uint64_t seed(const std::string& key, std::uint64_t fallback) const {
        if (!has(key)) return fallback;
        const std::string s = string(key);
        std::uint64_t x = 0;
        const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), x);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw ConfigError(where(key) + ": expected a non-negative integer seed, got `" + s + "`");
        }
        return x;
    }

    std::vector<std::string> tokens(const std::string& key) const { return detail::split_list(string(key)); }

    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        for (const auto& t : tokens(key)) {
            const auto x = detail::to_double(t);
            if (!x) throw ConfigError(where(key) + ": expected a list of numbers, got `" + t + "`");
            out.push_back(*x);
        }
        return out;
    }

    const std::string& source() const noexcept { return source_; }

private:
    struct Entry {
        std::string value;
        int line = 0;
        std::string origin;
    };

    std::string source_ = "<config>";
    std::map<std::string, Entry> entries_;
};

/// Runs `build`, attaching the config location of `key` to any invariant failure.
template <class F>
auto at(const Config& c, const std::string& key, F&& build) -> decltype(build()) {
    try {
        return build();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvariantError& e) {
        throw ConfigError(c.where(key) + ": " + e.what());
    } catch (const DomainError& e) {
        throw ConfigError(c.where(key) + ": " + e.what());
    }
}

inline LossDistribution distribution(const Config& c, const std::string& prefix, double v) {
    return at(c, prefix, [&] {
        const std::string family = c.string(prefix);
        LossDistribution d = LossDistribution::uniform(v);
        if (family == "uniform") {
        } else if (family == "trunc_exp") {
            d = LossDistribution::trunc_exp(c.number(prefix + ".rate"), v);
        } else if (family == "beta") {
            d = LossDistribution::scaled_beta(c.number(prefix + ".p"), c.number(prefix + ".q"), v);
        } else {
            throw ConfigError(c.where(prefix) + ": unknown distribution `" + family +
                              "` (expected uniform, trunc_exp or beta)");
        }
        if (c.has(prefix + ".shift")) d = fosd_shift(d, c.number(prefix + ".shift"));
        return d;
    });
}

inline UtilityFunction utility(const Config& c) {
    return at(c, "utility.family", [&] {
        const std::string family = c.string("utility.family");
        if (family == "cara") return UtilityFunction::cara(c.number("utility.a"));
        if (family == "crra") return UtilityFunction::crra(c.number("utility.gamma"));
        if (family == "log") return UtilityFunction::log();
        if (family == "linear") return UtilityFunction::linear();
        throw ConfigError(c.where("utility.family") + ": unknown utility `" + family +
                          "` (expected cara, crra, log or linear)");
    });
}

inline double wealth_v(const Config& c) { return c.number("wealth.v", 1.0); }
inline double wealth_w0(const Config& c) { return c.number("wealth.w0", 1.0); }

inline MixedLossModel mixed_losses(const Config& c) {
    const double v = wealth_v(c);
    const auto f_s = distribution(c, "losses.f_s", v);
    const auto f_ns = distribution(c, "losses.f_ns", v);
    return at(c, "losses.beta",
              [&] { return MixedLossModel(c.number("losses.alpha"), c.number("losses.beta"), f_s, f_ns); });
}

inline AegisContract contract(const Config& c) {
    const auto indemnity = at(c, "contract.indemnity", [&] {
        const std::string kind = c.string("contract.indemnity", "full");
        if (kind == "full") return IndemnityFunction::full();
        if (kind == "deductible") return IndemnityFunction::deductible(c.number("contract.deductible"));
        throw ConfigError(c.where("contract.indemnity") + ": unknown indemnity `" + kind +
                          "` (expected full or deductible)");
    });
    return at(c, "contract.lambda", [&] {
        return AegisContract(c.number("contract.theta_default", 1.0), c.number("contract.lambda", 0.0), indemnity);
    });
}

inline Scenario scenario(const Config& c) {
    const auto losses = mixed_losses(c);
    const auto u = utility(c);
    const auto k = contract(c);
    return at(c, "wealth.w0", [&] { return Scenario(wealth_w0(c), wealth_v(c), losses, u, k); });
}

/// Sensitivity model with w = w0 + v; the total loss defaults to f_S.
inline SensitivityScenario sensitivity_scenario(const Config& c) {
    const double v = wealth_v(c);
    const std::string loss_key = c.has("sensitivity.loss") ? "sensitivity.loss" : "losses.f_s";
    const auto loss = distribution(c, loss_key, v);
    const auto u = utility(c);
    const double w = wealth_w0(c) + v;
    const double m = c.has("sensitivity.insurable_mean") ? c.number("sensitivity.insurable_mean") : loss.mean();
    return at(c, "sensitivity.lambda_prime",
              [&] { return SensitivityScenario(w, loss, m, c.number("sensitivity.lambda_prime", 1.1), u); });
}

inline UtilityFunction utility_token(const Config& c, const std::string& key, const std::string& token) {
    std::vector<std::string> fields;
    std::stringstream ss(token);
    for (std::string f; std::getline(ss, f, ':');) fields.push_back(f);
    auto param = [&]() {
        const auto x = fields.size() == 2 ? detail::to_double(fields[1]) : std::nullopt;
        if (!x) throw ConfigError(c.where(key) + ": utility token `" + token + "` needs one numeric parameter");
        return *x;
    };
    return at(c, key, [&] {
        if (fields[0] == "cara") return UtilityFunction::cara(param());
        if (fields[0] == "crra") return UtilityFunction::crra(param());
        if (token == "log") return UtilityFunction::log();
        if (token == "linear") return UtilityFunction::linear();
        throw ConfigError(c.where(key) + ": unknown utility token `" + token + "`");
    });
}

inline LossDistribution distribution_token(const Config& c, const std::string& key, const std::string& token,
                                           double v) {
    std::vector<std::string> fields;
    std::stringstream ss(token);
    for (std::string f; std::getline(ss, f, ':');) fields.push_back(f);
    auto param = [&](std::size_t i) {
        const auto x = i < fields.size() ? detail::to_double(fields[i]) : std::nullopt;
        if (!x) throw ConfigError(c.where(key) + ": malformed distribution token `" + token + "`");
        return *x;
    };
    return at(c, key, [&] {
        if (token == "uniform") return LossDistribution::uniform(v);
        if (fields[0] == "trunc_exp" && fields.size() == 2) return LossDistribution::trunc_exp(param(1), v);
        if (fields[0] == "beta" && fields.size() == 3) return LossDistribution::scaled_beta(param(1), param(2), v);
        throw ConfigError(c.where(key) + ": unknown distribution token `" + token + "`");
    });
}

inline std::vector<std::pair<double, double>> pair_tokens(const Config& c, const std::string& key) {
    std::vector<std::pair<double, double>> out;
    for (const auto& t : c.tokens(key)) {
        const auto colon = t.find(':');
        const auto a = colon == std::string::npos ? std::nullopt : detail::to_double(std::string_view(t).substr(0, colon));
        const auto b = colon == std::string::npos ? std::nullopt : detail::to_double(std::string_view(t).substr(colon + 1));
        if (!a || !b) throw ConfigError(c.where(key) + ": expected alpha:beta pairs, got `" + t + "`");
        out.emplace_back(*a, *b);
    }
    return out;
}

/// Default battery with any `battery.*` keys applied on top.
inline BatteryConfig battery(const Config& c) {
    BatteryConfig b = BatteryConfig::defaults();
    b.w0 = c.number("battery.w0", b.w0);
    if (c.has("battery.v")) {
        b.v = c.number("battery.v");
        if (!(b.v > 0.0)) throw ConfigError(c.where("battery.v") + ": v must be > 0");
        for (auto* list : {&b.f_s, &b.f_ns}) {
            for (auto& d : *list) d = d.with_support(b.v);
        }
    }
    if (c.has("battery.utilities")) {
        b.utilities.clear();
        for (const auto& t : c.tokens("battery.utilities")) b.utilities.push_back(utility_token(c, "battery.utilities", t));
    }
    for (auto [key, list] : {std::pair{"battery.f_s", &b.f_s}, std::pair{"battery.f_ns", &b.f_ns}}) {
        if (!c.has(key)) continue;
        list->clear();
        for (const auto& t : c.tokens(key)) list->push_back(distribution_token(c, key, t, b.v));
    }
    if (c.has("battery.alpha_beta")) b.alpha_beta = pair_tokens(c, "battery.alpha_beta");
    if (c.has("battery.control_alpha_beta")) b.control_alpha_beta = pair_tokens(c, "battery.control_alpha_beta");
    if (c.has("battery.lambdas")) b.lambdas = c.numbers("battery.lambdas");
    if (c.has("battery.t_grid")) b.t_grid = c.numbers("battery.t_grid");
    if (c.has("battery.theta_fixed")) b.theta_fixed = c.numbers("battery.theta_fixed");
    b.sensitivity_w0 = c.number("battery.sensitivity_w0", b.sensitivity_w0);
    if (c.has("battery.t4_lambda_primes")) b.t4_lambda_primes = c.numbers("battery.t4_lambda_primes");
    if (c.has("battery.t5_lambda_grid")) b.t5_lambda_grid = c.numbers("battery.t5_lambda_grid");
    b.l_grid = static_cast<int>(c.integer("battery.l_grid", b.l_grid));
    if (b.l_grid < 2) throw ConfigError(c.where("battery.l_grid") + ": needs at least 2 points");
    if (c.has("battery.theorems")) {
        b.theorems.clear();
        for (const auto& t : c.tokens("battery.theorems")) {
            bool found = false;
            for (TheoremId id : kAllTheorems) {
                if (t == to_string(id)) {
                    b.theorems.push_back(id);
                    found = true;
                }
            }
            if (!found) throw ConfigError(c.where("battery.theorems") + ": unknown result id `" + t + "`");
        }
    }
    b.tol.t1_foc_margin = c.number("battery.t1_foc_margin", b.tol.t1_foc_margin);
    b.tol.t2_step_tol = c.number("battery.t2_step_tol", b.tol.t2_step_tol);
    b.tol.t3_step_tol = c.number("battery.t3_step_tol", b.tol.t3_step_tol);
    b.tol.t5_noise_factor = c.number("battery.t5_noise_factor", b.tol.t5_noise_factor);
    return b;
}

}  // namespace config
}  // namespace aegis
