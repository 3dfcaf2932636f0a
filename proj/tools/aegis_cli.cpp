// aegis: command-line driver for the liability-sharing insurance model.
//
//   aegis evaluate <config> [--grid THETAS]   expected utility and its derivative
//   aegis solve    <config>                   optimal liability level
//   aegis sweep    <config> [--grid VALUES]   demand over lambda' or FOSD shift t
//   aegis sample   <config> [--n N]           seeded Monte Carlo draws
//   aegis verify   [config]                   result battery (defaults without a config)
//
// Exit codes: 0 ok, 1 violation found, 2 bad configuration, 3 numeric failure.

#include <aegis/aegis.hpp>

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <memory>
#include <string>
#include <vector>

namespace {

using namespace aegis;
using aegis::csv::format_number;

constexpr int kOk = 0;
constexpr int kViolation = 1;
constexpr int kConfigError = 2;
constexpr int kNumericFailure = 3;

struct Options {
    std::string config_path;
    std::string out;
    std::string grid;
    std::string seed;
    std::string n;
};

config::Config load(const Options& opt) {
    config::Config c = opt.config_path.empty() ? config::Config{} : config::Config::load(opt.config_path);
    if (!opt.seed.empty()) c.set("run.seed", opt.seed, "--seed");
    if (!opt.out.empty()) c.set("run.output", opt.out, "--out");
    if (!opt.n.empty()) c.set("run.n", opt.n, "--n");
    return c;
}

// Output stream: run.output if set, stdout otherwise.
class Sink {
public:
    explicit Sink(const config::Config& c) {
        if (c.has("run.output")) {
            path_ = c.string("run.output");
            file_ = std::make_unique<std::ofstream>(path_, std::ios::binary);
            if (!*file_) throw ConfigError(c.where("run.output") + ": cannot open " + path_ + " for writing");
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }
    bool to_file() const { return file_ != nullptr; }

private:
    std::string path_;
    std::unique_ptr<std::ofstream> file_;
};

int cmd_evaluate(const Options& opt) {
    auto c = load(opt);
    if (!opt.grid.empty()) c.set("run.theta_grid", opt.grid, "--grid");
    const Scenario s = config::scenario(c);
    const std::vector<double> thetas =
        c.has("run.theta_grid") ? c.numbers("run.theta_grid") : std::vector<double>{s.contract().theta()};
    for (double t : thetas) {
        if (!(t >= 0.0 && t <= 1.0)) throw ConfigError(c.where("run.theta_grid") + ": theta must lie in [0, 1]");
    }
    Sink sink(c);
    csv::Writer w(sink.stream(), {"theta", "eu", "deu_dtheta", "premium"});
    for (double t : thetas) {
        w.row({format_number(t), format_number(expected_utility(s, t)), format_number(eu_theta_derivative(s, t)),
               format_number(s.premium())});
    }
    return kOk;
}

int cmd_solve(const Options& opt) {
    const auto c = load(opt);
    const Scenario s = config::scenario(c);
    const SolveResult r = optimal_theta(s);
    Sink sink(c);
    csv::Writer w(sink.stream(), {"theta_star", "eu", "boundary"});
    w.row({format_number(r.theta_star), format_number(r.eu_at_star), to_string(r.boundary)});
    return kOk;
}

int cmd_sweep(const Options& opt) {
    auto c = load(opt);
    const std::string kind = c.string("run.sweep", "lambda");
    if (kind != "lambda" && kind != "t") {
        throw ConfigError(c.where("run.sweep") + ": expected `lambda` or `t`, got `" + kind + "`");
    }
    const std::string grid_key = kind == "lambda" ? "run.lambda_grid" : "run.t_grid";
    if (!opt.grid.empty()) c.set(grid_key, opt.grid, "--grid");
    const std::vector<double> grid = c.numbers(grid_key);
    if (grid.empty()) throw ConfigError(c.where(grid_key) + ": grid is empty");
    for (std::size_t i = 1; i < grid.size(); ++i) {
        if (!(grid[i] >= grid[i - 1])) throw ConfigError(c.where(grid_key) + ": grid must be ascending");
    }

    Sink sink(c);
    if (kind == "t") {
        for (double t : grid) {
            if (!(t >= 0.0)) throw ConfigError(c.where(grid_key) + ": shift t must be >= 0");
        }
        const Scenario s = config::scenario(c);
        const auto rows = shift_sweep(s, grid);
        csv::Writer w(sink.stream(), {"t", "theta_star", "eu", "boundary", "premium"});
        for (const auto& r : rows) {
            w.row({format_number(r.t), format_number(r.solve.theta_star), format_number(r.solve.eu_at_star),
                   to_string(r.solve.boundary), format_number(r.premium)});
        }
        return kOk;
    }

    for (double lp : grid) {
        if (!(lp >= 1.0)) throw ConfigError(c.where(grid_key) + ": lambda' must be >= 1");
    }
    const SensitivityScenario ss = config::sensitivity_scenario(c);
    // Each grid point must satisfy the wealth guard on its own.
    for (double lp : grid) config::at(c, grid_key, [&] { return ss.with_lambda_prime(lp); });
    const auto points = demand_curve(ss, grid);
    csv::Writer w(sink.stream(), {"lambda_prime", "theta_star", "eu", "boundary", "foc_residual"});
    int failures = 0;
    const std::string nan = format_number(std::numeric_limits<double>::quiet_NaN());
    for (const auto& p : points) {
        if (p.solve) {
            w.row({format_number(p.lambda_prime), format_number(p.solve->theta_star),
                   format_number(p.solve->eu_at_star), to_string(p.solve->boundary),
                   format_number(p.solve->foc_at_star)});
        } else {
            ++failures;
            w.row({format_number(p.lambda_prime), nan, nan, "ERROR", nan});
            std::cerr << "aegis: lambda' = " << format_number(p.lambda_prime) << ": " << p.error << '\n';
        }
    }
    return failures > 0 ? kNumericFailure : kOk;
}

int cmd_sample(const Options& opt) {
    const auto c = load(opt);
    const Scenario s = config::scenario(c);
    const auto n = c.integer("run.n", 1000);
    if (n < 1) throw ConfigError(c.where("run.n") + ": n must be >= 1");
    if (!c.has("run.seed")) throw ConfigError(c.source() + ": sample needs run.seed (or --seed)");
    Rng rng(c.seed("run.seed", 0));
    const double theta = s.contract().theta();

    Sink sink(c);
    csv::Writer w(sink.stream(), {"draw_index", "l_s", "l_ns", "final_wealth", "utility"});
    for (std::int64_t i = 0; i < n; ++i) {
        const LossSample draw = sample_loss(s.losses(), rng);
        const double wealth = final_wealth(s, draw.l_s, draw.l_ns, theta);
        w.row({std::to_string(i), format_number(draw.l_s), format_number(draw.l_ns), format_number(wealth),
               format_number(s.utility().value(wealth))});
    }
    return kOk;
}

int cmd_verify(const Options& opt) {
    const auto c = load(opt);
    const BatteryConfig battery = config::battery(c);
    const auto reports = run_battery(battery);

    Sink sink(c);
    write_reports_csv(sink.stream(), reports);
    write_summary(sink.to_file() ? std::cout : std::cerr, reports);

    const auto summary = summarize(reports);
    if (summary.violations > 0) return kViolation;
    if (summary.numeric_errors > 0) return kNumericFailure;
    return kOk;
}

template <class F>
int guarded(F&& command) {
    try {
        return command();
    } catch (const ConfigError& e) {
        std::cerr << "aegis: config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvariantError& e) {
        std::cerr << "aegis: invalid scenario: " << e.what() << '\n';
        return kConfigError;
    } catch (const NonConvergence& e) {
        std::cerr << "aegis: numeric failure: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const DomainError& e) {
        std::cerr << "aegis: numeric failure: " << e.what() << '\n';
        return kNumericFailure;
    } catch (const std::exception& e) {
        std::cerr << "aegis: error: " << e.what() << '\n';
        return kNumericFailure;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Expected-utility analysis of proportional-liability insurance contracts"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub, bool config_required) {
        auto* cfg = sub->add_option("config", opt.config_path, "Scenario file (key = value)");
        if (config_required) cfg->required();
        cfg->check(CLI::ExistingFile);
        sub->add_option("--out", opt.out, "Write CSV here instead of stdout (run.output)");
        sub->add_option("--seed", opt.seed, "RNG seed (run.seed)");
    };

    auto* evaluate = app.add_subcommand("evaluate", "Expected utility, its theta-derivative and the premium");
    add_common(evaluate, true);
    evaluate->add_option("--grid", opt.grid, "Comma-separated theta values (run.theta_grid)");

    auto* solve = app.add_subcommand("solve", "Optimal liability level theta*");
    add_common(solve, true);

    auto* sweep = app.add_subcommand("sweep", "theta* over a lambda' grid or an FOSD shift grid (run.sweep)");
    add_common(sweep, true);
    sweep->add_option("--grid", opt.grid, "Comma-separated grid (run.lambda_grid or run.t_grid)");

    auto* sample = app.add_subcommand("sample", "Seeded draws of losses, final wealth and utility");
    add_common(sample, true);
    sample->add_option("--n", opt.n, "Number of draws (run.n)");

    auto* verify = app.add_subcommand("verify", "Run the result battery; exit 1 on any violation");
    add_common(verify, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    if (*evaluate) return guarded([&] { return cmd_evaluate(opt); });
    if (*solve) return guarded([&] { return cmd_solve(opt); });
    if (*sweep) return guarded([&] { return cmd_sweep(opt); });
    if (*sample) return guarded([&] { return cmd_sample(opt); });
    return guarded([&] { return cmd_verify(opt); });
}
