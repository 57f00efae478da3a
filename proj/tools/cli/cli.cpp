#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <exception>
#include <iostream>
#include <sstream>
#include <thread>

#include "../acceptance/checks.hpp"
#include "mems/errors.hpp"
#include "mems/pullin.hpp"
#include "mems/solver.hpp"
#include "mems/stability.hpp"
#include "report.hpp"

namespace mems::cli {

using json = nlohmann::ordered_json;

double parse_real(const std::string& text) {
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double value = 0.0;
        try {
            value = std::stod(s, &used);
        } catch (const std::exception&) {
            throw ConfigError("not a number: '" + text + "'");
        }
        if (used != s.size() || !std::isfinite(value)) throw ConfigError("not a number: '" + text + "'");
        return value;
    };
    const auto slash = text.find('/');
    if (slash == std::string::npos) return number(text);
    const double num = number(text.substr(0, slash));
    const double den = number(text.substr(slash + 1));
    if (den == 0.0) throw ConfigError("zero denominator in '" + text + "'");
    return num / den;
}

std::vector<double> parse_lambda_range(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
    if (parts.size() != 3) throw ConfigError("--lambda-range expects lo:hi:n");
    const double lo = parse_real(parts[0]);
    const double hi = parse_real(parts[1]);
    const double n = parse_real(parts[2]);
    if (!(lo > 0.0 && hi > lo)) throw ConfigError("--lambda-range needs 0 < lo < hi");
    if (!(n >= 2.0 && n == std::floor(n) && n <= 1e6)) throw ConfigError("--lambda-range needs an integer count >= 2");
    const auto count = static_cast<std::size_t>(n);
    std::vector<double> values(count);
    const double ratio = std::log(hi / lo) / static_cast<double>(count - 1);
    for (std::size_t i = 0; i < count; ++i) values[i] = lo * std::exp(ratio * static_cast<double>(i));
    values.back() = hi;
    return values;
}

namespace {

json inputs_json(const RunConfig& c) {
    json j;
    j["kappa"] = c.params.kappa;
    j["gamma"] = c.params.gamma;
    j["dim"] = c.params.dim;
    if (c.command == "sweep") {
        j["lambdas"] = c.lambdas;
    } else if (c.command != "pullin") {
        j["lambda"] = c.params.lambda;
    }
    j["cells"] = c.cells;
    j["grading"] = c.grading;
    j["tol_fixed_point"] = c.params.tol_fixed_point;
    j["max_iterations"] = c.params.max_iterations;
    j["touchdown_fraction"] = c.params.touchdown_fraction;
    if (c.command == "pullin") j["tol_lambda"] = c.tol;
    return j;
}

json grid_json(const RadialGrid& grid) {
    return json{{"n_cells", grid.n_cells()},
                {"grading_exponent", grid.grading_exponent()},
                {"min_width", grid.min_boundary_width()}};
}

void emit(const RunConfig& c, const std::string& content, std::ostream& out) {
    if (c.out.empty()) {
        out << content;
    } else {
        write_atomic(c.out, content);
    }
}

std::string csv_table(const std::vector<std::pair<std::string, std::string>>& row) {
    std::string header, values;
    for (std::size_t i = 0; i < row.size(); ++i) {
        header += (i ? "," : "") + row[i].first;
        values += (i ? "," : "") + row[i].second;
    }
    return header + "\n" + values + "\n";
}

struct Stopwatch {
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
    double seconds() const { return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count(); }
};

std::optional<double> decay_slope(const GridFunction& u, const ProblemParams& p) {
    if (!(p.lambda > 0.0)) return std::nullopt;
    try {
        return boundary_decay_fit(u, p.gamma, p.lambda, {1e-6, 1e-4}).fitted_slope;
    } catch (const ConfigError&) {
        return std::nullopt;
    }
}

int run_solve(const RunConfig& c, std::ostream& out) {
    const Stopwatch clock;
    const auto grid = make_grid(c.cells, c.grading);
    const auto outcome = iterate_minimal(c.params, grid);
    std::optional<double> mu1;
    if (c.eigen && outcome.converged()) mu1 = smallest_eigenpair(assemble_linearized(*outcome.solution, c.params)).mu1;

    json j;
    j["command"] = "solve";
    j["inputs"] = inputs_json(c);
    j["grid"] = grid_json(*grid);
    j["status"] = std::string(to_string(outcome.status));
    j["iterations"] = outcome.iterations_used;
    j["final_gap"] = outcome.final_gap;
    j["min_clearance"] = outcome.min_clearance;
    j["sup_u"] = outcome.final_iterate.max();
    if (outcome.converged()) {
        j["residual"] = outcome.residual;
        const auto slope = decay_slope(*outcome.solution, c.params);
        j["decay_slope"] = slope ? json(*slope) : json(nullptr);
    }
    if (mu1) j["mu1"] = *mu1;
    if (c.timing) j["wall_time_s"] = clock.seconds();

    if (c.format == "csv") {
        std::vector<std::pair<std::string, std::string>> row{
            {"lambda", format_real(c.params.lambda)},
            {"sup_u", format_real(outcome.final_iterate.max())},
            {"clearance", format_real(outcome.min_clearance)}};
        if (mu1) row.emplace_back("mu1", format_real(*mu1));
        emit(c, csv_table(row), out);
    } else {
        emit(c, dump_json(j), out);
    }
    return outcome.converged() ? kOk : kTouchdown;
}

struct SweepChunk {
    Branch branch;
    std::vector<double> mu1;
    std::exception_ptr error;
};

int run_sweep(const RunConfig& c, std::ostream& out) {
    const Stopwatch clock;
    if (c.lambdas.empty()) throw ConfigError("sweep needs --lambda or --lambda-range");
    for (std::size_t i = 1; i < c.lambdas.size(); ++i) {
        if (!(c.lambdas[i] > c.lambdas[i - 1])) throw ConfigError("sweep lambdas must be strictly increasing");
    }
    const auto grid = make_grid(c.cells, c.grading);

    // One contiguous lambda chunk per worker.
    const std::size_t n = c.lambdas.size();
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(c.jobs), n);
    std::vector<SweepChunk> chunks(workers);
    auto work = [&](std::size_t k) {
        const std::size_t begin = n * k / workers;
        const std::size_t end = n * (k + 1) / workers;
        try {
            const std::span<const double> part(c.lambdas.data() + begin, end - begin);
            chunks[k].branch = branch_sweep(c.params, part, grid);
            if (c.eigen) {
                for (std::size_t i = 0; i < part.size(); ++i) {
                    const auto op = assemble_linearized(chunks[k].branch.solutions[i], c.params.with_lambda(part[i]));
                    chunks[k].mu1.push_back(smallest_eigenpair(op).mu1);
                }
            }
        } catch (...) {
            chunks[k].error = std::current_exception();
        }
    };
    if (workers == 1) {
        work(0);
    } else {
        std::vector<std::thread> pool;
        for (std::size_t k = 0; k < workers; ++k) pool.emplace_back(work, k);
        for (auto& t : pool) t.join();
    }

    Branch branch;
    std::vector<double> mu1;
    for (auto& chunk : chunks) {
        if (chunk.error) std::rethrow_exception(chunk.error);
        for (std::size_t i = 0; i < chunk.branch.size(); ++i) {
            branch.lambdas.push_back(chunk.branch.lambdas[i]);
            branch.sup_values.push_back(chunk.branch.sup_values[i]);
            branch.clearances.push_back(chunk.branch.clearances[i]);
            branch.solutions.push_back(std::move(chunk.branch.solutions[i]));
        }
        mu1.insert(mu1.end(), chunk.mu1.begin(), chunk.mu1.end());
    }

    if (c.format == "csv") {
        emit(c, branch_csv(branch, c.eigen ? std::optional(mu1) : std::nullopt), out);
        return kOk;
    }
    json j;
    j["command"] = "sweep";
    j["inputs"] = inputs_json(c);
    j["grid"] = grid_json(*grid);
    json rows = json::array();
    for (std::size_t i = 0; i < branch.size(); ++i) {
        json row;
        row["kappa"] = c.params.kappa;
        row["gamma"] = c.params.gamma;
        row["dim"] = c.params.dim;
        row["cells"] = c.cells;
        row["grading"] = c.grading;
        row["lambda"] = branch.lambdas[i];
        row["status"] = "Converged";
        row["sup_u"] = branch.sup_values[i];
        row["clearance"] = branch.clearances[i];
        if (c.eigen) row["mu1"] = mu1[i];
        rows.push_back(std::move(row));
    }
    j["rows"] = std::move(rows);
    if (c.timing) j["wall_time_s"] = clock.seconds();
    emit(c, dump_json(j), out);
    return kOk;
}

int run_pullin(const RunConfig& c, std::ostream& out) {
    const Stopwatch clock;
    const auto grid = make_grid(c.cells, c.grading);
    PullInOptions options;
    options.iteration = c.params;
    const auto est = pullin_bisect(c.params.kappa, c.params.gamma, c.params.dim, grid, c.tol, options);

    auto optional_real = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
    json j;
    j["command"] = "pullin";
    j["inputs"] = inputs_json(c);
    j["grid"] = grid_json(*grid);
    j["lambda_star_lo"] = est.lambda_star_lo;
    j["lambda_star_hi"] = est.lambda_star_hi;
    j["analytic_lower"] = est.analytic_lower;
    j["analytic_upper"] = est.analytic_upper;
    j["ball_upper_closed_form"] = optional_real(est.ball_upper_closed_form);
    j["radial_beta_form"] = est.radial_beta_form;
    j["lambda_star_proxy"] = optional_real(est.lambda_star_proxy);
    j["bisection_steps"] = est.bisection_steps;
    if (c.timing) j["wall_time_s"] = clock.seconds();

    if (c.format == "csv") {
        auto text = [](const std::optional<double>& x) { return x ? format_real(*x) : std::string(); };
        emit(c,
             csv_table({{"kappa", format_real(c.params.kappa)},
                        {"gamma", format_real(c.params.gamma)},
                        {"dim", std::to_string(c.params.dim)},
                        {"lambda_star_lo", format_real(est.lambda_star_lo)},
                        {"lambda_star_hi", format_real(est.lambda_star_hi)},
                        {"analytic_lower", format_real(est.analytic_lower)},
                        {"analytic_upper", format_real(est.analytic_upper)},
                        {"ball_upper_closed_form", text(est.ball_upper_closed_form)},
                        {"radial_beta_form", format_real(est.radial_beta_form)},
                        {"lambda_star_proxy", text(est.lambda_star_proxy)}}),
             out);
    } else {
        emit(c, dump_json(j), out);
    }
    return kOk;
}

int run_eigen(const RunConfig& c, std::ostream& out) {
    const Stopwatch clock;
    const auto grid = make_grid(c.cells, c.grading);
    const auto outcome = iterate_minimal(c.params, grid);
    json j;
    j["command"] = "eigen";
    j["inputs"] = inputs_json(c);
    j["grid"] = grid_json(*grid);
    j["status"] = std::string(to_string(outcome.status));
    if (!outcome.converged()) {
        emit(c, c.format == "csv" ? csv_table({{"lambda", format_real(c.params.lambda)}, {"status", std::string(to_string(outcome.status))}})
                                  : dump_json(j),
             out);
        return kTouchdown;
    }
    const auto op = assemble_linearized(*outcome.solution, c.params);
    const auto eig = smallest_eigenpair(op);
    j["mu1"] = eig.mu1;
    j["rayleigh_residual"] = eig.rayleigh_residual;
    j["eigen_steps"] = eig.steps;
    j["cap_applied"] = op.cap_applied;
    j["c28"] = op.c28;
    j["sup_u"] = outcome.solution->max();
    j["clearance"] = outcome.min_clearance;
    if (c.params.gamma > 0.0) {
        const double beta = c.beta > 0.0 ? c.beta : 0.5 * c.params.gamma;
        const auto energy = energy_diagnostics(*outcome.solution, c.params, beta);
        j["grad_energy"] = energy.grad_energy;
        j["singular_mass"] = energy.singular_mass;
        j["beta"] = beta;
        j["weighted_singularity"] = energy.weighted_singularity;
    }
    if (c.timing) j["wall_time_s"] = clock.seconds();
    if (c.format == "csv") {
        emit(c,
             csv_table({{"lambda", format_real(c.params.lambda)},
                        {"sup_u", format_real(outcome.solution->max())},
                        {"clearance", format_real(outcome.min_clearance)},
                        {"mu1", format_real(eig.mu1)}}),
             out);
    } else {
        emit(c, dump_json(j), out);
    }
    return kOk;
}

int run_verify(const RunConfig& c, std::ostream& out) {
    std::vector<int> ids = c.checks;
    if (ids.empty()) {
        for (int id = 1; id <= acceptance::kCriterionCount; ++id) ids.push_back(id);
    }
    for (int id : ids) {
        if (id < 1 || id > acceptance::kCriterionCount) throw ConfigError("--only ids must lie in 1..10");
    }
    acceptance::Context context;
    json checks = json::array();
    bool all = true;
    for (int id : ids) {
        const auto r = acceptance::run_check(id, context);
        out << acceptance::format_line(r) << std::endl;
        all = all && r.passed;
        json entry{{"id", r.id}, {"name", r.name}, {"module", r.module}, {"passed", r.passed}, {"detail", r.detail}};
        if (c.timing) entry["seconds"] = r.seconds;
        checks.push_back(std::move(entry));
    }
    if (!c.out.empty()) {
        if (c.format == "csv") {
            std::string text = "id,name,module,passed\n";
            for (const auto& e : checks) {
                text += std::to_string(e["id"].get<int>()) + "," + e["name"].get<std::string>() + "," +
                        e["module"].get<std::string>() + "," + (e["passed"].get<bool>() ? "true" : "false") + "\n";
            }
            write_atomic(c.out, text);
        } else {
            write_atomic(c.out, dump_json(json{{"command", "verify"}, {"passed", all}, {"checks", checks}}));
        }
    }
    return all ? kOk : kChecksFailed;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Minimal solutions, pull-in voltage and stability for -Laplace u = lambda / (a - u)^2 on the unit ball"};
    app.name("mems");
    app.require_subcommand(1);

    RunConfig config;
    std::string gamma_text, lambda_text, range_text, kappa_text;
    auto add_problem = [&](CLI::App* sub, bool with_lambda) {
        sub->add_option("--kappa", kappa_text, "profile amplitude (> 0)");
        sub->add_option("--gamma", gamma_text, "profile exponent in [0, 1), accepts p/q");
        sub->add_option("--dim", config.params.dim, "space dimension N >= 1");
        if (with_lambda) sub->add_option("--lambda", lambda_text, "voltage (sweep: comma separated list)");
        sub->add_option("--cells", config.cells, "mesh cells (>= 64)");
        sub->add_option("--grading", config.grading, "boundary grading exponent q >= 1");
        sub->add_option("--out", config.out, "output file (default: standard output)");
        sub->add_option("--format", config.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
        sub->add_flag("--timing", config.timing, "add wall time to the report");
    };

    auto* solve = app.add_subcommand("solve", "minimal solution at one lambda");
    add_problem(solve, true);
    solve->add_option("--tol", config.params.tol_fixed_point, "fixed-point tolerance (sup norm)");
    solve->add_flag("--eigen", config.eigen, "also compute mu1");

    auto* sweep = app.add_subcommand("sweep", "solution branch over increasing lambdas");
    add_problem(sweep, true);
    sweep->add_option("--lambda-range", range_text, "geometric range lo:hi:n");
    sweep->add_option("--tol", config.params.tol_fixed_point, "fixed-point tolerance (sup norm)");
    sweep->add_option("--jobs", config.jobs, "worker threads")->check(CLI::Range(1, 256));
    sweep->add_flag("--eigen", config.eigen, "add the mu1 column");

    auto* pullin = app.add_subcommand("pullin", "pull-in voltage bracket and analytic bounds");
    add_problem(pullin, false);
    pullin->add_option("--tol", config.tol, "bracket width relative to the upper bound (>= 1e-6)");

    auto* eigen = app.add_subcommand("eigen", "stability eigenvalue and energy diagnostics at one lambda");
    add_problem(eigen, true);
    eigen->add_option("--tol", config.params.tol_fixed_point, "fixed-point tolerance (sup norm)");
    eigen->add_option("--beta", config.beta, "exponent for the weighted singular integral, in (0, gamma)");

    auto* verify = app.add_subcommand("verify", "run the acceptance checks");
    verify->add_option("--only", config.checks, "criterion ids to run");
    verify->add_option("--out", config.out, "machine-readable results file");
    verify->add_option("--format", config.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    verify->add_flag("--timing", config.timing, "add check durations to the results file");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kConfigError;
    }

    try {
        config.command = app.get_subcommands().front()->get_name();
        if (!kappa_text.empty()) config.params.kappa = parse_real(kappa_text);
        if (!gamma_text.empty()) config.params.gamma = parse_real(gamma_text);
        if (!lambda_text.empty()) {
            std::stringstream ss(lambda_text);
            for (std::string item; std::getline(ss, item, ',');) config.lambdas.push_back(parse_real(item));
        }
        if (!range_text.empty()) {
            if (!config.lambdas.empty()) throw ConfigError("use either --lambda or --lambda-range");
            config.lambdas = parse_lambda_range(range_text);
        }
        if (config.command == "solve" || config.command == "eigen") {
            if (config.lambdas.size() != 1) throw ConfigError(config.command + " needs exactly one --lambda");
            config.params.lambda = config.lambdas.front();
        }
        if (config.command != "verify") {
            config.params.validate();
            build_grid(config.cells, config.grading);
            for (double l : config.lambdas) {
                if (!(l >= 0.0)) throw ConfigError("lambda must be >= 0");
            }
        }

        if (config.command == "solve") return run_solve(config, out);
        if (config.command == "sweep") return run_sweep(config, out);
        if (config.command == "pullin") return run_pullin(config, out);
        if (config.command == "eigen") return run_eigen(config, out);
        return run_verify(config, out);
    } catch (const ConfigError& e) {
        err << "configuration error: " << e.what() << '\n';
        return kConfigError;
    } catch (const DomainError& e) {
        err << "domain error: " << e.what() << '\n';
        return kConfigError;
    } catch (const BranchError& e) {
        err << "touchdown: " << e.what() << '\n';
        return kTouchdown;
    } catch (const NumericalGuardError& e) {
        err << "numerical guard: " << e.what() << '\n';
        return kNumericalError;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kNumericalError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kNumericalError;
    }
}

}  // namespace mems::cli
