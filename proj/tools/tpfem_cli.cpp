// Command-line front end: solve single problems, reproduce the convergence
// tables, emit plots and diagnostics.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tpfem/examples.hpp"
#include "tpfem/output.hpp"

namespace {

using namespace tpfem;

struct CliConfig {
    std::string example;
    std::string p_text, b_text, f_text;
    double u_left = 0.0, u_right = 0.0;
    std::string domain = "0,1";
    std::string eps_csv, n_csv;
    std::string duals = "";
    int n1 = 256;
    int ref_n = 4096;
    std::string out_dir = ".";
    std::string baseline;
    bool waive = false;
    bool serial = false;
};

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        out.push_back(std::stod(tok));
    }
    return out;
}

std::vector<int> parse_int_list(const std::string& text) {
    std::vector<int> out;
    for (double v : parse_double_list(text)) out.push_back(static_cast<int>(v));
    return out;
}

ExampleSpec spec_from_config(const CliConfig& cfg) {
    ExampleSpec spec;
    if (!cfg.example.empty()) {
        spec = example_by_id(cfg.example);
    } else {
        if (cfg.p_text.empty() || cfg.b_text.empty() || cfg.f_text.empty())
            throw ConfigError("custom problems need --p, --b and --f (or use --example)");
        spec.id = "custom";
        spec.p = Expression::parse(cfg.p_text);
        spec.b = Expression::parse(cfg.b_text);
        spec.f = Expression::parse(cfg.f_text);
        std::vector<double> dom = parse_double_list(cfg.domain);
        if (dom.size() != 2 || !(dom[0] < dom[1]))
            throw ConfigError("--domain expects 'a,b' with a < b");
        spec.x_left = dom[0];
        spec.x_right = dom[1];
        spec.u_left = Expression::number(cfg.u_left);
        spec.u_right = Expression::number(cfg.u_right);
        spec.mode = DualMode::Exact;
        spec.waive_condition = cfg.waive;
    }
    if (!cfg.eps_csv.empty()) spec.eps_list = parse_double_list(cfg.eps_csv);
    if (!cfg.n_csv.empty()) spec.n_list = parse_int_list(cfg.n_csv);
    if (!cfg.duals.empty()) {
        if (cfg.duals == "exact") spec.mode = DualMode::Exact;
        else if (cfg.duals == "tfpm") spec.mode = DualMode::Tfpm;
        else throw ConfigError("--duals expects 'exact' or 'tfpm'");
    }
    spec.n1 = cfg.n1;
    spec.ref_n = cfg.ref_n;
    if (spec.eps_list.empty()) throw ConfigError("no eps values given (--eps)");
    if (spec.n_list.empty()) throw ConfigError("no N values given (--n)");
    return spec;
}

std::string out_path(const CliConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return (std::filesystem::path(cfg.out_dir) / name).string();
}

void print_table(const ErrorReport& rep) {
    std::printf("%10s %6s %12s %6s %12s %6s %12s %6s\n", "eps", "N", "linf", "rate", "l2", "rate",
                "energy", "rate");
    for (const ErrorRow& r : rep.rows) {
        auto rate = [](const std::optional<double>& v) {
            char buf[16];
            if (!v) return std::string("");
            std::snprintf(buf, sizeof(buf), "%.2f", *v);
            return std::string(buf);
        };
        std::printf("%10.3g %6d %12.3e %6s %12.3e %6s %12.3e %6s\n", r.eps, r.n, r.linf,
                    rate(r.rate_linf).c_str(), r.l2, rate(r.rate_l2).c_str(), r.energy,
                    rate(r.rate_energy).c_str());
    }
}

int cmd_solve(const CliConfig& cfg) {
    ExampleSpec spec = spec_from_config(cfg);
    double eps = spec.eps_list.front();
    int n = spec.n_list.front();
    SolveOptions so;
    so.mode = spec.mode;
    so.n1 = spec.n1;
    so.parallel_duals = !cfg.serial;
    GridSolution sol = pgfem_solve(make_bvp(spec, eps), n, so);

    double umin = sol.values.front(), umax = sol.values.front();
    for (double v : sol.values) {
        umin = std::min(umin, v);
        umax = std::max(umax, v);
    }
    std::printf("%s: eps=%g N=%d duals=%s\n", spec.id.c_str(), eps, n,
                spec.mode == DualMode::Exact ? "exact" : "tfpm");
    std::printf("  u in [%.10g, %.10g]\n", umin, umax);
    std::printf("  discrete max principle: %s\n",
                sol.info.max_principle.is_m_like ? "satisfied" : "NOT satisfied");
    std::printf("  duals %.3fs, assemble %.3fs, solve %.3fs\n", sol.info.seconds_duals,
                sol.info.seconds_assemble, sol.info.seconds_solve);
    std::string path = out_path(cfg, spec.id + "_solution.csv");
    write_solution_csv(path, sol);
    std::printf("  wrote %s\n", path.c_str());
    return 0;
}

int cmd_table(const CliConfig& cfg) {
    ExampleSpec spec = spec_from_config(cfg);
    RunOptions ro;
    ro.with_baseline = cfg.baseline == "shishkin";
    ro.parallel = !cfg.serial;
    RunResult res = run_example(spec, ro);
    print_table(res.table);
    for (const CellError& e : res.errors)
        std::fprintf(stderr, "cell eps=%g N=%d failed at %s: %s\n", e.eps, e.n, e.stage.c_str(),
                     e.message.c_str());
    std::string csv = out_path(cfg, spec.id + "_errors.csv");
    write_error_table_csv(csv, spec.id, res.table, spec.mode, spec.n1);
    std::string man = out_path(cfg, spec.id + "_manifest.json");
    write_run_manifest(man, spec, ro, res);
    std::printf("wrote %s and %s\n", csv.c_str(), man.c_str());
    return res.errors.empty() ? 0 : 2;
}

int cmd_plot(const CliConfig& cfg) {
    ExampleSpec spec = spec_from_config(cfg);
    double eps = spec.eps_list.front();
    int n = spec.n_list.front();

    SolveOptions so;
    so.mode = spec.mode;
    so.n1 = spec.n1;
    so.parallel_duals = !cfg.serial;
    GridSolution sol = pgfem_solve(make_bvp(spec, eps), n, so);

    std::vector<PlotSeries> series;
    if (spec.exact_solution) {
        Expression u = *spec.exact_solution;
        PlotSeries ref{"reference (exact)", {}, {}};
        int m = 2048;
        for (int i = 0; i <= m; ++i) {
            double x = spec.x_left + (spec.x_right - spec.x_left) * i / m;
            ref.x.push_back(x);
            ref.y.push_back(u.eval(x, eps));
        }
        series.push_back(std::move(ref));
    } else {
        SolveOptions rso;
        rso.mode = DualMode::Exact;
        rso.n1 = spec.n1;
        rso.parallel_duals = !cfg.serial;
        GridSolution ref = pgfem_solve(make_bvp(spec, eps), spec.ref_n, rso);
        series.push_back({"reference (N=" + std::to_string(spec.ref_n) + ")", ref.partition.nodes,
                          ref.values});
    }
    series.push_back({"pgfem (N=" + std::to_string(n) + ")", sol.partition.nodes, sol.values});
    if (cfg.baseline == "shishkin") {
        GridSolution base = upwind_shishkin_solve(make_bvp(spec, eps), n);
        series.push_back({"upwind/shishkin (N=" + std::to_string(n) + ")", base.partition.nodes,
                          base.values});
    }

    BoundaryValueProblem bvp = make_bvp(spec, eps);
    std::vector<SingularPoint> singulars =
        classify_singular_points(bvp, find_turning_points(bvp, 4096));
    std::ostringstream title;
    title << spec.id << " solutions, eps=" << eps;
    auto files = write_solution_plots(out_path(cfg, spec.id), title.str(), series, singulars,
                                      spec.x_left, spec.x_right);
    for (const std::string& f : files) std::printf("wrote %s\n", f.c_str());
    return 0;
}

int cmd_diagnose(const CliConfig& cfg) {
    ExampleSpec spec = spec_from_config(cfg);
    if (spec.eps_list.size() < 2)
        throw ConfigError("diagnose needs two or more eps values (--eps)");
    int n = spec.n_list.front();
    SolveOptions so;
    so.mode = spec.mode;
    so.n1 = spec.n1;
    so.parallel_duals = !cfg.serial;

    std::vector<GridSolution> sols;
    for (double eps : spec.eps_list) sols.push_back(pgfem_solve(make_bvp(spec, eps), n, so));

    BoundaryValueProblem bvp = make_bvp(spec, spec.eps_list.front());
    std::vector<SingularPoint> singulars =
        classify_singular_points(bvp, find_turning_points(bvp, 4096));
    auto stats = derivative_bound_diagnostic(sols, singulars);

    std::printf("max |(x - s) Du_h| per singular point (N=%d):\n", n);
    for (const auto& [loc, per_eps] : stats) {
        std::printf("  s = %-10.6g:", loc);
        for (const auto& [eps, v] : per_eps) std::printf("  eps=%g: %.6g", eps, v);
        std::printf("\n");
    }
    return 0;
}

int cmd_validate(const CliConfig& cfg) {
    ExampleSpec spec = spec_from_config(cfg);
    double eps = spec.eps_list.front();
    BoundaryValueProblem bvp = make_bvp(spec, eps);
    ValidationReport rep = validate_problem(bvp, 2048);
    std::printf("min(b - p') over sample grid: %.10g\n", rep.gamma0_estimate);
    std::printf("condition b - p' >= gamma0 > 0: %s\n", rep.condition_ok ? "holds" : "VIOLATED");
    if (!rep.violations.empty()) {
        std::printf("violated near %zu sample points, first few:", rep.violations.size());
        for (std::size_t i = 0; i < std::min<std::size_t>(5, rep.violations.size()); ++i)
            std::printf(" %.6g", rep.violations[i]);
        std::printf("\n");
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Petrov-Galerkin solver for singularly perturbed turning point problems"};
    app.require_subcommand(1);

    CliConfig cfg;
    auto add_common = [&cfg](CLI::App* cmd) {
        cmd->add_option("--example", cfg.example, "built-in example: ex1, ex2 or ex3");
        cmd->add_option("--p", cfg.p_text, "convection coefficient p(x) (custom problem)");
        cmd->add_option("--b", cfg.b_text, "reaction coefficient b(x)");
        cmd->add_option("--f", cfg.f_text, "right-hand side f(x)");
        cmd->add_option("--uL", cfg.u_left, "left Dirichlet value");
        cmd->add_option("--uR", cfg.u_right, "right Dirichlet value");
        cmd->add_option("--domain", cfg.domain, "interval 'a,b'");
        cmd->add_option("--eps", cfg.eps_csv, "comma list of eps values");
        cmd->add_option("--n", cfg.n_csv, "comma list of N values");
        cmd->add_option("--duals", cfg.duals, "test functions: exact | tfpm");
        cmd->add_option("--n1", cfg.n1, "TFPM subintervals per element");
        cmd->add_option("--ref-n", cfg.ref_n, "reference grid size");
        cmd->add_option("--out", cfg.out_dir, "output directory");
        cmd->add_option("--baseline", cfg.baseline, "extra baseline: shishkin");
        cmd->add_flag("--waive-condition", cfg.waive, "proceed although b - p' dips below 0");
        cmd->add_flag("--serial", cfg.serial, "disable the OpenMP dual construction");
    };

    auto* solve = app.add_subcommand("solve", "single run, write the nodal solution");
    auto* table = app.add_subcommand("table", "(eps, N) sweep with CSV error tables");
    auto* plot = app.add_subcommand("plot", "solution overlay and magnification SVGs");
    auto* diagnose = app.add_subcommand("diagnose", "derivative-bound statistics across eps");
    auto* validate = app.add_subcommand("validate", "report on the b - p' condition");
    for (auto* c : {solve, table, plot, diagnose, validate}) add_common(c);

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed()) return cmd_solve(cfg);
        if (table->parsed()) return cmd_table(cfg);
        if (plot->parsed()) return cmd_plot(cfg);
        if (diagnose->parsed()) return cmd_diagnose(cfg);
        if (validate->parsed()) return cmd_validate(cfg);
    } catch (const tpfem::ConfigError& e) {
        std::fprintf(stderr, "configuration error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 2;
    }
    return 1;
}
