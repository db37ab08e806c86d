// Batch driver: run experiments from flat key=value configs, emit table
// CSVs, residual logs and field dumps, and regenerate the smoothing-factor
// surface. Exit codes: 0 ok, 2 config error, 3 solver divergence.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <map>
#include <numbers>
#include <string>

#include "CLI11.hpp"

#include "ehl/cd.hpp"
#include "ehl/config.hpp"
#include "ehl/ehl_solver.hpp"
#include "ehl/lfa.hpp"
#include "ehl/report.hpp"

namespace fs = std::filesystem;
using namespace ehl;

namespace {

std::string output_dir(const RunConfig& cfg) {
    if (const char* env = std::getenv("EHL_OUTPUT_DIR"))
        return std::string(env);
    return cfg.get_string("run.output_dir", "out");
}

std::string ord_str(double p) {
    return std::isnan(p) ? std::string("--") : fmt_sci(p);
}

int run_linear(const RunConfig& cfg) {
    double eps = cfg.get_double("linear.eps", 1e-6);
    double kappa = cfg.get_double("linear.kappa", 1.0 / 3.0);
    double a = cfg.get_double("linear.a", 1.0);
    std::string splitting = cfg.get_string("linear.splitting", "ls0");
    int coarsest_n = cfg.get_int("linear.coarsest_n", 9);
    int levels = cfg.get_int("linear.levels", 6);
    CycleSpec spec;
    spec.nu1 = cfg.get_int("linear.nu1", 2);
    spec.nu2 = cfg.get_int("linear.nu2", 1);
    std::string cyc = cfg.get_string("linear.cycle", "V");
    if (cyc != "V" && cyc != "W") throw config_error("key 'linear.cycle': expected V or W");
    spec.cycle = cyc[0];
    spec.max_cycles = cfg.get_int("linear.max_cycles", 30);
    spec.tol = cfg.get_double("linear.tol", 1e-11);
    spec.omega = cfg.get_double("linear.omega", splitting == "ls3" ? 0.7 : 1.0);

    SplittingKind kind = parse_splitting(splitting);
    CdProblem problem = make_cd_problem(eps, kappa, coarsest_n, levels, a);
    cfg.check_all_used();

    CdReport rep = mg_solve(problem, kind, spec);

    std::string dir = output_dir(cfg);
    fs::create_directories(dir);
    std::string hash = config_hash(cfg.text());

    CsvTable orders;
    orders.header = {"N", "Linf_error", "p_inf", "L1_error", "p_1", "L2_error", "p_2"};
    for (size_t k = 0; k < rep.norms.size(); ++k) {
        int n = rep.level_points[k + 1] - 1;
        std::vector<std::string> row;
        row.push_back(std::to_string(n) + "x" + std::to_string(n));
        row.push_back(fmt_sci(rep.norms[k].linf));
        row.push_back(k == 0 ? "--" : ord_str(rep.pinf[k - 1]));
        row.push_back(fmt_sci(rep.norms[k].l1));
        row.push_back(k == 0 ? "--" : ord_str(rep.p1[k - 1]));
        row.push_back(fmt_sci(rep.norms[k].l2));
        row.push_back(k == 0 ? "--" : ord_str(rep.p2[k - 1]));
        orders.rows.push_back(std::move(row));
    }
    orders.write(dir + "/linear_orders.csv", hash);

    CsvTable resid;
    resid.header = {"level_points", "cycle", "residual_inf"};
    for (size_t k = 0; k < rep.residual_history.size(); ++k)
        for (size_t c = 0; c < rep.residual_history[k].size(); ++c)
            resid.rows.push_back({std::to_string(rep.level_points[k]),
                                  std::to_string(c), fmt_sci(rep.residual_history[k][c])});
    resid.write(dir + "/residuals.csv", hash);

    for (size_t k = 0; k < rep.wall_ms.size(); ++k)
        std::cout << "level " << rep.level_points[k] << ": " << rep.wall_ms[k] << " ms, "
                  << rep.residual_history[k].size() - 1 << " cycles, final residual "
                  << fmt_sci(rep.residual_history[k].back()) << "\n";
    if (rep.diverged) {
        std::cerr << "divergence: " << rep.message << "\n";
        return 3;
    }
    std::cout << "final p2 = " << rep.final_p2() << "\n";
    return 0;
}

int run_ehl(const RunConfig& cfg) {
    EhlConfig ec;
    double m = cfg.get_double("ehl.moes_m", 20.0);
    double l = cfg.get_double("ehl.moes_l", 10.0);
    double alpha = cfg.get_double("ehl.alpha", 1.7e-8);
    ec.physics = resolve_moes(m, l, alpha);
    double half = cfg.get_double("ehl.half_width", 2.5);
    int coarsest_n = cfg.get_int("ehl.coarsest_n", 33);
    int levels = cfg.get_int("ehl.levels", 4);
    ec.hierarchy = make_hierarchy(-half, -half, half, half, coarsest_n, levels);
    ec.limiter = parse_limiter(cfg.get_string("ehl.limiter", "kappa_fixed"),
                               cfg.get_double("ehl.kappa", 0.0));
    ec.hybrid = parse_hybrid(cfg.get_string("ehl.hybrid", "hs1"));
    ec.switch_threshold = cfg.get_double("ehl.switch_threshold", 0.6);
    ec.omega_gs = cfg.get_double("ehl.omega_gs", ec.omega_gs);
    ec.omega_jac = cfg.get_double("ehl.omega_jac", ec.omega_jac);
    ec.c_h00 = cfg.get_double("ehl.c_h00", ec.c_h00);
    ec.nu1 = cfg.get_int("ehl.nu1", 2);
    ec.nu2 = cfg.get_int("ehl.nu2", 1);
    std::string cyc = cfg.get_string("ehl.cycle", "V");
    if (cyc != "V" && cyc != "W") throw config_error("key 'ehl.cycle': expected V or W");
    ec.cycle = cyc[0];
    ec.max_stage_cycles = cfg.get_int("ehl.max_cycles", ec.max_stage_cycles);
    ec.window_radius = cfg.get_int("ehl.window_radius", 1);
    ec.mlmi_order = cfg.get_int("ehl.mlmi_order", 6);
    ec.mlmi_m = cfg.get_int("ehl.mlmi_m", 4);
    ec.use_direct_film = cfg.get_bool("ehl.direct_film", false);
    std::string stat = cfg.get_string("ehl.line_stat", "min");
    if (stat == "min") ec.line_stat = LineStat::minimum;
    else if (stat == "mean") ec.line_stat = LineStat::mean;
    else throw config_error("key 'ehl.line_stat': expected min or mean");
    ec.tol_pde = cfg.get_double("ehl.tol_pde", ec.tol_pde);
    ec.tol_force = cfg.get_double("ehl.tol_force", ec.tol_force);
    ec.h00_init = cfg.get_double("ehl.h00_init", ec.h00_init);
    ec.coarse_stage_sweeps = cfg.get_int("ehl.coarse_stage_sweeps", ec.coarse_stage_sweeps);
    cfg.check_all_used();

    auto [state, rep] = solve_ehl(ec);

    std::string dir = output_dir(cfg);
    fs::create_directories(dir);
    std::string hash = config_hash(cfg.text());

    CsvTable lev;
    lev.header = {"level", "N", "H_m", "H_c", "force_rel_err", "cycles"};
    for (size_t k = 0; k < rep.levels.size(); ++k) {
        const EhlLevelRow& r = rep.levels[k];
        lev.rows.push_back({std::to_string(k + 1),
                            std::to_string(r.points - 1) + "x" + std::to_string(r.points - 1),
                            fmt_sci(r.h_min), fmt_sci(r.h_center), fmt_sci(r.force_err),
                            std::to_string(r.cycles)});
    }
    lev.write(dir + "/ehl_levels.csv", hash);

    CsvTable orders;
    orders.header = {"N", "Linf_error", "p_inf", "L1_error", "p_1", "L2_error", "p_2"};
    for (size_t k = 0; k < rep.norms.size(); ++k) {
        int n = rep.levels[k + 1].points - 1;
        std::vector<std::string> row;
        row.push_back(std::to_string(n) + "x" + std::to_string(n));
        row.push_back(fmt_sci(rep.norms[k].linf));
        row.push_back(k == 0 ? "--" : ord_str(rep.pinf[k - 1]));
        row.push_back(fmt_sci(rep.norms[k].l1));
        row.push_back(k == 0 ? "--" : ord_str(rep.p1[k - 1]));
        row.push_back(fmt_sci(rep.norms[k].l2));
        row.push_back(k == 0 ? "--" : ord_str(rep.p2[k - 1]));
        orders.rows.push_back(std::move(row));
    }
    orders.write(dir + "/ehl_orders.csv", hash);

    CsvTable resid;
    resid.header = {"stage_points", "cycle", "lcp_residual"};
    for (size_t k = 0; k < rep.residual_history.size(); ++k)
        for (size_t c = 0; c < rep.residual_history[k].size(); ++c)
            resid.rows.push_back({std::to_string(rep.levels[k].points), std::to_string(c + 1),
                                  fmt_sci(rep.residual_history[k][c])});
    resid.write(dir + "/residuals.csv", hash);

    emit_field(state.u, dir + "/pressure.dat");
    emit_field(state.H, dir + "/film.dat");

    for (size_t k = 0; k < rep.levels.size(); ++k)
        std::cout << "level " << k + 1 << " (" << rep.levels[k].points << "^2): H_m = "
                  << fmt_sci(rep.levels[k].h_min) << ", H_c = " << fmt_sci(rep.levels[k].h_center)
                  << ", cycles = " << rep.levels[k].cycles
                  << ", wall = " << rep.wall_ms[k] << " ms\n";
    if (rep.diverged) {
        std::cerr << "divergence: " << rep.message << "\n";
        return 3;
    }
    return 0;
}

int run_lfa_surface(double eps, double kappa, double h, double a, int samples,
                    const std::string& out_path) {
    double alpha1 = eps / (h * h);
    double beta = a / h;
    SymbolReport rep = smoothing_factor_kappa(alpha1, beta, kappa, samples);

    CsvTable surf;
    surf.header = {"theta1", "theta2", "S_abs"};
    const double pi = std::numbers::pi;
    int n2 = 2 * samples;
    for (int i = 1; i <= n2; ++i) {
        double t1 = -pi + i * pi / samples;
        for (int j = 1; j <= n2; ++j) {
            double t2 = -pi + j * pi / samples;
            double v = std::abs(kappa_symbol_closed(alpha1, beta, kappa, t1, t2));
            surf.rows.push_back({fmt_sci(t1), fmt_sci(t2), fmt_sci(v)});
        }
    }
    std::string key = "lfa eps=" + fmt_sci(eps) + " kappa=" + fmt_sci(kappa) +
                      " h=" + fmt_sci(h) + " a=" + fmt_sci(a);
    fs::path p(out_path);
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    surf.write(out_path, config_hash(key));
    std::cout << "mu = " << rep.mu << " at theta = (" << rep.argmax_t1 << ", "
              << rep.argmax_t2 << "), skipped " << rep.skipped << " samples\n";
    return 0;
}

int run_config(const RunConfig& cfg) {
    std::string experiment = cfg.require_string("run.experiment");
    (void)cfg.get_string("run.output_dir", "out");
    (void)cfg.get_int("run.seed", 0);
    if (experiment == "linear_cd") return run_linear(cfg);
    if (experiment == "ehl") return run_ehl(cfg);
    if (experiment == "lfa") {
        double eps = cfg.get_double("lfa.eps", 1e-6);
        double kappa = cfg.get_double("lfa.kappa", 1.0 / 3.0);
        double h = cfg.get_double("lfa.h", 1.0 / 64.0);
        double a = cfg.get_double("lfa.a", 1.0);
        int samples = cfg.get_int("lfa.samples", 64);
        cfg.check_all_used();
        return run_lfa_surface(eps, kappa, h, a, samples,
                               output_dir(cfg) + "/lfa_surface.csv");
    }
    throw config_error("key 'run.experiment': unknown experiment '" + experiment + "'");
}

const std::map<std::string, std::string>& bundled_cases() {
    static const std::map<std::string, std::string> cases = {
        {"linear_ls0_k13",
         "[run]\nexperiment = linear_cd\noutput_dir = out/linear_ls0_k13\n"
         "[linear]\nsplitting = ls0\nkappa = 0.333333333333333\neps = 1e-6\nlevels = 6\n"},
        {"linear_ls1_k13",
         "[run]\nexperiment = linear_cd\noutput_dir = out/linear_ls1_k13\n"
         "[linear]\nsplitting = ls1\nkappa = 0.333333333333333\neps = 1e-6\nlevels = 6\n"},
        {"linear_ls0_k0",
         "[run]\nexperiment = linear_cd\noutput_dir = out/linear_ls0_k0\n"
         "[linear]\nsplitting = ls0\nkappa = 0.0\neps = 1e-6\nlevels = 6\n"},
        {"linear_ls1_k0",
         "[run]\nexperiment = linear_cd\noutput_dir = out/linear_ls1_k0\n"
         "[linear]\nsplitting = ls1\nkappa = 0.0\neps = 1e-6\nlevels = 6\n"},
        {"linear_ls0_km1",
         "[run]\nexperiment = linear_cd\noutput_dir = out/linear_ls0_km1\n"
         "[linear]\nsplitting = ls0\nkappa = -1.0\neps = 1e-6\nlevels = 6\n"},
        {"linear_ls1_km1",
         "[run]\nexperiment = linear_cd\noutput_dir = out/linear_ls1_km1\n"
         "[linear]\nsplitting = ls1\nkappa = -1.0\neps = 1e-6\nlevels = 6\n"},
        {"linear_dc_k0",
         "[run]\nexperiment = linear_cd\noutput_dir = out/linear_dc_k0\n"
         "[linear]\nsplitting = defect_correction\nkappa = 0.0\neps = 1e-6\nlevels = 6\n"},
        {"ehl_m20_l10",
         "[run]\nexperiment = ehl\noutput_dir = out/ehl_m20_l10\n"
         "[ehl]\nmoes_m = 20\nmoes_l = 10\nlevels = 4\n"},
        {"ehl_m50_l10",
         "[run]\nexperiment = ehl\noutput_dir = out/ehl_m50_l10\n"
         "[ehl]\nmoes_m = 50\nmoes_l = 10\nlevels = 4\n"},
        {"ehl_m100_l10",
         "[run]\nexperiment = ehl\noutput_dir = out/ehl_m100_l10\n"
         "[ehl]\nmoes_m = 100\nmoes_l = 10\nlevels = 4\n"},
        {"ehl_m1000_l10",
         "[run]\nexperiment = ehl\noutput_dir = out/ehl_m1000_l10\n"
         "[ehl]\nmoes_m = 1000\nmoes_l = 10\ncoarsest_n = 65\nlevels = 3\n"},
        {"lfa_fig4",
         "[run]\nexperiment = lfa\noutput_dir = out/lfa_fig4\n"
         "[lfa]\neps = 1e-6\nkappa = 0.333333333333333\nh = 0.015625\nsamples = 64\n"},
    };
    return cases;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"TVD-splitting multigrid solver for the EHL point contact and its "
                 "linear convection-diffusion calibration problem"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* run = app.add_subcommand("run", "run an experiment from a config file");
    run->add_option("config", config_path, "path to key=value config")->required();

    double eps = 1e-6, kappa = 1.0 / 3.0, h = 1.0 / 64.0, a = 1.0;
    int samples = 64;
    std::string lfa_out = "out/lfa_surface.csv";
    CLI::App* lfa = app.add_subcommand("lfa", "emit the smoothing-factor surface CSV");
    lfa->add_option("--eps", eps, "diffusion coefficient");
    lfa->add_option("--kappa", kappa, "kappa-scheme parameter");
    lfa->add_option("--h", h, "mesh size");
    lfa->add_option("--a", a, "convection speed");
    lfa->add_option("--samples", samples, "theta samples per half-axis");
    lfa->add_option("--out", lfa_out, "output CSV path");

    std::string case_name;
    CLI::App* tables = app.add_subcommand("tables", "run a bundled named case");
    tables->add_option("--case", case_name, "bundled case name")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed())
            return run_config(RunConfig::from_file(config_path));
        if (lfa->parsed())
            return run_lfa_surface(eps, kappa, h, a, samples, lfa_out);
        if (tables->parsed()) {
            auto it = bundled_cases().find(case_name);
            if (it == bundled_cases().end()) {
                std::cerr << "config error: unknown case '" << case_name << "'; known cases:";
                for (const auto& [k, v] : bundled_cases()) std::cerr << " " << k;
                std::cerr << "\n";
                return 2;
            }
            return run_config(RunConfig::from_text(it->second));
        }
    } catch (const config_error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    }
    return 0;
}
