// Config-driven runner for the verification experiments. Every subcommand
// reads one JSON config (flags > file > defaults), emits a JSON report with
// each check's measured value and tolerance, and a CSV table with fixed
// headers and 12-significant-digit values.
//
// Exit codes: 0 all checks pass, 1 check failure, 2 config/schema violation,
// 3 numerical failure.

#include <algorithm>
#include <chrono>
#include <clocale>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "qdopt/bayes.hpp"
#include "qdopt/json_io.hpp"
#include "qdopt/measurement.hpp"
#include "qdopt/shannon.hpp"

using nlohmann::json;
using namespace qdopt;

namespace {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

struct Check {
    std::string name;
    double measured;
    double tolerance;
    std::string comparator;  // "<=", ">=", "<"
    bool pass;
};

Check check_le(std::string name, double measured, double tol) {
    return {std::move(name), measured, tol, "<=", measured <= tol};
}
Check check_ge(std::string name, double measured, double tol) {
    return {std::move(name), measured, tol, ">=", measured >= tol};
}
Check check_lt(std::string name, double measured, double tol) {
    return {std::move(name), measured, tol, "<", measured < tol};
}

struct RunOutput {
    std::vector<Check> checks;
    std::vector<std::string> csv_lines;  // header first
    json extra;                          // command-specific report payload
};

// ---------------------------------------------------------------------------
// config schema

const std::map<std::string, std::set<std::string>>& allowed_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"verify-ml",
         {"command", "dim", "L", "beta_extent", "beta_step", "tol_residual", "tol_psd", "output"}},
        {"discriminate",
         {"command", "dim", "alpha", "prior0", "max_iters", "fp_tol", "match_tol", "cert_tol",
          "output"}},
        {"info",
         {"command", "dim", "S", "L", "step", "sigma_mult", "tol_info", "perturb_scale",
          "perturb_count", "perturb_slack", "seed", "output"}},
        {"verify-local-opt",
         {"command", "dim", "S", "L", "beta_extent", "beta_step", "tol_psd", "tol_spectrum",
          "validate_tol", "output"}},
        {"verify-ineq9", {"command", "cases", "output"}},
        {"povm-audit",
         {"command", "file", "extent", "step", "dim", "tol_psd", "level0_tol", "output"}},
    };
    return keys;
}

json default_config(const std::string& command) {
    json c{{"command", command}};
    if (command == "verify-ml") {
        c["dim"] = 40;
        c["L"] = 1.0;
        c["beta_extent"] = 2.0;
        c["beta_step"] = 0.5;
        c["tol_residual"] = 1e-6;
        c["tol_psd"] = 1e-9;
    } else if (command == "discriminate") {
        c["dim"] = 30;
        c["alpha"] = 0.5;
        c["prior0"] = 0.5;
        c["max_iters"] = 5000;
        c["fp_tol"] = 1e-12;
        c["match_tol"] = 1e-6;
        c["cert_tol"] = 1e-8;
    } else if (command == "info") {
        c["dim"] = 60;
        c["S"] = 1.0;
        c["L"] = 1.0;
        c["step"] = 0.2;
        c["sigma_mult"] = 6.0;
        c["tol_info"] = 1e-3;
        c["perturb_scale"] = 0.0;
        c["perturb_count"] = 20;
        c["perturb_slack"] = 2e-3;
        c["seed"] = 20240501;
    } else if (command == "verify-local-opt") {
        c["dim"] = 40;
        c["S"] = 1.0;
        c["L"] = 1.0;
        c["beta_extent"] = 1.5;
        c["beta_step"] = 0.5;
        c["tol_psd"] = 1e-8;
        c["tol_spectrum"] = 1e-7;
        c["validate_tol"] = 1e-9;
    } else if (command == "verify-ineq9") {
        c["cases"] = json::array();
    } else if (command == "povm-audit") {
        c["extent"] = 6.0;
        c["step"] = 0.1;
        c["dim"] = 30;
        c["tol_psd"] = 1e-9;
        c["level0_tol"] = 1e-4;
    }
    c["output"] = json{{"report", command + "_report.json"}, {"csv", command + "_table.csv"}};
    return c;
}

void require_type(const json& v, const char* type, const std::string& key) {
    bool ok = false;
    std::string t = type;
    if (t == "number") ok = v.is_number();
    else if (t == "integer") ok = v.is_number_integer();
    else if (t == "string") ok = v.is_string();
    else if (t == "array") ok = v.is_array();
    else if (t == "object") ok = v.is_object();
    if (!ok) throw ConfigError("config key '" + key + "' must be a " + t);
}

void validate_config(const json& cfg) {
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    if (!cfg.contains("command") || !cfg["command"].is_string())
        throw ConfigError("config requires a string 'command'");
    std::string command = cfg["command"].get<std::string>();
    auto it = allowed_keys().find(command);
    if (it == allowed_keys().end()) throw ConfigError("unknown command '" + command + "'");
    for (const auto& [key, value] : cfg.items()) {
        if (!it->second.count(key))
            throw ConfigError("unknown config key '" + key + "' for command " + command);
        if (key == "dim" || key == "max_iters" || key == "perturb_count" || key == "seed")
            require_type(value, "integer", key);
        else if (key == "output") {
            require_type(value, "object", key);
            for (const auto& [ok, ov] : value.items()) {
                if (ok != "report" && ok != "csv")
                    throw ConfigError("unknown output key '" + ok + "'");
                require_type(ov, "string", "output." + ok);
            }
        } else if (key == "cases") {
            require_type(value, "array", key);
            for (const auto& cs : value) {
                if (!cs.is_object() || !cs.contains("h") || !cs.contains("n_max"))
                    throw ConfigError("each inequality case needs 'h' and 'n_max'");
                for (const auto& [ck, cv] : cs.items()) {
                    if (ck == "h") require_type(cv, "array", "cases.h");
                    else if (ck == "n_max") require_type(cv, "integer", "cases.n_max");
                    else throw ConfigError("unknown case key '" + ck + "'");
                }
            }
        } else if (key == "file" || key == "command")
            require_type(value, "string", key);
        else
            require_type(value, "number", key);
    }
    if (command == "verify-ineq9" && (!cfg.contains("cases") || cfg["cases"].empty()))
        throw ConfigError("verify-ineq9 needs at least one case (--h/--nmax or config 'cases')");
}

// ---------------------------------------------------------------------------
// subcommand implementations

std::vector<Complex> square_grid(double extent, double step) {
    std::vector<Complex> pts;
    int half = int(std::floor(extent / step + 1e-9));
    for (int j = -half; j <= half; ++j)
        for (int k = -half; k <= half; ++k) pts.emplace_back(j * step, k * step);
    return pts;
}

RunOutput run_verify_ml(const json& cfg) {
    FockDim dim(cfg["dim"].get<int>());
    double noise_l = cfg["L"].get<double>();
    auto grid = square_grid(cfg["beta_extent"].get<double>(), cfg["beta_step"].get<double>());
    double tol_residual = cfg["tol_residual"].get<double>();
    double tol_psd = cfg["tol_psd"].get<double>();

    MlCertificate cert = coherent_ml_certificate(noise_l, grid, dim, tol_residual);

    RunOutput out;
    out.checks.push_back(check_le("worst_eigen_residual", cert.worst_eigen_residual, tol_residual));
    out.checks.push_back(check_ge("worst_min_eig_b", cert.worst_min_eig_b, -tol_psd));
    out.csv_lines.push_back("beta_re,beta_im,eigen_residual,min_eig_b");
    for (const auto& e : cert.entries)
        out.csv_lines.push_back(fmt12(e.beta.real()) + "," + fmt12(e.beta.imag()) + "," +
                                fmt12(e.eigen_residual) + "," + fmt12(e.min_eig_b));
    out.extra["certificate"] = ml_certificate_to_json(cert);
    return out;
}

RunOutput run_discriminate(const json& cfg) {
    FockDim dim(cfg["dim"].get<int>());
    double alpha = cfg["alpha"].get<double>();
    double p0 = cfg["prior0"].get<double>();
    double p1 = 1.0 - p0;
    double match_tol = cfg["match_tol"].get<double>();
    double cert_tol = cfg["cert_tol"].get<double>();

    DensityOperator rho0 = DensityOperator::from_pure(coherent_state(Complex(alpha, 0), dim));
    DensityOperator rho1 = DensityOperator::from_pure(coherent_state(Complex(-alpha, 0), dim));

    HelstromResult helstrom = helstrom_binary(p0, rho0, p1, rho1);
    HypothesisEnsemble ensemble = make_min_error_ensemble({rho0, rho1}, {p0, p1});
    MinErrorSolution fixed_point =
        optimize_min_error(ensemble, cfg["max_iters"].get<int>(), cfg["fp_tol"].get<double>());
    double p_err_fp = 1.0 + fixed_point.risk_trace.back();  // risk = -(success probability)

    // pure-state closed form: 1/2 (1 - sqrt(1 - 4 p0 p1 |<a0|a1>|^2))
    double overlap2 = std::exp(-4.0 * alpha * alpha);
    double p_err_closed = 0.5 * (1.0 - std::sqrt(1.0 - 4.0 * p0 * p1 * overlap2));

    OptimalityReport cert = optimality_check(fixed_point.povm, ensemble, cert_tol);

    // pessimal rule: swap the two Helstrom projectors
    DiscretePOVM swapped(dim,
                         std::vector<Eigen::MatrixXcd>{helstrom.povm.element(1),
                                                       helstrom.povm.element(0)},
                         {0, 1}, {1.0, 1.0});
    OptimalityReport pessimal = optimality_check(swapped, ensemble, cert_tol);
    double pessimal_min_eig = *std::min_element(pessimal.min_eig_b.begin(), pessimal.min_eig_b.end());

    double worst_rise = 0.0;
    for (std::size_t i = 1; i < fixed_point.risk_trace.size(); ++i)
        worst_rise = std::max(worst_rise,
                              fixed_point.risk_trace[i] - fixed_point.risk_trace[i - 1]);

    double cert_resid = 0.0;
    for (double r : cert.stationarity_residuals) cert_resid = std::max(cert_resid, r);
    double cert_min_eig = *std::min_element(cert.min_eig_b.begin(), cert.min_eig_b.end());

    RunOutput out;
    out.checks.push_back(check_le("abs_diff_fixed_point_vs_helstrom",
                                  std::abs(p_err_fp - helstrom.p_err), match_tol));
    out.checks.push_back(
        check_le("abs_diff_helstrom_vs_closed_form", std::abs(helstrom.p_err - p_err_closed),
                 match_tol));
    out.checks.push_back(check_le("eq1_stationarity_residual",
                                  std::max(cert_resid, cert.lambda_hermiticity), cert_tol));
    out.checks.push_back(check_ge("eq4_min_eig_b", cert_min_eig, -cert_tol));
    out.checks.push_back(check_lt("pessimal_min_eig_b", pessimal_min_eig, -cert_tol));
    out.checks.push_back(check_le("risk_trace_max_rise", worst_rise, 1e-12));

    out.csv_lines.push_back("quantity,value");
    out.csv_lines.push_back("p_err_helstrom," + fmt12(helstrom.p_err));
    out.csv_lines.push_back("p_err_fixed_point," + fmt12(p_err_fp));
    out.csv_lines.push_back("p_err_closed_form," + fmt12(p_err_closed));
    out.csv_lines.push_back("abs_diff," + fmt12(std::abs(p_err_fp - helstrom.p_err)));
    out.csv_lines.push_back("iterations," + fmt12(double(fixed_point.iterations)));
    out.csv_lines.push_back("min_eig_b_optimal," + fmt12(cert_min_eig));
    out.csv_lines.push_back("min_eig_b_swapped," + fmt12(pessimal_min_eig));

    out.extra["optimality"] = optimality_report_to_json(cert);
    out.extra["pessimal"] = optimality_report_to_json(pessimal);
    out.extra["risk_trace"] = fixed_point.risk_trace;
    out.extra["converged"] = fixed_point.converged;
    return out;
}

RunOutput run_info(const json& cfg) {
    FockDim dim(cfg["dim"].get<int>());
    ChannelParams params = derive_channel_matrices(cfg["S"].get<double>(), cfg["L"].get<double>());
    GaussianInfoOptions opt;
    opt.step = cfg["step"].get<double>();
    opt.sigma_mult = cfg["sigma_mult"].get<double>();
    double tol_info = cfg["tol_info"].get<double>();
    double scale = cfg["perturb_scale"].get<double>();

    RunOutput out;
    out.csv_lines.push_back("quantity,value");
    double i_analytic = gaussian_heterodyne_info(params);

    if (scale == 0.0) {
        InfoEstimate numeric = heterodyne_info_numeric(params, dim, opt);
        out.checks.push_back(
            check_le("abs_err_vs_analytic", std::abs(numeric.value - i_analytic), tol_info));
        out.csv_lines.push_back("i_numeric," + fmt12(numeric.value));
        out.csv_lines.push_back("i_analytic," + fmt12(i_analytic));
        out.csv_lines.push_back("abs_err," + fmt12(std::abs(numeric.value - i_analytic)));
        out.csv_lines.push_back("error_budget," + fmt12(numeric.error_budget));
        out.extra["info"] = info_estimate_to_json(numeric);
    } else {
        PerturbationStudy study = info_of_heterodyne_vs_perturbed(
            params, scale, cfg["perturb_count"].get<int>(),
            std::uint64_t(cfg["seed"].get<long long>()), dim, opt);
        out.checks.push_back(check_le("abs_err_vs_analytic",
                                      std::abs(study.coherent.value - i_analytic), tol_info));
        out.checks.push_back(
            check_le("worst_perturbed_excess", study.worst_excess(),
                     cfg["perturb_slack"].get<double>()));
        out.csv_lines.push_back("i_coherent," + fmt12(study.coherent.value));
        out.csv_lines.push_back("i_analytic," + fmt12(i_analytic));
        out.csv_lines.push_back("worst_excess," + fmt12(study.worst_excess()));
        for (std::size_t s = 0; s < study.perturbed.size(); ++s)
            out.csv_lines.push_back("i_perturbed_" + std::to_string(s) + "," +
                                    fmt12(study.perturbed[s]));
        out.extra["info_coherent"] = info_estimate_to_json(study.coherent);
        out.extra["perturbed"] = study.perturbed;
    }
    return out;
}

RunOutput run_verify_local_opt(const json& cfg) {
    FockDim dim(cfg["dim"].get<int>());
    ChannelParams params = derive_channel_matrices(cfg["S"].get<double>(), cfg["L"].get<double>());
    auto grid = square_grid(cfg["beta_extent"].get<double>(), cfg["beta_step"].get<double>());
    double tol_psd = cfg["tol_psd"].get<double>();
    double tol_spectrum = cfg["tol_spectrum"].get<double>();
    double validate_tol = cfg["validate_tol"].get<double>();

    double validation = validate_variation_construction(params, FockDim(12));
    LocalOptimalityCertificate cert = local_optimality_certificate(params, grid, dim, tol_psd);

    RunOutput out;
    out.checks.push_back(check_le("d_construction_validation", validation, validate_tol));
    out.checks.push_back(check_ge("worst_min_eig_b", cert.worst_min_eig_b, -tol_psd));
    out.checks.push_back(check_ge("worst_min_eig_d", cert.worst_min_eig_d, -tol_psd));
    out.checks.push_back(
        check_ge("worst_min_eig_b_minus_d", cert.worst_min_eig_b_minus_d, -tol_psd));
    out.checks.push_back(check_le("worst_stationarity", cert.worst_stationarity, tol_psd));
    out.checks.push_back(check_le("spectrum_deviation", cert.spectrum_deviation, tol_spectrum));

    out.csv_lines.push_back("beta_re,beta_im,min_eig_b,min_eig_d,min_eig_b_minus_d,stationarity");
    for (const auto& e : cert.entries)
        out.csv_lines.push_back(fmt12(e.beta.real()) + "," + fmt12(e.beta.imag()) + "," +
                                fmt12(e.min_eig_b) + "," + fmt12(e.min_eig_d) + "," +
                                fmt12(e.min_eig_b_minus_d) + "," + fmt12(e.stationarity_residual));
    json slim = local_certificate_to_json(cert);
    slim.erase("entries");  // per-point data lives in the CSV; keep the report compact
    out.extra["certificate"] = slim;
    return out;
}

RunOutput run_verify_ineq9(const json& cfg) {
    RunOutput out;
    out.csv_lines.push_back("h,n_max,holds,worst_margin,equality_count");
    int case_index = 0;
    for (const auto& cs : cfg["cases"]) {
        std::vector<double> h = cs["h"].get<std::vector<double>>();
        int n_max = cs["n_max"].get<int>();
        OccupationCheck check = occupation_inequality_check(h, n_max);

        // expected equality set: every tuple with sum n in {0, 1}
        long long expected_equalities = 1 + (long long)h.size();
        bool equality_exact = check.holds && (long long)check.equality_cases.size() == expected_equalities;
        for (const auto& tuple : check.equality_cases) {
            int total = 0;
            for (int n : tuple) total += n;
            if (total > 1) equality_exact = false;
        }

        std::string tag = "case" + std::to_string(case_index++);
        out.checks.push_back(check_ge(tag + "_worst_margin", check.worst_margin, 0.0));
        out.checks.push_back(
            check_le(tag + "_equality_set_mismatch", equality_exact ? 0.0 : 1.0, 0.0));

        std::string h_str;
        for (std::size_t i = 0; i < h.size(); ++i)
            h_str += (i ? ";" : "") + fmt12(h[i]);
        out.csv_lines.push_back(h_str + "," + std::to_string(n_max) + "," +
                                (check.holds ? "1" : "0") + "," + fmt12(check.worst_margin) + "," +
                                std::to_string(check.equality_cases.size()));
    }
    return out;
}

RunOutput run_povm_audit(const json& cfg) {
    double tol_psd = cfg["tol_psd"].get<double>();
    double level0_tol = cfg["level0_tol"].get<double>();

    DiscretePOVM povm = [&] {
        if (cfg.contains("file")) {
            std::ifstream in(cfg["file"].get<std::string>());
            if (!in) throw ConfigError("povm-audit: cannot open " + cfg["file"].get<std::string>());
            json j;
            in >> j;
            return povm_from_json(j);
        }
        return heterodyne_grid_povm(cfg["extent"].get<double>(), cfg["step"].get<double>(),
                                    FockDim(cfg["dim"].get<int>()));
    }();

    IdentityResolutionReport report = identity_resolution_report(povm);
    double min_eig = povm.min_element_eigenvalue();

    RunOutput out;
    out.checks.push_back(check_ge("min_element_eigenvalue", min_eig, -tol_psd));
    out.checks.push_back(check_le("level0_deficit", report.level_deficit(0), level0_tol));
    out.csv_lines.push_back("kind,index,value");
    for (Eigen::Index n = 0; n < report.level_deficit.size(); ++n)
        out.csv_lines.push_back("level_deficit," + std::to_string(n) + "," +
                                fmt12(report.level_deficit(n)));
    out.csv_lines.push_back("max_offdiagonal,0," + fmt12(report.max_offdiagonal));
    out.csv_lines.push_back("n_eff,0," + fmt12(double(report.n_eff)));
    out.csv_lines.push_back("min_element_eigenvalue,0," + fmt12(min_eig));
    out.extra["identity_report"] = identity_report_to_json(report);
    out.extra["outcomes"] = povm.size();
    return out;
}

// ---------------------------------------------------------------------------

void write_outputs(const json& cfg, const RunOutput& out, bool pass, double wall_s) {
    json report;
    report["command"] = cfg["command"];
    report["config"] = cfg;
    report["checks"] = json::array();
    for (const auto& c : out.checks)
        report["checks"].push_back({{"name", c.name},
                                    {"measured", c.measured},
                                    {"tolerance", c.tolerance},
                                    {"comparator", c.comparator},
                                    {"pass", c.pass}});
    report["pass"] = pass;
    report["wall_time_s"] = wall_s;
    report["version"] = QDOPT_VERSION;
    report["exit_status"] = pass ? 0 : 1;
    for (const auto& [k, v] : out.extra.items()) report[k] = v;

    std::ofstream rep(cfg["output"]["report"].get<std::string>());
    rep << report.dump(2) << "\n";

    std::ofstream csv(cfg["output"]["csv"].get<std::string>(), std::ios::binary);
    for (const auto& line : out.csv_lines) csv << line << "\n";
}

int run_command(json cfg) {
    validate_config(cfg);
    auto t0 = std::chrono::steady_clock::now();
    std::string command = cfg["command"].get<std::string>();

    RunOutput out;
    if (command == "verify-ml") out = run_verify_ml(cfg);
    else if (command == "discriminate") out = run_discriminate(cfg);
    else if (command == "info") out = run_info(cfg);
    else if (command == "verify-local-opt") out = run_verify_local_opt(cfg);
    else if (command == "verify-ineq9") out = run_verify_ineq9(cfg);
    else if (command == "povm-audit") out = run_povm_audit(cfg);

    bool pass = true;
    for (const auto& c : out.checks) pass = pass && c.pass;
    double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_outputs(cfg, out, pass, wall);

    for (const auto& c : out.checks)
        std::cout << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": " << fmt12(c.measured) << " "
                  << c.comparator << " " << fmt12(c.tolerance) << "\n";
    std::cout << (pass ? "PASS" : "FAIL") << " " << command << " (" << fmt12(wall) << " s)\n";
    return pass ? 0 : 1;
}

json load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    std::setlocale(LC_ALL, "C");
    CLI::App app{"qdopt: optimality certificates for boson-channel measurement strategies"};
    app.require_subcommand(1);

    std::string config_path, report_path, csv_path, povm_file;
    int dim = 0, nmax = 0, max_iters = 0, count = 0;
    long long seed = 0;
    double s_val = 0, l_val = 0, alpha = 0, prior0 = 0, beta_extent = 0, beta_step = 0;
    double extent = 0, step = 0, scale = 0;
    std::string grid_spec;
    std::vector<double> h_values;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "JSON config file; flags override its values");
        sub->add_option("--report", report_path, "report JSON path");
        sub->add_option("--csv", csv_path, "CSV table path");
        sub->add_option("--dim", dim, "Fock truncation n_max");
    };

    CLI::App* verify_ml = app.add_subcommand("verify-ml", "coherent maximum-likelihood certificate");
    add_common(verify_ml);
    verify_ml->add_option("--L", l_val, "noise covariance L >= 1");
    verify_ml->add_option("--beta-extent", beta_extent, "grid half-width");
    verify_ml->add_option("--beta-step", beta_step, "grid step");

    CLI::App* discriminate = app.add_subcommand("discriminate", "binary coherent discrimination");
    add_common(discriminate);
    discriminate->add_option("--alpha", alpha, "coherent amplitude of |±alpha>");
    discriminate->add_option("--prior", prior0, "prior of hypothesis 0");
    discriminate->add_option("--max-iters", max_iters, "fixed-point iteration cap");

    CLI::App* info = app.add_subcommand("info", "mutual information of heterodyne readout");
    add_common(info);
    info->add_option("--S", s_val, "signal covariance");
    info->add_option("--L", l_val, "noise covariance");
    info->add_option("--grid", grid_spec, "sigma_mult:step, e.g. 6:0.2");
    info->add_option("--perturb-scale", scale, "perturbation scale (0 = off)");
    info->add_option("--perturb-count", count, "number of seeded perturbations");
    info->add_option("--seed", seed, "perturbation seed");

    CLI::App* local_opt = app.add_subcommand("verify-local-opt", "second-variation certificate");
    add_common(local_opt);
    local_opt->add_option("--S", s_val, "signal covariance");
    local_opt->add_option("--L", l_val, "noise covariance");
    local_opt->add_option("--beta-extent", beta_extent, "grid half-width");
    local_opt->add_option("--beta-step", beta_step, "grid step");

    CLI::App* ineq9 = app.add_subcommand("verify-ineq9", "occupation-number inequality sweep");
    add_common(ineq9);
    ineq9->add_option("--h", h_values, "per-mode h values in [0, 1)");
    ineq9->add_option("--nmax", nmax, "occupation cap");

    CLI::App* audit = app.add_subcommand("povm-audit", "resolution-of-identity and PSD audit");
    add_common(audit);
    audit->add_option("file", povm_file, "serialized POVM JSON; omitted = heterodyne grid");
    audit->add_option("--extent", extent, "heterodyne grid extent");
    audit->add_option("--step", step, "heterodyne grid step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) ? 2 : 0;
    }

    try {
        CLI::App* sub = app.get_subcommands().front();
        std::string command = sub->get_name();
        json cfg = default_config(command);
        if (!config_path.empty()) {
            json file_cfg = load_config_file(config_path);
            for (const auto& [k, v] : file_cfg.items()) cfg[k] = v;
        }
        cfg["command"] = command;

        auto set_if = [&](const char* flag, const char* key, auto value) {
            if (sub->count(flag)) cfg[key] = value;
        };
        set_if("--dim", "dim", dim);
        set_if("--L", "L", l_val);
        set_if("--S", "S", s_val);
        set_if("--alpha", "alpha", alpha);
        set_if("--prior", "prior0", prior0);
        set_if("--max-iters", "max_iters", max_iters);
        set_if("--beta-extent", "beta_extent", beta_extent);
        set_if("--beta-step", "beta_step", beta_step);
        set_if("--perturb-scale", "perturb_scale", scale);
        set_if("--perturb-count", "perturb_count", count);
        set_if("--seed", "seed", seed);
        set_if("--extent", "extent", extent);
        set_if("--step", "step", step);
        if (sub->count("--grid")) {
            auto colon = grid_spec.find(':');
            if (colon == std::string::npos) throw ConfigError("--grid expects sigma_mult:step");
            cfg["sigma_mult"] = std::stod(grid_spec.substr(0, colon));
            cfg["step"] = std::stod(grid_spec.substr(colon + 1));
        }
        if (command == "verify-ineq9" && sub->count("--h")) {
            json cases = json::array();
            cases.push_back({{"h", h_values}, {"n_max", sub->count("--nmax") ? nmax : 200}});
            cfg["cases"] = cases;
        }
        if (command == "povm-audit" && sub->count("file")) cfg["file"] = povm_file;
        if (!report_path.empty()) cfg["output"]["report"] = report_path;
        if (!csv_path.empty()) cfg["output"]["csv"] = csv_path;

        return run_command(std::move(cfg));
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return 3;
    }
}
