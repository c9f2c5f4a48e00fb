#include <CLI11.hpp>
#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "statmanifold/curvature.hpp"
#include "statmanifold/geodesic.hpp"
#include "statmanifold/spec_io.hpp"

namespace sm = statmanifold;
using sm::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitDomain = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitIo = 3;

sm::VectorXd parse_vector(const std::string& csv) {
    std::vector<double> vals;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        try {
            vals.push_back(std::stod(tok));
        } catch (const std::exception&) {
            throw sm::IoError("cannot parse \"" + tok + "\" as a number in \"" + csv + "\"");
        }
    }
    sm::VectorXd v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t i = 0; i < vals.size(); ++i) v[static_cast<Eigen::Index>(i)] = vals[i];
    return v;
}

std::vector<long> parse_longs(const std::string& csv) {
    std::vector<long> vals;
    std::stringstream ss(csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) vals.push_back(std::stol(tok));
    return vals;
}

struct Output {
    std::string path;  // empty = stdout
    void write(const std::string& text) const {
        if (path.empty()) {
            std::cout << text;
            return;
        }
        std::ofstream out(path);
        if (!out) throw sm::IoError("cannot open output file \"" + path + "\"");
        out << text;
    }
};

// knobs shared by every subcommand; defaults are recorded in the header
struct CommonOpts {
    std::string family_path;
    std::string at;
    std::string output;
    std::string format = "json";
    double tol = 1e-10;
    long mc_samples = 1000000;
    std::uint64_t seed = 20240101;

    sm::IntegrationConfig integration() const {
        sm::IntegrationConfig cfg;
        cfg.rel_tol = tol;
        cfg.mc_samples = mc_samples;
        cfg.seed = seed;
        return cfg;
    }

    json config_json() const {
        json c;
        c["family"] = family_path;
        c["at"] = at;
        c["tol"] = tol;
        c["mc_samples"] = mc_samples;
        c["seed"] = seed;
        c["format"] = format;
        const char* threads = std::getenv("STATMANIFOLD_THREADS");
        c["threads"] = threads ? std::atoi(threads) : 1;
        return c;
    }
};

void add_common(CLI::App* cmd, CommonOpts& o, bool needs_family = true) {
    cmd->set_help_flag("--help", "print help");
    if (needs_family)
        cmd->add_option("--family", o.family_path, "family spec JSON path")->required();
    cmd->add_option("--at", o.at, "parameter vector, comma separated");
    cmd->add_option("--output", o.output, "output path (default stdout)");
    cmd->add_option("--format", o.format, "json or csv")
        ->check(CLI::IsMember({"json", "csv"}));
    cmd->add_option("--tol", o.tol, "integration relative tolerance");
    cmd->add_option("--mc-samples", o.mc_samples, "Monte Carlo sample budget");
    cmd->add_option("--seed", o.seed, "random seed");
}

sm::VectorXd resolve_at(const CommonOpts& o, const sm::ParametricFamily& fam) {
    if (o.at.empty()) return fam.domain().center();
    sm::VectorXd v = parse_vector(o.at);
    if (v.size() != fam.dim())
        throw sm::DimensionError("--at has " + std::to_string(v.size()) +
                                 " entries, family dimension is " + std::to_string(fam.dim()));
    return v;
}

void emit_json(const Output& out, json report) { out.write(report.dump(2) + "\n"); }

// ---- subcommand bodies ----------------------------------------------------

int run_validate(const CommonOpts& o) {
    sm::ParametricFamily fam = sm::load_family(o.family_path);
    sm::VectorXd xi = resolve_at(o, fam);
    auto d = sm::validate_family(fam, xi);
    json r = sm::report_header("validate", o.config_json());
    r["family"] = fam.name();
    r["at"] = sm::to_json(xi);
    r["normalization_residual"] = d.normalization_residual;
    r["score_mean"] = sm::to_json(d.score_mean);
    r["score_mean_max_abs"] = d.score_mean_max_abs;
    r["support_invariant"] = d.support_invariant;
    if (!d.support_invariant) r["support_mismatch_x"] = d.support_mismatch_x;
    r["score_fd_max_deviation"] = d.score_fd_max_deviation;
    emit_json(Output{o.output}, std::move(r));
    return kExitOk;
}

int run_fisher(const CommonOpts& o, const std::string& form) {
    sm::ParametricFamily fam = sm::load_family(o.family_path);
    sm::VectorXd xi = resolve_at(o, fam);
    auto cfg = o.integration();
    sm::FisherMatrix g = form == "hessian" ? sm::fisher_matrix_hessian(fam, xi, cfg)
                                           : sm::fisher_matrix(fam, xi, cfg);
    json c = o.config_json();
    c["form"] = form;
    json r = sm::report_header("fisher", std::move(c));
    r["at"] = sm::to_json(xi);
    r["entries"] = sm::to_json(g.entries);
    r["inverse"] = sm::to_json(sm::inverse_metric(g));
    r["condition_number"] = sm::condition_number(g);
    emit_json(Output{o.output}, std::move(r));
    return kExitOk;
}

int run_connection(const CommonOpts& o, double alpha) {
    sm::ParametricFamily fam = sm::load_family(o.family_path);
    sm::VectorXd xi = resolve_at(o, fam);
    auto cfg = o.integration();
    auto gamma = sm::alpha_connection(fam, xi, alpha, cfg);
    auto g = sm::fisher_matrix(fam, xi, cfg);
    auto skew = sm::skewness_tensor(fam, xi, cfg);
    json c = o.config_json();
    c["alpha"] = alpha;
    json r = sm::report_header("connection", std::move(c));
    r["at"] = sm::to_json(xi);
    r["alpha"] = alpha;
    r["gamma_first_kind"] = sm::to_json(gamma.first_kind);
    r["gamma_second_kind"] = sm::to_json(sm::christoffel_second_kind(gamma, g));
    r["skewness"] = sm::to_json(skew.entries);
    r["skewness_raw_asymmetry"] = skew.raw_asymmetry;
    emit_json(Output{o.output}, std::move(r));
    return kExitOk;
}

int run_curvature(const CommonOpts& o, double alpha, double h) {
    sm::ParametricFamily fam = sm::load_family(o.family_path);
    sm::VectorXd xi = resolve_at(o, fam);
    auto cfg = o.integration();
    auto riem = sm::riemann_tensor(fam, xi, alpha, h, cfg);
    auto gamma = sm::alpha_connection(fam, xi, alpha, cfg);
    json c = o.config_json();
    c["alpha"] = alpha;
    c["h"] = riem.step;
    json r = sm::report_header("curvature", std::move(c));
    r["at"] = sm::to_json(xi);
    r["alpha"] = alpha;
    r["riemann_max_abs"] = riem.up.max_abs();
    if (fam.dim() == 2) {
        auto g = sm::fisher_matrix(fam, xi, cfg);
        sm::VectorXd e1 = sm::VectorXd::Unit(2, 0), e2 = sm::VectorXd::Unit(2, 1);
        r["sectional"] = sm::sectional_curvature(riem, g, e1, e2);
        if (fam.name() == "gaussian")
            r["sectional_note"] =
                "engine convention gives -1/2 for the Gaussian family; texts that "
                "quote -2 use a different curvature normalization";
    }
    json verdicts;
    verdicts["gamma_max_abs"] = gamma.first_kind.max_abs();
    verdicts["gamma_threshold"] = 1e-5;
    verdicts["riemann_threshold"] = 1e-4;
    verdicts["flat_in_coefficients"] = gamma.first_kind.max_abs() < 1e-5;
    verdicts["flat_in_curvature"] = riem.up.max_abs() < 1e-4;
    r["verdicts"] = std::move(verdicts);
    emit_json(Output{o.output}, std::move(r));
    return kExitOk;
}

int run_geodesic(const CommonOpts& o, const std::string& from, const std::string& velocity,
                 double alpha, double t_end, double dt) {
    sm::ParametricFamily fam = sm::load_family(o.family_path);
    sm::VectorXd xi0 = parse_vector(from);
    sm::VectorXd v0 = parse_vector(velocity);
    sm::GeodesicConfig gcfg;
    gcfg.dt = dt;
    gcfg.integration = o.integration();
    auto path = sm::integrate_geodesic(fam, xi0, v0, alpha, t_end, gcfg);

    json c = o.config_json();
    c["from"] = from;
    c["velocity"] = velocity;
    c["alpha"] = alpha;
    c["t_end"] = t_end;
    c["dt"] = dt > 0 ? dt : t_end / 1000.0;
    json summary = sm::report_header("geodesic", std::move(c));
    summary["status"] = sm::to_string(path.status);
    summary["endpoint"] = sm::to_json(path.endpoint().xi);
    summary["endpoint_velocity"] = sm::to_json(path.endpoint().velocity);

    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "t";
        for (int i = 0; i < fam.dim(); ++i) csv << ",xi_" << (i + 1);
        for (int i = 0; i < fam.dim(); ++i) csv << ",v_" << (i + 1);
        csv << "\n";
        csv.precision(17);
        for (const auto& s : path.samples) {
            csv << s.t;
            for (int i = 0; i < fam.dim(); ++i) csv << "," << s.xi[i];
            for (int i = 0; i < fam.dim(); ++i) csv << "," << s.velocity[i];
            csv << "\n";
        }
        Output{o.output}.write(csv.str());
        std::cerr << summary.dump() << "\n";
    } else {
        json samples = json::array();
        for (const auto& s : path.samples) {
            samples.push_back(
                {{"t", s.t}, {"xi", sm::to_json(s.xi)}, {"v", sm::to_json(s.velocity)}});
        }
        summary["samples"] = std::move(samples);
        emit_json(Output{o.output}, std::move(summary));
    }
    return path.status == sm::GeodesicStatus::StepFailure ? kExitNumerical : kExitOk;
}

sm::EstimatorSpec resolve_estimator(const std::string& name, const sm::ParametricFamily& fam) {
    if (name == "mean") return sm::estimators::sample_mean();
    if (name == "median") return sm::estimators::sample_median();
    if (name == "mle") return sm::estimators::mle(fam);
    if (name.rfind("custom-expr:", 0) == 0) {
        // expression applied to the sample mean, variable x
        sm::Expr e = sm::Expr::parse(name.substr(12), {"x"});
        return {"custom-expr",
                [e](std::span<const double> xs) {
                    double mval = 0.0;
                    for (double x : xs) mval += x;
                    mval /= static_cast<double>(xs.size());
                    sm::VectorXd out(1);
                    out[0] = e.eval_x(mval);
                    return out;
                },
                false};
    }
    throw sm::IoError("unknown estimator \"" + name + "\"");
}

int run_cramer_rao(const CommonOpts& o, const std::string& estimator, long n, long trials) {
    sm::ParametricFamily fam = sm::load_family(o.family_path);
    sm::VectorXd xi = resolve_at(o, fam);
    auto est = resolve_estimator(estimator, fam);
    auto rep = sm::estimator_covariance(fam, xi, est, n, trials, o.seed);
    auto g = sm::fisher_matrix(fam, xi, o.integration());
    sm::FisherMatrix g_est = g;
    if (rep.covariance.rows() != g.entries.rows()) {
        // estimator targets a sub-vector of the parameters (e.g. mean only)
        g_est.entries = g.entries.topLeftCorner(rep.covariance.rows(), rep.covariance.rows());
    }
    auto verdict = sm::cramer_rao_check(rep, g_est);

    json c = o.config_json();
    c["estimator"] = estimator;
    c["n"] = n;
    c["trials"] = trials;
    json r = sm::report_header("cramer-rao", std::move(c));
    r["at"] = sm::to_json(xi);
    r["mean_estimate"] = sm::to_json(rep.mean_estimate);
    r["bias"] = sm::to_json(rep.bias);
    r["covariance"] = sm::to_json(rep.covariance);
    r["standard_errors"] = sm::to_json(rep.standard_errors);
    r["discarded_trials"] = rep.discarded;
    r["applicable"] = verdict.applicable;
    if (verdict.applicable) {
        r["pass"] = verdict.pass;
        r["near_equality"] = verdict.near_equality;
        r["gap"] = sm::to_json(verdict.gap);
        r["gap_eigenvalues"] = sm::to_json(verdict.gap_eigenvalues);
        r["tolerance"] = verdict.tolerance;
    }
    emit_json(Output{o.output}, std::move(r));
    return kExitOk;
}

// ambient MLE pulled back to u by Gauss-Newton projection onto the
// embedded model; the estimator the experiment runs must target u
sm::EstimatorSpec curved_mle(const sm::CurvedModelSpec& model) {
    auto ambient_mle = sm::estimators::mle(model.ambient);
    auto embed = model.embedding;
    auto box = model.u_domain;
    const int m = model.model_dim;
    return {"mle",
            [ambient_mle, embed, box, m](std::span<const double> xs) {
                sm::VectorXd xi_hat = ambient_mle.map(xs);
                sm::VectorXd u(m);
                for (int a = 0; a < m; ++a) u[a] = 0.5 * (box[a][0] + box[a][1]);
                for (int iter = 0; iter < 32; ++iter) {
                    sm::VectorXd r = xi_hat - embed(u);
                    sm::MatrixXd b(xi_hat.size(), m);
                    for (int a = 0; a < m; ++a) {
                        double h = sm::fd_step(u[a]);
                        sm::VectorXd p = u, q = u;
                        p[a] += h;
                        q[a] -= h;
                        b.col(a) = (embed(p) - embed(q)) / (2.0 * h);
                    }
                    sm::VectorXd du = b.colPivHouseholderQr().solve(r);
                    u += du;
                    for (int a = 0; a < m; ++a)
                        u[a] = std::clamp(u[a], box[a][0] + 1e-9, box[a][1] - 1e-9);
                    if (du.cwiseAbs().maxCoeff() < 1e-12) break;
                }
                return u;
            },
            false};
}

int run_mse_expansion(const CommonOpts& o, const std::string& model_path,
                      const std::string& n_list, long trials) {
    sm::CurvedModelSpec model = sm::load_curved_model(model_path);
    sm::VectorXd u = o.at.empty() ? throw sm::IoError("mse-expansion requires --at u")
                                  : parse_vector(o.at);
    sm::ParametricFamily mf = sm::model_as_family(model);
    auto est = curved_mle(model);
    auto result = sm::mse_experiment(model, u, est, parse_longs(n_list), trials, o.seed,
                                     o.integration());

    json c = o.config_json();
    c["model"] = model_path;
    c["n_list"] = n_list;
    c["trials"] = trials;
    json r = sm::report_header("mse-expansion", std::move(c));
    r["at"] = sm::to_json(u);
    r["g_ab"] = sm::to_json(result.terms.g_model);
    r["K_ab"] = sm::to_json(result.terms.k);
    r["components"] = {{"gamma_m_sq", sm::to_json(result.terms.gamma_m_sq)},
                       {"h_e_sq", sm::to_json(result.terms.h_e_sq)},
                       {"h_m_a_sq", sm::to_json(result.terms.h_m_a_sq)}};
    r["flags"] = {{"ancillary_assumed_m_flat", result.terms.ancillary_assumed_m_flat},
                  {"estimator", est.name}};

    const int m = static_cast<int>(result.terms.g_model.rows());
    if (o.format == "csv") {
        std::ostringstream csv;
        csv << "N";
        auto cols = [&](const std::string& p) {
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) csv << "," << p << "_" << (i + 1) << (j + 1);
        };
        cols("mse");
        cols("pred1");
        cols("pred2");
        csv << "\n";
        csv.precision(17);
        for (const auto& row : result.rows) {
            csv << row.samples;
            for (const auto* mat : {&row.empirical_mse, &row.predicted_first, &row.predicted_second})
                for (int i = 0; i < m; ++i)
                    for (int j = 0; j < m; ++j) csv << "," << (*mat)(i, j);
            csv << "\n";
        }
        Output{o.output}.write(csv.str());
        std::cerr << r.dump() << "\n";
    } else {
        json rows = json::array();
        for (const auto& row : result.rows) {
            rows.push_back({{"N", row.samples},
                            {"trials", row.trials},
                            {"mse", sm::to_json(row.empirical_mse)},
                            {"pred_first", sm::to_json(row.predicted_first)},
                            {"pred_second", sm::to_json(row.predicted_second)},
                            {"mse_standard_error", row.mse_standard_error}});
        }
        r["rows"] = std::move(rows);
        emit_json(Output{o.output}, std::move(r));
    }
    (void)mf;
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"statmanifold: information geometry of parametric statistical models"};
    app.require_subcommand(1);
    // long-form help only; "-h" would collide with the --h step option
    app.set_help_flag("--help", "print help");

    CommonOpts o;
    std::string form = "score";
    double alpha = 0.0, h = 0.0, dt = 0.0, t_end = 1.0;
    std::string from, velocity, estimator = "mean", model_path, n_list = "10,100,1000";
    long n = 100, trials = 100000;

    auto* c_validate = app.add_subcommand("validate", "regularity diagnostics for a family");
    add_common(c_validate, o);

    auto* c_fisher = app.add_subcommand("fisher", "Fisher information matrix");
    add_common(c_fisher, o);
    c_fisher->add_option("--form", form, "score or hessian")
        ->check(CLI::IsMember({"score", "hessian"}));

    auto* c_conn = app.add_subcommand("connection", "alpha-connection coefficients");
    add_common(c_conn, o);
    c_conn->add_option("--alpha", alpha, "connection parameter alpha");

    auto* c_curv = app.add_subcommand("curvature", "Riemann curvature of an alpha-connection");
    add_common(c_curv, o);
    c_curv->add_option("--alpha", alpha, "connection parameter alpha");
    c_curv->add_option("--h", h, "finite-difference step (default 1e-3 scaled)");

    auto* c_geo = app.add_subcommand("geodesic", "integrate a geodesic");
    add_common(c_geo, o);
    c_geo->add_option("--from", from, "initial point, comma separated")->required();
    c_geo->add_option("--velocity", velocity, "initial velocity, comma separated")->required();
    c_geo->add_option("--alpha", alpha, "connection parameter alpha");
    c_geo->add_option("--t-end", t_end, "integration horizon");
    c_geo->add_option("--dt", dt, "step size (default t_end/1000)");

    auto* c_cr = app.add_subcommand("cramer-rao", "Monte Carlo Cramer-Rao check");
    add_common(c_cr, o);
    c_cr->add_option("--estimator", estimator, "mean|median|mle|custom-expr:EXPR");
    c_cr->add_option("--n", n, "samples per trial");
    c_cr->add_option("--trials", trials, "number of trials");

    auto* c_mse = app.add_subcommand("mse-expansion", "second-order asymptotic MSE experiment");
    add_common(c_mse, o, /*needs_family=*/false);
    c_mse->add_option("--model", model_path, "curved model spec JSON path")->required();
    c_mse->add_option("--n-list", n_list, "comma-separated sample sizes");
    c_mse->add_option("--trials", trials, "trials per N (0 = adaptive)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (c_validate->parsed()) return run_validate(o);
        if (c_fisher->parsed()) return run_fisher(o, form);
        if (c_conn->parsed()) return run_connection(o, alpha);
        if (c_curv->parsed()) return run_curvature(o, alpha, h);
        if (c_geo->parsed()) return run_geodesic(o, from, velocity, alpha, t_end, dt);
        if (c_cr->parsed()) return run_cramer_rao(o, estimator, n, trials);
        if (c_mse->parsed()) return run_mse_expansion(o, model_path, n_list, trials);
    } catch (const sm::IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const sm::IntegrationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const sm::BoundaryError& e) {
        std::cerr << "error: " << e.what() << " (exit time " << e.exit_time << ")\n";
        return kExitNumerical;
    } catch (const sm::ExperimentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const std::runtime_error& e) {
        // DomainError, SupportError, ConstructionError, DegeneracyError,
        // DimensionError: validation failures
        std::cerr << "error: " << e.what() << "\n";
        return kExitDomain;
    }
    return kExitIo;
}
