#include "phifem/cli.hpp"

#include "phifem/config.hpp"
#include "phifem/orlicz.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <optional>
#include <random>

namespace phifem {

namespace {

namespace fs = std::filesystem;

struct FileCloser {
    void operator()(std::FILE *f) const {
        if (f != nullptr) std::fclose(f);
    }
};

std::unique_ptr<std::FILE, FileCloser> open_for_write(const fs::path &path) {
    std::unique_ptr<std::FILE, FileCloser> f(
        std::fopen(path.string().c_str(), "wb"));
    if (!f) throw Error("cannot open '" + path.string() + "' for writing");
    return f;
}

int status_exit_code(SolveStatus status) {
    switch (status) {
    case SolveStatus::Converged: return 0;
    case SolveStatus::NonCoercive: return 2;
    // Stalls and iteration caps both mean "did not converge".
    case SolveStatus::LineSearchStall: return 3;
    case SolveStatus::MaxIterations: return 3;
    }
    return 1;
}

int cmd_inspect(const RunConfig &cfg, bool quiet, std::ostream &out) {
    if (!cfg.dimension)
        throw ConfigParseError("inspect requires 'dimension' in [phi]");
    const NFunction nf = nfunction_from_config(cfg);
    const SobolevConjugate star = sobolev_conjugate(nf, *cfg.dimension);

    if (!quiet) {
        char buf[256];
        std::snprintf(buf, sizeof buf,
                      "phi: %s\nell = %.12g\nem = %.12g\ndelta2 = %.12g\n"
                      "ell_star = %.12g\nem_star = %.12g\n",
                      nf.name().c_str(), nf.ell(), nf.em(),
                      nf.delta2_constant(), star.ell_star(), star.em_star());
        out << buf;
    }

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    auto f = open_for_write(dir / "nfun.csv");
    std::fprintf(f.get(), "t,phi,Phi,Phi_tilde,Phi_star\n");
    for (const double t : nf.probe_grid())
        std::fprintf(f.get(), "%.17g,%.17g,%.17g,%.17g,%.17g\n", t, nf.phi(t),
                     nf.potential(t), nf.complementary(t), star.value(t));
    if (!quiet) out << "wrote " << (dir / "nfun.csv").string() << "\n";
    return 0;
}

int cmd_solve(const RunConfig &cfg, bool quiet, std::ostream &out) {
    ProblemSpec spec = problem_from_config(cfg);
    SolveReport report = minimize(spec);

    const Reaction &reaction = spec.reaction;
    std::optional<SobolevConjugate> star;
    if (reaction.flux_form == FluxGrowthForm::PhiStarPointwise ||
        reaction.flux_form == FluxGrowthForm::PhiStarWeak) {
        if (!cfg.dimension)
            throw ConfigParseError("conjugate growth forms require 'dimension'");
        star.emplace(sobolev_conjugate(spec.nf, *cfg.dimension));
    }
    if (reaction.has_F_bound || reaction.flux_form != FluxGrowthForm::None ||
        reaction.A_infinity)
        report.growth_violations =
            growth_audit(reaction, spec.nf, star ? &*star : nullptr);
    if (reaction.A_infinity)
        report.coercivity = coercivity_estimate(spec, cfg.coercivity_samples,
                                                cfg.coercivity_steps);

    const fs::path dir(cfg.out_dir);
    fs::create_directories(dir);
    write_field_csv(report.minimizer, (dir / "solution.csv").string());
    {
        auto f = open_for_write(dir / "trace.csv");
        std::fprintf(f.get(), "iter,energy,residual\n");
        for (std::size_t i = 0; i < report.energy_trace.size(); ++i)
            std::fprintf(f.get(), "%zu,%.17g,%.17g\n", i,
                         report.energy_trace[i], report.residual_trace[i]);
    }
    {
        nlohmann::ordered_json j;
        j["status"] = to_string(report.status);
        j["iterations"] = report.iterations;
        j["residual_norm"] = report.residual_norm;
        j["energy"] = report.energy_trace.back();
        j["energy_trace"] = report.energy_trace;
        if (report.coercivity) j["coercivity_estimate"] = *report.coercivity;
        auto violations = nlohmann::ordered_json::array();
        for (const auto &v : report.growth_violations)
            violations.push_back({{"inequality", v.inequality},
                                  {"x", v.x.x},
                                  {"y", v.x.y},
                                  {"s", v.s},
                                  {"lhs", v.lhs},
                                  {"rhs", v.rhs}});
        j["growth_violations"] = violations;
        auto f = open_for_write(dir / "report.json");
        const std::string text = j.dump(2) + "\n";
        std::fwrite(text.data(), 1, text.size(), f.get());
    }

    if (!quiet) {
        out << "status: " << to_string(report.status) << "\n"
            << "iterations: " << report.iterations << "\n";
        char buf[128];
        std::snprintf(buf, sizeof buf, "residual: %.6g\nenergy: %.12g\n",
                      report.residual_norm, report.energy_trace.back());
        out << buf;
        if (report.coercivity) {
            std::snprintf(buf, sizeof buf, "coercivity estimate: %.6g\n",
                          *report.coercivity);
            out << buf;
        }
        if (!report.growth_violations.empty())
            out << "growth violations: " << report.growth_violations.size()
                << " (see report.json)\n";
        out << "wrote " << (dir / "solution.csv").string() << ", trace.csv, "
            << "report.json\n";
    }
    return status_exit_code(report.status);
}

// One named property of the seeded inequality suite.
struct CheckResult {
    std::string name;
    bool pass;
    std::string detail;
};

std::vector<CheckResult> run_checks(const RunConfig &cfg) {
    std::vector<CheckResult> results;
    const NFunction nf = nfunction_from_config(cfg);
    std::mt19937_64 rng(cfg.seed);

    auto log_uniform = [&rng](double lo, double hi) {
        std::uniform_real_distribution<double> d(std::log(lo), std::log(hi));
        return [d, &rng]() mutable { return std::exp(d(rng)); };
    };

    {
        auto draw = log_uniform(1e-3, 1e3);
        bool ok = true;
        std::string detail;
        for (int i = 0; i < 1000 && ok; ++i) {
            const double rho = draw(), t = draw();
            if (!nf.scaling_bounds(rho, t).holds(1e-8)) {
                ok = false;
                detail = "failed at rho=" + std::to_string(rho) +
                         " t=" + std::to_string(t);
            }
        }
        results.push_back({"scaling-sandwich", ok, detail});
    }
    {
        std::uniform_real_distribution<double> d(1e-6, 10.0);
        bool ok = true;
        std::string detail;
        for (int i = 0; i < 1000 && ok; ++i) {
            const double s = d(rng), t = d(rng);
            const double gap = nf.young_gap(s, t);
            if (!(gap >= -1e-9)) {
                ok = false;
                detail = "gap " + std::to_string(gap);
            }
        }
        results.push_back({"young-gap", ok, detail});
    }
    {
        double worst = 0.0;
        for (const double t : nf.probe_grid()) {
            const double direct = nf.potential(t);
            const double sstar = nf.flux(t);
            const double via = sstar * t - nf.complementary(sstar);
            worst = std::max(worst,
                             std::abs(via - direct) / std::max(direct, 1e-300));
        }
        results.push_back({"conjugate-involution", worst < 1e-6,
                           "max relative error " + std::to_string(worst)});
    }
    {
        bool ok = true;
        std::string detail;
        for (const double t : nf.probe_grid()) {
            const double lhs = nf.complementary(nf.flux(t));
            const double rhs = nf.potential(2.0 * t);
            if (!(lhs <= rhs * (1.0 + 1e-9))) {
                ok = false;
                detail = "failed at t=" + std::to_string(t);
                break;
            }
        }
        results.push_back({"complementary-upper-bound", ok, detail});
    }

    const auto mesh = make_rect_mesh(8, 8, 1.0, 1.0);
    std::uniform_real_distribution<double> nodal(-3.0, 3.0);
    auto random_field = [&]() {
        DiscreteField u(mesh);
        for (std::size_t v = 0; v < u.size(); ++v) u[v] = nodal(rng);
        return u;
    };

    {
        bool ok = true;
        for (int i = 0; i < 20 && ok; ++i)
            ok = norm_modular_sandwich(nf, random_field()).holds(1e-8);
        results.push_back({"norm-modular-sandwich", ok, ""});
    }
    {
        bool ok = true;
        std::string detail;
        for (int i = 0; i < 20 && ok; ++i) {
            const double slack = holder_check(nf, random_field(), random_field());
            if (!(slack >= -1e-9)) {
                ok = false;
                detail = "slack " + std::to_string(slack);
            }
        }
        results.push_back({"holder-slack", ok, detail});
    }
    {
        bool ok = true;
        std::uniform_real_distribution<double> ad(0.1, 10.0);
        for (int i = 0; i < 10 && ok; ++i) {
            const auto u = random_field();
            const double alpha = ad(rng);
            DiscreteField au(mesh);
            for (std::size_t v = 0; v < u.size(); ++v) au[v] = alpha * u[v];
            const double lhs = luxemburg_norm(nf, au);
            const double rhs = alpha * luxemburg_norm(nf, u);
            ok = std::abs(lhs - rhs) <= 1e-9 * std::max(1.0, rhs);
        }
        results.push_back({"norm-homogeneity", ok, ""});
    }
    {
        bool ok = true;
        for (int i = 0; i < 10 && ok; ++i) {
            const auto u = random_field();
            const auto v = random_field();
            DiscreteField w(mesh);
            for (std::size_t k = 0; k < w.size(); ++k) w[k] = u[k] + v[k];
            const double bound = luxemburg_norm(nf, u) + luxemburg_norm(nf, v);
            ok = luxemburg_norm(nf, w) <= bound * (1.0 + 1e-9);
        }
        results.push_back({"norm-triangle", ok, ""});
    }
    {
        bool ok = true;
        for (int i = 0; i < 10 && ok; ++i) {
            auto u = random_field();
            const double norm = luxemburg_norm(nf, u);
            if (norm == 0.0) continue;
            for (std::size_t v = 0; v < u.size(); ++v) u[v] /= norm;
            ok = std::abs(modular(nf, u) - 1.0) <= 1e-10;
        }
        results.push_back({"unit-modular", ok, ""});
    }
    if (cfg.dimension) {
        const SobolevConjugate star = sobolev_conjugate(nf, *cfg.dimension);
        auto draw = log_uniform(1e-2, 1e2);
        bool ok = true;
        std::string detail;
        for (int i = 0; i < 500 && ok; ++i) {
            const double rho = draw(), t = draw();
            if (!star.scaling_bounds(rho, t).holds(1e-8)) {
                ok = false;
                detail = "failed at rho=" + std::to_string(rho) +
                         " t=" + std::to_string(t);
            }
        }
        results.push_back({"conjugate-scaling-sandwich", ok, detail});
    }
    return results;
}

int cmd_check(const RunConfig &cfg, bool quiet, std::ostream &out) {
    const auto results = run_checks(cfg);
    int failures = 0;
    for (const auto &r : results) {
        if (r.pass) {
            if (!quiet) out << "PASS " << r.name << "\n";
        } else {
            ++failures;
            out << "FAIL " << r.name;
            if (!r.detail.empty()) out << ": " << r.detail;
            out << "\n";
        }
    }
    if (!quiet)
        out << results.size() - failures << "/" << results.size()
            << " properties hold\n";
    return failures == 0 ? 0 : 1;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out) {
    CLI::App app{"N-function calculus and energy minimization toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir_override;
    unsigned long long seed_override = 0;
    int max_iter_override = 0;
    double tol_override = 0.0;
    bool quiet = false;

    auto add_common = [&](CLI::App *sub) {
        sub->add_option("config", config_path, "configuration file")->required();
        sub->add_option("--out-dir", out_dir_override,
                        "override the [output] dir");
        sub->add_option("--seed", seed_override, "override the [solver] seed");
        sub->add_option("--max-iter", max_iter_override,
                        "override the [solver] max_iter");
        sub->add_option("--tol", tol_override, "override the [solver] tol");
        sub->add_flag("--quiet", quiet, "suppress non-essential output");
    };
    CLI::App *inspect =
        app.add_subcommand("inspect", "print growth indices and tabulate");
    CLI::App *solve =
        app.add_subcommand("solve", "minimize the energy, write artifacts");
    CLI::App *check =
        app.add_subcommand("check", "run the seeded inequality suite");
    add_common(inspect);
    add_common(solve);
    add_common(check);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp &) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError &e) {
        out << "usage error: " << e.what() << "\n";
        return 64;
    }

    try {
        RunConfig cfg = load_config(config_path);
        CLI::App *sub = app.get_subcommands().front();
        if (sub->count("--out-dir") > 0) cfg.out_dir = out_dir_override;
        if (sub->count("--seed") > 0) cfg.seed = seed_override;
        if (sub->count("--max-iter") > 0) cfg.max_iter = max_iter_override;
        if (sub->count("--tol") > 0) cfg.tol = tol_override;

        if (sub == inspect) return cmd_inspect(cfg, quiet, out);
        if (sub == solve) return cmd_solve(cfg, quiet, out);
        return cmd_check(cfg, quiet, out);
    } catch (const ConfigParseError &e) {
        out << "config error: " << e.what() << "\n";
        return 64;
    } catch (const Error &e) {
        out << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception &e) {
        out << "internal error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace phifem
