// Acceptance suite for the library: ten independent end-to-end checks, one
// line of output each, exit code = number of failed checks.  Every tolerance
// and seed is pinned here so the run is reproducible bit-for-bit.
#include "phifem/mesh.hpp"
#include "phifem/nfunction.hpp"
#include "phifem/orlicz.hpp"
#include "phifem/solver.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <string>
#include <vector>

namespace {

using namespace phifem;

constexpr double kPi = 3.14159265358979323846;

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

NFunction nf_linear(double c) {
    return build_nfunction(make_phi("linear", {{"c", c}}));
}
NFunction nf_power(double p) {
    return build_nfunction(make_phi("power", {{"p", p}}));
}
NFunction nf_model(double gamma) {
    return build_nfunction(make_phi("model-gamma", {{"gamma", gamma}}));
}
NFunction nf_log_power(double p) {
    return build_nfunction(make_phi("log-power", {{"p", p}}));
}

struct NamedNFunction {
    const char *name;
    NFunction nf;
};

std::vector<NamedNFunction> built_ins() {
    return {{"linear(c=2)", nf_linear(2.0)},
            {"power(p=3)", nf_power(3.0)},
            {"model-gamma(2)", nf_model(2.0)},
            {"log-power(p=2)", nf_log_power(2.0)}};
}

DiscreteField random_trace_zero(const MeshPtr &mesh, std::mt19937_64 &rng,
                                double scale) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    DiscreteField u(mesh);
    for (std::size_t v = 0; v < u.size(); ++v) u[v] = dist(rng);
    u.zero_boundary();
    return u;
}

double vdot(const std::vector<double> &a, const std::vector<double> &b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Five-point finite-difference solution of -laplace(v) = rhs on the unit
// square with a zero boundary, by unpreconditioned conjugate gradients on the
// h^2-scaled system.  Returns the m*m interior nodal values, row-major.
std::vector<double> fd_poisson(int n, double rhs) {
    const double h = 1.0 / n;
    const int m = n - 1;
    const std::size_t dof = static_cast<std::size_t>(m) * m;
    auto at = [m](const std::vector<double> &v, int i, int j) {
        if (i < 1 || i > m || j < 1 || j > m) return 0.0;
        return v[static_cast<std::size_t>(j - 1) * m + (i - 1)];
    };
    auto apply = [&](const std::vector<double> &v) {
        std::vector<double> out(dof);
        for (int j = 1; j <= m; ++j)
            for (int i = 1; i <= m; ++i)
                out[static_cast<std::size_t>(j - 1) * m + (i - 1)] =
                    4.0 * at(v, i, j) - at(v, i - 1, j) - at(v, i + 1, j) -
                    at(v, i, j - 1) - at(v, i, j + 1);
        return out;
    };
    std::vector<double> x(dof, 0.0), r(dof, rhs * h * h), p = r;
    double rr = vdot(r, r);
    for (int it = 0; it < 100000 && std::sqrt(rr) > 1e-13; ++it) {
        const std::vector<double> ap = apply(p);
        const double alpha = rr / vdot(p, ap);
        for (std::size_t k = 0; k < dof; ++k) {
            x[k] += alpha * p[k];
            r[k] -= alpha * ap[k];
        }
        const double rr_new = vdot(r, r);
        const double beta = rr_new / rr;
        rr = rr_new;
        for (std::size_t k = 0; k < dof; ++k) p[k] = r[k] + beta * p[k];
    }
    return x;
}

// Smallest eigenvalue of the five-point -laplace operator on the unit square,
// by power iteration on the spectrally shifted operator sigma I - A.
double fd_smallest_eigenvalue(int n, int iterations = 6000) {
    const double h = 1.0 / n;
    const double sigma = 9.0 / (h * h);
    const int m = n - 1;
    const std::size_t dof = static_cast<std::size_t>(m) * m;
    auto at = [m](const std::vector<double> &v, int i, int j) {
        if (i < 1 || i > m || j < 1 || j > m) return 0.0;
        return v[static_cast<std::size_t>(j - 1) * m + (i - 1)];
    };
    std::vector<double> v(dof);
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> dist(0.1, 1.0);
    for (auto &x : v) x = dist(rng);
    double mu = 0.0;
    for (int it = 0; it < iterations; ++it) {
        std::vector<double> w(dof);
        for (int j = 1; j <= m; ++j)
            for (int i = 1; i <= m; ++i) {
                const std::size_t k =
                    static_cast<std::size_t>(j - 1) * m + (i - 1);
                const double av =
                    (4.0 * at(v, i, j) - at(v, i - 1, j) - at(v, i + 1, j) -
                     at(v, i, j - 1) - at(v, i, j + 1)) /
                    (h * h);
                w[k] = sigma * v[k] - av;
            }
        mu = vdot(v, w) / vdot(v, v);
        const double norm = std::sqrt(vdot(w, w));
        for (std::size_t k = 0; k < dof; ++k) v[k] = w[k] / norm;
    }
    return sigma - mu;
}

double least_squares_slope(const std::vector<double> &xs,
                           const std::vector<double> &ys) {
    const double n = static_cast<double>(xs.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

// Unnormalized discrete L^gamma norm at the quadrature points, gamma = 2.
double l2_at_quadrature(const DiscreteField &u) {
    const Mesh &mesh = u.mesh();
    double acc = 0.0;
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
        const double m = u.mean_on(k);
        acc += mesh.area(k) * m * m;
    }
    return std::sqrt(acc);
}

std::string fail(const char *fmt, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, fmt, a, b, c);
    return std::string(buf);
}

// ---------------------------------------------------------------------------
// 1. The model generator family: certified indices sit inside the power
//    envelope [gamma, 2*gamma] (up to the build margin 1e-6) and the raw
//    quotient t^2 phi(t) / Phi(t) stays inside [gamma, 2*gamma] at every
//    probe point.  Budget: under one second.
std::string check_index_certificate() {
    const auto t0 = std::chrono::steady_clock::now();
    for (const double gamma : {1.5, 2.0, 3.0}) {
        const NFunction nf = nf_model(gamma);
        const double lo = gamma - 1e-6, hi = 2.0 * gamma + 1e-6;
        if (!(nf.ell() >= lo && nf.ell() <= nf.em() && nf.em() <= hi))
            return fail("indices [%.9g, %.9g] escape the envelope", nf.ell(),
                        nf.em());
        for (const double t : nf.probe_grid()) {
            const double q = t * nf.flux(t) / nf.potential(t);
            // Pure-roundoff pad; the envelope itself is exact.
            if (!(q >= gamma * (1.0 - 1e-14) &&
                  q <= 2.0 * gamma * (1.0 + 1e-14)))
                return fail("quotient %.17g at t = %.3g escapes [g, 2g]", q, t);
        }
    }
    const double dt = seconds_since(t0);
    if (dt >= 1.0) return fail("took %.2f s (budget 1 s)", dt);
    return {};
}

// 2. Sobolev conjugate of the quadratic potential in dimension 3: pure power
//    growth with exponent 2*3/(3-2)*... = 6, read off as the log-log slope
//    over t in [10, 1000].  Budget: under five seconds.
std::string check_conjugate_growth() {
    const auto t0 = std::chrono::steady_clock::now();
    const NFunction nf = nf_linear(2.0); // Phi(t) = t^2
    const SobolevConjugate star = sobolev_conjugate(nf, 3);
    std::vector<double> xs, ys;
    for (int i = 0; i < 64; ++i) {
        const double t = std::pow(10.0, 1.0 + 2.0 * i / 63.0);
        xs.push_back(std::log(t));
        ys.push_back(std::log(star.value(t)));
    }
    const double slope = least_squares_slope(xs, ys);
    if (std::fabs(slope - 6.0) > 0.06)
        return fail("log-log slope %.6f differs from 6 by more than 1%%",
                    slope);
    const double dt = seconds_since(t0);
    if (dt >= 5.0) return fail("took %.2f s (budget 5 s)", dt);
    return {};
}

// 3. Scaling envelopes: 10^4 seeded (rho, t) pairs per built-in generator
//    satisfy zeta0(t) Phi(rho) <= Phi(rho t) <= zeta1(t) Phi(rho), and random
//    fields satisfy the norm-modular sandwich, all with relative slack 1e-8.
std::string check_sandwiches() {
    const auto mesh = make_rect_mesh(8, 8, 1.0, 1.0);
    std::mt19937_64 rng(20240301);
    std::uniform_real_distribution<double> exps(-3.0, 3.0);
    std::uniform_real_distribution<double> scales(-1.0, 1.0);
    long bad = 0;
    for (const auto &[name, nf] : built_ins()) {
        for (int i = 0; i < 10000; ++i) {
            const double rho = std::pow(10.0, exps(rng));
            const double t = std::pow(10.0, exps(rng));
            if (!nf.scaling_bounds(rho, t).holds(1e-8)) ++bad;
        }
        for (int i = 0; i < 25; ++i) {
            DiscreteField u = random_trace_zero(mesh, rng, 2.0);
            const double s = std::pow(10.0, scales(rng));
            for (std::size_t v = 0; v < u.size(); ++v) u[v] *= s;
            if (!norm_modular_sandwich(nf, u).holds(1e-8)) ++bad;
        }
    }
    if (bad > 0) return fail("%.0f sandwich violations", double(bad));
    return {};
}

// 4. Duality: the Young gap stays above -1e-9 on 10^4 random pairs per
//    generator; the double transform recovers the potential to 1e-6 on the
//    probe grid; and Phi~(t phi(t)) <= Phi(2t) everywhere probed.
std::string check_duality() {
    std::mt19937_64 rng(424243);
    std::uniform_real_distribution<double> exps(-3.0, 3.0);
    for (const auto &[name, nf] : built_ins()) {
        for (int i = 0; i < 10000; ++i) {
            const double s = std::pow(10.0, exps(rng));
            const double t = std::pow(10.0, exps(rng));
            if (!(nf.young_gap(s, t) >= -1e-9))
                return fail("Young gap %.3g below -1e-9",
                            nf.young_gap(s, t));
        }
        double worst = 0.0;
        for (const double t : nf.probe_grid()) {
            // The double transform attains its maximum at s* = t phi(t).
            const double s_star = nf.flux(t);
            const double back = s_star * t - nf.complementary(s_star);
            worst = std::max(worst, std::fabs(back - nf.potential(t)) /
                                        nf.potential(t));
            if (!(nf.complementary(s_star) <=
                  nf.potential(2.0 * t) * (1.0 + 1e-9)))
                return fail("doubled-potential bound fails at t = %.3g", t);
        }
        if (worst >= 1e-6)
            return fail("double-transform error %.3g exceeds 1e-6", worst);
    }
    return {};
}

// 5. Luxemburg norm on the model space (gamma = 2): unit modular at the norm,
//    absolute homogeneity, triangle inequality, and domination by the plain
//    quadratic norm, across 100 random fields spanning four decades of scale.
std::string check_luxemburg() {
    const NFunction nf = nf_model(2.0);
    const auto mesh = make_rect_mesh(12, 12, 1.0, 1.0);
    std::mt19937_64 rng(7321);
    std::uniform_real_distribution<double> scales(-2.0, 2.0);
    std::uniform_real_distribution<double> alphas(0.1, 10.0);
    for (int i = 0; i < 100; ++i) {
        DiscreteField u = random_trace_zero(mesh, rng, 3.0);
        const double s = std::pow(10.0, scales(rng));
        for (std::size_t v = 0; v < u.size(); ++v) u[v] *= s;
        const double norm = luxemburg_norm(nf, u);
        if (norm == 0.0) return fail("random field #%d collapsed", double(i));

        DiscreteField unit = u;
        for (std::size_t v = 0; v < unit.size(); ++v) unit[v] /= norm;
        const double at_norm = modular(nf, unit);
        if (std::fabs(at_norm - 1.0) > 1e-10)
            return fail("modular at the norm is %.17g", at_norm);

        const double alpha = (i % 2 == 0 ? 1.0 : -1.0) * alphas(rng);
        DiscreteField au = u;
        for (std::size_t v = 0; v < au.size(); ++v) au[v] *= alpha;
        const double homog = luxemburg_norm(nf, au);
        if (std::fabs(homog - std::fabs(alpha) * norm) >
            1e-9 * std::fabs(alpha) * norm)
            return fail("homogeneity off: %.17g vs %.17g", homog,
                        std::fabs(alpha) * norm);

        DiscreteField v = random_trace_zero(mesh, rng, 3.0);
        const double nv = luxemburg_norm(nf, v);
        DiscreteField sum = u;
        for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += v[k];
        const double nsum = luxemburg_norm(nf, sum);
        if (nsum > norm + nv + 1e-9 * (norm + nv))
            return fail("triangle inequality off: %.17g > %.17g", nsum,
                        norm + nv);

        // Phi(t) <= t^2 pointwise, so the Luxemburg norm is dominated by the
        // unnormalized quadratic norm at the same quadrature points.
        const double l2 = l2_at_quadrature(u);
        if (norm > l2 * (1.0 + 1e-9))
            return fail("norm %.17g exceeds quadratic norm %.17g", norm, l2);
    }
    return {};
}

// 6. The assembled residual is the exact derivative of the energy: central
//    finite differences along 20 random directions per generator, with a
//    nonzero reaction and source, match <residual, v> to 1e-4 at step 1e-6.
std::string check_directional_derivative() {
    const auto mesh = make_rect_mesh(10, 10, 1.0, 1.0);
    const Reaction reaction = make_reaction(
        [](Vec2 x, double s) { return std::sin(s) + x.x; },
        [](Vec2 x, double s) { return (1.0 - std::cos(s)) + x.x * s; });
    std::mt19937_64 rng(90210);
    double worst = 0.0;
    for (const auto &[name, nf] : built_ins()) {
        ProblemSpec spec{nf, reaction, [](Vec2) { return 0.25; }, mesh, {}};
        for (int trial = 0; trial < 20; ++trial) {
            const DiscreteField u = random_trace_zero(mesh, rng, 1.0);
            const DiscreteField v = random_trace_zero(mesh, rng, 1.0);
            const std::vector<double> r = weak_gradient(spec, u);
            double pairing = 0.0;
            for (std::size_t k = 0; k < v.size(); ++k) pairing += r[k] * v[k];

            const double t = 1e-6;
            DiscreteField up = u, um = u;
            for (std::size_t k = 0; k < u.size(); ++k) {
                up[k] += t * v[k];
                um[k] -= t * v[k];
            }
            const double fd =
                (energy(spec, up) - energy(spec, um)) / (2.0 * t);
            const double rel = std::fabs(fd - pairing) /
                               std::max(std::fabs(pairing), 1e-8);
            worst = std::max(worst, rel);
        }
    }
    if (worst >= 1e-4)
        return fail("worst relative derivative error %.3g", worst);
    return {};
}

// 7. Constant generator, zero reaction, unit source on the 64x64 unit square:
//    the minimizer solves -2 laplace u = 1 and must match an independently
//    computed five-point finite-difference solution.  Budget: 30 seconds.
std::string check_laplacian_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const int n = 64;
    const auto mesh = make_rect_mesh(n, n, 1.0, 1.0);
    ProblemSpec spec{nf_linear(2.0), make_reaction(nullptr),
                     [](Vec2) { return 1.0; }, mesh, {}};
    const SolveReport report = minimize(spec);
    if (report.status != SolveStatus::Converged)
        return "did not converge: " + to_string(report.status);
    if (!(report.residual_norm < 1e-8))
        return fail("residual %.3g not below 1e-8", report.residual_norm);
    for (std::size_t i = 1; i < report.energy_trace.size(); ++i)
        if (report.energy_trace[i] > report.energy_trace[i - 1] + 1e-14)
            return fail("energy rises at accepted step %.0f", double(i));

    const std::vector<double> oracle = fd_poisson(n, 0.5);
    const int m = n - 1;
    const double h = 1.0 / n;
    double l2 = 0.0;
    for (int j = 1; j <= m; ++j)
        for (int i = 1; i <= m; ++i) {
            const std::size_t vid =
                static_cast<std::size_t>(j) * (n + 1) + static_cast<std::size_t>(i);
            const double diff =
                report.minimizer[vid] -
                oracle[static_cast<std::size_t>(j - 1) * m + (i - 1)];
            l2 += h * h * diff * diff;
        }
    if (!(std::sqrt(l2) < 1e-3))
        return fail("L2 distance %.3g from the five-point solution",
                    std::sqrt(l2));
    const double dt = seconds_since(t0);
    if (dt >= 30.0) return fail("took %.2f s (budget 30 s)", dt);
    return {};
}

// 8. Coercivity falsifier on the quadratic space: the sign of the estimate
//    flips across the principal eigenvalue 2 pi^2, which an independent
//    five-point eigenvalue oracle confirms to 1%.
std::string check_coercivity_signs() {
    const int n = 16;
    const double lambda1 = fd_smallest_eigenvalue(n);
    if (std::fabs(lambda1 - 2.0 * kPi * kPi) > 0.01 * 2.0 * kPi * kPi)
        return fail("eigenvalue oracle %.6f is not within 1%% of 2 pi^2",
                    lambda1);
    const auto mesh = make_rect_mesh(n, n, 1.0, 1.0);
    const NFunction nf = nf_linear(2.0);
    auto estimate_for = [&](double alpha) {
        Reaction r = make_reaction(nullptr);
        r.A_infinity = [alpha](Vec2) { return alpha; };
        ProblemSpec spec{nf, r, nullptr, mesh, {}};
        spec.options.seed = 4242;
        return coercivity_estimate(spec, 4, 400);
    };
    const double below = estimate_for(kPi * kPi);
    if (!(below > 0.0))
        return fail("estimate %.6f not positive below the eigenvalue", below);
    const double above = estimate_for(3.0 * kPi * kPi);
    if (!(above < 0.0))
        return fail("estimate %.6f not negative above the eigenvalue", above);
    return {};
}

// 9. Model problem, gamma = 2, f(x,s) = s/4, h = 0.1: converges on the 32x32
//    mesh with residual below 1e-6, and doubling the resolution moves the
//    converged energy by less than 2%.
std::string check_model_self_consistency() {
    const NFunction nf = nf_model(2.0);
    const Reaction reaction =
        make_reaction([](Vec2, double s) { return 0.25 * s; },
                      [](Vec2, double s) { return 0.125 * s * s; });
    auto solve_on = [&](int n) {
        ProblemSpec spec{nf, reaction, [](Vec2) { return 0.1; },
                         make_rect_mesh(n, n, 1.0, 1.0), {}};
        spec.options.tol = 1e-6;
        return minimize(spec);
    };
    const SolveReport coarse = solve_on(32);
    if (coarse.status != SolveStatus::Converged ||
        !(coarse.residual_norm < 1e-6))
        return fail("32x32 run: residual %.3g", coarse.residual_norm);
    const SolveReport fine = solve_on(64);
    if (fine.status != SolveStatus::Converged || !(fine.residual_norm < 1e-6))
        return fail("64x64 run: residual %.3g", fine.residual_norm);
    const double ec = coarse.energy_trace.back();
    const double ef = fine.energy_trace.back();
    if (!(std::fabs(ef - ec) < 0.02 * std::fabs(ec)))
        return fail("energy moved from %.8g to %.8g on refinement", ec, ef);
    return {};
}

// 10. Growth audit: the critical-power reaction |s|^(g*-2) s with the exact
//     declaration a = 1, b = 0, exponent g* - 1 is accepted at 10^4+ sample
//     points, and an understated coefficient is flagged.
std::string check_growth_audit() {
    const NFunction nf = nf_model(2.0);
    // Critical exponent N ell / (N - ell) for ell = 2, N = 5.
    const double gstar = 10.0 / 3.0;
    const SobolevConjugate star = sobolev_conjugate(nf, 5);
    if (std::fabs(star.ell_star() - gstar) > 1e-3)
        return fail("conjugate index %.6f is far from %.6f", star.ell_star(),
                    gstar);

    Reaction reaction = make_reaction([gstar](Vec2, double s) {
        return std::pow(std::fabs(s), gstar - 2.0) * s;
    });
    reaction.flux_form = FluxGrowthForm::PowerPointwise;
    reaction.a = 1.0;
    reaction.power_exponent = gstar - 1.0;

    SampleBox box;
    box.s_count = 1000; // 5 points x 2001 values of s = 10005 samples
    box.points = {{0.13, 0.27}, {0.5, 0.5}, {0.71, 0.11}, {0.33, 0.88},
                  {0.94, 0.61}};
    const long samples =
        static_cast<long>(box.points.size()) * (2L * box.s_count + 1L);
    if (samples < 10000) return fail("only %.0f samples", double(samples));

    const auto clean = growth_audit(reaction, nf, nullptr, box);
    if (!clean.empty())
        return fail("exact declaration drew %.0f violations",
                    double(clean.size()));

    Reaction understated = reaction;
    understated.a = 0.5;
    const auto flagged = growth_audit(understated, nf, nullptr, box);
    if (flagged.empty()) return std::string("understated bound not flagged");
    if (flagged.front().inequality != "power-pointwise")
        return "unexpected violation tag: " + flagged.front().inequality;
    return {};
}

} // namespace

int main() {
    struct Criterion {
        const char *title;
        std::function<std::string()> run;
    };
    const std::vector<Criterion> criteria = {
        {"index certificate for the model family", check_index_certificate},
        {"critical growth of the Sobolev conjugate", check_conjugate_growth},
        {"scaling and norm-modular sandwiches", check_sandwiches},
        {"duality: Young gap, double transform, doubled-potential bound",
         check_duality},
        {"Luxemburg norm axioms and quadratic domination", check_luxemburg},
        {"residual equals the energy derivative", check_directional_derivative},
        {"quadratic minimizer matches the five-point oracle",
         check_laplacian_oracle},
        {"coercivity estimate changes sign at the eigenvalue",
         check_coercivity_signs},
        {"model problem converges and is stable under refinement",
         check_model_self_consistency},
        {"growth audit accepts an exact bound and flags an understated one",
         check_growth_audit},
    };

    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string detail;
        try {
            detail = criteria[i].run();
        } catch (const std::exception &e) {
            detail = std::string("exception: ") + e.what();
        }
        const double dt = seconds_since(t0);
        if (detail.empty()) {
            std::printf("[%2zu] PASS  %s  (%.2f s)\n", i + 1,
                        criteria[i].title, dt);
        } else {
            ++failures;
            std::printf("[%2zu] FAIL  %s  (%.2f s): %s\n", i + 1,
                        criteria[i].title, dt, detail.c_str());
        }
    }
    std::printf("%d/10 criteria pass\n", 10 - failures);
    return failures;
}
