#include "phifem/solver.hpp"

#include "phifem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <random>

namespace phifem {

namespace {

double dot(const std::vector<double> &a, const std::vector<double> &b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

void require_on_mesh(const ProblemSpec &spec, const DiscreteField &u) {
    if (u.mesh_ptr() != spec.mesh)
        throw MeshMismatch("field does not live on the problem mesh");
}

void require_trace_zero(const DiscreteField &u) {
    double scale = 0.0;
    for (std::size_t v = 0; v < u.size(); ++v)
        scale = std::max(scale, std::abs(u[v]));
    if (!u.trace_zero(1e-12 * std::max(1.0, scale)))
        throw Error("field must vanish on the boundary");
}

double eval_or_zero(const SpatialFn &fn, Vec2 x) {
    return fn ? fn(x) : 0.0;
}

// Primitive of f(x, .) by a fixed composite Gauss-Kronrod rule; high order
// makes this accurate for smooth reactions, but closed-form F is preferred
// in hot loops.
double quadrature_primitive(const ReactionFn &f, Vec2 x, double s) {
    if (s == 0.0) return 0.0;
    constexpr int panels = 8;
    double acc = 0.0;
    const double step = s / panels;
    for (int k = 0; k < panels; ++k) {
        const double a = step * k;
        const double b = step * (k + 1);
        acc += detail::gauss_kronrod_panel([&f, x](double t) { return f(x, t); },
                                           a, b)
                   .kronrod;
    }
    return acc;
}

struct EnergyParts {
    double flux = 0.0;
    double reaction = 0.0;
    double source = 0.0;
};

EnergyParts energy_parts(const ProblemSpec &spec, const DiscreteField &u) {
    const Mesh &mesh = *spec.mesh;
    const NFunction &nf = spec.nf;
    const bool has_f = static_cast<bool>(spec.reaction.F);
    const bool has_h = static_cast<bool>(spec.h);
    EnergyParts parts;
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
        const double area = mesh.area(k);
        const Vec2 g = u.gradient_on(k);
        const double gnorm = std::hypot(g.x, g.y);
        if (gnorm > 0.0) parts.flux += area * nf.potential(gnorm);
        if (has_f || has_h) {
            const Vec2 c = mesh.centroid(k);
            const double mean = u.mean_on(k);
            if (has_f) parts.reaction += area * spec.reaction.F(c, mean);
            if (has_h) parts.source += area * spec.h(c) * mean;
        }
    }
    return parts;
}

} // namespace

Reaction make_reaction(ReactionFn f, ReactionFn F) {
    Reaction r;
    r.f = f ? std::move(f) : [](Vec2, double) { return 0.0; };
    if (F) {
        r.F = std::move(F);
    } else {
        ReactionFn f_copy = r.f;
        r.F = [f_copy](Vec2 x, double s) {
            return quadrature_primitive(f_copy, x, s);
        };
    }

    // Probe the (f, F) pair: F(x, 0) = 0 and dF/ds = f.
    const Vec2 probes_x[] = {{0.25, 0.4}, {0.6, 0.15}, {0.85, 0.75}};
    const double probes_s[] = {0.5, -0.5, 2.0, -2.0, 8.0, -8.0};
    for (const Vec2 x : probes_x) {
        const double at_zero = r.F(x, 0.0);
        if (std::abs(at_zero) > 1e-10)
            throw Error("reaction primitive must vanish at s = 0");
        for (const double s : probes_s) {
            const double delta = 1e-5 * std::max(1.0, std::abs(s));
            const double fd = (r.F(x, s + delta) - r.F(x, s - delta)) / (2.0 * delta);
            const double fx = r.f(x, s);
            const double scale = std::max({1e-4, std::abs(fd), std::abs(fx)});
            if (std::abs(fd - fx) > 1e-4 * scale)
                throw Error("reaction primitive is inconsistent with f near s = " +
                            std::to_string(s));
        }
    }
    return r;
}

std::string to_string(SolveStatus status) {
    switch (status) {
    case SolveStatus::Converged: return "converged";
    case SolveStatus::MaxIterations: return "max-iterations";
    case SolveStatus::LineSearchStall: return "line-search-stall";
    case SolveStatus::NonCoercive: return "non-coercive";
    }
    return "unknown";
}

double energy(const ProblemSpec &spec, const DiscreteField &u) {
    require_on_mesh(spec, u);
    require_trace_zero(u);
    const EnergyParts parts = energy_parts(spec, u);
    return parts.flux - parts.reaction - parts.source;
}

std::vector<double> weak_gradient(const ProblemSpec &spec,
                                  const DiscreteField &u) {
    require_on_mesh(spec, u);
    require_trace_zero(u);
    const Mesh &mesh = *spec.mesh;
    const NFunction &nf = spec.nf;
    const bool has_f = static_cast<bool>(spec.reaction.f);
    const bool has_h = static_cast<bool>(spec.h);

    std::vector<double> r(mesh.vertex_count(), 0.0);
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
        const double area = mesh.area(k);
        const auto &tri = mesh.triangle(k);
        const Vec2 g = u.gradient_on(k);
        const double gnorm = std::hypot(g.x, g.y);
        // phi at |grad u|; elements with zero gradient carry no flux, the
        // continuity limit of s phi(s) at 0.
        const double coef = gnorm > 0.0 ? nf.phi(gnorm) : 0.0;
        double load = 0.0;
        if (has_f || has_h) {
            const Vec2 c = mesh.centroid(k);
            if (has_f) load += spec.reaction.f(c, u.mean_on(k));
            if (has_h) load += spec.h(c);
        }
        for (int i = 0; i < 3; ++i) {
            const std::size_t vj = tri[static_cast<std::size_t>(i)];
            if (mesh.is_boundary(vj)) continue;
            const Vec2 gl = mesh.hat_gradient(k, i);
            r[vj] += area * (coef * dot(g, gl) - load / 3.0);
        }
    }
    return r;
}

double sup_norm(const std::vector<double> &v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

namespace {

struct LbfgsPair {
    std::vector<double> s, y;
    double rho = 0.0;
};

// Two-loop recursion; returns the quasi-Newton direction for gradient g.
std::vector<double> lbfgs_direction(const std::deque<LbfgsPair> &hist,
                                    const std::vector<double> &g) {
    std::vector<double> q = g;
    std::vector<double> alpha(hist.size());
    for (std::size_t i = hist.size(); i-- > 0;) {
        alpha[i] = hist[i].rho * dot(hist[i].s, q);
        for (std::size_t j = 0; j < q.size(); ++j)
            q[j] -= alpha[i] * hist[i].y[j];
    }
    const auto &last = hist.back();
    const double h0 = dot(last.s, last.y) / dot(last.y, last.y);
    for (double &x : q) x *= h0;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        const double beta = hist[i].rho * dot(hist[i].y, q);
        for (std::size_t j = 0; j < q.size(); ++j)
            q[j] += (alpha[i] - beta) * hist[i].s[j];
    }
    return q;
}

} // namespace

SolveReport minimize(const ProblemSpec &spec) {
    const SolverOptions &opt = spec.options;
    DiscreteField u(spec.mesh);
    if (opt.random_start) {
        std::mt19937_64 rng(opt.seed);
        std::uniform_real_distribution<double> dist(-1.0, 1.0);
        for (std::size_t v = 0; v < u.size(); ++v) u[v] = dist(rng);
        u.zero_boundary();
    }

    SolveReport report{DiscreteField(spec.mesh), {}, {}, 0.0, 0,
                       SolveStatus::MaxIterations, {}, {}};

    double e = energy(spec, u);
    std::vector<double> g = weak_gradient(spec, u);
    double res = sup_norm(g);
    report.energy_trace.push_back(e);
    report.residual_trace.push_back(res);

    std::deque<LbfgsPair> hist;
    double bb_step = 0.0;
    int iter = 0;
    SolveStatus status = SolveStatus::MaxIterations;

    for (; iter < opt.max_iter; ++iter) {
        if (res < opt.tol) {
            status = SolveStatus::Converged;
            break;
        }

        std::vector<double> d;
        bool quasi = false;
        if (opt.lbfgs_memory > 0 && !hist.empty()) {
            d = lbfgs_direction(hist, g);
            quasi = true;
        } else {
            d = g;
        }
        double gd = dot(g, d);
        if (!std::isfinite(gd) || gd <= 1e-14 * res * sup_norm(d)) {
            d = g; // quasi-Newton direction unusable: fall back to steepest
            gd = dot(g, g);
            quasi = false;
        }

        double alpha;
        if (quasi)
            alpha = 1.0;
        else if (bb_step > 0.0)
            alpha = std::clamp(bb_step, 1e-16, 1e16);
        else
            alpha = 1.0 / std::max(res, 1e-12);

        // Armijo backtracking on u - alpha d.
        DiscreteField u_new(spec.mesh);
        double e_new = e;
        bool accepted = false;
        for (int ls = 0; ls < 80; ++ls) {
            for (std::size_t v = 0; v < u.size(); ++v)
                u_new[v] = u[v] - alpha * d[v];
            e_new = energy(spec, u_new);
            if (std::isfinite(e_new) &&
                e_new <= e - opt.armijo_c1 * alpha * gd) {
                accepted = true;
                break;
            }
            alpha *= opt.backtrack;
        }
        if (!accepted) {
            status = SolveStatus::LineSearchStall;
            break;
        }

        std::vector<double> g_new = weak_gradient(spec, u_new);

        LbfgsPair pair;
        pair.s.resize(u.size());
        pair.y.resize(u.size());
        for (std::size_t v = 0; v < u.size(); ++v) {
            pair.s[v] = u_new[v] - u[v];
            pair.y[v] = g_new[v] - g[v];
        }
        const double sy = dot(pair.s, pair.y);
        const double ss = dot(pair.s, pair.s);
        const double yy = dot(pair.y, pair.y);
        if (sy > 1e-12 * std::sqrt(ss * yy) && sy > 0.0) {
            pair.rho = 1.0 / sy;
            bb_step = ss / sy;
            hist.push_back(std::move(pair));
            while (hist.size() > static_cast<std::size_t>(std::max(1, opt.lbfgs_memory)))
                hist.pop_front();
        }

        u = std::move(u_new);
        e = e_new;
        g = std::move(g_new);
        res = sup_norm(g);
        report.energy_trace.push_back(e);
        report.residual_trace.push_back(res);

        double unorm = 0.0;
        for (std::size_t v = 0; v < u.size(); ++v)
            unorm = std::max(unorm, std::abs(u[v]));
        if (e < opt.energy_floor || unorm > opt.norm_ceiling) {
            status = SolveStatus::NonCoercive;
            ++iter;
            break;
        }
    }
    if (status == SolveStatus::MaxIterations && res < opt.tol)
        status = SolveStatus::Converged;

    report.minimizer = std::move(u);
    report.residual_norm = res;
    report.iterations = iter;
    report.status = status;
    return report;
}

double coercivity_estimate(const ProblemSpec &spec, int samples,
                           int descent_steps) {
    if (!spec.reaction.A_infinity)
        throw Error("coercivity estimate requires the declared A_infinity");
    const NFunction &nf = spec.nf;
    const Mesh &mesh = *spec.mesh;
    const SpatialFn ainf = spec.reaction.A_infinity;
    const double ell = nf.ell();

    auto q_value = [&](const DiscreteField &v) {
        double acc = gradient_modular(nf, v);
        for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
            const double mean = v.mean_on(k);
            if (mean != 0.0)
                acc -= mesh.area(k) * ainf(mesh.centroid(k)) *
                       std::pow(std::abs(mean), ell);
        }
        return acc;
    };

    auto q_gradient = [&](const DiscreteField &v) {
        std::vector<double> r(mesh.vertex_count(), 0.0);
        for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
            const double area = mesh.area(k);
            const auto &tri = mesh.triangle(k);
            const Vec2 g = v.gradient_on(k);
            const double gnorm = std::hypot(g.x, g.y);
            const double coef = gnorm > 0.0 ? nf.phi(gnorm) : 0.0;
            const double mean = v.mean_on(k);
            double pull = 0.0;
            if (mean != 0.0)
                pull = ainf(mesh.centroid(k)) * ell *
                       std::pow(std::abs(mean), ell - 1.0) *
                       (mean > 0.0 ? 1.0 : -1.0) / 3.0;
            for (int i = 0; i < 3; ++i) {
                const std::size_t vj = tri[static_cast<std::size_t>(i)];
                if (mesh.is_boundary(vj)) continue;
                const Vec2 gl = mesh.hat_gradient(k, i);
                r[vj] += area * (coef * dot(g, gl) - pull);
            }
        }
        return r;
    };

    auto normalize = [&](DiscreteField &v) {
        const double norm = luxemburg_norm(nf, v);
        if (norm <= 0.0) return false;
        for (std::size_t i = 0; i < v.size(); ++i) v[i] /= norm;
        return true;
    };

    std::mt19937_64 rng(spec.options.seed + 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    double best = std::numeric_limits<double>::infinity();

    for (int s = 0; s < samples; ++s) {
        DiscreteField v(spec.mesh);
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = dist(rng);
        v.zero_boundary();
        if (!normalize(v)) continue;
        double q = q_value(v);
        double step = 0.1;
        for (int k = 0; k < descent_steps; ++k) {
            const std::vector<double> grad = q_gradient(v);
            DiscreteField trial(spec.mesh);
            for (std::size_t i = 0; i < v.size(); ++i)
                trial[i] = v[i] - step * grad[i];
            if (!normalize(trial)) {
                step *= 0.5;
                continue;
            }
            const double q_trial = q_value(trial);
            if (std::isfinite(q_trial) && q_trial < q) {
                v = std::move(trial);
                q = q_trial;
                step *= 1.3;
            } else {
                step *= 0.5;
                if (step < 1e-14) break;
            }
        }
        best = std::min(best, q);
    }
    return best;
}

namespace {

void audit_point(std::vector<GrowthViolation> &out, const std::string &name,
                 Vec2 x, double s, double lhs, double rhs) {
    const double slack = 1e-12 * std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (lhs > rhs + slack) out.push_back({name, x, s, lhs, rhs});
}

} // namespace

std::vector<GrowthViolation> growth_audit(const Reaction &reaction,
                                          const NFunction &nf,
                                          const SobolevConjugate *phi_star,
                                          const SampleBox &box) {
    if (reaction.flux_form == FluxGrowthForm::PhiStarPointwise ||
        reaction.flux_form == FluxGrowthForm::PhiStarWeak) {
        if (phi_star == nullptr)
            throw Error("declared bound needs the Sobolev conjugate");
    }

    std::vector<double> svalues;
    svalues.push_back(0.0);
    const double ratio = std::pow(box.s_max / box.s_min,
                                  1.0 / std::max(1, box.s_count - 1));
    for (int i = 0; i < box.s_count; ++i) {
        const double mag = box.s_min * std::pow(ratio, i);
        svalues.push_back(mag);
        svalues.push_back(-mag);
    }

    std::vector<GrowthViolation> out;
    const double ell = nf.ell();
    for (const Vec2 x : box.points) {
        for (const double s : svalues) {
            const double abs_s = std::abs(s);
            if (reaction.has_F_bound) {
                const double lhs = reaction.F(x, s);
                const double rhs =
                    reaction.A * std::pow(abs_s, ell) + eval_or_zero(reaction.B, x);
                audit_point(out, "F-power-bound", x, s, lhs, rhs);
            }
            if (reaction.flux_form == FluxGrowthForm::None) continue;
            const double fval = reaction.f(x, s);
            const double bval = eval_or_zero(reaction.b, x);
            switch (reaction.flux_form) {
            case FluxGrowthForm::PhiStarPointwise:
                audit_point(out, "phi-star-pointwise", x, s, std::abs(fval),
                            reaction.a * phi_star->value(abs_s) + bval);
                break;
            case FluxGrowthForm::PhiStarWeak:
                audit_point(out, "phi-star-weak", x, s, std::abs(fval * s),
                            reaction.a * phi_star->value(abs_s) + bval * abs_s);
                break;
            case FluxGrowthForm::PowerPointwise:
                audit_point(out, "power-pointwise", x, s, std::abs(fval),
                            reaction.a * std::pow(abs_s, reaction.power_exponent) +
                                bval);
                break;
            case FluxGrowthForm::None:
                break;
            }
        }

        if (reaction.A_infinity) {
            // Consistency of the declared limit of F(x,s)/|s|^ell at large |s|.
            const double limit = reaction.A_infinity(x);
            for (const double mag : {1e3, 1e4}) {
                for (const double sign : {1.0, -1.0}) {
                    const double s = sign * mag;
                    const double ratio_fs =
                        reaction.F(x, s) / std::pow(mag, ell);
                    const double bound = limit * 1.02 + 1e-9;
                    if (ratio_fs > bound)
                        out.push_back({"A-infinity-consistency", x, s, ratio_fs,
                                       bound});
                }
            }
        }
    }
    return out;
}

} // namespace phifem
