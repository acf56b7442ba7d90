#include "phifem/nfunction.hpp"

#include "phifem/expression.hpp"
#include "phifem/loglog_table.hpp"
#include "phifem/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

namespace phifem {

namespace {

std::vector<double> log_spaced(double lo, double hi, int n) {
    std::vector<double> out(static_cast<std::size_t>(n));
    const double llo = std::log(lo);
    const double lhi = std::log(hi);
    for (int i = 0; i < n; ++i) {
        const double f = static_cast<double>(i) / (n - 1);
        out[static_cast<std::size_t>(i)] = std::exp(llo + f * (lhi - llo));
    }
    out.front() = lo;
    out.back() = hi;
    return out;
}

} // namespace

struct NFunction::Impl {
    PhiSpec spec;
    BuildOptions opt;
    std::vector<double> grid;
    double ell = 0.0;
    double em = 0.0;
    double delta2 = 0.0;
    LogLogTable table; // only populated when spec.potential is absent

    double phi_at(double t) const { return spec.phi(t); }

    double flux_at(double t) const { return t <= 0.0 ? 0.0 : t * spec.phi(t); }

    double potential_at(double t) const {
        const double a = std::fabs(t);
        if (a == 0.0) {
            return 0.0;
        }
        if (spec.potential) {
            return spec.potential(a);
        }
        return table.value(a);
    }

    // Maximizer of s*t - Phi(s): the monotone solution of s*phi(s) = t.
    double flux_inverse(double t) const {
        double lo = 1.0;
        double hi = 1.0;
        const double cap = spec.t_max * 1e8;
        if (flux_at(1.0) < t) {
            while (flux_at(hi) < t) {
                hi *= 2.0;
                if (hi > cap) {
                    std::ostringstream msg;
                    msg << "no s <= " << cap << " with s*phi(s) >= " << t
                        << "; raise the domain hint t_max";
                    throw BracketFailure(msg.str());
                }
            }
            lo = hi * 0.5;
        } else {
            while (flux_at(lo) > t) {
                lo *= 0.5;
                if (lo < 1e-300) {
                    throw BracketFailure(
                        "s*phi(s) stays above the target all the way to 0");
                }
            }
            hi = lo * 2.0;
        }

        // Safeguarded Newton when the flux derivative is available, plain
        // bisection in log coordinates otherwise.  The bracket is kept valid
        // throughout, so either way the iteration cannot escape.
        double s = std::sqrt(lo * hi);
        for (int it = 0; it < opt.root_max_iter; ++it) {
            const double f = flux_at(s) - t;
            if (std::fabs(f) <= 1e-14 * std::fabs(t)) {
                return s;
            }
            if (f > 0.0) {
                hi = s;
            } else {
                lo = s;
            }
            double next = 0.0;
            if (spec.flux_derivative) {
                const double d = spec.flux_derivative(s);
                if (d > 0.0) {
                    next = s - f / d;
                }
            }
            if (!(next > lo && next < hi)) {
                next = std::sqrt(lo * hi);
            }
            s = next;
            if (hi - lo <= opt.root_rel_tol * hi) {
                return s;
            }
        }
        return s;
    }
};

double NFunction::potential(double t) const { return impl_->potential_at(t); }
double NFunction::phi(double t) const { return impl_->phi_at(t); }
double NFunction::flux(double t) const { return impl_->flux_at(t); }
double NFunction::ell() const { return impl_->ell; }
double NFunction::em() const { return impl_->em; }
double NFunction::delta2_constant() const { return impl_->delta2; }
const std::string &NFunction::name() const { return impl_->spec.name; }
const BuildOptions &NFunction::options() const { return impl_->opt; }
bool NFunction::has_closed_form() const {
    return static_cast<bool>(impl_->spec.potential);
}

std::span<const double> NFunction::probe_grid() const {
    return {impl_->grid.data(), impl_->grid.size()};
}

double NFunction::inverse_potential(double w) const {
    if (w < 0.0) {
        throw Error("inverse_potential needs w >= 0");
    }
    if (w == 0.0) {
        return 0.0;
    }
    double lo = 1.0;
    double hi = 1.0;
    if (impl_->potential_at(1.0) < w) {
        while (impl_->potential_at(hi) < w) {
            hi *= 2.0;
            if (hi > 1e300) {
                throw BracketFailure("potential never reaches the target");
            }
        }
        lo = hi * 0.5;
    } else {
        while (impl_->potential_at(lo) > w) {
            lo *= 0.5;
            if (lo < 1e-300) {
                throw BracketFailure("potential stays above the target near 0");
            }
        }
        hi = lo * 2.0;
    }
    for (int it = 0; it < impl_->opt.root_max_iter; ++it) {
        const double mid = std::sqrt(lo * hi);
        if (impl_->potential_at(mid) >= w) {
            hi = mid;
        } else {
            lo = mid;
        }
        if (hi - lo <= impl_->opt.root_rel_tol * hi) {
            break;
        }
    }
    return std::sqrt(lo * hi);
}

double NFunction::complementary(double t) const {
    if (t < 0.0) {
        throw Error("complementary is defined for t >= 0");
    }
    if (t == 0.0) {
        return 0.0;
    }
    const double s = impl_->flux_inverse(t);
    return s * t - impl_->potential_at(s);
}

double NFunction::young_gap(double s, double t) const {
    return impl_->potential_at(s) + complementary(t) - s * t;
}

double NFunction::zeta_lower(double t) const {
    return std::min(std::pow(t, impl_->ell), std::pow(t, impl_->em));
}

double NFunction::zeta_upper(double t) const {
    return std::max(std::pow(t, impl_->ell), std::pow(t, impl_->em));
}

BoundTriple NFunction::scaling_bounds(double rho, double t) const {
    if (rho < 0.0 || t < 0.0) {
        throw Error("scaling_bounds needs rho, t >= 0");
    }
    const double base = impl_->potential_at(rho);
    return {zeta_lower(t) * base, impl_->potential_at(rho * t),
            zeta_upper(t) * base};
}

NFunction build_nfunction(PhiSpec spec, BuildOptions opt) {
    if (!spec.phi) {
        throw PhiValidationError("PhiSpec has no phi evaluator");
    }
    if (!(opt.grid.t_min > 0.0) || !(opt.grid.t_max > opt.grid.t_min) ||
        opt.grid.points < 16) {
        throw PhiValidationError("probe grid must satisfy 0 < t_min < t_max "
                                 "with at least 16 points");
    }

    auto impl = std::make_shared<NFunction::Impl>();
    impl->spec = std::move(spec);
    impl->opt = opt;
    impl->grid = log_spaced(opt.grid.t_min, opt.grid.t_max, opt.grid.points);
    const auto &grid = impl->grid;
    const std::size_t n = grid.size();

    // Positivity and monotonicity of the flux t*phi(t).
    std::vector<double> flux(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double p = impl->spec.phi(grid[i]);
        if (!std::isfinite(p) || p <= 0.0) {
            std::ostringstream msg;
            msg << "phi(" << grid[i] << ") = " << p
                << " is not a positive finite value";
            throw PhiValidationError(msg.str());
        }
        flux[i] = grid[i] * p;
        if (i > 0 && flux[i] < flux[i - 1] * (1.0 - opt.monotone_slack)) {
            std::ostringstream msg;
            msg << "t*phi(t) decreases between t = " << grid[i - 1]
                << " and t = " << grid[i];
            throw NonMonotoneError(msg.str(), grid[i]);
        }
    }

    // Limit behaviour of the flux at both ends: s*phi(s) must vanish toward
    // 0 and blow up toward infinity for Phi to be a genuine N-function.
    const double flux_mid = flux[n / 2];
    if (!(flux.front() * opt.limit_factor <= flux_mid)) {
        throw PhiValidationError(
            "t*phi(t) does not decay toward 0 across the probe grid; the "
            "limit t*phi(t) -> 0 could not be certified");
    }
    if (!(flux.back() >= flux_mid * opt.limit_factor)) {
        throw PhiValidationError(
            "t*phi(t) does not grow toward infinity across the probe grid");
    }

    // Potential: adopt the closed form after a spot consistency check, or
    // tabulate the integral of the flux on an extended log grid.
    if (impl->spec.potential) {
        for (std::size_t i = n / 8; i < n; i += n / 4) {
            const double t = grid[i];
            const double eps = 1e-5;
            const double fd = (impl->spec.potential(t * (1.0 + eps)) -
                               impl->spec.potential(t * (1.0 - eps))) /
                              (2.0 * eps * t);
            if (!(std::fabs(fd - flux[i]) <=
                  1e-2 * (std::fabs(flux[i]) + 1e-300))) {
                std::ostringstream msg;
                msg << "closed-form potential is inconsistent with phi at t = "
                    << t << " (d/dt Phi ~ " << fd << ", t*phi(t) = " << flux[i]
                    << ")";
                throw PhiValidationError(msg.str());
            }
        }
    } else {
        // 128 knots per decade, three extra decades on both sides so that
        // doubling arguments and norm bisections stay inside the table.
        const double lo = opt.grid.t_min * 1e-3;
        const double hi = opt.grid.t_max * 1e3;
        const int per_decade = 128;
        const int knots =
            static_cast<int>(std::ceil(std::log10(hi / lo) * per_decade)) + 1;
        std::vector<double> ts = log_spaced(lo, hi, knots);

        QuadratureOptions qopt;
        qopt.rel_tol = opt.quad_rel_tol * 1e-2;
        auto integrand = [&](double s) { return impl->flux_at(s); };

        std::vector<double> lx(ts.size()), ly(ts.size()), slope(ts.size());
        double acc = integrate_to_zero(integrand, ts[0]);
        lx[0] = std::log(ts[0]);
        ly[0] = std::log(acc);
        slope[0] = ts[0] * impl->flux_at(ts[0]) / acc;
        for (std::size_t k = 1; k < ts.size(); ++k) {
            acc += integrate_adaptive(integrand, ts[k - 1], ts[k], qopt);
            lx[k] = std::log(ts[k]);
            ly[k] = std::log(acc);
            slope[k] = ts[k] * impl->flux_at(ts[k]) / acc;
        }
        impl->table = LogLogTable(std::move(lx), std::move(ly),
                                  std::move(slope));
    }

    // Growth indices from the quotient t^2 phi(t) / Phi(t) = t*flux/Phi.
    double q_min = std::numeric_limits<double>::infinity();
    double q_max = 0.0;
    double prev_pot = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double pot = impl->potential_at(grid[i]);
        if (!(pot > prev_pot)) {
            std::ostringstream msg;
            msg << "potential is not strictly increasing at t = " << grid[i];
            throw PhiValidationError(msg.str());
        }
        prev_pot = pot;
        const double q = grid[i] * flux[i] / pot;
        if (!std::isfinite(q) || q <= 0.0) {
            std::ostringstream msg;
            msg << "index quotient at t = " << grid[i] << " is " << q;
            throw PhiValidationError(msg.str());
        }
        q_min = std::min(q_min, q);
        q_max = std::max(q_max, q);
    }
    impl->ell = q_min - opt.index_margin;
    impl->em = q_max + opt.index_margin;
    if (!(impl->ell > 1.0)) {
        std::ostringstream msg;
        msg << "lower growth index ell = " << impl->ell
            << " must exceed 1 for an admissible N-function";
        throw IndexOutOfRangeError(msg.str());
    }

    double k2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        k2 = std::max(k2, impl->potential_at(2.0 * grid[i]) /
                              impl->potential_at(grid[i]));
    }
    impl->delta2 = k2;

    NFunction nf;
    nf.impl_ = std::move(impl);
    return nf;
}

// ---------------------------------------------------------------------------
// Sobolev conjugate
// ---------------------------------------------------------------------------

struct SobolevConjugate::Impl {
    int dimension = 0;
    double ell_star = 0.0;
    double em_star = 0.0;
    LogLogTable table; // t -> Phi_*^{-1}(t) in log-log coordinates
};

int SobolevConjugate::dimension() const { return impl_->dimension; }
double SobolevConjugate::ell_star() const { return impl_->ell_star; }
double SobolevConjugate::em_star() const { return impl_->em_star; }

double SobolevConjugate::inverse(double t) const {
    if (t < 0.0) {
        throw Error("Phi_*^{-1} is defined for t >= 0");
    }
    if (t == 0.0) {
        return 0.0;
    }
    return impl_->table.value(t);
}

double SobolevConjugate::value(double t) const {
    if (t < 0.0) {
        throw Error("Phi_* is defined for t >= 0");
    }
    if (t == 0.0) {
        return 0.0;
    }
    return impl_->table.inverse(t);
}

double SobolevConjugate::quotient(double t) const {
    const double h = 1e-4;
    const double up = std::log(value(t * std::exp(h)));
    const double dn = std::log(value(t * std::exp(-h)));
    return (up - dn) / (2.0 * h);
}

BoundTriple SobolevConjugate::scaling_bounds(double rho, double t) const {
    if (rho < 0.0 || t < 0.0) {
        throw Error("scaling_bounds needs rho, t >= 0");
    }
    const double base = value(rho);
    const double z0 =
        std::min(std::pow(t, impl_->ell_star), std::pow(t, impl_->em_star));
    const double z1 =
        std::max(std::pow(t, impl_->ell_star), std::pow(t, impl_->em_star));
    return {z0 * base, value(rho * t), z1 * base};
}

SobolevConjugate sobolev_conjugate(const NFunction &nf, int dimension) {
    if (dimension < 2) {
        throw IndexOutOfRangeError("Sobolev conjugate needs dimension >= 2");
    }
    const double N = static_cast<double>(dimension);
    if (!(nf.em() < N)) {
        std::ostringstream msg;
        msg << "upper growth index m = " << nf.em()
            << " must stay below the dimension N = " << dimension
            << " for the Sobolev conjugate to exist";
        throw IndexOutOfRangeError(msg.str());
    }

    auto impl = std::make_shared<SobolevConjugate::Impl>();
    impl->dimension = dimension;
    impl->ell_star = N * nf.ell() / (N - nf.ell());
    impl->em_star = N * nf.em() / (N - nf.em());

    // The defining integral in the substituted variable tau = Phi^{-1}(s):
    //
    //   Phi_*^{-1}(Phi(tau_1)) = integral_0^{tau_1} tau^2 phi(tau)
    //                            * Phi(tau)^{-(N+1)/N} d tau.
    //
    // The substitution removes the nested inversion from the integrand and
    // tames the endpoint at 0 to an integrable power.  Written as the index
    // quotient times Phi^{-1/N}, the evaluation stays inside double range
    // even where Phi itself is within a few hundred orders of underflow.
    auto g = [&](double tau) {
        const double pot = nf.potential(tau);
        const double q = tau * nf.flux(tau) / pot;
        return q * std::pow(pot, -1.0 / N);
    };

    // Below tau_floor the potential sinks under 1e-250 and the integrand is
    // continued analytically as the power law fitted at the floor; by then
    // the quotient is constant to machine precision, so the tail is exact.
    const double tau_floor = nf.inverse_potential(1e-250);
    auto head_at = [&](double tau0) {
        double acc = 0.0;
        double hi = tau0;
        QuadratureOptions qo;
        qo.rel_tol = 1e-12;
        int quiet = 0;
        while (hi > 2.0 * tau_floor && hi > 1e-300) {
            const double lo = 0.5 * hi;
            const double piece = integrate_adaptive(g, lo, hi, qo);
            acc += piece;
            if (std::fabs(piece) <= 1e-13 * acc) {
                if (++quiet >= 4) {
                    return acc;
                }
            } else {
                quiet = 0;
            }
            hi = lo;
        }
        const double a =
            std::log(g(2.0 * hi) / g(hi)) / std::log(2.0); // local exponent
        if (a > -1.0) {
            acc += g(hi) * hi / (a + 1.0);
        }
        return acc;
    };

    // Coverage targets: the forward function Phi_* should be tabulated for
    // arguments in roughly [1e-7, 1e7] and the inverse down to the probe
    // floor.  Beyond the table both tails continue as power laws.
    const double y_lo_target = 1e-7;
    const double y_hi_target = 1e7;
    const double t_lo_target = 0.5 * nf.options().grid.t_min;

    double tau_lo = std::min(1e-2, nf.inverse_potential(t_lo_target));
    double head = head_at(tau_lo);
    for (int shrink = 0; shrink < 80 && head > 0.125 * y_lo_target; ++shrink) {
        const double next = tau_lo * 0.1;
        if (next < 4.0 * tau_floor) {
            break; // best effort: the power-law tail takes over below this
        }
        tau_lo = next;
        head = head_at(tau_lo);
    }

    const int per_decade = 128;
    const double step = std::pow(10.0, 1.0 / per_decade);
    const std::size_t max_knots = 60000;

    std::vector<double> lx, ly, slope;
    lx.reserve(1 << 14);
    ly.reserve(1 << 14);
    slope.reserve(1 << 14);

    QuadratureOptions qopt;
    qopt.rel_tol = 1e-12;

    double tau = tau_lo;
    double y = head;
    double t = nf.potential(tau);
    auto push = [&](double tau_k, double t_k, double y_k) {
        lx.push_back(std::log(t_k));
        ly.push_back(std::log(y_k));
        slope.push_back(tau_k * std::pow(t_k, -1.0 / N) / y_k);
    };
    push(tau, t, y);
    while (y < y_hi_target * 8.0 || lx.size() < 2) {
        const double tau_next = tau * step;
        y += integrate_adaptive(g, tau, tau_next, qopt);
        tau = tau_next;
        t = nf.potential(tau);
        push(tau, t, y);
        if (lx.size() > max_knots) {
            throw QuadratureFailure(
                "Sobolev conjugate tabulation exceeded the knot budget; the "
                "upper index is too close to the dimension");
        }
    }

    impl->table = LogLogTable(std::move(lx), std::move(ly), std::move(slope));

    SobolevConjugate sc;
    sc.impl_ = std::move(impl);
    return sc;
}

// ---------------------------------------------------------------------------
// Built-in generating functions
// ---------------------------------------------------------------------------

namespace {

double require_param(const std::map<std::string, double> &params,
                     const std::string &kind, const std::string &key) {
    const auto it = params.find(key);
    if (it == params.end()) {
        throw Error("phi kind '" + kind + "' needs parameter '" + key + "'");
    }
    return it->second;
}

void reject_unknown(const std::map<std::string, double> &params,
                    const std::string &kind,
                    std::initializer_list<const char *> known) {
    for (const auto &[key, value] : params) {
        (void)value;
        bool ok = false;
        for (const char *k : known) {
            ok = ok || key == k;
        }
        if (!ok) {
            throw Error("phi kind '" + kind + "' does not take parameter '" +
                        key + "'");
        }
    }
}

} // namespace

PhiSpec make_phi(const std::string &kind,
                 const std::map<std::string, double> &params) {
    PhiSpec spec;
    if (kind == "linear") {
        reject_unknown(params, kind, {"c"});
        const double c = params.count("c") ? params.at("c") : 1.0;
        if (!(c > 0.0)) {
            throw Error("linear phi needs c > 0");
        }
        spec.phi = [c](double) { return c; };
        spec.potential = [c](double t) { return 0.5 * c * t * t; };
        spec.flux_derivative = [c](double) { return c; };
        spec.name = "linear";
    } else if (kind == "power") {
        reject_unknown(params, kind, {"p"});
        const double p = require_param(params, kind, "p");
        spec.phi = [p](double t) { return std::pow(t, p - 2.0); };
        spec.potential = [p](double t) { return std::pow(t, p) / p; };
        spec.flux_derivative = [p](double t) {
            return (p - 1.0) * std::pow(t, p - 2.0);
        };
        spec.name = "power";
    } else if (kind == "model-gamma") {
        reject_unknown(params, kind, {"gamma"});
        const double g = require_param(params, kind, "gamma");
        // (sqrt(1+t^2) - 1) rewritten as t^2/(1 + sqrt(1+t^2)) so that small
        // t never cancels; the index quotient then lands in [gamma, 2*gamma]
        // to the last bit.
        auto base = [](double t) {
            return t * t / (1.0 + std::sqrt(1.0 + t * t));
        };
        spec.phi = [g, base](double t) {
            return g * std::pow(base(t), g - 1.0) / std::sqrt(1.0 + t * t);
        };
        spec.potential = [g, base](double t) { return std::pow(base(t), g); };
        spec.name = "model-gamma";
    } else if (kind == "log-power") {
        reject_unknown(params, kind, {"p"});
        const double p = require_param(params, kind, "p");
        spec.phi = [p](double t) {
            return p * std::pow(t, p - 2.0) * std::log1p(t) +
                   std::pow(t, p - 1.0) / (t + 1.0);
        };
        spec.potential = [p](double t) {
            return std::pow(t, p) * std::log1p(t);
        };
        spec.name = "log-power";
    } else {
        throw Error("unknown phi kind '" + kind + "'");
    }
    return spec;
}

PhiSpec make_phi_expression(const std::string &expr_text) {
    const std::string vars[] = {"t"};
    Expression e = Expression::parse(expr_text, vars);
    PhiSpec spec;
    spec.phi = [e](double t) { return e.eval1(t); };
    spec.name = "expression";
    return spec;
}

} // namespace phifem
