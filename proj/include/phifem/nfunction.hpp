#pragma once

#include "phifem/errors.hpp"

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>

namespace phifem {

// Description of the generating function phi of an N-function
//
//     Phi(t) = integral_0^t s*phi(s) ds.
//
// phi must be positive and continuous on (0, inf) with s*phi(s) nondecreasing,
// s*phi(s) -> 0 as s -> 0 and s*phi(s) -> inf as s -> inf.  Those conditions
// are certified numerically on a log-spaced probe grid by build_nfunction.
struct PhiSpec {
    std::function<double(double)> phi;             // required: phi(t), t > 0
    std::function<double(double)> potential;       // optional closed-form Phi
    std::function<double(double)> flux_derivative; // optional d/dt [t*phi(t)]
    double t_max = 1e6;                            // domain hint
    std::string name = "phi";
};

struct ProbeGrid {
    double t_min = 1e-6;
    double t_max = 1e6;
    int points = 512;
};

struct BuildOptions {
    ProbeGrid grid;
    // Absolute widening applied to the probed quotient range [ell, m].
    double index_margin = 1e-6;
    double quad_rel_tol = 1e-10;   // potential quadrature when no closed form
    double root_rel_tol = 1e-12;   // monotone root-finds (complementary, ...)
    int root_max_iter = 200;
    double monotone_slack = 1e-12; // relative slack when probing t*phi(t)
    // Limit certification: t*phi(t) must drop/rise by at least this factor
    // between the middle of the probe grid and each end.
    double limit_factor = 100.0;
};

// lower <= value <= upper triple produced by the scaling-envelope checks.
struct BoundTriple {
    double lower = 0.0;
    double value = 0.0;
    double upper = 0.0;

    bool holds(double rel_slack = 0.0) const {
        const double pad_lo = rel_slack * (std::abs(lower) + 1e-300);
        const double pad_hi = rel_slack * (std::abs(upper) + 1e-300);
        return value >= lower - pad_lo && value <= upper + pad_hi;
    }
};

// An N-function with certified growth indices.  Immutable and cheap to copy;
// all member functions are safe to call concurrently after construction.
class NFunction {
public:
    // Phi(|t|).
    double potential(double t) const;
    // phi(t) for t > 0.
    double phi(double t) const;
    // t*phi(t) for t >= 0, with the continuous extension 0 at t = 0.
    double flux(double t) const;
    // Inverse of Phi on [0, inf): Phi(inverse_potential(w)) = w.
    double inverse_potential(double w) const;

    // Complementary function  Phi~(t) = max_{s >= 0} { s t - Phi(s) },
    // computed by solving s*phi(s) = t for the maximizer.
    double complementary(double t) const;

    // Phi(s) + Phi~(t) - s t  (>= 0 up to root-find error).
    double young_gap(double s, double t) const;

    // Power-envelope bounds: with zeta0(t) = min(t^ell, t^em) and
    // zeta1(t) = max(t^ell, t^em),
    //   zeta0(t)*Phi(rho) <= Phi(rho*t) <= zeta1(t)*Phi(rho).
    BoundTriple scaling_bounds(double rho, double t) const;
    double zeta_lower(double t) const; // zeta0
    double zeta_upper(double t) const; // zeta1

    // Certified growth indices: ell <= t^2 phi(t) / Phi(t) <= em on the
    // probe grid, widened by the build margin; 1 < ell <= em.
    double ell() const;
    double em() const;
    // K with Phi(2t) <= K * Phi(t) across the probe grid.
    double delta2_constant() const;

    std::span<const double> probe_grid() const;
    const std::string &name() const;
    const BuildOptions &options() const;
    bool has_closed_form() const;

private:
    friend NFunction build_nfunction(PhiSpec, BuildOptions);
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

// Probes phi on the grid, certifies positivity, flux monotonicity, the
// s*phi(s) limits at 0 and infinity and the index range, and precomputes
// whatever tables are needed.  Throws PhiValidationError,
// NonMonotoneError, IndexOutOfRangeError or QuadratureFailure.
NFunction build_nfunction(PhiSpec spec, BuildOptions options = {});

// The Sobolev conjugate Phi_* of an N-function in dimension N, defined
// through its inverse
//
//     Phi_*^{-1}(t) = integral_0^t Phi^{-1}(s) / s^((N+1)/N) ds,
//
// tabulated once at construction and evaluated by monotone interpolation.
// Requires 1 < ell <= em < N.
class SobolevConjugate {
public:
    int dimension() const;
    // N*ell/(N - ell) and N*em/(N - em).
    double ell_star() const;
    double em_star() const;

    // Phi_*^{-1}(t).
    double inverse(double t) const;
    // Phi_*(t) by monotone inversion of the tabulated Phi_*^{-1}.
    double value(double t) const;
    // d ln Phi_* / d ln t by central differences in log-log coordinates.
    double quotient(double t) const;

    // Same power-envelope bounds as NFunction::scaling_bounds, with the
    // conjugate indices ell_star / em_star around Phi_*.
    BoundTriple scaling_bounds(double rho, double t) const;

private:
    friend SobolevConjugate sobolev_conjugate(const NFunction &, int);
    struct Impl;
    std::shared_ptr<const Impl> impl_;
};

SobolevConjugate sobolev_conjugate(const NFunction &nf, int dimension);

// Built-in generating functions:
//   "linear"      phi(t) = c                 Phi(t) = c t^2 / 2     (param c)
//   "power"       phi(t) = t^(p-2)           Phi(t) = t^p / p       (param p)
//   "model-gamma" phi(t) = g (sqrt(1+t^2)-1)^(g-1) / sqrt(1+t^2)
//                 Phi(t) = (sqrt(1+t^2)-1)^g                        (param gamma)
//   "log-power"   phi(t) = p t^(p-2) ln(1+t) + t^(p-1)/(t+1)
//                 Phi(t) = t^p ln(1+t)                              (param p)
// Unknown kinds or unexpected parameters are rejected.
PhiSpec make_phi(const std::string &kind,
                 const std::map<std::string, double> &params = {});

// phi given as an expression in the variable t, e.g. "2*t" or "t^0.5".
// No closed-form potential: Phi is tabulated by adaptive quadrature.
PhiSpec make_phi_expression(const std::string &expr_text);

} // namespace phifem
