#pragma once

#include "phifem/errors.hpp"

#include <cmath>
#include <cstddef>
#include <string>

namespace phifem {

// Adaptive 1-D quadrature built on a Gauss(7)/Kronrod(15) panel.  The Gauss
// value embedded in the Kronrod rule gives a per-panel error estimate; panels
// whose estimate exceeds their share of the tolerance are bisected.  Nodes are
// strictly interior, so integrable endpoint behaviour (e.g. integrands that
// blow up like a fractional inverse power at one end) is never sampled at the
// singular point itself.

namespace detail {

// 15-point Kronrod abscissae on [-1, 1] (symmetric; only the non-negative
// half is stored) and the matching Kronrod / embedded-Gauss weights.
inline constexpr double kKronrodNodes[8] = {
    0.000000000000000000000000000000000e+00,
    2.077849550078984676006894037732449e-01,
    4.058451513773971669066064120769615e-01,
    5.860872354676911302941448382587296e-01,
    7.415311855993944398638647732807884e-01,
    8.648644233597690727897127886409262e-01,
    9.491079123427585245261896840478513e-01,
    9.914553711208126392068546975263285e-01};

inline constexpr double kKronrodWeights[8] = {
    2.094821410847278280129991748917143e-01,
    2.044329400752988924141619992346491e-01,
    1.903505780647854099132564024210137e-01,
    1.690047266392679028265834265985503e-01,
    1.406532597155259187451895905102379e-01,
    1.047900103222501838398763225415180e-01,
    6.309209262997855329070066318920429e-02,
    2.293532201052922496373200805896959e-02};

// Gauss weights for the odd-indexed Kronrod nodes (the embedded 7-point rule).
inline constexpr double kGaussWeights[4] = {
    4.179591836734693877551020408163265e-01,
    3.818300505051189449503697754889751e-01,
    2.797053914892766679014677714237796e-01,
    1.294849661688696932706114326790820e-01};

struct PanelResult {
    double kronrod;
    double error; // |K15 - G7|, inflated as usual
};

template <class F>
PanelResult gauss_kronrod_panel(F &&f, double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);

    const double f0 = f(c);
    double kron = kKronrodWeights[0] * f0;
    double gauss = kGaussWeights[0] * f0;
    for (int i = 1; i < 8; ++i) {
        const double dx = h * kKronrodNodes[i];
        const double fp = f(c + dx);
        const double fm = f(c - dx);
        kron += kKronrodWeights[i] * (fp + fm);
        if (i % 2 == 0) {
            gauss += kGaussWeights[i / 2] * (fp + fm);
        }
    }
    kron *= h;
    gauss *= h;
    const double diff = std::fabs(kron - gauss);
    // Standard inflation: the true error usually decays much faster than the
    // raw K-G difference; (200*diff)^1.5 is the classic QUADPACK heuristic.
    const double scaled = 200.0 * diff;
    const double err = (scaled > 1.0 || kron == 0.0)
                           ? diff
                           : diff * std::sqrt(scaled);
    return {kron, err};
}

} // namespace detail

struct QuadratureOptions {
    double rel_tol = 1e-10;
    double abs_floor = 1e-300; // stop refining panels below this absolute size
    int max_depth = 60;        // per-panel bisection depth
    std::size_t max_panels = 100000;
};

// Integrate f over [a, b].  Throws QuadratureFailure if the panel budget or
// recursion depth is exhausted before the tolerance is met.
template <class F>
double integrate_adaptive(F &&f, double a, double b,
                          const QuadratureOptions &opt = {}) {
    if (a == b) {
        return 0.0;
    }

    struct Segment {
        double a, b, value, error;
        int depth;
    };

    auto first = detail::gauss_kronrod_panel(f, a, b);
    if (!std::isfinite(first.kronrod)) {
        throw QuadratureFailure("non-finite integrand on [" +
                                std::to_string(a) + ", " + std::to_string(b) +
                                "]");
    }

    // Small fixed stack of active segments, worst-first refinement.
    std::size_t panels = 1;
    double total = first.kronrod;
    double total_err = first.error;

    // Recursive lambda keeps the code short; depth is bounded by max_depth.
    double tol_scale = std::fabs(total);

    const auto refine = [&](auto &&self, Segment seg) -> double {
        const double local_tol =
            opt.rel_tol * tol_scale * (seg.b - seg.a) / (b - a);
        if (seg.error <= std::max(local_tol, opt.abs_floor) ||
            seg.b - seg.a <= opt.abs_floor) {
            total_err -= seg.error;
            return seg.value;
        }
        if (seg.depth >= opt.max_depth || panels >= opt.max_panels) {
            throw QuadratureFailure(
                "adaptive quadrature did not converge (depth " +
                std::to_string(seg.depth) + ", panels " +
                std::to_string(panels) + ")");
        }
        const double mid = 0.5 * (seg.a + seg.b);
        auto left = detail::gauss_kronrod_panel(f, seg.a, mid);
        auto right = detail::gauss_kronrod_panel(f, mid, seg.b);
        panels += 2;
        if (!std::isfinite(left.kronrod) || !std::isfinite(right.kronrod)) {
            throw QuadratureFailure("non-finite integrand while refining");
        }
        // Keep the running total (and hence the relative-tolerance scale)
        // up to date as panels sharpen.
        total += left.kronrod + right.kronrod - seg.value;
        tol_scale = std::max(tol_scale, std::fabs(total));
        double v = self(self, Segment{seg.a, mid, left.kronrod, left.error,
                                      seg.depth + 1});
        v += self(self, Segment{mid, seg.b, right.kronrod, right.error,
                                seg.depth + 1});
        return v;
    };

    return refine(refine, Segment{a, b, first.kronrod, first.error, 0});
}

// Integrate f over (0, b] where f may have an integrable blow-up or another
// scale-free feature at 0.  Dyadic panels [b/2^{k+1}, b/2^k] are accumulated
// until they stop contributing relative to the running sum.  This converges
// geometrically whenever f behaves like a power t^alpha with alpha > -1 near
// the origin and never evaluates f(0).
template <class F>
double integrate_to_zero(F &&f, double b, double rel_tol = 1e-13,
                         int max_levels = 6000) {
    double acc = 0.0;
    double hi = b;
    int quiet = 0; // consecutive negligible panels before we stop
    for (int level = 0; level < max_levels; ++level) {
        const double lo = 0.5 * hi;
        QuadratureOptions opt;
        opt.rel_tol = 1e-12;
        const double piece = integrate_adaptive(f, lo, hi, opt);
        acc += piece;
        if (std::fabs(piece) <= rel_tol * std::fabs(acc)) {
            if (++quiet >= 4) {
                return acc;
            }
        } else {
            quiet = 0;
        }
        hi = lo;
        if (hi < 1e-300) {
            return acc;
        }
    }
    throw QuadratureFailure(
        "endpoint refinement toward 0 did not converge; the integrand decays "
        "too slowly for the requested tolerance");
}

} // namespace phifem
