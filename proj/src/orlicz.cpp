#include "phifem/orlicz.hpp"

#include <cmath>
#include <functional>
#include <vector>

namespace phifem {

namespace {

// Per-triangle (area, |sample|) quadrature data for the field values.
struct Samples {
    std::vector<double> area;
    std::vector<double> value;
};

Samples value_samples(const DiscreteField &u) {
    const Mesh &mesh = u.mesh();
    Samples s;
    s.area.reserve(mesh.triangle_count());
    s.value.reserve(mesh.triangle_count());
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
        s.area.push_back(mesh.area(k));
        s.value.push_back(std::abs(u.mean_on(k)));
    }
    return s;
}

Samples gradient_samples(const DiscreteField &u) {
    const Mesh &mesh = u.mesh();
    Samples s;
    s.area.reserve(mesh.triangle_count());
    s.value.reserve(mesh.triangle_count());
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k) {
        const Vec2 g = u.gradient_on(k);
        s.area.push_back(mesh.area(k));
        s.value.push_back(std::hypot(g.x, g.y));
    }
    return s;
}

double modular_of(const std::function<double(double)> &pot, const Samples &s,
                  double lambda) {
    double acc = 0.0;
    for (std::size_t k = 0; k < s.area.size(); ++k) {
        if (s.value[k] == 0.0) continue;
        acc += s.area[k] * pot(s.value[k] / lambda);
        // Overflow reads as "modular above 1", which is all bisection needs.
        if (!std::isfinite(acc)) return acc;
    }
    return acc;
}

// Bisection for the unique lambda with modular(u / lambda) = 1.
double luxemburg_core(const std::function<double(double)> &pot,
                      const Samples &s) {
    bool all_zero = true;
    for (double v : s.value)
        if (v != 0.0) {
            all_zero = false;
            break;
        }
    if (all_zero) return 0.0;

    double lo = 1.0, hi = 1.0;
    if (modular_of(pot, s, 1.0) > 1.0) {
        while (modular_of(pot, s, hi) > 1.0) {
            hi *= 2.0;
            if (hi > 1e300)
                throw BracketFailure("Luxemburg bracket overflow growing upward");
        }
        lo = hi / 2.0;
    } else {
        while (modular_of(pot, s, lo) <= 1.0) {
            lo /= 2.0;
            if (lo < 1e-300) {
                // Modular stays <= 1 for every lambda: the samples are so
                // small that the norm is numerically 0.
                return 0.0;
            }
        }
        hi = lo * 2.0;
    }

    for (int iter = 0; iter < 200 && (hi - lo) > 1e-12 * hi; ++iter) {
        const double mid = std::sqrt(lo * hi);
        if (modular_of(pot, s, mid) > 1.0)
            lo = mid;
        else
            hi = mid;
    }
    return std::sqrt(lo * hi);
}

} // namespace

double modular(const NFunction &nf, const DiscreteField &u) {
    const Samples s = value_samples(u);
    return modular_of([&nf](double t) { return nf.potential(t); }, s, 1.0);
}

double gradient_modular(const NFunction &nf, const DiscreteField &u) {
    const Samples s = gradient_samples(u);
    return modular_of([&nf](double t) { return nf.potential(t); }, s, 1.0);
}

double luxemburg_norm(const NFunction &nf, const DiscreteField &u) {
    return luxemburg_core([&nf](double t) { return nf.potential(t); },
                          value_samples(u));
}

double gradient_luxemburg_norm(const NFunction &nf, const DiscreteField &u) {
    return luxemburg_core([&nf](double t) { return nf.potential(t); },
                          gradient_samples(u));
}

double complementary_luxemburg_norm(const NFunction &nf,
                                    const DiscreteField &u) {
    return luxemburg_core([&nf](double t) { return nf.complementary(t); },
                          value_samples(u));
}

BoundTriple norm_modular_sandwich(const NFunction &nf,
                                  const DiscreteField &u) {
    const double norm = luxemburg_norm(nf, u);
    return {nf.zeta_lower(norm), modular(nf, u), nf.zeta_upper(norm)};
}

double holder_check(const NFunction &nf, const DiscreteField &u,
                    const DiscreteField &v) {
    require_same_mesh(u, v);
    const double nu = luxemburg_norm(nf, u);
    const double nv = complementary_luxemburg_norm(nf, v);
    const Mesh &mesh = u.mesh();
    double pairing = 0.0;
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k)
        pairing += mesh.area(k) * std::abs(u.mean_on(k) * v.mean_on(k));
    return 2.0 * nu * nv - pairing;
}

double poincare_ratio(const NFunction &nf, const DiscreteField &u) {
    const double denom = gradient_luxemburg_norm(nf, u);
    if (denom == 0.0) return 0.0;
    return luxemburg_norm(nf, u) / denom;
}

double embedding_ratio(const NFunction &nf, const DiscreteField &u) {
    const double norm = luxemburg_norm(nf, u);
    if (norm == 0.0) return 0.0;
    const double ell = nf.ell();
    const Mesh &mesh = u.mesh();
    double acc = 0.0;
    for (std::size_t k = 0; k < mesh.triangle_count(); ++k)
        acc += mesh.area(k) * std::pow(std::abs(u.mean_on(k)), ell);
    return std::pow(acc, 1.0 / ell) / norm;
}

} // namespace phifem
