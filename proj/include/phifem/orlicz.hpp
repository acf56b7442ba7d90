#pragma once

#include "phifem/mesh.hpp"
#include "phifem/nfunction.hpp"

namespace phifem {

// Integral of Phi(|u|) over the mesh, one-point barycentric quadrature per
// triangle (exact for the P1 field itself, consistent with the element order).
double modular(const NFunction &nf, const DiscreteField &u);

// Integral of Phi(|grad u|); element gradients are constant per triangle.
double gradient_modular(const NFunction &nf, const DiscreteField &u);

// Luxemburg norm: the unique lambda > 0 with modular(u / lambda) = 1, located
// by bisection on the strictly decreasing lambda -> modular map.  The zero
// field (at quadrature points) has norm 0 by definition.  Throws
// BracketFailure if the bracket cannot be grown before overflow.
double luxemburg_norm(const NFunction &nf, const DiscreteField &u);

// Luxemburg norm of |grad u| — the norm used for trace-zero fields.
double gradient_luxemburg_norm(const NFunction &nf, const DiscreteField &u);

// Luxemburg norm taken with the complementary N-function.
double complementary_luxemburg_norm(const NFunction &nf,
                                    const DiscreteField &u);

// (zeta0(||u||), modular(u), zeta1(||u||)): the modular is pinched between
// the scaling functions of the norm.
BoundTriple norm_modular_sandwich(const NFunction &nf, const DiscreteField &u);

// Nonnegative Hoelder slack 2 ||u||_Phi ||v||_Phi~ - integral |u v|.
double holder_check(const NFunction &nf, const DiscreteField &u,
                    const DiscreteField &v);

// Empirical per-field ratio ||u||_Phi / ||grad u||_Phi on the given mesh;
// reported as data, no continuum constant is claimed.  Zero field -> 0.
double poincare_ratio(const NFunction &nf, const DiscreteField &u);

// (integral |u|^ell)^(1/ell) / ||u||_Phi with ell the lower growth index;
// scale-invariant, bounded over nonzero fields.  Zero field -> 0.
double embedding_ratio(const NFunction &nf, const DiscreteField &u);

} // namespace phifem
