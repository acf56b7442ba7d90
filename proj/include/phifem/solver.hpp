#pragma once

#include "phifem/mesh.hpp"
#include "phifem/nfunction.hpp"
#include "phifem/orlicz.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace phifem {

// Spatial functions are pointwise-evaluable closures over mesh coordinates.
using SpatialFn = std::function<double(Vec2)>;
// Reaction terms depend on position and the field value s.
using ReactionFn = std::function<double(Vec2, double)>;

// Which inequality the reaction declares for the audit of f itself.
enum class FluxGrowthForm {
    None,
    PhiStarPointwise, // |f(x,s)| <= a * PhiStar(|s|) + b(x)
    PhiStarWeak,      // |f(x,s) s| <= a * PhiStar(|s|) + b(x) |s|
    PowerPointwise,   // |f(x,s)| <= a * |s|^exponent + b(x)
};

// Carathéodory nonlinearity f(x, s) together with its primitive
// F(x, s) = integral of f(x, .) from 0 to s and optional growth metadata.
struct Reaction {
    ReactionFn f;     // defaults to 0
    ReactionFn F;     // primitive; filled by quadrature when absent
    SpatialFn A_infinity; // optional: declared limit of F(x,s)/|s|^ell

    // Declared bound F(x,s) <= A |s|^ell + B(x); audited when has_F_bound.
    bool has_F_bound = false;
    double A = 0.0;
    SpatialFn B;

    // Declared bound on f per flux_form with constants a, b(x).
    FluxGrowthForm flux_form = FluxGrowthForm::None;
    double a = 0.0;
    SpatialFn b;
    double power_exponent = 0.0; // used by PowerPointwise
};

// Validates the pair (f, F): F(x,0) = 0 and dF/ds = f at probe points, and
// substitutes a Gauss quadrature primitive when F is not supplied.
// Throws Error on inconsistency.
Reaction make_reaction(ReactionFn f, ReactionFn F = nullptr);

struct SolverOptions {
    double tol = 1e-8;          // residual sup-norm target
    int max_iter = 10000;
    int lbfgs_memory = 10;      // 0 switches to plain steepest descent
    double armijo_c1 = 1e-4;
    double backtrack = 0.5;
    double energy_floor = -1e12; // below this the descent is flagged
    double norm_ceiling = 1e12;  // sup-norm ceiling for the iterate
    unsigned long long seed = 0;
    bool random_start = false;   // default start is the zero field
};

struct ProblemSpec {
    NFunction nf;
    Reaction reaction;
    SpatialFn h;   // source term; null means 0
    MeshPtr mesh;
    SolverOptions options;
};

enum class SolveStatus { Converged, MaxIterations, LineSearchStall, NonCoercive };
std::string to_string(SolveStatus status);

struct GrowthViolation {
    std::string inequality; // which declared bound failed
    Vec2 x;
    double s = 0.0;
    double lhs = 0.0;
    double rhs = 0.0;
};

struct SolveReport {
    DiscreteField minimizer;
    std::vector<double> energy_trace;   // nonincreasing along accepted steps
    std::vector<double> residual_trace; // sup-norm residual per iterate
    double residual_norm = 0.0;
    int iterations = 0;
    SolveStatus status = SolveStatus::MaxIterations;
    std::optional<double> coercivity;
    std::vector<GrowthViolation> growth_violations;
};

// Total energy of a trace-zero field:
//   integral Phi(|grad u|) - integral F(x, u) - integral h u.
// The gradient term is element-exact for P1; the reaction and source terms
// use one-point barycentric quadrature, so the energy is exactly the
// function whose gradient weak_gradient returns.
// Throws Error when the field violates the zero boundary trace.
double energy(const ProblemSpec &spec, const DiscreteField &u);

// Exact gradient of the discrete energy: entry j (interior vertex) is
//   integral phi(|grad u|) grad u . grad v_j - integral f(x,u) v_j
//   - integral h v_j
// for the hat function v_j; boundary entries are identically zero.  Elements
// with |grad u| = 0 contribute no flux (the s phi(s) -> 0 limit).
std::vector<double> weak_gradient(const ProblemSpec &spec,
                                  const DiscreteField &u);

double sup_norm(const std::vector<double> &v);

// Armijo-backtracked descent (limited-memory quasi-Newton by default, plain
// steepest descent with Barzilai-Borwein steps when lbfgs_memory == 0) from
// the zero field or a seeded random trace-zero start.
SolveReport minimize(const ProblemSpec &spec);

// Heuristic upper bound on inf { integral Phi(|grad v|) - integral
// A_infinity |v|^ell : ||v||_Phi = 1 } over the discrete sphere, by projected
// descent from `samples` random starts.  Negative values certify that the
// coercivity condition fails discretely; positive values are evidence only.
// Requires reaction.A_infinity.
double coercivity_estimate(const ProblemSpec &spec, int samples,
                           int descent_steps);

// Sample grid for the growth audit.
struct SampleBox {
    double s_max = 1e4;    // |s| sweeps log-uniformly up to this
    double s_min = 1e-3;   // smallest nonzero |s| probed
    int s_count = 400;     // per sign
    std::vector<Vec2> points = {{0.21, 0.34}, {0.5, 0.5}, {0.83, 0.67}};
};

// Checks every growth bound the reaction declares at sampled (x, s) pairs
// and cross-checks A_infinity against F(x,s)/|s|^ell at |s| = 1e3 and 1e4.
// Returns the list of violations (empty = consistent at sampled points;
// falsification only, never proof).  phi_star may be null when no
// PhiStar-form bound is declared.
std::vector<GrowthViolation> growth_audit(const Reaction &reaction,
                                          const NFunction &nf,
                                          const SobolevConjugate *phi_star,
                                          const SampleBox &box = {});

} // namespace phifem
