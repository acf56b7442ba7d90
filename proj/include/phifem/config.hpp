#pragma once

#include "phifem/errors.hpp"
#include "phifem/solver.hpp"

#include <map>
#include <optional>
#include <string>

namespace phifem {

// Parsed run configuration: flat sectioned key=value text with sections
// [phi], [reaction], [problem], [mesh], [solver], [output].  Unknown
// sections or keys are rejected with line numbers.  Expression values share
// the grammar of make_phi_expression; spatial ones see x and y, reaction
// ones additionally see s.
struct RunConfig {
    // [phi]
    std::string phi_kind;                      // registry name or "expression"
    std::map<std::string, double> phi_params;  // c / p / gamma as applicable
    std::string phi_expression;                // phi(t) when kind=expression
    std::optional<int> dimension;              // N for the Sobolev conjugate

    // [reaction]
    std::string f_expr;           // f(x, y, s)
    std::string capital_f_expr;   // F(x, y, s); quadrature fallback when empty
    std::string a_infinity_expr;  // declared limit of F / |s|^ell
    std::optional<double> A;      // F-bound constant
    std::string capital_b_expr;   // F-bound offset B(x, y)
    std::optional<double> a;      // flux-bound constant
    std::string b_expr;           // flux-bound offset b(x, y)
    std::string growth_form = "none"; // none | phi-star-pointwise |
                                      // phi-star-weak | power-pointwise
    std::optional<double> power_exponent;

    // [problem]
    std::string h_expr; // source h(x, y)

    // [mesh]
    int nx = 32, ny = 32;
    double width = 1.0, height = 1.0;

    // [solver]
    double tol = 1e-8;
    int max_iter = 10000;
    unsigned long long seed = 0;
    int lbfgs_memory = 10;
    bool random_start = false;
    double energy_floor = -1e12;
    double norm_ceiling = 1e12;
    int coercivity_samples = 4;
    int coercivity_steps = 300;

    // [output]
    std::string out_dir = ".";
};

// Parses configuration text; throws ConfigParseError carrying the 1-based
// line number of the offending line.
RunConfig parse_config(const std::string &text);

// Reads and parses a configuration file.
RunConfig load_config(const std::string &path);

// Canonical normalized form: fixed section and key order, %.17g numbers.
// serialize_config(parse_config(serialize_config(parse_config(text)))) is
// byte-identical to serialize_config(parse_config(text)).
std::string serialize_config(const RunConfig &cfg);

// Materializes the N-function described by the [phi] block.
NFunction nfunction_from_config(const RunConfig &cfg);

// Materializes the full problem (N-function, mesh, reaction, source,
// solver options).  Throws on invalid blocks.
ProblemSpec problem_from_config(const RunConfig &cfg);

} // namespace phifem
