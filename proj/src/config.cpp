#include "phifem/config.hpp"

#include "phifem/expression.hpp"

#include <array>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace phifem {

namespace {

std::string trim(const std::string &s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

double parse_double(const std::string &value, int line) {
    char *end = nullptr;
    const double x = std::strtod(value.c_str(), &end);
    if (end == value.c_str() || *end != '\0')
        throw ConfigParseError("invalid number '" + value + "'", line);
    return x;
}

long long parse_int(const std::string &value, int line) {
    char *end = nullptr;
    const long long x = std::strtoll(value.c_str(), &end, 10);
    if (end == value.c_str() || *end != '\0')
        throw ConfigParseError("invalid integer '" + value + "'", line);
    return x;
}

bool parse_bool(const std::string &value, int line) {
    if (value == "true" || value == "1") return true;
    if (value == "false" || value == "0") return false;
    throw ConfigParseError("invalid boolean '" + value + "' (use true/false)", line);
}

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

constexpr std::array<const char *, 6> kSections = {
    "phi", "reaction", "problem", "mesh", "solver", "output"};

void apply_phi(RunConfig &cfg, const std::string &key, const std::string &value,
               int line) {
    if (key == "kind")
        cfg.phi_kind = value;
    else if (key == "expression")
        cfg.phi_expression = value;
    else if (key == "dimension")
        cfg.dimension = static_cast<int>(parse_int(value, line));
    else if (key == "c" || key == "p" || key == "gamma")
        cfg.phi_params[key] = parse_double(value, line);
    else
        throw ConfigParseError("unknown key '" + key + "' in [phi]", line);
}

void apply_reaction(RunConfig &cfg, const std::string &key,
                    const std::string &value, int line) {
    if (key == "f")
        cfg.f_expr = value;
    else if (key == "F")
        cfg.capital_f_expr = value;
    else if (key == "a_infinity")
        cfg.a_infinity_expr = value;
    else if (key == "A")
        cfg.A = parse_double(value, line);
    else if (key == "B")
        cfg.capital_b_expr = value;
    else if (key == "a")
        cfg.a = parse_double(value, line);
    else if (key == "b")
        cfg.b_expr = value;
    else if (key == "growth_form") {
        if (value != "none" && value != "phi-star-pointwise" &&
            value != "phi-star-weak" && value != "power-pointwise")
            throw ConfigParseError("unknown growth_form '" + value + "'", line);
        cfg.growth_form = value;
    } else if (key == "power_exponent")
        cfg.power_exponent = parse_double(value, line);
    else
        throw ConfigParseError("unknown key '" + key + "' in [reaction]", line);
}

void apply_problem(RunConfig &cfg, const std::string &key,
                   const std::string &value, int line) {
    if (key == "h")
        cfg.h_expr = value;
    else
        throw ConfigParseError("unknown key '" + key + "' in [problem]", line);
}

void apply_mesh(RunConfig &cfg, const std::string &key, const std::string &value,
                int line) {
    if (key == "nx")
        cfg.nx = static_cast<int>(parse_int(value, line));
    else if (key == "ny")
        cfg.ny = static_cast<int>(parse_int(value, line));
    else if (key == "width")
        cfg.width = parse_double(value, line);
    else if (key == "height")
        cfg.height = parse_double(value, line);
    else
        throw ConfigParseError("unknown key '" + key + "' in [mesh]", line);
}

void apply_solver(RunConfig &cfg, const std::string &key,
                  const std::string &value, int line) {
    if (key == "tol")
        cfg.tol = parse_double(value, line);
    else if (key == "max_iter")
        cfg.max_iter = static_cast<int>(parse_int(value, line));
    else if (key == "seed")
        cfg.seed = static_cast<unsigned long long>(parse_int(value, line));
    else if (key == "lbfgs_memory")
        cfg.lbfgs_memory = static_cast<int>(parse_int(value, line));
    else if (key == "random_start")
        cfg.random_start = parse_bool(value, line);
    else if (key == "energy_floor")
        cfg.energy_floor = parse_double(value, line);
    else if (key == "norm_ceiling")
        cfg.norm_ceiling = parse_double(value, line);
    else if (key == "coercivity_samples")
        cfg.coercivity_samples = static_cast<int>(parse_int(value, line));
    else if (key == "coercivity_steps")
        cfg.coercivity_steps = static_cast<int>(parse_int(value, line));
    else
        throw ConfigParseError("unknown key '" + key + "' in [solver]", line);
}

void apply_output(RunConfig &cfg, const std::string &key,
                  const std::string &value, int line) {
    if (key == "dir")
        cfg.out_dir = value;
    else
        throw ConfigParseError("unknown key '" + key + "' in [output]", line);
}

} // namespace

RunConfig parse_config(const std::string &text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string raw;
    std::string section;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        const std::size_t comment = raw.find_first_of("#;");
        if (comment != std::string::npos) raw.erase(comment);
        const std::string line = trim(raw);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigParseError("unterminated section header", line_no);
            section = trim(line.substr(1, line.size() - 2));
            bool known = false;
            for (const char *s : kSections) known |= section == s;
            if (!known)
                throw ConfigParseError("unknown section '" + section + "'", line_no);
            continue;
        }

        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigParseError("expected key = value", line_no);
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigParseError("empty key", line_no);
        if (section.empty())
            throw ConfigParseError("key '" + key + "' outside any section", line_no);

        if (section == "phi")
            apply_phi(cfg, key, value, line_no);
        else if (section == "reaction")
            apply_reaction(cfg, key, value, line_no);
        else if (section == "problem")
            apply_problem(cfg, key, value, line_no);
        else if (section == "mesh")
            apply_mesh(cfg, key, value, line_no);
        else if (section == "solver")
            apply_solver(cfg, key, value, line_no);
        else
            apply_output(cfg, key, value, line_no);
    }

    if (cfg.phi_kind.empty())
        throw ConfigParseError("missing required key 'kind' in [phi]", 0);
    if (cfg.phi_kind == "expression" && cfg.phi_expression.empty())
        throw ConfigParseError("kind=expression requires 'expression' in [phi]", 0);
    return cfg;
}

RunConfig load_config(const std::string &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig &cfg) {
    std::ostringstream out;
    out << "[phi]\n";
    out << "kind = " << cfg.phi_kind << "\n";
    for (const auto &[k, v] : cfg.phi_params)
        out << k << " = " << format_double(v) << "\n";
    if (!cfg.phi_expression.empty())
        out << "expression = " << cfg.phi_expression << "\n";
    if (cfg.dimension) out << "dimension = " << *cfg.dimension << "\n";

    out << "\n[reaction]\n";
    if (!cfg.f_expr.empty()) out << "f = " << cfg.f_expr << "\n";
    if (!cfg.capital_f_expr.empty()) out << "F = " << cfg.capital_f_expr << "\n";
    if (!cfg.a_infinity_expr.empty())
        out << "a_infinity = " << cfg.a_infinity_expr << "\n";
    if (cfg.A) out << "A = " << format_double(*cfg.A) << "\n";
    if (!cfg.capital_b_expr.empty()) out << "B = " << cfg.capital_b_expr << "\n";
    if (cfg.a) out << "a = " << format_double(*cfg.a) << "\n";
    if (!cfg.b_expr.empty()) out << "b = " << cfg.b_expr << "\n";
    out << "growth_form = " << cfg.growth_form << "\n";
    if (cfg.power_exponent)
        out << "power_exponent = " << format_double(*cfg.power_exponent) << "\n";

    out << "\n[problem]\n";
    if (!cfg.h_expr.empty()) out << "h = " << cfg.h_expr << "\n";

    out << "\n[mesh]\n";
    out << "nx = " << cfg.nx << "\n";
    out << "ny = " << cfg.ny << "\n";
    out << "width = " << format_double(cfg.width) << "\n";
    out << "height = " << format_double(cfg.height) << "\n";

    out << "\n[solver]\n";
    out << "tol = " << format_double(cfg.tol) << "\n";
    out << "max_iter = " << cfg.max_iter << "\n";
    out << "seed = " << cfg.seed << "\n";
    out << "lbfgs_memory = " << cfg.lbfgs_memory << "\n";
    out << "random_start = " << (cfg.random_start ? "true" : "false") << "\n";
    out << "energy_floor = " << format_double(cfg.energy_floor) << "\n";
    out << "norm_ceiling = " << format_double(cfg.norm_ceiling) << "\n";
    out << "coercivity_samples = " << cfg.coercivity_samples << "\n";
    out << "coercivity_steps = " << cfg.coercivity_steps << "\n";

    out << "\n[output]\n";
    out << "dir = " << cfg.out_dir << "\n";
    return out.str();
}

namespace {

const std::string kSpatialVars[] = {"x", "y"};
const std::string kReactionVars[] = {"x", "y", "s"};

SpatialFn spatial_fn(const std::string &expr_text) {
    if (expr_text.empty()) return nullptr;
    Expression e = Expression::parse(expr_text, kSpatialVars);
    return [e](Vec2 p) {
        const double args[] = {p.x, p.y};
        return e.eval(args);
    };
}

ReactionFn reaction_fn(const std::string &expr_text) {
    if (expr_text.empty()) return nullptr;
    Expression e = Expression::parse(expr_text, kReactionVars);
    return [e](Vec2 p, double s) {
        const double args[] = {p.x, p.y, s};
        return e.eval(args);
    };
}

} // namespace

NFunction nfunction_from_config(const RunConfig &cfg) {
    if (cfg.phi_kind == "expression")
        return build_nfunction(make_phi_expression(cfg.phi_expression));
    return build_nfunction(make_phi(cfg.phi_kind, cfg.phi_params));
}

ProblemSpec problem_from_config(const RunConfig &cfg) {
    NFunction nf = nfunction_from_config(cfg);
    MeshPtr mesh = make_rect_mesh(cfg.nx, cfg.ny, cfg.width, cfg.height);

    Reaction reaction =
        make_reaction(reaction_fn(cfg.f_expr), reaction_fn(cfg.capital_f_expr));
    reaction.A_infinity = spatial_fn(cfg.a_infinity_expr);
    if (cfg.A || !cfg.capital_b_expr.empty()) {
        reaction.has_F_bound = true;
        reaction.A = cfg.A.value_or(0.0);
        reaction.B = spatial_fn(cfg.capital_b_expr);
    }
    if (cfg.growth_form == "phi-star-pointwise")
        reaction.flux_form = FluxGrowthForm::PhiStarPointwise;
    else if (cfg.growth_form == "phi-star-weak")
        reaction.flux_form = FluxGrowthForm::PhiStarWeak;
    else if (cfg.growth_form == "power-pointwise")
        reaction.flux_form = FluxGrowthForm::PowerPointwise;
    reaction.a = cfg.a.value_or(0.0);
    reaction.b = spatial_fn(cfg.b_expr);
    reaction.power_exponent = cfg.power_exponent.value_or(0.0);
    if (reaction.flux_form == FluxGrowthForm::PowerPointwise &&
        !cfg.power_exponent)
        throw Error("growth_form=power-pointwise requires power_exponent");

    ProblemSpec spec{std::move(nf), std::move(reaction), spatial_fn(cfg.h_expr),
                     std::move(mesh), {}};
    spec.options.tol = cfg.tol;
    spec.options.max_iter = cfg.max_iter;
    spec.options.seed = cfg.seed;
    spec.options.lbfgs_memory = cfg.lbfgs_memory;
    spec.options.random_start = cfg.random_start;
    spec.options.energy_floor = cfg.energy_floor;
    spec.options.norm_ceiling = cfg.norm_ceiling;
    return spec;
}

} // namespace phifem
