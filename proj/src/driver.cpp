#include "lemsfem/driver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>

#include "lemsfem/csv.hpp"

namespace lemsfem {

const char* const kResultsHeader = "eps,H,kind,N,M,dofs,E_rel,E_rel_gamma,E_post,runtime_ms,cg_iters";

std::string format_row(const ResultRow& r) {
  std::ostringstream os;
  os << format_double(r.eps) << ',' << format_double(r.H) << ',' << r.kind << ',' << r.N << ',' << r.M << ','
     << r.dofs << ',' << format_double(r.E_rel) << ',' << format_double(r.E_rel_gamma) << ','
     << format_double(r.E_post) << ',' << format_double(r.runtime_ms) << ',' << r.cg_iters;
  return os.str();
}

Problem::Problem(const RunConfig& config, std::ostream* log)
    : config_(config),
      log_(log),
      coarse_(build_coarse(config.kind, config.nx, config.ny, config.domain)),
      fine_(refine_to_fine(coarse_, config.n_sub)),
      coeff_(make_coefficient(config.coefficient)),
      f_(make_source(config.source)) {
  std::string warning = resolution_warning(fine_, coeff_);
  if (!warning.empty()) {
    if (config.strict) throw ConfigError(warning);
    if (log_) *log_ << "warning: " << warning << '\n';
  }
  local_ = std::make_unique<LocalProblems>(coarse_, fine_, coeff_, config.rule, config.workers);
  form_ = std::make_unique<EnergyForm>(global_mesh(fine_), coeff_, f_, config.rule);
}

bool Problem::compatible(const RunConfig& o) const {
  const RunConfig& c = config_;
  return c.domain == o.domain && c.kind == o.kind && c.nx == o.nx && c.ny == o.ny && c.n_sub == o.n_sub &&
         c.coefficient == o.coefficient && c.source == o.source && c.rule == o.rule && c.reference == o.reference &&
         (c.reference == "direct" || c.rel_tol == o.rel_tol);
}

const ReferenceSolution& Problem::reference() {
  if (!reference_) {
    ReferenceOptions options;
    options.strict = config_.strict;
    options.iterative = config_.reference == "cg";
    options.rel_tol = config_.rel_tol;
    reference_ = std::make_unique<ReferenceSolution>(
        reference_solve(fine_, coeff_, f_, *form_, config_.rule, options));
  }
  return *reference_;
}

const BubbleReference& Problem::bubble_reference() {
  if (!bubble_)
    bubble_ = std::make_unique<BubbleReference>(lemsfem::bubble_reference(*local_, f_, *form_, config_.workers));
  return *bubble_;
}

namespace {

double coefficient_eps(const RunConfig& c) {
  return c.coefficient.type == "periodic_benchmark" ? c.coefficient.eps : 0.0;
}

std::string kind_label(ElementKind kind) { return "legendre-" + to_string(kind); }

ResultRow blank_row(const RunConfig& c) {
  ResultRow row;
  row.eps = coefficient_eps(c);
  row.H = c.domain.width() / c.nx;
  row.kind = kind_label(c.kind);
  row.N = c.N;
  row.M = c.M;
  return row;
}

EstimatorOptions estimator_options(const RunConfig& c, const CoarseMesh& coarse) {
  EstimatorOptions options;
  options.eta = c.eta;
  options.smoothness.assign(coarse.elements.size(), c.smoothness);
  for (auto [k, l] : c.smoothness_table) {
    if (k < 0 || static_cast<std::size_t>(k) >= coarse.elements.size())
      throw ConfigError("/estimator/smoothness_table/" + std::to_string(k) + ": no such element");
    options.smoothness[static_cast<std::size_t>(k)] = l;
  }
  return options;
}

}  // namespace

RunOutcome run(Problem& problem, const RunConfig& config) {
  if (!problem.compatible(config)) throw InvalidArgument("run: configuration does not match the prepared problem");
  const auto start = std::chrono::steady_clock::now();
  RunOutcome out;
  out.row = blank_row(config);
  DegreeAssignment degrees = make_degrees(config, problem.coarse());
  out.space = std::make_unique<EnrichedSpace>(problem.local(), degrees, config.workers);
  out.row.dofs = out.space->size();

  if (problem.source().identically_zero) {
    out.solution.interface_size = out.space->interface_size();
    out.solution.coefficients = Eigen::VectorXd::Zero(out.space->size());
    out.estimate = global_estimate(*out.space, out.solution, problem.source(),
                                   estimator_options(config, problem.coarse()), config.workers);
    if (out.space->bubble_size() == 0) out.errors.E_rel_gamma = 0.0;
  } else {
    CoarseSystems systems = assemble_coarse(*out.space, problem.source(), false, config.workers);
    out.solution = solve_coarse(*out.space, systems, config.rel_tol);
    out.errors = evaluate_errors(*out.space, out.solution, problem.form(), problem.reference(),
                                 problem.bubble_reference());
    out.estimate = global_estimate(*out.space, out.solution, problem.source(),
                                   estimator_options(config, problem.coarse()), config.workers);
  }
  out.row.E_rel = out.errors.E_rel;
  out.row.E_rel_gamma = out.errors.E_rel_gamma ? *out.errors.E_rel_gamma : std::numeric_limits<double>::quiet_NaN();
  out.row.E_post = out.estimate.E_post;
  out.row.cg_iters = out.solution.cg_iterations;
  if (config.timing)
    out.row.runtime_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return out;
}

void cmd_solve(const RunConfig& config, std::ostream& out, std::ostream* log) {
  Problem problem(config, log);
  RunOutcome r = run(problem, config);
  out << kResultsHeader << '\n' << format_row(r.row) << '\n';
}

RunConfig sweep_point(const RunConfig& base, const std::string& axis, double value) {
  RunConfig c = base;
  auto as_int = [&](const char* what) {
    if (value != std::floor(value)) throw ConfigError(std::string("/sweep/values: ") + what + " must be an integer");
    return static_cast<int>(value);
  };
  if (axis == "N") {
    c.N = as_int("N");
  } else if (axis == "M") {
    c.M = as_int("M");
  } else if (axis == "eps") {
    if (base.coefficient.type != "periodic_benchmark")
      throw ConfigError("/sweep/axis: eps sweeps need the periodic_benchmark coefficient");
    c.coefficient.eps = value;
  } else if (axis == "H") {
    if (!(value > 0.0)) throw ConfigError("/sweep/values: H must be positive");
    // keep the fine cell count, hence the fine mesh, fixed
    const long cells = static_cast<long>(base.nx) * base.n_sub;
    c.nx = static_cast<int>(std::lround(base.domain.width() / value));
    c.ny = static_cast<int>(std::lround(base.domain.height() / value));
    if (c.nx < 1 || c.ny < 1 || cells % c.nx != 0)
      throw ConfigError("/sweep/values: H = " + format_double(value) + " does not divide the fine mesh");
    c.n_sub = static_cast<int>(cells / c.nx);
    if (static_cast<long>(base.ny) * base.n_sub != static_cast<long>(c.ny) * c.n_sub)
      throw ConfigError("/sweep/values: H = " + format_double(value) + " does not divide the fine mesh");
  } else {
    throw ConfigError("/sweep/axis: unknown axis '" + axis + "'");
  }
  validate(c);
  return c;
}

int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream* log) {
  if (config.sweep_axis.empty()) throw ConfigError("/sweep/axis: missing");
  if (config.sweep_values.empty()) throw ConfigError("/sweep/values: empty");
  out << kResultsHeader << '\n';
  std::unique_ptr<Problem> problem;
  int failed = 0;
  for (double value : config.sweep_values) {
    RunConfig c = sweep_point(config, config.sweep_axis, value);
    ResultRow row = blank_row(c);
    try {
      if (!problem || !problem->compatible(c)) {
        problem.reset();
        problem = std::make_unique<Problem>(c, log);
      }
      row = run(*problem, c).row;
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      ++failed;
      row.failed = true;
      row.error = e.what();
      const double nan = std::numeric_limits<double>::quiet_NaN();
      row.E_rel = row.E_rel_gamma = row.E_post = nan;
      if (log) *log << "sweep " << config.sweep_axis << " = " << format_double(value) << " failed: " << e.what() << '\n';
    }
    out << format_row(row) << '\n';
  }
  return failed;
}

ErrorMap error_map(Problem& problem, const RunOutcome& outcome) {
  const EnrichedSpace& space = *outcome.space;
  if (space.bubble_size() > 0) throw InvalidArgument("error maps need a bubble-free space (M = 0 on every element)");
  const CoarseMesh& coarse = problem.coarse();
  ErrorMap map;
  map.estimator = localize(outcome.estimate, coarse);
  if (problem.source().identically_zero) {
    map.error.values.assign(coarse.edges.size(), 0.0);
    return map;
  }
  FineFunction ug_ref = problem.reference().u - problem.bubble_reference().u;
  FineFunction diff = ug_ref - reconstruct(space, outcome.solution, Part::interface);
  const double denom = problem.form().energy_inner(ug_ref, ug_ref);
  map.error = localize_error(element_energies(problem.local(), diff), coarse, denom);
  return map;
}

void cmd_errmap(const RunConfig& config, std::ostream& out, std::ostream* log) {
  Problem problem(config, log);
  RunOutcome r = run(problem, config);
  ErrorMap map = error_map(problem, r);
  write_error_map(out, problem.coarse(), map.error.values, map.estimator.values);
}

void cmd_basis_dump(const RunConfig& config, const std::string& selector, std::ostream& out) {
  std::vector<std::string> parts;
  std::stringstream ss(selector);
  for (std::string item; std::getline(ss, item, ':');) parts.push_back(item);
  auto number = [&](std::size_t i) {
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(parts[i], &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != parts[i].size()) throw ConfigError("basis selector '" + selector + "': bad number");
    return v;
  };
  if (parts.empty() || (parts[0] == "nodal" && parts.size() != 2) ||
      ((parts[0] == "edge" || parts[0] == "bubble") && parts.size() != 3) ||
      (parts[0] != "nodal" && parts[0] != "edge" && parts[0] != "bubble"))
    throw ConfigError("unknown basis selector '" + selector + "' (nodal:V, edge:E:k or bubble:K:i)");

  CoarseMesh coarse = build_coarse(config.kind, config.nx, config.ny, config.domain);
  FineMesh fine = refine_to_fine(coarse, config.n_sub);
  CoefficientField coeff = make_coefficient(config.coefficient);
  LocalProblems problems(coarse, fine, coeff, config.rule, config.workers);
  BasisFunction phi;
  if (parts[0] == "nodal") {
    phi = compute_nodal(number(1), problems);
  } else if (parts[0] == "edge") {
    phi = compute_edge_enrichment(number(1), number(2), problems);
  } else {
    const int k = number(1);
    if (k < 0 || static_cast<std::size_t>(k) >= coarse.elements.size())
      throw InvalidArgument("basis selector '" + selector + "': no such element");
    DegreeAssignment degrees = make_degrees(config, coarse);
    phi = compute_bubble(k, number(2), degrees.element_degree[static_cast<std::size_t>(k)], problems);
  }
  write_basis_csv(out, phi, fine);
}

bool cmd_selftest(std::ostream& out) {
  bool all = true;
  auto check = [&](const std::string& name, bool ok, double value) {
    out << (ok ? "PASS " : "FAIL ") << name << " (" << format_double(value) << ")\n";
    all = all && ok;
  };

  QuadratureRule gl = gauss_lobatto(5);
  double err = std::abs(gl.integrate([](double x) { return std::pow(x, 6) + x * x * x * x * x * x * x; }) - 2.0 / 7.0);
  check("gauss-lobatto n=5 integrates degree 7 exactly", err < 1e-12, err);

  QuadratureRule g = gauss_legendre(8);
  double ortho = std::abs(g.integrate([](double x) { return legendre(3, x) * legendre(5, x); }));
  check("legendre L3 orthogonal to L5", ortho < 1e-12, ortho);

  double inner = g.integrate([](double x) {
    double d2 = std::sqrt(3.0 / 2.0) * legendre(1, x);
    return d2 * d2;
  });
  check("internal basis derivative normalized", std::abs(inner - 1.0) < 1e-12, inner);

  RunConfig c;
  c.nx = c.ny = 2;
  c.n_sub = 16;
  c.coefficient.type = "periodic_benchmark";
  c.coefficient.eps = 0.25;
  c.N = 2;
  c.M = 1;
  Problem problem(c);
  RunOutcome r = run(problem, c);
  check("decomposition identity", r.errors.decomposition_residual < 1e-8, r.errors.decomposition_residual);
  double trick = std::abs(r.errors.E_rel - r.errors.direct_error) / r.errors.direct_error;
  check("energy trick matches direct quotient", trick < 1e-8, trick);
  return all;
}

}  // namespace lemsfem
