#include "lemsfem/errors.hpp"

#include <cmath>
#include <sstream>

namespace lemsfem {

std::string resolution_warning(const FineMesh& fine, const CoefficientField& coeff) {
  const double eps = coeff.oscillation_length;
  if (eps <= 0.0 || fine.h <= eps / 8.0 * (1.0 + 1e-12)) return {};
  std::ostringstream os;
  os << "fine mesh size h = " << fine.h << " does not resolve eps = " << eps << " (need h <= eps/8 = " << eps / 8.0
     << ")";
  return os.str();
}

ReferenceSolution reference_solve(const FineMesh& fine, const CoefficientField& coeff, const ScalarField& f,
                                  const EnergyForm& form, CellRule rule, const ReferenceOptions& options) {
  ReferenceSolution ref;
  ref.warning = resolution_warning(fine, coeff);
  if (!ref.warning.empty() && options.strict) throw ConfigError(ref.warning);
  if (form.size() != fine.vertices.size()) throw InvalidArgument("reference_solve: energy form lives on another mesh");
  if (f.identically_zero) {
    ref.u = FineFunction::Zero(static_cast<Eigen::Index>(fine.vertices.size()));
    return ref;
  }
  TriangleMesh mesh = global_mesh(fine);
  std::map<int, double> dirichlet;
  for (std::size_t v = 0; v < mesh.size(); ++v)
    if (mesh.boundary[v]) dirichlet.emplace(static_cast<int>(v), 0.0);
  SparseSpdSystem system = assemble(mesh, coeff, &f, dirichlet, rule);
  SolveResult r = options.iterative ? solve_spd(system, options.rel_tol) : solve_direct(system);
  ref.u = std::move(r.solution);
  ref.iterations = r.iterations;
  ref.residual = r.residual;
  ref.energy = form.energy(ref.u);
  return ref;
}

BubbleReference bubble_reference(const LocalProblems& problems, const ScalarField& f, const EnergyForm& form,
                                 int workers) {
  const FineMesh& fine = problems.fine();
  BubbleReference out;
  out.u = FineFunction::Zero(static_cast<Eigen::Index>(fine.vertices.size()));
  if (f.identically_zero) return out;
  const std::size_t ne = problems.coarse().elements.size();
  std::vector<FineFunction> local(ne);
  parallel_for(ne, workers, [&](std::size_t k) {
    local[k] = problems.solver(static_cast<int>(k)).zero_trace_solve(problems.local_load(static_cast<int>(k), f));
  });
  for (std::size_t k = 0; k < ne; ++k) {
    const Patch& patch = fine.patches[k];
    for (std::size_t j = 0; j < patch.vertices.size(); ++j)
      if (!patch.on_boundary[j]) out.u(patch.vertices[j]) = local[k](static_cast<Eigen::Index>(j));
  }
  out.energy = form.energy(out.u);
  return out;
}

double relative_energy_error(double e_num, double e_star) {
  if (!(e_star < 0.0))
    throw InvalidArgument("relative energy error undefined: reference energy " + std::to_string(e_star) +
                          " is not negative");
  double d = e_num - e_star;
  if (d < 0.0) {
    if (-d > 1e-10 * -e_star)
      throw NumericalError("discrete energy " + std::to_string(e_num) + " lies below the reference energy", -d);
    d = 0.0;
  }
  return std::sqrt(d / -e_star);
}

double direct_relative_error(const EnergyForm& form, const FineFunction& u, const FineFunction& v) {
  const double denom = form.energy_inner(u, u);
  if (!(denom > 0.0)) throw InvalidArgument("direct relative error undefined: reference has zero energy norm");
  FineFunction d = u - v;
  return std::sqrt(std::max(0.0, form.energy_inner(d, d)) / denom);
}

double interface_relative_error(const EnrichedSpace& space, double e_num, double e_interface_star) {
  if (space.bubble_size() > 0)
    throw InvalidArgument("interface relative error requires a bubble-free space (M = 0 on every element)");
  if (!(e_interface_star < 0.0))
    throw InvalidArgument("interface relative error undefined: the exact interface part has zero energy");
  return relative_energy_error(e_num, e_interface_star);
}

double decomposition_check(const EnergyForm& form, const FineFunction& u_ref, const FineFunction& u_ref_bubble,
                           const FineFunction& u_h_bubble, const FineFunction& u_h_interface) {
  FineFunction total = u_ref - u_h_bubble - u_h_interface;
  FineFunction bubble = u_ref_bubble - u_h_bubble;
  FineFunction interface = u_ref - u_ref_bubble - u_h_interface;
  const double lhs = form.energy_inner(total, total);
  const double rhs = form.energy_inner(bubble, bubble) + form.energy_inner(interface, interface);
  if (lhs == 0.0) return 0.0;
  return std::abs(lhs - rhs) / lhs;
}

std::vector<double> element_energies(const LocalProblems& problems, const FineFunction& v) {
  const FineMesh& fine = problems.fine();
  if (static_cast<std::size_t>(v.size()) != fine.vertices.size())
    throw InvalidArgument("element_energies: function length does not match the fine mesh");
  std::vector<double> out(problems.coarse().elements.size());
  for (std::size_t k = 0; k < out.size(); ++k) {
    const Patch& patch = fine.patches[k];
    Eigen::VectorXd local(static_cast<Eigen::Index>(patch.vertices.size()));
    for (std::size_t j = 0; j < patch.vertices.size(); ++j) local(static_cast<Eigen::Index>(j)) = v(patch.vertices[j]);
    out[k] = local.dot(problems.solver(static_cast<int>(k)).stiffness() * local);
  }
  return out;
}

ErrorReport evaluate_errors(const EnrichedSpace& space, const CoarseSolution& solution, const EnergyForm& form,
                            const ReferenceSolution& reference, const BubbleReference& bubble) {
  ErrorReport report;
  FineFunction ub = reconstruct(space, solution, Part::bubble);
  FineFunction ug = reconstruct(space, solution, Part::interface);
  FineFunction uh = ub + ug;
  report.E_star = reference.energy;
  report.E_num = form.energy(uh);
  report.E_gamma_star = reference.energy - bubble.energy;
  report.E_rel = relative_energy_error(report.E_num, report.E_star);
  report.direct_error = direct_relative_error(form, reference.u, uh);
  report.decomposition_residual = decomposition_check(form, reference.u, bubble.u, ub, ug);
  if (space.bubble_size() == 0 && space.interface_size() > 0)
    report.E_rel_gamma = interface_relative_error(space, report.E_num, report.E_gamma_star);
  return report;
}

}  // namespace lemsfem
