#ifndef LEMSFEM_DRIVER_HPP_
#define LEMSFEM_DRIVER_HPP_

#include <iosfwd>
#include <memory>
#include <string>

#include "lemsfem/config.hpp"
#include "lemsfem/errors.hpp"
#include "lemsfem/estimator.hpp"

namespace lemsfem {

/// One line of the results CSV.
struct ResultRow {
  double eps = 0.0;
  double H = 0.0;
  std::string kind;
  int N = 0, M = 0, dofs = 0;
  double E_rel = 0.0;
  double E_rel_gamma = 0.0;  // NaN when bubbles are present
  double E_post = 0.0;
  double runtime_ms = 0.0;
  int cg_iters = 0;
  bool failed = false;
  std::string error;
};

extern const char* const kResultsHeader;
std::string format_row(const ResultRow& row);

/**
 * Offline state shared by every run on one (mesh, coefficient, source, rule):
 * meshes, factored local problems, the global energy form and the reference
 * solutions. The reference solves run on first use.
 */
class Problem {
 public:
  Problem(const RunConfig& config, std::ostream* log = nullptr);

  /// True when `other` can reuse this object's meshes and references.
  bool compatible(const RunConfig& other) const;

  const RunConfig& config() const { return config_; }
  const CoarseMesh& coarse() const { return coarse_; }
  const FineMesh& fine() const { return fine_; }
  const CoefficientField& coefficient() const { return coeff_; }
  const ScalarField& source() const { return f_; }
  const LocalProblems& local() const { return *local_; }
  const EnergyForm& form() const { return *form_; }
  const ReferenceSolution& reference();
  const BubbleReference& bubble_reference();

 private:
  RunConfig config_;
  std::ostream* log_;
  CoarseMesh coarse_;
  FineMesh fine_;
  CoefficientField coeff_;
  ScalarField f_;
  std::unique_ptr<LocalProblems> local_;
  std::unique_ptr<EnergyForm> form_;
  std::unique_ptr<ReferenceSolution> reference_;
  std::unique_ptr<BubbleReference> bubble_;
};

/// Everything computed for one configuration.
struct RunOutcome {
  ResultRow row;
  std::unique_ptr<EnrichedSpace> space;
  CoarseSolution solution;
  ErrorReport errors;
  EstimatorReport estimate;
};

/// Online stage on an existing Problem with the degrees and solver settings of `config`.
RunOutcome run(Problem& problem, const RunConfig& config);

/// Writes the header and one row.
void cmd_solve(const RunConfig& config, std::ostream& out, std::ostream* log = nullptr);

/// Writes the header and one row per sweep value; returns the number of failed rows.
int cmd_sweep(const RunConfig& config, std::ostream& out, std::ostream* log = nullptr);

/// Configuration of one sweep point.
RunConfig sweep_point(const RunConfig& base, const std::string& axis, double value);

/// Per-edge localized interface error and estimator. Requires M = 0 everywhere.
void cmd_errmap(const RunConfig& config, std::ostream& out, std::ostream* log = nullptr);

struct ErrorMap {
  Localization error;
  Localization estimator;
};
ErrorMap error_map(Problem& problem, const RunOutcome& outcome);

/// "nodal:V", "edge:E:k" or "bubble:K:i" (bubble degree from the configuration).
void cmd_basis_dump(const RunConfig& config, const std::string& selector, std::ostream& out);

/// Small built-in consistency checks; one PASS/FAIL line each. Returns true when all pass.
bool cmd_selftest(std::ostream& out);

}  // namespace lemsfem

#endif  // LEMSFEM_DRIVER_HPP_
