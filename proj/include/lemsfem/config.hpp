#ifndef LEMSFEM_CONFIG_HPP_
#define LEMSFEM_CONFIG_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lemsfem/fields.hpp"
#include "lemsfem/finefem.hpp"
#include "lemsfem/mesh.hpp"

namespace lemsfem {

inline constexpr int kSchemaVersion = 1;

struct CoefficientSpec {
  std::string type = "identity";  // identity | periodic_benchmark | expression
  double eps = 0.0;
  std::string expression;
  double alpha_min = 1.0;
  double alpha_max = 1.0;

  bool operator==(const CoefficientSpec&) const = default;
};

struct SourceSpec {
  std::string type = "constant";  // constant | gaussian_benchmark | expression
  double value = -1.0;
  std::string expression;

  bool operator==(const SourceSpec&) const = default;
};

/**
 * Everything one run needs. The on-disk form is a JSON object:
 *
 *   {
 *     "schema_version": 1,
 *     "domain": {"x0": 0, "x1": 1, "y0": 0, "y1": 1},
 *     "mesh": {"kind": "quad", "nx": 8, "ny": 8, "n_sub": 16},
 *     "coefficient": {"type": "periodic_benchmark", "eps": 0.0625},
 *     "source": {"type": "constant", "value": -1},
 *     "degrees": {"N": 2, "M": 0, "edges": {"12": 3}, "elements": {}},
 *     "solver": {"rel_tol": 1e-12, "reference": "direct", "cell_rule": "centroid"},
 *     "estimator": {"eta": 0, "smoothness": 0, "smoothness_table": {}},
 *     "sweep": {"axis": "N", "values": [1, 2, 3]},
 *     "basis": {"selector": "edge:4:2"},
 *     "output": "", "strict": false, "seed": 0, "workers": 1, "timing": false
 *   }
 *
 * Every key except schema_version is optional and defaults as above.
 */
struct RunConfig {
  int schema_version = kSchemaVersion;
  Rectangle domain;
  ElementKind kind = ElementKind::quad;
  int nx = 8, ny = 8, n_sub = 16;
  CoefficientSpec coefficient;
  SourceSpec source;
  int N = 1, M = 0;
  std::map<int, int> edge_degrees;     // per-edge N_e overrides
  std::map<int, int> element_degrees;  // per-element M_K overrides
  double rel_tol = 1e-12;
  std::string reference = "direct";  // direct | cg
  CellRule rule = CellRule::centroid;
  double eta = 0.0;
  int smoothness = 0;
  std::map<int, int> smoothness_table;
  std::string sweep_axis;  // H | N | M | eps
  std::vector<double> sweep_values;
  std::string basis_selector;
  std::string output;
  bool strict = false;
  std::uint64_t seed = 0;
  int workers = 1;
  bool timing = false;

  bool operator==(const RunConfig&) const = default;
};

/// Parses and validates. Errors are ConfigError with a line/column or a key path.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& config);

/// Throws ConfigError naming the offending key.
void validate(const RunConfig& config);

CoefficientField make_coefficient(const CoefficientSpec& spec);
ScalarField make_source(const SourceSpec& spec);
DegreeAssignment make_degrees(const RunConfig& config, const CoarseMesh& coarse);

}  // namespace lemsfem

#endif  // LEMSFEM_CONFIG_HPP_
