// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/SparseCholesky>

#include "lemsfem/driver.hpp"

using namespace lemsfem;

namespace {

constexpr double kEps = 1.0 / 16;
constexpr int kFineCells = 128;  // h = 1/128

struct Outcome {
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

RunConfig bench(int n, int N, int M, const std::string& source = "constant") {
  RunConfig c;
  c.nx = c.ny = n;
  c.n_sub = kFineCells / n;
  c.coefficient.type = "periodic_benchmark";
  c.coefficient.eps = kEps;
  c.source.type = source;
  c.N = N;
  c.M = M;
  return c;
}

// (E_rel, direct quotient) of every benchmark run, for criterion 3.
std::vector<std::pair<double, double>> g_runs;

RunOutcome run_logged(Problem& p, const RunConfig& c) {
  RunOutcome o = run(p, c);
  g_runs.emplace_back(o.errors.E_rel, o.errors.direct_error);
  return o;
}

Outcome orthogonality() {
  RunConfig c = bench(4, 2, 1);
  Problem p(c);
  EnrichedSpace space(p.local(), make_degrees(c, p.coarse()));
  const std::size_t nf = p.fine().vertices.size();
  const SparseMatrix& s = p.form().stiffness();
  std::vector<FineFunction> phi(static_cast<std::size_t>(space.size()));
  std::vector<FineFunction> s_phi(phi.size());
  std::vector<double> norm(phi.size());
  for (int i = 0; i < space.size(); ++i) {
    phi[static_cast<std::size_t>(i)] = space.function(i).to_global(nf);
    s_phi[static_cast<std::size_t>(i)] = s * phi[static_cast<std::size_t>(i)];
    norm[static_cast<std::size_t>(i)] = std::sqrt(phi[static_cast<std::size_t>(i)].dot(s_phi[static_cast<std::size_t>(i)]));
  }
  double worst = 0.0;
  int pairs = 0;
  for (int b = space.interface_size(); b < space.size(); ++b)
    for (int g = 0; g < space.interface_size(); ++g) {
      double a = s_phi[static_cast<std::size_t>(b)].dot(phi[static_cast<std::size_t>(g)]);
      worst = std::max(worst, std::abs(a) / (norm[static_cast<std::size_t>(b)] * norm[static_cast<std::size_t>(g)]));
      ++pairs;
    }
  Outcome o;
  o.pass = pairs > 0 && worst <= 1e-8;
  o.detail = std::to_string(pairs) + " pairs, max |a(phiB,phiG)|/(|phiB||phiG|) = " + fmt("%.3g", worst) + " (tol 1e-8)";
  return o;
}

Outcome splitting() {
  RunConfig c = bench(4, 2, 1);
  Problem p(c);
  RunOutcome r = run_logged(p, c);
  Outcome o;
  o.pass = r.errors.decomposition_residual <= 1e-8;
  o.detail = "residual " + fmt("%.3g", r.errors.decomposition_residual) + " (tol 1e-8)";
  return o;
}

Outcome monotone(std::vector<double>& n_sweep) {
  RunConfig base = bench(8, 1, 0);
  Problem p(base);
  bool ok = true;
  std::ostringstream os;
  os << "N=1..6:";
  double prev = 0.0;
  for (int n = 1; n <= 6; ++n) {
    RunConfig c = base;
    c.N = n;
    double e = run_logged(p, c).errors.E_rel;
    n_sweep.push_back(e);
    if (n > 1 && e > prev + 1e-10) ok = false;
    os << ' ' << fmt("%.4f", e);
    prev = e;
  }
  os << "; M=0..3 (N=2):";
  for (int m = 0; m <= 3; ++m) {
    RunConfig c = base;
    c.N = 2;
    c.M = m;
    double e = run_logged(p, c).errors.E_rel;
    if (m > 0 && e > prev + 1e-10) ok = false;
    os << ' ' << fmt("%.4f", e);
    prev = e;
  }
  os << " (tol 1e-10)";
  return {ok, os.str()};
}

Outcome bubble_rate() {
  std::vector<double> norms;
  for (int n : {4, 8, 16}) {
    Problem p(bench(n, 1, 0));
    norms.push_back(p.form().energy_norm(p.bubble_reference().u));
  }
  bool ok = true;
  std::ostringstream os;
  os << "|u_B|_E = " << fmt("%.4g", norms[0]) << ", " << fmt("%.4g", norms[1]) << ", " << fmt("%.4g", norms[2])
     << "; log2 ratios";
  for (std::size_t i = 0; i + 1 < norms.size(); ++i) {
    double r = std::log2(norms[i] / norms[i + 1]);
    ok = ok && r >= 0.7 && r <= 1.3;
    os << ' ' << fmt("%.3f", r);
  }
  os << " (need [0.7, 1.3])";
  return {ok, os.str()};
}

Outcome resonance() {
  // frozen from the first validated run
  const double frozen_n1_h8 = 0.23627149223650129;
  const double frozen_n1_h16 = 0.26528594744371836;
  const double frozen_n4_h16 = 0.10843401213257632;
  Problem p8(bench(8, 1, 0));
  double n1_h8 = run_logged(p8, bench(8, 1, 0)).errors.E_rel;
  Problem p16(bench(16, 1, 0));
  double n1_h16 = run_logged(p16, bench(16, 1, 0)).errors.E_rel;
  double n4_h16 = run_logged(p16, bench(16, 4, 0)).errors.E_rel;
  auto close = [](double a, double b) { return std::abs(a - b) <= 1e-8 * std::abs(b); };
  bool plateau = n1_h16 >= 0.7 * n1_h8;
  bool enriched = n4_h16 < 0.5 * n1_h16;
  bool regression = close(n1_h8, frozen_n1_h8) && close(n1_h16, frozen_n1_h16) && close(n4_h16, frozen_n4_h16);
  std::ostringstream os;
  os << "N=1: E_rel(1/8) = " << fmt("%.6f", n1_h8) << ", E_rel(1/16) = " << fmt("%.6f", n1_h16)
     << " (ratio " << fmt("%.3f", n1_h16 / n1_h8) << " >= 0.7); N=4: E_rel(1/16) = " << fmt("%.6f", n4_h16)
     << " (ratio " << fmt("%.3f", n4_h16 / n1_h16) << " < 0.5); frozen values " << (regression ? "match" : "DIFFER");
  return {plateau && enriched && regression, os.str()};
}

// Linear MsFEM coded directly on the global fine system: nodal hats on the
// coarse skeleton, extended A-harmonically into every element in one solve.
Outcome linear_msfem() {
  RunConfig c = bench(8, 1, 0);
  Problem p(c);
  RunOutcome r = run_logged(p, c);
  const FineMesh& fine = p.fine();
  const CoarseMesh& coarse = p.coarse();
  TriangleMesh gm = global_mesh(fine);
  SparseMatrix s = stiffness_matrix(gm, p.coefficient(), c.rule);
  Eigen::VectorXd b = load_vector(gm, p.source(), c.rule);
  const std::size_t nf = fine.vertices.size();

  std::vector<int> index(nf, -1);
  std::vector<bool> fixed(nf, false);
  for (std::size_t i = 0; i < nf; ++i) fixed[i] = fine.on_skeleton[i] || fine.on_domain_boundary[i];
  std::vector<int> free_ids, fixed_ids;
  for (std::size_t i = 0; i < nf; ++i) {
    auto& list = fixed[i] ? fixed_ids : free_ids;
    index[i] = static_cast<int>(list.size());
    list.push_back(static_cast<int>(i));
  }
  std::vector<Eigen::Triplet<double>> tii, tic;
  for (int k = 0; k < s.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(s, k); it; ++it) {
      auto row = static_cast<std::size_t>(it.row()), col = static_cast<std::size_t>(it.col());
      if (fixed[row]) continue;
      if (!fixed[col]) tii.emplace_back(index[row], index[col], it.value());
      else tic.emplace_back(index[row], index[col], it.value());
    }
  SparseMatrix sii(static_cast<Eigen::Index>(free_ids.size()), static_cast<Eigen::Index>(free_ids.size()));
  SparseMatrix sic(static_cast<Eigen::Index>(free_ids.size()), static_cast<Eigen::Index>(fixed_ids.size()));
  sii.setFromTriplets(tii.begin(), tii.end());
  sic.setFromTriplets(tic.begin(), tic.end());
  Eigen::SimplicialLLT<SparseMatrix> llt(sii);
  if (llt.info() != Eigen::Success) return {false, "fine interior block not SPD"};

  std::vector<int> verts = coarse.interior_vertices();
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nf), static_cast<Eigen::Index>(verts.size()));
  for (std::size_t j = 0; j < verts.size(); ++j) {
    Eigen::VectorXd trace = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(fixed_ids.size()));
    for (const Edge& e : coarse.edges) {
      int side = e.vertices[0] == verts[j] ? 0 : e.vertices[1] == verts[j] ? 1 : -1;
      if (side < 0) continue;
      const auto& line = fine.edge_vertices[static_cast<std::size_t>(e.id)];
      const double n = static_cast<double>(line.size() - 1);
      for (std::size_t t = 0; t < line.size(); ++t)
        trace(index[static_cast<std::size_t>(line[t])]) = side == 0 ? 1.0 - t / n : t / n;
    }
    Eigen::VectorXd inner = llt.solve(-(sic * trace));
    for (std::size_t i = 0; i < fixed_ids.size(); ++i) phi(fixed_ids[i], static_cast<Eigen::Index>(j)) = trace(static_cast<Eigen::Index>(i));
    for (std::size_t i = 0; i < free_ids.size(); ++i) phi(free_ids[i], static_cast<Eigen::Index>(j)) = inner(static_cast<Eigen::Index>(i));
  }
  Eigen::MatrixXd a = phi.transpose() * (s * phi);
  Eigen::VectorXd rhs = phi.transpose() * b;
  Eigen::VectorXd coef = Eigen::LLT<Eigen::MatrixXd>(a).solve(rhs);

  if (r.space->size() != static_cast<int>(verts.size())) return {false, "space size differs from the vertex count"};
  double diff = 0.0;
  for (std::size_t j = 0; j < verts.size(); ++j) {
    if (r.space->function(static_cast<int>(j)).entity != verts[j]) return {false, "DOF order differs from vertex order"};
    diff = std::max(diff, std::abs(coef(static_cast<Eigen::Index>(j)) - r.solution.coefficients(static_cast<Eigen::Index>(j))));
  }
  double rel = diff / coef.cwiseAbs().maxCoeff();
  return {rel <= 1e-10, std::to_string(verts.size()) + " coefficients, max relative difference " + fmt("%.3g", rel) +
                            " (tol 1e-10)"};
}

// Coarse P1 finite elements written out by hand on the same triangle mesh.
Outcome p1_degeneracy() {
  RunConfig c;
  c.kind = ElementKind::triangle;
  c.nx = c.ny = 4;
  c.n_sub = 8;
  c.N = 1;
  Problem p(c);
  RunOutcome r = run(p, c);
  const CoarseMesh& coarse = p.coarse();
  const std::size_t nv = coarse.vertices.size();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(nv), static_cast<Eigen::Index>(nv));
  Eigen::VectorXd b = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  for (const Element& el : coarse.elements) {
    std::array<Vec2, 3> x;
    for (int i = 0; i < 3; ++i) x[static_cast<std::size_t>(i)] = coarse.vertices[static_cast<std::size_t>(el.vertices[static_cast<std::size_t>(i)])];
    double det = (x[1] - x[0]).x() * (x[2] - x[0]).y() - (x[1] - x[0]).y() * (x[2] - x[0]).x();
    double area = 0.5 * std::abs(det);
    std::array<Vec2, 3> g;
    for (int i = 0; i < 3; ++i) {
      const Vec2& p1 = x[static_cast<std::size_t>((i + 1) % 3)];
      const Vec2& p2 = x[static_cast<std::size_t>((i + 2) % 3)];
      g[static_cast<std::size_t>(i)] = Vec2(p1.y() - p2.y(), p2.x() - p1.x()) / det;
    }
    for (int i = 0; i < 3; ++i) {
      b(el.vertices[static_cast<std::size_t>(i)]) += -1.0 * area / 3.0;
      for (int j = 0; j < 3; ++j)
        a(el.vertices[static_cast<std::size_t>(i)], el.vertices[static_cast<std::size_t>(j)]) +=
            area * g[static_cast<std::size_t>(i)].dot(g[static_cast<std::size_t>(j)]);
    }
  }
  std::vector<int> inner = coarse.interior_vertices();
  Eigen::MatrixXd ai(static_cast<Eigen::Index>(inner.size()), static_cast<Eigen::Index>(inner.size()));
  Eigen::VectorXd bi(static_cast<Eigen::Index>(inner.size()));
  for (std::size_t i = 0; i < inner.size(); ++i) {
    bi(static_cast<Eigen::Index>(i)) = b(inner[i]);
    for (std::size_t j = 0; j < inner.size(); ++j) ai(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(inner[i], inner[j]);
  }
  Eigen::VectorXd ui = Eigen::LLT<Eigen::MatrixXd>(ai).solve(bi);
  Eigen::VectorXd u = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nv));
  for (std::size_t i = 0; i < inner.size(); ++i) u(inner[i]) = ui(static_cast<Eigen::Index>(i));

  const FineMesh& fine = p.fine();
  FineFunction up1 = FineFunction::Zero(static_cast<Eigen::Index>(fine.vertices.size()));
  for (const Element& el : coarse.elements) {
    for (int v : fine.patches[static_cast<std::size_t>(el.id)].vertices) {
      Vec2 xi = el.pull_back(fine.vertices[static_cast<std::size_t>(v)]);
      up1(v) = u(el.vertices[0]) * (1.0 - xi.x() - xi.y()) + u(el.vertices[1]) * xi.x() + u(el.vertices[2]) * xi.y();
    }
  }
  FineFunction uh = reconstruct(*r.space, r.solution, Part::total);
  double rel = p.form().energy_norm(uh - up1) / p.form().energy_norm(up1);
  return {rel <= 1e-8, "energy-norm relative difference " + fmt("%.3g", rel) + " (tol 1e-8)"};
}

Outcome estimator_trends() {
  // calibrated once over the grid below, frozen
  const double c_frozen = 0.67;  // grid minimum 0.673514
  const std::array<int, 3> ns = {1, 2, 4};
  const std::array<int, 3> hs = {4, 8, 16};
  std::array<std::array<double, 3>, 3> est{}, err{};
  double worst_loc = 0.0, c_min = 1e300;
  for (std::size_t j = 0; j < hs.size(); ++j) {
    RunConfig base = bench(hs[j], 1, 0, "gaussian_benchmark");
    Problem p(base);
    for (std::size_t i = 0; i < ns.size(); ++i) {
      RunConfig c = base;
      c.N = ns[i];
      RunOutcome r = run_logged(p, c);
      Localization loc = localize(r.estimate, p.coarse());
      double sum = loc.unassigned;
      for (double v : loc.values) sum += v * v;
      double g2 = r.estimate.E_post_gamma * r.estimate.E_post_gamma;
      worst_loc = std::max(worst_loc, std::abs(g2 - sum) / g2);
      est[i][j] = r.estimate.E_post_gamma;
      err[i][j] = r.errors.E_rel_gamma.value_or(std::nan(""));
      c_min = std::min(c_min, est[i][j] / err[i][j]);
    }
  }
  bool decreasing = true;
  std::ostringstream os;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    os << "N=" << ns[i] << ":";
    for (std::size_t j = 0; j < hs.size(); ++j) {
      os << ' ' << fmt("%.4g", est[i][j]);
      if (j > 0 && !(est[i][j] < est[i][j - 1])) decreasing = false;
    }
    os << "; ";
  }
  bool reliable = true;
  for (std::size_t i = 0; i < ns.size(); ++i)
    for (std::size_t j = 0; j < hs.size(); ++j) reliable = reliable && est[i][j] >= c_frozen * err[i][j];
  os << "localization " << fmt("%.3g", worst_loc) << " (tol 1e-10); min E_post,G / E_rel,G = " << fmt("%.6g", c_min)
     << " >= c = " << fmt("%.6g", c_frozen);
  return {decreasing && worst_loc <= 1e-10 && reliable, os.str()};
}

Outcome kernel() {
  double gl = 0.0, orth = 0.0;
  for (int n = 2; n <= 12; ++n) {
    QuadratureRule q = gauss_lobatto(n);
    for (int d = 0; d <= 2 * n - 3; ++d) {
      double exact = d % 2 ? 0.0 : 2.0 / (d + 1);
      gl = std::max(gl, std::abs(q.integrate([d](double x) { return std::pow(x, d); }) - exact));
    }
  }
  QuadratureRule g = gauss_legendre(20);
  for (int k = 0; k <= 12; ++k)
    for (int m = 0; m <= 12; ++m) {
      double v = g.integrate([&](double x) { return legendre(k, x) * legendre(m, x); });
      orth = std::max(orth, std::abs(v - (k == m ? 2.0 / (2 * k + 1) : 0.0)));
    }

  auto f = [](const Vec2& x) { return std::sin(2 * M_PI * x.x()); };
  auto projection_error = [&](ElementKind kind, int n, int m) {
    CoarseMesh c = build_coarse(kind, n, n);
    BulkPolyBasis basis(kind, m);
    double sum = 0.0;
    for (const Element& el : c.elements) {
      Quadrature2D q = element_gauss_quadrature(kind, el, m + 8);
      Eigen::VectorXd coef = l2_project_element(f, el, q, basis);
      for (std::size_t i = 0; i < q.points.size(); ++i) {
        double r = f(q.points[i]) - evaluate_projection(coef, el, basis, q.points[i]);
        sum += q.weights[i] * r * r;
      }
    }
    return std::sqrt(sum);
  };
  bool rates = true;
  std::ostringstream os;
  os << "Gauss-Lobatto " << fmt("%.2g", gl) << ", Legendre " << fmt("%.2g", orth) << " (tol 1e-12); rate/2^(M+1):";
  for (ElementKind kind : {ElementKind::quad, ElementKind::triangle})
    for (int m = 1; m <= 3; ++m) {
      double ratio = projection_error(kind, 8, m) / projection_error(kind, 16, m);
      double scaled = ratio / std::pow(2.0, m + 1);
      rates = rates && scaled >= 0.5 && scaled <= 2.0;
      os << ' ' << (kind == ElementKind::quad ? 'q' : 't') << m << '=' << fmt("%.3f", scaled);
    }
  os << " (need [0.5, 2])";
  return {gl <= 1e-12 && orth <= 1e-12 && rates, os.str()};
}

Outcome determinism() {
  auto dir = std::filesystem::temp_directory_path() / "lemsfem_acceptance";
  std::filesystem::create_directories(dir);
  std::string cfg = (dir / "sweep.json").string();
  std::ofstream(cfg) << R"({
  "schema_version": 1,
  "mesh": {"kind": "quad", "nx": 8, "ny": 8, "n_sub": 16},
  "coefficient": {"type": "periodic_benchmark", "eps": 0.0625},
  "source": {"type": "gaussian_benchmark"},
  "degrees": {"N": 1, "M": 0},
  "sweep": {"axis": "N", "values": [1, 2, 3, 4]}
})";
  std::vector<std::string> outputs;
  for (const char* extra : {"", "", " --workers 4"}) {
    std::string out = (dir / ("run" + std::to_string(outputs.size()) + ".csv")).string();
    std::string cmd = std::string(LEMSFEM_CLI_PATH) + " sweep --config " + cfg + extra + " --out " + out + " 2>/dev/null";
    if (std::system(cmd.c_str()) != 0) return {false, "sweep command failed"};
    std::ifstream in(out, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    outputs.push_back(ss.str());
  }
  bool same = !outputs[0].empty() && outputs[0] == outputs[1] && outputs[1] == outputs[2];
  return {same, "3 sweeps (" + std::to_string(outputs[0].size()) + " bytes each), workers 1 and 4: " +
                    (same ? "identical" : "DIFFERENT")};
}

Outcome energy_trick() {
  double worst = 0.0;
  for (auto [e, d] : g_runs) worst = std::max(worst, std::abs(e - d) / d);
  return {!g_runs.empty() && worst <= 1e-8,
          std::to_string(g_runs.size()) + " runs, max relative difference " + fmt("%.3g", worst) + " (tol 1e-8)"};
}

template <typename F>
Outcome timed(F&& f) {
  auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  o.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return o;
}

}  // namespace

int main() {
  std::vector<double> n_sweep;
  std::array<Outcome, 12> out;
  out[1] = timed(orthogonality);
  out[2] = timed(splitting);
  out[4] = timed([&] { return monotone(n_sweep); });
  out[5] = timed(bubble_rate);
  out[6] = timed(resonance);
  out[7] = timed(linear_msfem);
  out[8] = timed(p1_degeneracy);
  out[9] = timed(estimator_trends);
  out[10] = timed(kernel);
  out[11] = timed(determinism);
  out[3] = timed(energy_trick);

  const std::array<const char*, 12> names = {"",
                                             "orthogonal decomposition",
                                             "error splitting identity",
                                             "energy trick",
                                             "nested-space monotonicity",
                                             "bubble rate",
                                             "resonance",
                                             "linear MsFEM equivalence",
                                             "A = I triangle degeneracy",
                                             "estimator trends",
                                             "projection and quadrature kernel",
                                             "determinism"};
  // runtime budgets in seconds, 0 when none is set
  const std::array<double, 12> budget = {0, 30, 0, 0, 120, 0, 180, 0, 0, 0, 0, 0};
  int failed = 0;
  for (int i = 1; i <= 11; ++i) {
    Outcome& o = out[static_cast<std::size_t>(i)];
    bool ok = o.pass && (budget[static_cast<std::size_t>(i)] == 0 || o.seconds < budget[static_cast<std::size_t>(i)]);
    if (!ok) ++failed;
    std::printf("%s %2d %s: %s [%.1f s]\n", ok ? "PASS" : "FAIL", i, names[static_cast<std::size_t>(i)], o.detail.c_str(),
                o.seconds);
  }
  std::printf("%d of 11 criteria passed\n", 11 - failed);
  return failed == 0 ? 0 : 1;
}
