// Command-line front end: solve, sweep, errmap, basis-dump, selftest.

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#include <CLI11.hpp>

#include "lemsfem/driver.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct Options {
  std::string config_path;
  std::string out_path;
  std::optional<int> workers;
  bool strict = false;
  std::optional<double> rel_tol;
  std::optional<double> eta;
  bool timing = false;
  std::string selector;
};

lemsfem::RunConfig load(const Options& o) {
  if (o.config_path.empty()) throw lemsfem::ConfigError("--config is required");
  lemsfem::RunConfig c = lemsfem::load_config(o.config_path);
  if (o.workers) c.workers = *o.workers;
  if (o.strict) c.strict = true;
  if (o.rel_tol) c.rel_tol = *o.rel_tol;
  if (o.eta) c.eta = *o.eta;
  if (o.timing) c.timing = true;
  if (!o.out_path.empty()) c.output = o.out_path;
  lemsfem::validate(c);
  return c;
}

// Output goes to the configured path, or stdout when none is set.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty()) return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw lemsfem::ConfigError("cannot write output file '" + path + "'");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void add_common(CLI::App* cmd, Options& o) {
  cmd->add_option("--config", o.config_path, "Run configuration (JSON)")->required();
  cmd->add_option("--out", o.out_path, "Output CSV path (default: stdout)");
  cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--strict", o.strict, "Reject under-resolved fine meshes");
  cmd->add_option("--rel-tol", o.rel_tol, "CG relative tolerance");
  cmd->add_option("--eta", o.eta, "Estimator parameter eta");
  cmd->add_flag("--timing", o.timing, "Report wall-clock runtime (makes output non-deterministic)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Legendre-enriched multiscale finite elements"};
  app.require_subcommand(1);
  Options o;
  CLI::App* solve = app.add_subcommand("solve", "Single run, one CSV row");
  CLI::App* sweep = app.add_subcommand("sweep", "Run the sweep declared in the configuration");
  CLI::App* errmap = app.add_subcommand("errmap", "Per-edge error and estimator map");
  CLI::App* dump = app.add_subcommand("basis-dump", "Fine values of one basis function");
  CLI::App* selftest = app.add_subcommand("selftest", "Built-in consistency checks");
  for (CLI::App* cmd : {solve, sweep, errmap, dump}) add_common(cmd, o);
  dump->add_option("selector", o.selector, "nodal:V, edge:E:k or bubble:K:i (default: basis.selector)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (selftest->parsed()) return lemsfem::cmd_selftest(std::cout) ? 0 : kExitNumerical;
    lemsfem::RunConfig config = load(o);
    Sink sink(config.output);
    if (solve->parsed()) {
      lemsfem::cmd_solve(config, sink.stream(), &std::cerr);
    } else if (sweep->parsed()) {
      int failed = lemsfem::cmd_sweep(config, sink.stream(), &std::cerr);
      if (failed > 0) {
        std::cerr << failed << " sweep row(s) failed\n";
        return kExitNumerical;
      }
    } else if (errmap->parsed()) {
      lemsfem::cmd_errmap(config, sink.stream(), &std::cerr);
    } else if (dump->parsed()) {
      std::string selector = o.selector.empty() ? config.basis_selector : o.selector;
      if (selector.empty()) throw lemsfem::ConfigError("no basis selector given");
      lemsfem::cmd_basis_dump(config, selector, sink.stream());
    }
  } catch (const lemsfem::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lemsfem::InvalidArgument& e) {
    std::cerr << "invalid input: " << e.what() << '\n';
    return kExitConfig;
  } catch (const lemsfem::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
