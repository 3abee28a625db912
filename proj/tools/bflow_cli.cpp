// bflow: Bayesian optical flow between two grayscale frames.
//
// Subcommands:
//   synth   generate a benchmark case (F.pgm, G.pgm, Gbar.pgm, truth_flow.csv)
//   run     sample the flow posterior and write estimates, traces, ellipses
//   report  summarize metrics across finished cases and emit scatter data
//
// Exit codes: 0 ok, 2 bad input, 3 chain did not converge, 4 I/O failure.

#include <cstdio>
#include <exception>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bflow/pipeline.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitBadInput = 2;
constexpr int kExitNonConvergence = 3;
constexpr int kExitIo = 4;

struct Overrides {
  std::optional<std::string> manifest;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> iterations;
  std::optional<int> burn_in;
  std::optional<double> q;
  std::optional<int> stride;
  std::optional<std::string> noise;
  std::optional<double> sigma;
  std::optional<int> flow_id;
  std::optional<std::string> grid;
  std::optional<std::string> input;
  std::optional<std::string> name;
};

void add_case_options(CLI::App& cmd, Overrides& o) {
  cmd.add_option("--manifest", o.manifest, "JSON manifest of one or more cases");
  cmd.add_option("--seed", o.seed, "chain and noise seed");
  cmd.add_option("--out", o.out, "case output directory");
  cmd.add_option("--iterations", o.iterations, "Gibbs steps per chain");
  cmd.add_option("--burn-in", o.burn_in, "steps discarded before statistics");
  cmd.add_option("--q", o.q, "ellipse confidence level in (0,1)");
  cmd.add_option("--stride", o.stride, "ellipse report subsampling stride");
  cmd.add_option("--noise", o.noise, "noise kind: gaussian|uniform|laplace|none");
  cmd.add_option("--sigma", o.sigma, "noise standard deviation");
  cmd.add_option("--flow-id", o.flow_id, "benchmark flow field, 1..5");
  cmd.add_option("--grid", o.grid, "grid size as NXxNY, e.g. 30x30");
  cmd.add_option("--input", o.input, "first image: \"synthetic\" or a PGM path");
  cmd.add_option("--name", o.name, "case name");
}

bflow::GridSpec parse_grid(const std::string& s) {
  int nx = 0;
  int ny = 0;
  char sep = 0;
  if (std::sscanf(s.c_str(), "%d%c%d", &nx, &sep, &ny) != 3 ||
      (sep != 'x' && sep != 'X')) {
    throw bflow::DomainError("--grid wants NXxNY, e.g. 30x30, got \"" + s + "\"");
  }
  return bflow::GridSpec(nx, ny);
}

std::vector<bflow::RunManifest> resolve_cases(const Overrides& o) {
  std::vector<bflow::RunManifest> cases;
  if (o.manifest) {
    cases = bflow::load_manifests(*o.manifest);
  } else {
    bflow::RunManifest m;
    if (o.input && *o.input != "synthetic") {
      m.grid = bflow::GridSpec(60, 60);
      m.noise.sigma = 0.05;
    }
    cases.push_back(std::move(m));
  }
  for (bflow::RunManifest& m : cases) {
    if (o.input) m.input = *o.input;
    if (o.name) m.name = *o.name;
    if (o.seed) m.chain.seed = *o.seed;
    if (o.out) m.out = *o.out;
    if (o.iterations) m.chain.iterations = *o.iterations;
    if (o.burn_in) m.chain.burn_in = *o.burn_in;
    if (o.q) m.q = *o.q;
    if (o.stride) m.stride = *o.stride;
    if (o.noise) m.noise.kind = bflow::parse_manifests(
        "{\"noise\":{\"kind\":\"" + *o.noise + "\"}}")[0].noise.kind;
    if (o.sigma) m.noise.sigma = *o.sigma;
    if (o.flow_id) m.flow.id = *o.flow_id;
    if (o.grid) m.grid = parse_grid(*o.grid);
    m.validate();
  }
  if (o.out && cases.size() > 1) {
    throw bflow::DomainError("--out cannot override a multi-case manifest");
  }
  return cases;
}

int run_command(const std::string& cmd, const Overrides& o,
                const std::string& report_dir) {
  if (cmd == "report") {
    const bflow::ReportResult res = bflow::cmd_report(report_dir);
    if (res.cases == 0) {
      std::printf("no completed cases found in %s\n", report_dir.c_str());
    } else {
      std::printf("report: %d case(s), summary at %s\n", res.cases,
                  res.summary_path.string().c_str());
    }
    for (const std::string& miss : res.missing) {
      std::fprintf(stderr, "missing: %s\n", miss.c_str());
    }
    return res.missing.empty() ? kExitOk : kExitIo;
  }

  int exit_code = kExitOk;
  for (const bflow::RunManifest& m : resolve_cases(o)) {
    if (cmd == "synth") {
      bflow::cmd_synth(m);
      std::printf("synth %s: wrote F.pgm G.pgm Gbar.pgm truth_flow.csv in %s\n",
                  m.name.c_str(), m.out.string().c_str());
    } else {
      const bool converged = bflow::cmd_run(m);
      std::printf("run %s: %s, outputs in %s\n", m.name.c_str(),
                  converged ? "converged" : "did not converge",
                  m.out.string().c_str());
      if (!converged) exit_code = kExitNonConvergence;
    }
  }
  return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bayesian optical flow: posterior sampling for image-pair motion"};
  app.require_subcommand(1);

  Overrides synth_o, run_o;
  CLI::App* synth = app.add_subcommand("synth", "generate benchmark case inputs");
  add_case_options(*synth, synth_o);
  CLI::App* run = app.add_subcommand("run", "sample the posterior for a case");
  add_case_options(*run, run_o);
  std::string report_dir;
  CLI::App* report = app.add_subcommand("report", "summarize finished cases");
  report->add_option("dir", report_dir, "directory holding case subdirectories")
      ->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitBadInput;
  }

  try {
    if (synth->parsed()) return run_command("synth", synth_o, "");
    if (run->parsed()) return run_command("run", run_o, "");
    return run_command("report", run_o, report_dir);
  } catch (const bflow::IoError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const std::filesystem::filesystem_error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitIo;
  } catch (const bflow::NumericalBreakdown& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitNonConvergence;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitBadInput;
  }
}
