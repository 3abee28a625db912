#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "bflow/bench.hpp"
#include "bflow/imageio.hpp"
#include "bflow/sampler.hpp"
#include "bflow/uq.hpp"

namespace bflow {

/// Intensity coding for the pipeline's PGM artifacts. First images live in
/// [0,1] and map straight onto [0, maxval]. Advected second images are
/// produced by the linearized flow equation without clamping and can leave
/// [0,1], so G-like files (G, Gbar, Ghat) carry a fixed affine code over
/// [kAdvectedLo, kAdvectedHi]. Values outside that range are a hard error
/// rather than a silent clamp.
inline constexpr int kPgmMaxval = 65535;
inline constexpr double kAdvectedLo = -8.0;
inline constexpr double kAdvectedHi = 9.0;

RawImage encode_unit(const ImageField& img);
RawImage encode_advected(const ImageField& img);
ImageField decode_unit(const RawImage& img);
ImageField decode_advected(const RawImage& img);

/// One benchmark case: where the first image comes from, which flow drives
/// the pair, the noise model, and the chain/report settings.
struct RunManifest {
  std::string name = "case";
  std::string input = "synthetic";  // "synthetic" or a path to a PGM file
  FlowSpec flow{1};
  NoiseSpec noise{NoiseSpec::Kind::gaussian, 0.02};
  GridSpec grid{30, 30};
  ChainConfig chain;
  HyperPriors priors;
  double q = 0.95;   // confidence level for the ellipse report
  int stride = 1;    // ellipse subsampling stride
  std::filesystem::path out = "out";

  void validate() const;
};

/// Parses a manifest document: a single case object, an array of cases, or
/// {"cases": [...]}. Unknown keys are rejected. Absent fields take defaults;
/// file-backed cases default to a 60x60 grid and sigma 0.05 instead of the
/// synthetic 30x30 and 0.02.
std::vector<RunManifest> parse_manifests(const std::string& json_text);
std::vector<RunManifest> load_manifests(const std::filesystem::path& path);

/// Generates the case inputs into the output directory: F.pgm, G.pgm,
/// Gbar.pgm, truth_flow.csv. A file-backed case reads the input image,
/// normalizes it, and resizes it to the manifest grid first.
void cmd_synth(const RunManifest& m);

/// Runs the Gibbs chain on F.pgm/G.pgm from the output directory and writes
/// mean_flow.csv, trace.csv, ellipses.csv, tikhonov_flow.csv (at alpha =
/// posterior mean of delta/lambda), metrics.json, and Ghat.pgm. The endpoint
/// error needs truth_flow.csv and the clean-image RMSE needs Gbar.pgm; either
/// metric is null in metrics.json when its file is absent. Returns the
/// converged flag (artifacts are written either way).
bool cmd_run(const RunManifest& m);

struct ReportResult {
  int cases = 0;
  std::vector<std::string> missing;  // "case: filename" for incomplete cases
  std::filesystem::path summary_path;
};

/// Walks the immediate subdirectories of dir (or dir itself) for completed
/// runs, writes scatter.csv next to each, and a summary.txt of the metrics
/// across cases into dir. Missing inputs are reported by name, not fatal.
ReportResult cmd_report(const std::filesystem::path& dir);

/// Decimal form that parses back to the identical double ("%.17g").
std::string format_double(double v);

void write_flow_csv(const FlowField& flow, const std::filesystem::path& path);
FlowField read_flow_csv(const std::filesystem::path& path);
void write_trace_csv(const ChainResult& result, const std::filesystem::path& path);
void write_ellipses_csv(const UQField& uq, int stride, const std::filesystem::path& path);
void write_scatter_csv(const ImageComparison& cmp, const std::filesystem::path& path);

}  // namespace bflow
