#include "bflow/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <json.hpp>

#include "bflow/solver.hpp"

namespace bflow {

namespace fs = std::filesystem;
using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

RawImage encode_unit(const ImageField& img) { return quantize(img, kPgmMaxval); }

ImageField decode_unit(const RawImage& img) { return normalize(img); }

RawImage encode_advected(const ImageField& img) {
  RawImage out;
  out.width = img.grid.nx;
  out.height = img.grid.ny;
  out.maxval = kPgmMaxval;
  out.pixels.resize(static_cast<std::size_t>(out.width) * out.height);
  const double scale = kPgmMaxval / (kAdvectedHi - kAdvectedLo);
  for (int j = 0; j < img.grid.ny; ++j) {
    for (int i = 0; i < img.grid.nx; ++i) {
      const double v = img.data(i, j);
      if (v < kAdvectedLo || v > kAdvectedHi) {
        throw DomainError("encode_advected: intensity " + format_double(v) +
                          " outside the coded range [" + format_double(kAdvectedLo) +
                          ", " + format_double(kAdvectedHi) + "]");
      }
      out.pixels[static_cast<std::size_t>(j) * out.width + i] =
          static_cast<std::uint16_t>(std::lround((v - kAdvectedLo) * scale));
    }
  }
  return out;
}

ImageField decode_advected(const RawImage& img) {
  if (img.width < 2 || img.height < 2) {
    throw DomainError("decode_advected: image must be at least 2x2");
  }
  const GridSpec grid(img.width, img.height);
  Eigen::MatrixXd data(grid.nx, grid.ny);
  const double scale = (kAdvectedHi - kAdvectedLo) / img.maxval;
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      data(i, j) =
          kAdvectedLo + scale * img.pixels[static_cast<std::size_t>(j) * img.width + i];
    }
  }
  return ImageField(grid, std::move(data));
}

void RunManifest::validate() const {
  if (name.empty()) throw DomainError("manifest: name must not be empty");
  if (input.empty()) throw DomainError("manifest: input must not be empty");
  flow.validate();
  noise.validate();
  chain.validate();
  priors.validate();
  if (!(q > 0.0 && q < 1.0)) throw DomainError("manifest: q must lie in (0, 1)");
  if (stride < 1) throw DomainError("manifest: stride must be at least 1");
  if (out.empty()) throw DomainError("manifest: out must not be empty");
}

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find_if(allowed.begin(), allowed.end(), [&](const char* k) {
          return item.key() == k;
        }) == allowed.end()) {
      throw DomainError("manifest: unknown key \"" + item.key() + "\" in " + where);
    }
  }
}

NoiseSpec::Kind noise_kind_from_string(const std::string& s) {
  if (s == "gaussian") return NoiseSpec::Kind::gaussian;
  if (s == "uniform") return NoiseSpec::Kind::uniform;
  if (s == "laplace") return NoiseSpec::Kind::laplace;
  if (s == "none") return NoiseSpec::Kind::none;
  throw DomainError("manifest: unknown noise kind \"" + s + "\"");
}

RunManifest manifest_from_json(const json& j) {
  check_keys(j,
             {"name", "input", "flow_id", "noise", "grid", "chain", "hyperpriors",
              "q", "stride", "out"},
             "case");
  RunManifest m;
  m.input = j.value("input", std::string("synthetic"));
  const bool synthetic = m.input == "synthetic";
  if (!synthetic) {
    m.grid = GridSpec(60, 60);
    m.noise.sigma = 0.05;
  }
  m.name = j.value("name", std::string("case"));
  if (j.contains("flow_id")) m.flow.id = j.at("flow_id").get<int>();
  if (j.contains("noise")) {
    const json& n = j.at("noise");
    check_keys(n, {"kind", "sigma"}, "noise");
    if (n.contains("kind")) m.noise.kind = noise_kind_from_string(n.at("kind"));
    if (n.contains("sigma")) m.noise.sigma = n.at("sigma").get<double>();
  }
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    check_keys(g, {"nx", "ny"}, "grid");
    m.grid = GridSpec(g.value("nx", m.grid.nx), g.value("ny", m.grid.ny));
  }
  if (j.contains("chain")) {
    const json& c = j.at("chain");
    check_keys(c,
               {"iterations", "burn_in", "seed", "lambda0", "delta0", "thin",
                "max_restarts"},
               "chain");
    m.chain.iterations = c.value("iterations", m.chain.iterations);
    m.chain.burn_in = c.value("burn_in", m.chain.burn_in);
    m.chain.seed = c.value("seed", m.chain.seed);
    m.chain.lambda0 = c.value("lambda0", m.chain.lambda0);
    m.chain.delta0 = c.value("delta0", m.chain.delta0);
    m.chain.thin = c.value("thin", m.chain.thin);
    m.chain.max_restarts = c.value("max_restarts", m.chain.max_restarts);
  }
  if (j.contains("hyperpriors")) {
    const json& h = j.at("hyperpriors");
    check_keys(h, {"alpha_lambda", "beta_lambda", "alpha_delta", "beta_delta"},
               "hyperpriors");
    m.priors.alpha_lambda = h.value("alpha_lambda", m.priors.alpha_lambda);
    m.priors.beta_lambda = h.value("beta_lambda", m.priors.beta_lambda);
    m.priors.alpha_delta = h.value("alpha_delta", m.priors.alpha_delta);
    m.priors.beta_delta = h.value("beta_delta", m.priors.beta_delta);
  }
  m.q = j.value("q", m.q);
  m.stride = j.value("stride", m.stride);
  m.out = j.contains("out") ? fs::path(j.at("out").get<std::string>())
                            : fs::path(m.name);
  m.validate();
  return m;
}

}  // namespace

std::vector<RunManifest> parse_manifests(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), e.byte);
  }
  const json* cases = &doc;
  if (doc.is_object() && doc.contains("cases")) {
    check_keys(doc, {"cases"}, "manifest");
    cases = &doc.at("cases");
  }
  std::vector<RunManifest> out;
  if (cases->is_array()) {
    for (const json& c : *cases) out.push_back(manifest_from_json(c));
  } else if (cases->is_object()) {
    out.push_back(manifest_from_json(*cases));
  } else {
    throw DomainError("manifest: document must be an object or an array of cases");
  }
  if (out.empty()) throw DomainError("manifest: no cases defined");
  return out;
}

std::vector<RunManifest> load_manifests(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open manifest " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_manifests(buf.str());
}

namespace {

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

ImageField load_first_image(const RunManifest& m) {
  if (m.input == "synthetic") return make_first_image(m.grid);
  ImageField img = normalize(read_pgm_file(m.input));
  if (img.grid == m.grid) return img;
  return resize_bilinear(img, m.grid.nx, m.grid.ny);
}

}  // namespace

void write_flow_csv(const FlowField& flow, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "i,j,u,v\n";
  for (int j = 0; j < flow.grid.ny; ++j) {
    for (int i = 0; i < flow.grid.nx; ++i) {
      out << i << ',' << j << ',' << format_double(flow.u(i, j)) << ','
          << format_double(flow.v(i, j)) << '\n';
    }
  }
  if (!out) throw IoError("short write to " + path.string());
}

FlowField read_flow_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::string line;
  std::size_t offset = 0;
  if (!std::getline(in, line)) throw ParseError("empty flow csv", 0);
  if (line != "i,j,u,v") throw ParseError("bad flow csv header", 0);
  offset += line.size() + 1;

  struct Row {
    int i, j;
    double u, v;
  };
  std::vector<Row> rows;
  int nx = 0;
  int ny = 0;
  while (std::getline(in, line)) {
    if (line.empty()) break;
    Row r;
    if (std::sscanf(line.c_str(), "%d,%d,%lf,%lf", &r.i, &r.j, &r.u, &r.v) != 4 ||
        r.i < 0 || r.j < 0) {
      throw ParseError("malformed flow csv row", offset);
    }
    nx = std::max(nx, r.i + 1);
    ny = std::max(ny, r.j + 1);
    rows.push_back(r);
    offset += line.size() + 1;
  }
  if (static_cast<long>(rows.size()) != static_cast<long>(nx) * ny || nx < 2 || ny < 2) {
    throw ParseError("flow csv does not cover a full grid", offset);
  }
  const GridSpec grid(nx, ny);
  Eigen::MatrixXd u(nx, ny), v(nx, ny);
  for (const Row& r : rows) {
    u(r.i, r.j) = r.u;
    v(r.i, r.j) = r.v;
  }
  return FlowField(grid, std::move(u), std::move(v));
}

void write_trace_csv(const ChainResult& result, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "k,lambda,delta,delta_over_lambda\n";
  for (std::size_t k = 0; k < result.lambda_trace.size(); ++k) {
    const double lambda = result.lambda_trace[k];
    const double delta = result.delta_trace[k];
    out << (k + 1) << ',' << format_double(lambda) << ',' << format_double(delta)
        << ',' << format_double(delta / lambda) << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

void write_ellipses_csv(const UQField& uq, int stride, const fs::path& path) {
  if (stride < 1) throw DomainError("ellipse stride must be at least 1");
  std::ofstream out = open_out(path);
  out << "i,j,mu_u,mu_v,a,b,theta\n";
  for (int j = 0; j < uq.grid.ny; j += stride) {
    for (int i = 0; i < uq.grid.nx; i += stride) {
      const PixelUQ& p = uq.pixels[static_cast<std::size_t>(j) * uq.grid.nx + i];
      const Ellipse e = confidence_ellipse(p, uq.q);
      out << i << ',' << j << ',' << format_double(e.center[0]) << ','
          << format_double(e.center[1]) << ',' << format_double(e.semi_major) << ','
          << format_double(e.semi_minor) << ',' << format_double(e.orientation)
          << '\n';
    }
  }
  if (!out) throw IoError("short write to " + path.string());
}

void write_scatter_csv(const ImageComparison& cmp, const fs::path& path) {
  std::ofstream out = open_out(path);
  out << "pixel,ghat,g,gbar\n";
  for (std::size_t k = 0; k < cmp.ghat.size(); ++k) {
    out << k << ',' << format_double(cmp.ghat[k]) << ',' << format_double(cmp.g[k])
        << ',' << format_double(cmp.gbar[k]) << '\n';
  }
  if (!out) throw IoError("short write to " + path.string());
}

void cmd_synth(const RunManifest& m) {
  m.validate();
  const ImageField first = load_first_image(m);
  RandomStream rng(m.chain.seed);
  const BenchCase bc = make_bench_case(first, m.flow, m.noise, rng);
  fs::create_directories(m.out);
  write_pgm_file(encode_unit(bc.first), m.out / "F.pgm");
  write_pgm_file(encode_advected(bc.second_noisy), m.out / "G.pgm");
  write_pgm_file(encode_advected(bc.second_clean), m.out / "Gbar.pgm");
  write_flow_csv(bc.truth, m.out / "truth_flow.csv");
}

bool cmd_run(const RunManifest& m) {
  m.validate();
  const fs::path dir = m.out;
  const ImageField f = decode_unit(read_pgm_file(dir / "F.pgm"));
  const ImageField g = decode_advected(read_pgm_file(dir / "G.pgm"));
  const GridSpec grid = f.grid;

  const FlowSystem sys = assemble_system(f, g);
  const CGConfig cg;
  const ChainResult chain = run_chain(sys, m.priors, m.chain, cg);

  const FlowField mean = mean_flow(chain, grid);
  const UQField uq = uq_field(chain, grid, m.q);

  const std::vector<double> ratio = effective_alpha_trace(chain);
  double alpha_star = 0.0;
  const std::size_t first_kept = static_cast<std::size_t>(chain.burn_in);
  for (std::size_t k = first_kept; k < ratio.size(); ++k) alpha_star += ratio[k];
  alpha_star /= static_cast<double>(ratio.size() - first_kept);
  const CGResult tik = tikhonov_solve(sys, TikhonovConfig{alpha_star}, cg);
  const int np = grid.pixel_count();
  const FlowField tik_flow(grid, devectorize(tik.x.head(np), grid),
                           devectorize(tik.x.tail(np), grid));

  const ImageField ghat = reconstruct_second_image(f, mean);
  const bool have_gbar = fs::exists(dir / "Gbar.pgm");
  const ImageField gbar =
      have_gbar ? decode_advected(read_pgm_file(dir / "Gbar.pgm")) : g;
  const ImageComparison cmp = compare_images(ghat, g, gbar);

  json metrics;
  metrics["converged"] = chain.converged;
  metrics["restart_count"] = chain.restart_count;
  metrics["rmse_g"] = cmp.rmse_g;
  metrics["rmse_gbar"] = have_gbar ? json(cmp.rmse_gbar) : json(nullptr);
  metrics["alpha_star"] = alpha_star;
  if (fs::exists(dir / "truth_flow.csv")) {
    metrics["aee"] = endpoint_error(mean, read_flow_csv(dir / "truth_flow.csv"));
  } else {
    metrics["aee"] = nullptr;
  }

  write_flow_csv(mean, dir / "mean_flow.csv");
  write_trace_csv(chain, dir / "trace.csv");
  write_ellipses_csv(uq, m.stride, dir / "ellipses.csv");
  write_flow_csv(tik_flow, dir / "tikhonov_flow.csv");
  write_pgm_file(encode_advected(ghat), dir / "Ghat.pgm");
  std::ofstream mout = open_out(dir / "metrics.json");
  mout << metrics.dump(2) << '\n';
  if (!mout) throw IoError("short write to metrics.json");
  return chain.converged;
}

namespace {

std::string metric_cell(const json& metrics, const char* key) {
  if (!metrics.contains(key) || metrics.at(key).is_null()) return "n/a";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6g", metrics.at(key).get<double>());
  return buf;
}

}  // namespace

ReportResult cmd_report(const fs::path& dir) {
  if (!fs::is_directory(dir)) {
    throw IoError("report: not a directory: " + dir.string());
  }
  std::vector<fs::path> case_dirs;
  if (fs::exists(dir / "metrics.json")) {
    case_dirs.push_back(dir);
  } else {
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (entry.is_directory() && fs::exists(entry.path() / "metrics.json")) {
        case_dirs.push_back(entry.path());
      }
    }
    std::sort(case_dirs.begin(), case_dirs.end());
  }

  ReportResult res;
  res.summary_path = dir / "summary.txt";
  std::ostringstream summary;
  if (case_dirs.empty()) {
    summary << "no completed cases found in " << dir.string() << '\n';
  } else {
    summary << std::left << std::setw(24) << "case" << std::right << std::setw(12)
            << "aee" << std::setw(12) << "rmse_g" << std::setw(12) << "rmse_gbar"
            << std::setw(10) << "restarts" << std::setw(11) << "converged" << '\n';
  }

  for (const fs::path& cdir : case_dirs) {
    const std::string name = cdir.filename().string();
    std::ifstream min(cdir / "metrics.json", std::ios::binary);
    json metrics;
    try {
      min >> metrics;
    } catch (const json::parse_error& e) {
      throw ParseError("bad metrics.json in " + name + ": " + e.what(), e.byte);
    }

    bool complete = true;
    for (const char* file : {"Ghat.pgm", "G.pgm", "Gbar.pgm"}) {
      if (!fs::exists(cdir / file)) {
        res.missing.push_back(name + ": " + file);
        complete = false;
      }
    }
    if (complete) {
      const ImageField ghat = decode_advected(read_pgm_file(cdir / "Ghat.pgm"));
      const ImageField g = decode_advected(read_pgm_file(cdir / "G.pgm"));
      const ImageField gbar = decode_advected(read_pgm_file(cdir / "Gbar.pgm"));
      write_scatter_csv(compare_images(ghat, g, gbar), cdir / "scatter.csv");
    }

    summary << std::left << std::setw(24) << name << std::right << std::setw(12)
            << metric_cell(metrics, "aee") << std::setw(12)
            << metric_cell(metrics, "rmse_g") << std::setw(12)
            << metric_cell(metrics, "rmse_gbar") << std::setw(10)
            << (metrics.contains("restart_count")
                    ? std::to_string(metrics.at("restart_count").get<int>())
                    : std::string("n/a"))
            << std::setw(11)
            << (metrics.value("converged", false) ? "yes" : "no") << '\n';
    ++res.cases;
  }

  if (!res.missing.empty()) {
    summary << "\nmissing inputs:\n";
    for (const std::string& miss : res.missing) summary << "  " << miss << '\n';
  }
  std::ofstream out = open_out(res.summary_path);
  out << summary.str();
  if (!out) throw IoError("short write to " + res.summary_path.string());
  return res;
}

}  // namespace bflow
