// exboot: uniform confidence bands for exchangeable arrays.
//
// Exit codes: 0 success, 2 input/usage error, 3 degenerate scale. Failures
// print {"error": code, "message": ...} on stderr.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "exboot/array_model.hpp"
#include "exboot/density.hpp"
#include "exboot/joint.hpp"
#include "exboot/lasso.hpp"
#include "exboot/report.hpp"
#include "exboot/separable.hpp"
#include "exboot/simgen.hpp"

namespace fs = std::filesystem;
using namespace exboot;
using report::Json;

namespace {

struct Common {
  unsigned threads = 1;
  std::uint64_t seed = 0;
  std::string out = ".";
  std::string prefix;
};

struct MeanBandArgs {
  std::string input;
  std::string engine = "auto";  // auto | separable | joint
  std::size_t K = 0;            // multiway order; 0 = edge list
  std::size_t p = 1;
  bool symmetrize = false;
  double alpha = 0.1;
  std::size_t B = 500;
  std::string mode = "raw";
  std::string scale = "bessel";
};

struct DensityArgs {
  std::string input;
  bool symmetrize = false;
  bool log = false;
  bool a_known_one = false;
  std::string grid = "-2:2:201";
  std::string kernel = "epanechnikov";
  std::string rule = "a";
  double h = 0.0;
  double alpha = 0.05;
  std::size_t B = 500;
  std::string band = "constant";
  std::string title = "Density with uniform confidence band";
};

struct SimulateArgs {
  std::string design = "separable_k2";
  std::string base = "mixture";
  std::size_t p = 25;
  std::vector<std::size_t> dims{25, 25};
  std::size_t reps = 500;
  std::size_t B = 500;
  bool paper_scale = false;
  std::vector<double> levels{0.9, 0.95};
  std::string rule = "a";
  bool timing = false;
};

struct LassoArgs {
  std::string input;
  std::size_t K = 2;
  double eta = 0.1;
  double c = 1.1;
  std::size_t B = 500;
  double tol = 1e-8;
  std::size_t max_iter = 100000;
};

std::uint64_t default_seed() {
  if (const char* env = std::getenv("EXBOOT_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw Error(ErrorCode::InvalidArgument, "EXBOOT_SEED is not an unsigned integer");
    }
  }
  return 0;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open input file: " + path);
  return in;
}

fs::path output_path(const Common& common, const std::string& stem, const std::string& ext) {
  fs::create_directories(common.out);
  return fs::path(common.out) / ((common.prefix.empty() ? stem : common.prefix) + ext);
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out << text;
}

void write_json(const fs::path& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

template <class Fn>
void write_with(const fs::path& path, Fn&& fn) {
  std::ostringstream s;
  fn(s);
  write_text(path, s.str());
}

// --- mean-band --------------------------------------------------------------

int cmd_mean_band(const Common& common, const MeanBandArgs& a) {
  BootstrapOptions options;
  options.draws = a.B;
  options.alpha = a.alpha;
  options.mode = parse_mode(a.mode);
  require(a.scale == "bessel" || a.scale == "plain", "--scale must be bessel or plain");
  options.scale = a.scale == "bessel" ? ScaleEstimator::Bessel : ScaleEstimator::Plain;
  options.seed = common.seed;
  options.threads = common.threads;

  std::string engine = a.engine;
  if (engine == "auto") engine = a.K > 0 ? "separable" : "joint";
  require(engine == "separable" || engine == "joint", "--engine must be auto, separable or joint");

  auto in = open_input(a.input);
  BootstrapResult result;
  if (a.K == 0) {
    require(engine == "joint", "edge-list input needs the joint engine");
    const auto edges = load_dyadic_edges(in, a.symmetrize);
    result = joint::bootstrap(edges.array, options);
  } else {
    const auto array = load_multiway_csv(in, a.K, a.p);
    if (engine == "separable") {
      result = separable::bootstrap(array, options);
    } else {
      require(a.K == 2 && array.dim(0) == array.dim(1),
              "joint engine on a multiway file needs a square K = 2 array");
      std::vector<double> values(array.values().begin(), array.values().end());
      result = joint::bootstrap(DyadicArray(array.dim(0), array.p(), std::move(values), false),
                                options);
    }
  }
  const auto type = options.mode == BootstrapMode::Raw ? BandType::Constant : BandType::Studentized;
  const auto band = confidence_band(result, options.alpha, type);

  Json j = report::bootstrap_json(result, band);
  j["config"] = {{"subcommand", "mean-band"}, {"input", a.input},   {"engine", a.engine},
                 {"K", a.K},                  {"p", a.p},           {"symmetrize", a.symmetrize},
                 {"alpha", a.alpha},          {"B", a.B},           {"mode", a.mode},
                 {"scale", a.scale},          {"seed", common.seed}};
  write_json(output_path(common, "mean_band", ".json"), j);
  write_with(output_path(common, "mean_band", ".csv"),
             [&](std::ostream& o) { report::write_band_csv(o, band); });
  return 0;
}

// --- density-band -----------------------------------------------------------

std::vector<double> parse_grid(const std::string& text) {
  const auto parts = split_csv_line([&] {
    std::string s = text;
    for (auto& ch : s)
      if (ch == ':') ch = ',';
    return s;
  }());
  double from = 0, to = 0, points = 0;
  require(parts.size() == 3 && parse_double(parts[0], from) && parse_double(parts[1], to) &&
              parse_double(parts[2], points),
          "--grid must look like from:to:points");
  require(points >= 2 && std::floor(points) == points && to > from,
          "--grid needs to > from and an integer point count >= 2");
  return density::make_grid(from, to, static_cast<std::size_t>(points));
}

density::Kernel parse_kernel(const std::string& name) {
  if (name == "epanechnikov") return density::Kernel::epanechnikov();
  if (name == "gaussian") return density::Kernel::gaussian();
  if (name == "quartic4") return density::Kernel::fourth_order_table();
  throw Error(ErrorCode::InvalidArgument, "--kernel must be epanechnikov, gaussian or quartic4");
}

DyadicArray log_transform(const DyadicArray& data) {
  std::vector<double> values(data.values().begin(), data.values().end());
  for (auto& v : values) {
    if (v == 0.0) continue;
    require(v > 0.0, "--log needs nonnegative weights", ErrorCode::NonNumeric);
    v = std::log(v);
  }
  return DyadicArray(data.n(), data.p(), std::move(values), data.symmetric());
}

int cmd_density_band(const Common& common, const DensityArgs& a) {
  auto in = open_input(a.input);
  auto edges = load_dyadic_edges(in, a.symmetrize);
  DyadicArray data = a.log ? log_transform(edges.array) : std::move(edges.array);
  const auto grid = parse_grid(a.grid);
  const auto kernel = parse_kernel(a.kernel);
  const auto rule = density::parse_bandwidth_rule(a.rule);
  const double h = a.h > 0.0 ? a.h : density::bandwidth(data, rule);

  density::DensityBandOptions options;
  options.alpha = a.alpha;
  options.draws = a.B;
  require(a.band == "constant" || a.band == "studentized", "--band must be constant or studentized");
  options.band = a.band == "constant" ? BandType::Constant : BandType::Studentized;
  options.a_known_one = a.a_known_one;
  options.seed = common.seed;
  options.threads = common.threads;
  const auto result = density::density_band(data, grid, kernel, h, options);

  Json j = report::density_json(result, kernel.name());
  j["config"] = {{"subcommand", "density-band"},
                 {"input", a.input},
                 {"symmetrize", a.symmetrize},
                 {"log", a.log},
                 {"a_known_one", a.a_known_one},
                 {"grid", a.grid},
                 {"kernel", a.kernel},
                 {"bandwidth_rule", a.rule},
                 {"h", a.h},
                 {"alpha", a.alpha},
                 {"B", a.B},
                 {"band", a.band},
                 {"seed", common.seed}};
  write_json(output_path(common, "density_band", ".json"), j);
  write_with(output_path(common, "density_band", ".csv"),
             [&](std::ostream& o) { report::write_density_csv(o, result); });
  write_with(output_path(common, "density_band", ".svg"),
             [&](std::ostream& o) { report::write_density_svg(o, result, a.title); });
  return 0;
}

// --- simulate ---------------------------------------------------------------

int cmd_simulate(const Common& common, const SimulateArgs& a) {
  simgen::DesignSpec spec;
  spec.family = simgen::parse_family(a.design);
  spec.base = simgen::parse_base(a.base);
  spec.p = a.p;
  spec.dims = a.dims;
  spec.validate();

  simgen::CoverageOptions options;
  options.reps = a.paper_scale ? 2500 : a.reps;
  options.draws = a.paper_scale ? 2500 : a.B;
  options.levels = a.levels;
  options.seed = common.seed;
  options.threads = common.threads;
  options.rule = density::parse_bandwidth_rule(a.rule);
  const auto result = simgen::coverage_experiment(spec, options);

  Json j = report::coverage_json(result, a.timing);
  j["config"] = {{"subcommand", "simulate"}, {"design", a.design},   {"base", a.base},
                 {"p", a.p},                 {"dims", a.dims},       {"reps", a.reps},
                 {"B", a.B},                 {"paper_scale", a.paper_scale},
                 {"levels", a.levels},       {"bandwidth_rule", a.rule},
                 {"seed", common.seed}};
  write_json(output_path(common, "coverage", ".json"), j);
  write_with(output_path(common, "coverage", ".csv"),
             [&](std::ostream& o) { report::write_coverage_csv(o, result); });
  return 0;
}

// --- lasso ------------------------------------------------------------------

int cmd_lasso(const Common& common, const LassoArgs& a) {
  auto in = open_input(a.input);
  std::stringstream buffer;
  buffer << in.rdbuf();
  const std::string text = buffer.str();

  // Column count from the first non-blank line: i1..iK, y, x1..xp.
  std::size_t columns = 0;
  {
    std::istringstream lines(text);
    std::string line;
    while (std::getline(lines, line))
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        columns = split_csv_line(line).size();
        break;
      }
  }
  require(columns >= a.K + 2, "lasso input needs columns i1..iK, y, x1..xp");
  std::istringstream body(text);
  const auto joint_array = load_multiway_csv(body, a.K, columns - a.K);
  const std::size_t p = joint_array.p() - 1;
  const std::size_t cells = joint_array.cells();
  std::vector<double> y(cells), x(cells * p);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto row = joint_array.cell(c);
    y[c] = row[0];
    for (std::size_t j = 0; j < p; ++j) x[c * p + j] = row[j + 1];
  }
  std::vector<std::size_t> dims(joint_array.dims().begin(), joint_array.dims().end());
  const auto problem = lasso::make_regression(MultiwayArray(dims, 1, std::move(y)),
                                              MultiwayArray(dims, p, std::move(x)));

  lasso::PenaltyOptions options;
  options.eta = a.eta;
  options.c = a.c;
  options.draws = a.B;
  options.seed = common.seed;
  options.threads = common.threads;
  options.solver.tol = a.tol;
  options.solver.max_iter = a.max_iter;
  const auto fit = lasso::fit(problem, options);

  Json j = report::lasso_json(fit);
  j["config"] = {{"subcommand", "lasso"}, {"input", a.input}, {"K", a.K},
                 {"eta", a.eta},          {"c", a.c},         {"B", a.B},
                 {"tol", a.tol},          {"max_iter", a.max_iter},
                 {"seed", common.seed}};
  write_json(output_path(common, "lasso", ".json"), j);
  write_with(output_path(common, "lasso", ".csv"),
             [&](std::ostream& o) { report::write_lasso_csv(o, fit); });
  return 0;
}

int fail(const Error& e) {
  std::cerr << report::error_json(e).dump() << '\n';
  return e.code() == ErrorCode::DegenerateScale ? 3 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplier-bootstrap confidence bands for exchangeable arrays"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "key=value config file; [subcommand] sections, flags win");

  Common common;
  try {
    common.seed = default_seed();
  } catch (const Error& e) {
    return fail(e);
  }
  app.add_option("--threads", common.threads, "worker threads (0 = all cores); results do not depend on it")
      ->capture_default_str();
  app.add_option("--seed", common.seed, "RNG seed (default $EXBOOT_SEED or 0)")->capture_default_str();
  app.add_option("--out", common.out, "output directory")->capture_default_str();
  app.add_option("--prefix", common.prefix, "output file stem (default per subcommand)");

  MeanBandArgs mb;
  auto* mean = app.add_subcommand("mean-band", "uniform band for the mean of an exchangeable array");
  mean->add_option("--input", mb.input, "multiway CSV (i1..iK,x1..xp) or edge list (i,j,y)")->required();
  mean->add_option("--engine", mb.engine, "auto | separable | joint")->capture_default_str();
  mean->add_option("--K", mb.K, "index columns of a multiway CSV; omit for an edge list");
  mean->add_option("--p", mb.p, "value columns of a multiway CSV")->capture_default_str();
  mean->add_flag("--symmetrize", mb.symmetrize, "edge list: y_ij + y_ji in both slots");
  mean->add_option("--alpha", mb.alpha)->capture_default_str();
  mean->add_option("--B", mb.B, "bootstrap draws (>= 100)")->capture_default_str();
  mean->add_option("--mode", mb.mode, "raw | studentized")->capture_default_str();
  mean->add_option("--scale", mb.scale, "bessel | plain")->capture_default_str();

  DensityArgs da;
  auto* dens = app.add_subcommand("density-band", "dyadic density estimate with a uniform band");
  dens->add_option("--input", da.input, "edge list i,j,y")->required();
  dens->add_flag("--symmetrize", da.symmetrize, "y_ij + y_ji in both slots; missing reverse edges are zero");
  dens->add_flag("--log", da.log, "log of nonzero weights (zeros stay at the point mass)");
  dens->add_flag("--a-known-one", da.a_known_one, "estimate b(y) only, a_hat := 1");
  dens->add_option("--grid", da.grid, "from:to:points")->capture_default_str();
  dens->add_option("--kernel", da.kernel, "epanechnikov | gaussian | quartic4")->capture_default_str();
  dens->add_option("--bandwidth-rule", da.rule, "a | b (undersmoothed Silverman)")->capture_default_str();
  dens->add_option("--bandwidth", da.h, "explicit bandwidth; overrides the rule");
  dens->add_option("--alpha", da.alpha)->capture_default_str();
  dens->add_option("--B", da.B)->capture_default_str();
  dens->add_option("--band", da.band, "constant | studentized")->capture_default_str();
  dens->add_option("--title", da.title, "SVG title");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo coverage of the uniform bands");
  sim->add_option("--design", sa.design, "separable_k2 | separable_k3 | dyadic | dyadic_density")
      ->capture_default_str();
  sim->add_option("--base", sa.base, "gaussian | mixture | logistic")->capture_default_str();
  sim->add_option("--p", sa.p)->capture_default_str();
  sim->add_option("--dims", sa.dims, "sizes per axis, or n for dyadic designs")->delimiter(',');
  sim->add_option("--reps", sa.reps)->capture_default_str();
  sim->add_option("--B", sa.B)->capture_default_str();
  sim->add_flag("--paper-scale", sa.paper_scale, "2500 replications x 2500 draws");
  sim->add_option("--levels", sa.levels)->delimiter(',');
  sim->add_option("--bandwidth-rule", sa.rule)->capture_default_str();
  sim->add_flag("--timing", sa.timing, "add wall_seconds to the JSON report");

  LassoArgs la;
  auto* las = app.add_subcommand("lasso", "Lasso with the bootstrap penalty choice");
  las->add_option("--input", la.input, "CSV i1..iK,y,x1..xp")->required();
  las->add_option("--K", la.K)->capture_default_str();
  las->add_option("--eta", la.eta)->capture_default_str();
  las->add_option("--c", la.c)->capture_default_str();
  las->add_option("--B", la.B)->capture_default_str();
  las->add_option("--tol", la.tol, "KKT tolerance")->capture_default_str();
  las->add_option("--max-iter", la.max_iter)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return fail(Error(ErrorCode::InvalidArgument, e.what()));
  }

  try {
    if (*mean) return cmd_mean_band(common, mb);
    if (*dens) return cmd_density_band(common, da);
    if (*sim) return cmd_simulate(common, sa);
    return cmd_lasso(common, la);
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    return fail(Error(ErrorCode::Io, e.what()));
  }
}
