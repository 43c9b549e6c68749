#include <doctest.h>

#include <limits>
#include <sstream>

#include "exboot/report.hpp"
#include "exboot/separable.hpp"
#include "support.hpp"

using namespace exboot;

TEST_SUITE("report") {

TEST_CASE("doubles survive a JSON round trip; NaN becomes null") {
  Vector v(3);
  v << 0.1, 1.0 / 3.0, std::numeric_limits<double>::quiet_NaN();
  const auto j = report::Json::parse(report::to_json(v).dump());
  CHECK(j[0].get<double>() == 0.1);
  CHECK(j[1].get<double>() == 1.0 / 3.0);
  CHECK(j[2].is_null());
}

TEST_CASE("band CSV and JSON") {
  const auto a = testing::random_multiway({5, 6}, 3, 1);
  BootstrapOptions o;
  o.mode = BootstrapMode::Studentized;
  const auto r = separable::bootstrap(a, o);
  const auto band = confidence_band(r, 0.1, BandType::Studentized);
  std::ostringstream csv;
  report::write_band_csv(csv, band);
  std::istringstream lines(csv.str());
  std::string line;
  std::getline(lines, line);
  CHECK(line == "coordinate,estimate,lower,upper,half_width,sd");
  int rows = 0;
  while (std::getline(lines, line)) ++rows;
  CHECK(rows == 3);
  const auto j = report::bootstrap_json(r, band);
  CHECK(j["engine"] == "separable");
  CHECK(j["lower"].size() == 3);
  CHECK(j["critical_value"].get<double>() == r.cv);
}

TEST_CASE("density outputs") {
  std::vector<double> v(36, 0.0);
  const auto z = testing::normals(36, 3);
  for (std::size_t i = 0; i < 6; ++i)
    for (std::size_t j = i + 1; j < 6; ++j) v[i * 6 + j] = v[j * 6 + i] = (i + j) % 3 ? z[i * 6 + j] : 0.0;
  const DyadicArray d(6, 1, v, true);
  const auto grid = density::make_grid(-1.05, 1.05, 8);
  density::DensityBandOptions o;
  o.draws = 100;
  const auto r = density::density_band(d, grid, density::Kernel::epanechnikov(), 0.8, o);
  std::ostringstream csv, svg;
  report::write_density_csv(csv, r);
  CHECK(csv.str().rfind("y,f_hat,lower,upper,sigma_tilde\n", 0) == 0);
  report::write_density_svg(svg, r, "test");
  CHECK(svg.str().find("<polygon") != std::string::npos);
  CHECK(svg.str().find("<polyline") != std::string::npos);
  CHECK(svg.str().find("P(Y=0)") != std::string::npos);
  const auto j = report::density_json(r, "epanechnikov");
  CHECK(j["zero_share"].get<double>() == doctest::Approx(1.0 - r.a_hat));
}

TEST_CASE("coverage JSON omits wall time unless asked") {
  simgen::CoverageReport rep;
  rep.wall_seconds = 1.5;
  rep.cells.push_back({0.9, BootstrapMode::Raw, 9, 0.9});
  CHECK_FALSE(report::coverage_json(rep).contains("wall_seconds"));
  CHECK(report::coverage_json(rep, true)["wall_seconds"].get<double>() == 1.5);
  std::ostringstream csv;
  report::write_coverage_csv(csv, rep);
  CHECK(csv.str().rfind("design,base,p,dims,level,mode,coverage,reps,B\n", 0) == 0);
}

TEST_CASE("error JSON") {
  const auto j = report::error_json(Error(ErrorCode::DegenerateScale, "zero scale"));
  CHECK(j["error"] == "degenerate_scale");
  CHECK(j["message"] == "zero scale");
}

}
