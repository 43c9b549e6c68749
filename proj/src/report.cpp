#include "exboot/report.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <sstream>

#include "exboot/array_model.hpp"

namespace exboot::report {

std::string num(double value) { return format_double(value); }

Json to_json(const Vector& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i]))
      arr.push_back(v[i]);
    else
      arr.push_back(nullptr);
  }
  return arr;
}

namespace {

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

std::string dims_text(const std::vector<std::size_t>& dims) {
  std::string s;
  for (std::size_t k = 0; k < dims.size(); ++k) s += (k ? "x" : "") + std::to_string(dims[k]);
  return s;
}

}  // namespace

Json bootstrap_json(const BootstrapResult& result, const BandResult& band) {
  Json j;
  j["engine"] = result.engine;
  j["mode"] = std::string(to_string(result.mode));
  j["scale_estimator"] = result.scale == ScaleEstimator::Bessel ? "bessel" : "plain";
  j["p"] = result.estimate.size();
  j["rate_n"] = result.rate_n;
  j["B"] = result.B;
  j["seed"] = result.seed;
  j["alpha"] = 1.0 - band.level;
  j["level"] = band.level;
  j["critical_value"] = band.cv;
  j["band_type"] = band.type == BandType::Constant ? "constant" : "studentized";
  j["estimate"] = to_json(result.estimate);
  j["lower"] = to_json(band.lower());
  j["upper"] = to_json(band.upper());
  j["half_width"] = to_json(band.half_width);
  j["sigma_hat"] = to_json(result.sigma_hat);
  j["sigma_tilde"] = to_json(result.sigma_tilde);
  return j;
}

void write_band_csv(std::ostream& out, const BandResult& band) {
  out << "coordinate,estimate,lower,upper,half_width,sd\n";
  const Vector lo = band.lower();
  const Vector hi = band.upper();
  for (Eigen::Index j = 0; j < band.estimate.size(); ++j) {
    out << j << ',' << num(band.estimate[j]) << ',' << num(lo[j]) << ',' << num(hi[j]) << ','
        << num(band.half_width[j]) << ',' << (band.scale.size() ? num(band.scale[j]) : "") << '\n';
  }
}

Json density_json(const density::DensityBandResult& r, const std::string& kernel) {
  Json j;
  j["kernel"] = kernel;
  j["h"] = r.h;
  j["n"] = r.n;
  j["B"] = r.B;
  j["seed"] = r.seed;
  j["alpha"] = r.alpha;
  j["band_type"] = r.band == BandType::Constant ? "constant" : "studentized";
  j["a_known_one"] = r.a_known_one;
  j["a_hat"] = r.a_hat;
  j["zero_share"] = 1.0 - r.a_hat;
  j["cv_raw"] = r.cv_raw;
  j["cv_stud"] = finite_or_null(r.cv_stud);
  Json grid = Json::array();
  for (double y : r.grid) grid.push_back(y);
  j["grid"] = std::move(grid);
  j["b_hat"] = to_json(r.b_hat);
  j["f_hat"] = to_json(r.f_hat);
  j["sigma_tilde"] = to_json(r.sigma_tilde);
  j["lower"] = to_json(r.f_hat - r.half_width());
  j["upper"] = to_json(r.f_hat + r.half_width());
  return j;
}

void write_density_csv(std::ostream& out, const density::DensityBandResult& r) {
  out << "y,f_hat,lower,upper,sigma_tilde\n";
  const Vector& hw = r.half_width();
  for (std::size_t l = 0; l < r.grid.size(); ++l) {
    const auto i = static_cast<Eigen::Index>(l);
    out << num(r.grid[l]) << ',' << num(r.f_hat[i]) << ',' << num(r.f_hat[i] - hw[i]) << ','
        << num(r.f_hat[i] + hw[i]) << ',' << num(r.sigma_tilde[i]) << '\n';
  }
}

void write_density_svg(std::ostream& out, const density::DensityBandResult& r,
                       const std::string& title) {
  constexpr double width = 720, height = 420, left = 110, right = 20, top = 40, bottom = 50;
  const Vector& hw = r.half_width();
  const Vector lo = r.f_hat - hw;
  const Vector hi = r.f_hat + hw;
  const double x0 = r.grid.front(), x1 = r.grid.back();
  double y0 = std::min(0.0, lo.minCoeff()), y1 = hi.maxCoeff();
  if (!(y1 > y0)) y1 = y0 + 1.0;
  const auto px = [&](double x) { return left + (x - x0) / (x1 - x0) * (width - left - right); };
  const auto py = [&](double y) { return top + (y1 - y) / (y1 - y0) * (height - top - bottom); };
  const auto fmt = [](double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
  };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << width / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<polygon fill=\"#c8c8c8\" stroke=\"none\" points=\"";
  for (std::size_t l = 0; l < r.grid.size(); ++l)
    out << fmt(px(r.grid[l])) << ',' << fmt(py(hi[static_cast<Eigen::Index>(l)])) << ' ';
  for (std::size_t l = r.grid.size(); l-- > 0;)
    out << fmt(px(r.grid[l])) << ',' << fmt(py(lo[static_cast<Eigen::Index>(l)])) << ' ';
  out << "\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"black\" stroke-width=\"1.5\" points=\"";
  for (std::size_t l = 0; l < r.grid.size(); ++l)
    out << fmt(px(r.grid[l])) << ',' << fmt(py(r.f_hat[static_cast<Eigen::Index>(l)])) << ' ';
  out << "\"/>\n";
  // axes
  out << "<line x1=\"" << left << "\" y1=\"" << py(y0) << "\" x2=\"" << width - right
      << "\" y2=\"" << py(y0) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\""
      << py(y0) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double xv = x0 + (x1 - x0) * t / 4.0;
    out << "<text x=\"" << fmt(px(xv)) << "\" y=\"" << py(y0) + 18
        << "\" text-anchor=\"middle\" font-size=\"12\">" << fmt(xv) << "</text>\n";
    const double yv = y0 + (y1 - y0) * t / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << fmt(py(yv) + 4)
        << "\" text-anchor=\"end\" font-size=\"12\">" << fmt(yv) << "</text>\n";
  }
  out << "<text x=\"12\" y=\"" << height / 2 << "\" font-size=\"12\">P(Y=0)</text>\n";
  out << "<text x=\"12\" y=\"" << height / 2 + 16 << "\" font-size=\"12\">= "
      << fmt(1.0 - r.a_hat) << "</text>\n";
  out << "</svg>\n";
}

Json lasso_json(const lasso::FitReport& report) {
  const auto& fit = report.fit;
  Json j;
  j["lambda"] = fit.lambda;
  j["lambda0"] = report.penalty.lambda0;
  j["eta"] = report.penalty.eta;
  j["c"] = report.penalty.c;
  j["B"] = report.penalty.lambda_draws.size();
  j["p"] = fit.beta.size();
  j["converged"] = fit.converged;
  j["iterations"] = fit.iterations;
  j["kkt_violation"] = fit.kkt_violation;
  j["objective"] = fit.objective;
  Json beta = Json::array();
  for (auto idx : fit.active_set)
    beta.push_back({{"index", idx}, {"value", fit.beta[static_cast<Eigen::Index>(idx)]}});
  j["beta"] = std::move(beta);
  if (report.prediction_norm) j["prediction_norm"] = *report.prediction_norm;
  return j;
}

void write_lasso_csv(std::ostream& out, const lasso::FitReport& report) {
  out << "index,beta\n";
  for (Eigen::Index j = 0; j < report.fit.beta.size(); ++j)
    out << j << ',' << num(report.fit.beta[j]) << '\n';
}

Json coverage_json(const simgen::CoverageReport& report, bool include_timing) {
  const auto& d = report.design;
  const auto& o = report.options;
  Json j;
  j["design"] = std::string(simgen::to_string(d.family));
  j["base"] = std::string(simgen::to_string(d.base));
  j["p"] = d.family == simgen::Family::DyadicDensity ? std::size_t{1} : d.p;
  j["dims"] = d.dims;
  j["reps"] = o.reps;
  j["B"] = o.draws;
  j["seed"] = o.seed;
  if (d.family == simgen::Family::DyadicDensity) {
    j["bandwidth_rule"] = std::string(density::to_string(o.rule));
    j["grid"] = {o.grid_from, o.grid_to, o.grid_points};
    j["a_known_one"] = o.a_known_one;
  }
  Json cells = Json::array();
  for (const auto& c : report.cells)
    cells.push_back({{"level", c.level},
                     {"mode", std::string(to_string(c.mode))},
                     {"covered", c.covered},
                     {"coverage", c.coverage}});
  j["cells"] = std::move(cells);
  if (include_timing) j["wall_seconds"] = report.wall_seconds;
  return j;
}

void write_coverage_csv(std::ostream& out, const simgen::CoverageReport& report) {
  const auto& d = report.design;
  out << "design,base,p,dims,level,mode,coverage,reps,B\n";
  for (const auto& c : report.cells)
    out << simgen::to_string(d.family) << ',' << simgen::to_string(d.base) << ','
        << (d.family == simgen::Family::DyadicDensity ? 1 : d.p) << ',' << dims_text(d.dims) << ','
        << num(c.level) << ',' << to_string(c.mode) << ',' << num(c.coverage) << ','
        << report.options.reps << ',' << report.options.draws << '\n';
}

Json error_json(const Error& error) {
  return Json{{"error", std::string(to_string(error.code()))}, {"message", error.what()}};
}

}  // namespace exboot::report
