#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "exboot/bootstrap_core.hpp"
#include "exboot/density.hpp"
#include "exboot/error.hpp"
#include "exboot/lasso.hpp"
#include "exboot/simgen.hpp"

namespace exboot::report {

using Json = nlohmann::ordered_json;

/// Vectors as arrays; non-finite entries become null.
Json to_json(const Vector& v);

Json bootstrap_json(const BootstrapResult& result, const BandResult& band);
/// coordinate, estimate, lower, upper, half_width, sd
void write_band_csv(std::ostream& out, const BandResult& band);

Json density_json(const density::DensityBandResult& result, const std::string& kernel);
/// y, f_hat, lower, upper, sigma_tilde for the result's band type.
void write_density_csv(std::ostream& out, const density::DensityBandResult& result);
/// Estimate curve over a shaded band, with the zero-mass share 1 - a_hat
/// printed at the left margin.
void write_density_svg(std::ostream& out, const density::DensityBandResult& result,
                       const std::string& title);

/// beta in sparse form: [{"index": j, "value": b_j}, ...] over the active set.
Json lasso_json(const lasso::FitReport& report);
/// index, beta (all p coefficients)
void write_lasso_csv(std::ostream& out, const lasso::FitReport& report);

/// Wall time is left out unless asked for, so reports stay byte-stable.
Json coverage_json(const simgen::CoverageReport& report, bool include_timing = false);
/// design, base, p, dims, level, mode, coverage, reps, B
void write_coverage_csv(std::ostream& out, const simgen::CoverageReport& report);

Json error_json(const Error& error);

/// 17 significant digits, the CSV number format.
std::string num(double value);

}  // namespace exboot::report
