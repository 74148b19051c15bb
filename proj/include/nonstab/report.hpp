#pragma once

#include "nonstab/certify.hpp"
#include "nonstab/netmodel.hpp"
#include "nonstab/simulate.hpp"

#include <string>

namespace nonstab {

// JSON renderings are single-line objects with a fixed field order. Rationals
// are strings "num/den"; floats carry 17 significant digits, NaN as null.

std::string certificate_json(const CertificationResult& result);
std::string certificate_text(const CertificationResult& result);

std::string drift_json(const NetworkSpec& net, const DriftMatrix& d, std::size_t rank);
std::string drift_text(const NetworkSpec& net, const DriftMatrix& d, std::size_t rank);

std::string alpha_json(const NetworkSpec& net, const RationalVector& alpha);
std::string alpha_text(const NetworkSpec& net, const RationalVector& alpha);

std::string return_time_json(const ReturnTimeStats& stats);
std::string return_time_text(const ReturnTimeStats& stats);

std::string martingale_json(const MartingaleReport& report);
std::string martingale_text(const MartingaleReport& report);

std::string growth_json(const GrowthReport& report);
std::string growth_text(const GrowthReport& report);

std::string trajectory_json(const TrajectorySummary& summary);
std::string trajectory_text(const TrajectorySummary& summary);

/// "%.17g", or "null" for non-finite values.
std::string format_double(double x);

} // namespace nonstab
