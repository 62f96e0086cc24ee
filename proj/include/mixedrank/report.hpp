#pragma once

#include <string>

#include "mixedrank/cd_diagram.hpp"
#include "mixedrank/inference.hpp"
#include "mixedrank/lmm.hpp"
#include "mixedrank/recipes.hpp"

namespace mixedrank {

enum class ReportFormat { text, json };

/// Version tag written into every JSON report.
inline constexpr const char* kReportVersion = "v1";

/// Two lines: "Simple model (l0) << Complex model (l1)" and
/// "Chi-Square: <statistic>, P-Value: <p>". The arrow reads ">>" when the simple model is preferred.
std::string glrt_text(const GlrtResult& g);

std::string emit_report(const ComparisonReport& report, ReportFormat format);
std::string emit_report(const RecipeVerdict& verdict, ReportFormat format);
/// Full dump of a single fit.
std::string emit_report(const FittedLmm& fit, ReportFormat format);

/// Parse a JSON report and emit it again in the canonical layout.
std::string reemit_json(const std::string& json_text);

}  // namespace mixedrank
