#pragma once

#include <string>
#include <vector>

#include "mixedrank/inference.hpp"

namespace mixedrank {

/// Geometry of a critical-difference diagram. Levels are ordered by mean,
/// lowest first; positions are SVG x coordinates.
struct CdDiagramSpec {
    std::vector<std::string> levels;
    std::vector<double> means;
    std::vector<double> positions;
    double axis_min = 0.0;
    double axis_max = 1.0;
    /// Maximal sets of mutually non-significant levels, as indices into `levels`.
    std::vector<std::vector<std::size_t>> cliques;
    double cd_min = 0.0;
    double cd_max = 0.0;
    double width = 0.0;
    double height = 0.0;
    std::string axis_label;

    /// SVG x coordinate of a value on the mean axis.
    double x_of(double value) const;
};

/// Build the geometry from pairwise comparisons. Throws InferenceError for fewer than two levels.
CdDiagramSpec cd_diagram_spec(const PairwiseComparisons& cmp);

std::string render_svg(const CdDiagramSpec& spec);

/// SVG for a Tukey comparison; `emm` must describe the same levels.
std::string render_cd_diagram(const PairwiseComparisons& cmp, const EmmTable& emm);
/// SVG for comparisons whose means are already the plotted values (e.g. average ranks).
std::string render_cd_diagram(const PairwiseComparisons& cmp);

}  // namespace mixedrank
