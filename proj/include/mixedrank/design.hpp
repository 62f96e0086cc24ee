#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mixedrank/dataset.hpp"
#include "mixedrank/formula.hpp"

namespace mixedrank {

class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// How one variable enters one fixed term.
struct FactorCoding {
    std::size_t variable = 0;  // index into FixedEncoder::variables
    /// Categorical only: true for one indicator per level, false for treatment
    /// contrasts that drop the reference (first) level.
    bool full_dummy = false;
};

struct EncodedTerm {
    std::string label;
    std::vector<FactorCoding> factors;
    std::size_t first_column = 0;
    std::size_t width = 0;
};

/// Variable metadata needed to turn a row of raw values into a row of X.
struct FixedVariable {
    std::string name;
    bool numeric = false;
    std::vector<std::string> levels;  // categorical
    double mean = 0.0;                // numeric: data mean
    std::vector<std::size_t> level_counts;  // categorical: observations per level
};

/// Encodes fixed-effect rows. Values are passed per variable: the level index
/// for categorical variables, the value itself for numeric ones.
class FixedEncoder {
public:
    bool intercept = true;
    std::vector<FixedVariable> variables;
    std::vector<EncodedTerm> terms;
    std::size_t n_columns = 0;

    std::size_t variable_index(const std::string& name) const;
    void encode(std::span<const double> values, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) const;
    std::vector<std::string> column_labels() const;
};

/// Column block of X belonging to one formula term ("(Intercept)" for the intercept).
struct FixedColumnSpan {
    std::string term;
    std::size_t first_column = 0;
    std::size_t count = 0;
};

/// One random-effect term laid out in Z as group-major blocks: column
/// `first_column + j * inner_labels.size() + i` is inner column i of group level j.
struct RandomBlock {
    std::string label;
    std::string group;
    std::vector<std::string> group_levels;
    std::vector<std::string> inner_labels;
    CovarianceStructure covariance = CovarianceStructure::unstructured;
    std::size_t first_column = 0;

    std::size_t inner_size() const noexcept { return inner_labels.size(); }
    std::size_t n_groups() const noexcept { return group_levels.size(); }
    std::size_t width() const noexcept { return inner_size() * n_groups(); }
    /// Number of covariance parameters: t(t+1)/2 unstructured, t diagonal.
    std::size_t n_theta() const noexcept;
};

struct ZColumnLabel {
    std::size_t block = 0;
    std::string group_level;
    std::string inner;
};

struct DesignMatrices {
    FormulaAst formula;
    Eigen::VectorXd y;
    Eigen::MatrixXd X;
    std::vector<std::string> x_labels;
    Eigen::MatrixXd Z;
    std::vector<ZColumnLabel> z_labels;
    std::vector<FixedColumnSpan> term_map;
    std::vector<RandomBlock> random_blocks;
    /// Reference level per categorical fixed effect coded with treatment contrasts.
    std::map<std::string, std::string> contrasts;
    FixedEncoder encoder;
    std::uint64_t response_checksum = 0;

    std::size_t n_obs() const noexcept { return static_cast<std::size_t>(y.size()); }
    std::size_t n_fixed() const noexcept { return static_cast<std::size_t>(X.cols()); }
    std::size_t n_random() const noexcept { return static_cast<std::size_t>(Z.cols()); }
    std::size_t n_theta() const noexcept;
};

/// Treatment-coded X and indicator-block Z for `ast` on `data`.
DesignMatrices build_design(const FormulaAst& ast, const Dataset& data);

/// FNV-1a over the bit patterns of `y`.
std::uint64_t checksum(std::span<const double> y);

}  // namespace mixedrank
