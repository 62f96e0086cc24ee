#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <stdexcept>
#include <span>
#include <string>
#include <vector>

namespace mixedrank {

/// Raised for ingestion and table-level precondition failures.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ColumnKind { numeric, categorical };

/// One typed column. Numeric columns keep `values`; categorical columns keep
/// per-row `codes` into an ordered `levels` list.
class Column {
public:
    static Column numeric(std::string name, std::vector<double> values);
    /// Levels in first-appearance order unless `level_order` is given, in which
    /// case every value must appear in it.
    static Column categorical(std::string name, const std::vector<std::string>& values,
                              std::optional<std::vector<std::string>> level_order = std::nullopt);
    static Column from_codes(std::string name, std::vector<std::size_t> codes,
                             std::vector<std::string> levels);

    const std::string& name() const noexcept { return name_; }
    ColumnKind kind() const noexcept { return kind_; }
    bool is_numeric() const noexcept { return kind_ == ColumnKind::numeric; }
    std::size_t size() const noexcept {
        return is_numeric() ? values_.size() : codes_.size();
    }

    std::span<const double> values() const;
    std::span<const std::size_t> codes() const;
    const std::vector<std::string>& levels() const;

    /// Categorical view: categorical columns return themselves, numeric columns
    /// become categorical with one level per distinct value (first-appearance order).
    Column as_categorical() const;
    /// Cell rendered as text (numeric values in shortest round-trip form).
    std::string cell(std::size_t row) const;
    /// Keep `rows` in order; unused categorical levels are dropped, relative level
    /// order is preserved.
    Column subset(std::span<const std::size_t> rows) const;

    friend bool operator==(const Column&, const Column&) = default;

private:
    std::string name_;
    ColumnKind kind_ = ColumnKind::numeric;
    std::vector<double> values_;
    std::vector<std::size_t> codes_;
    std::vector<std::string> levels_;
};

class Dataset {
public:
    Dataset() = default;

    void add_column(Column column);
    bool has(const std::string& name) const;
    const Column& column(const std::string& name) const;
    const std::vector<Column>& columns() const noexcept { return columns_; }
    std::size_t n_rows() const noexcept { return n_rows_; }

    /// Rows dropped during ingestion (missing or non-finite values in mapped columns).
    std::size_t dropped_rows() const noexcept { return dropped_rows_; }
    void set_dropped_rows(std::size_t n) noexcept { dropped_rows_ = n; }

    Dataset subset(std::span<const std::size_t> rows) const;
    /// Rows whose categorical `column` equals one of `levels`.
    Dataset filter_levels(const std::string& column, const std::vector<std::string>& levels) const;

    /// RFC-4180 CSV with a header row, columns in insertion order.
    void write_csv(std::ostream& out) const;

    friend bool operator==(const Dataset&, const Dataset&) = default;

private:
    std::vector<Column> columns_;
    std::size_t n_rows_ = 0;
    std::size_t dropped_rows_ = 0;
};

/// Column roles recognised on ingestion. Metafeatures carry their own name.
enum class Role { loss, algorithm, benchmark, seed, budget, prior, metafeature, ignore };

struct RoleBinding {
    Role role = Role::ignore;
    std::string metafeature;  // column name in the Dataset when role == metafeature
};

/// Maps file column names to roles.
struct Schema {
    std::map<std::string, RoleBinding> by_file_column;

    /// Bind `role_spec` (one of loss, algorithm, benchmark, seed, budget, prior,
    /// ignore, metafeature:<name>) to the file column `file_column`.
    void bind(const std::string& role_spec, const std::string& file_column);
    /// Parse "role=column" assignments, one per line or flag; '#' starts a comment.
    static Schema from_assignments(const std::vector<std::string>& assignments);
    static Schema from_config(std::istream& in);
};

/// Canonical Dataset column name for a role.
std::string role_column_name(Role role);

/// Read a CSV table. When `schema` is empty, header names equal to a canonical
/// role name are bound to that role and everything else is ignored.
Dataset load_table(std::istream& source, const Schema& schema = {});

/// Split one CSV record stream into rows of fields (RFC-4180 quoting).
std::vector<std::vector<std::string>> parse_csv(std::istream& in);

}  // namespace mixedrank
