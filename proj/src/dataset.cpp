#include "mixedrank/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_map>

#include "mixedrank/numfmt.hpp"

namespace mixedrank {

std::string shortest_repr(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    (void)ec;
    return std::string(buf, end);
}

std::string fixed_repr(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    std::string s(buf);
    if (s.front() == '-' && s.find_first_not_of("-0.") == std::string::npos) s.erase(0, 1);
    return s;
}

// ---------------------------------------------------------------------------
// Column
// ---------------------------------------------------------------------------

Column Column::numeric(std::string name, std::vector<double> values) {
    Column c;
    c.name_ = std::move(name);
    c.kind_ = ColumnKind::numeric;
    c.values_ = std::move(values);
    return c;
}

Column Column::categorical(std::string name, const std::vector<std::string>& values,
                           std::optional<std::vector<std::string>> level_order) {
    Column c;
    c.name_ = std::move(name);
    c.kind_ = ColumnKind::categorical;
    std::unordered_map<std::string, std::size_t> index;
    if (level_order) {
        c.levels_ = *level_order;
        for (std::size_t i = 0; i < c.levels_.size(); ++i) {
            if (!index.emplace(c.levels_[i], i).second) {
                throw DataError("duplicate level '" + c.levels_[i] + "' in level order of column '" +
                                c.name_ + "'");
            }
        }
    }
    c.codes_.reserve(values.size());
    for (const auto& v : values) {
        auto it = index.find(v);
        if (it == index.end()) {
            if (level_order) {
                throw DataError("value '" + v + "' of column '" + c.name_ +
                                "' is not in the supplied level order");
            }
            it = index.emplace(v, c.levels_.size()).first;
            c.levels_.push_back(v);
        }
        c.codes_.push_back(it->second);
    }
    return c;
}

Column Column::from_codes(std::string name, std::vector<std::size_t> codes,
                          std::vector<std::string> levels) {
    for (auto code : codes) {
        if (code >= levels.size()) throw DataError("level code out of range in column '" + name + "'");
    }
    Column c;
    c.name_ = std::move(name);
    c.kind_ = ColumnKind::categorical;
    c.codes_ = std::move(codes);
    c.levels_ = std::move(levels);
    return c;
}

std::span<const double> Column::values() const {
    if (!is_numeric()) throw DataError("column '" + name_ + "' is categorical, not numeric");
    return values_;
}

std::span<const std::size_t> Column::codes() const {
    if (is_numeric()) throw DataError("column '" + name_ + "' is numeric, not categorical");
    return codes_;
}

const std::vector<std::string>& Column::levels() const {
    if (is_numeric()) throw DataError("column '" + name_ + "' is numeric, not categorical");
    return levels_;
}

Column Column::as_categorical() const {
    if (!is_numeric()) return *this;
    std::vector<std::string> text;
    text.reserve(values_.size());
    for (double v : values_) text.push_back(shortest_repr(v));
    return categorical(name_, text);
}

std::string Column::cell(std::size_t row) const {
    return is_numeric() ? shortest_repr(values_.at(row)) : levels_.at(codes_.at(row));
}

Column Column::subset(std::span<const std::size_t> rows) const {
    if (is_numeric()) {
        std::vector<double> v;
        v.reserve(rows.size());
        for (auto r : rows) v.push_back(values_.at(r));
        return numeric(name_, std::move(v));
    }
    std::vector<bool> used(levels_.size(), false);
    for (auto r : rows) used[codes_.at(r)] = true;
    std::vector<std::size_t> remap(levels_.size(), 0);
    std::vector<std::string> kept;
    for (std::size_t i = 0; i < levels_.size(); ++i) {
        if (used[i]) {
            remap[i] = kept.size();
            kept.push_back(levels_[i]);
        }
    }
    std::vector<std::size_t> codes;
    codes.reserve(rows.size());
    for (auto r : rows) codes.push_back(remap[codes_[r]]);
    return from_codes(name_, std::move(codes), std::move(kept));
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

void Dataset::add_column(Column column) {
    if (has(column.name())) throw DataError("duplicate column '" + column.name() + "'");
    if (!columns_.empty() && column.size() != n_rows_) {
        throw DataError("column '" + column.name() + "' has " + std::to_string(column.size()) +
                        " rows, expected " + std::to_string(n_rows_));
    }
    n_rows_ = column.size();
    columns_.push_back(std::move(column));
}

bool Dataset::has(const std::string& name) const {
    return std::any_of(columns_.begin(), columns_.end(),
                       [&](const Column& c) { return c.name() == name; });
}

const Column& Dataset::column(const std::string& name) const {
    for (const auto& c : columns_)
        if (c.name() == name) return c;
    throw DataError("unknown column '" + name + "'");
}

Dataset Dataset::subset(std::span<const std::size_t> rows) const {
    Dataset out;
    for (const auto& c : columns_) out.add_column(c.subset(rows));
    out.n_rows_ = rows.size();
    out.dropped_rows_ = dropped_rows_;
    return out;
}

Dataset Dataset::filter_levels(const std::string& name, const std::vector<std::string>& levels) const {
    const Column& c = column(name).as_categorical();
    std::vector<bool> keep(c.levels().size(), false);
    for (std::size_t i = 0; i < c.levels().size(); ++i) {
        keep[i] = std::find(levels.begin(), levels.end(), c.levels()[i]) != levels.end();
    }
    std::vector<std::size_t> rows;
    auto codes = c.codes();
    for (std::size_t r = 0; r < codes.size(); ++r)
        if (keep[codes[r]]) rows.push_back(r);
    return subset(rows);
}

namespace {

std::string csv_quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

}  // namespace

void Dataset::write_csv(std::ostream& out) const {
    for (std::size_t j = 0; j < columns_.size(); ++j) {
        if (j) out << ',';
        out << csv_quote(columns_[j].name());
    }
    out << '\n';
    for (std::size_t r = 0; r < n_rows_; ++r) {
        for (std::size_t j = 0; j < columns_.size(); ++j) {
            if (j) out << ',';
            out << csv_quote(columns_[j].cell(r));
        }
        out << '\n';
    }
}

// ---------------------------------------------------------------------------
// CSV + schema
// ---------------------------------------------------------------------------

std::vector<std::vector<std::string>> parse_csv(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool field_started = false;
    char c;
    auto end_field = [&] {
        row.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        // A lone empty field is a blank line.
        if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
        row.clear();
    };
    while (in.get(c)) {
        if (in_quotes) {
            if (c == '"') {
                if (in.peek() == '"') {
                    in.get(c);
                    field += '"';
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
            continue;
        }
        switch (c) {
            case '"':
                if (field_started || !field.empty()) {
                    throw DataError("malformed CSV: quote inside an unquoted field");
                }
                in_quotes = true;
                field_started = true;
                break;
            case ',': end_field(); break;
            case '\r':
                if (in.peek() == '\n') in.get(c);
                end_row();
                break;
            case '\n': end_row(); break;
            default:
                field += c;
                field_started = true;
        }
    }
    if (in_quotes) throw DataError("malformed CSV: unterminated quoted field");
    if (field_started || !field.empty() || !row.empty()) end_row();
    // Strip a UTF-8 byte-order mark from the first header cell.
    if (!rows.empty() && !rows[0].empty() && rows[0][0].rfind("\xEF\xBB\xBF", 0) == 0) {
        rows[0][0].erase(0, 3);
    }
    return rows;
}

std::string role_column_name(Role role) {
    switch (role) {
        case Role::loss: return "loss";
        case Role::algorithm: return "algorithm";
        case Role::benchmark: return "benchmark";
        case Role::seed: return "seed";
        case Role::budget: return "budget";
        case Role::prior: return "prior";
        case Role::metafeature: return "metafeature";
        case Role::ignore: return "ignore";
    }
    return "ignore";
}

namespace {

std::string trim(std::string s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

RoleBinding parse_role(const std::string& spec) {
    static const std::pair<const char*, Role> kRoles[] = {
        {"loss", Role::loss},     {"algorithm", Role::algorithm}, {"benchmark", Role::benchmark},
        {"seed", Role::seed},     {"budget", Role::budget},       {"prior", Role::prior},
        {"ignore", Role::ignore},
    };
    for (const auto& [name, role] : kRoles)
        if (spec == name) return {role, {}};
    const std::string prefix = "metafeature:";
    if (spec.rfind(prefix, 0) == 0 && spec.size() > prefix.size()) {
        return {Role::metafeature, spec.substr(prefix.size())};
    }
    throw DataError("unknown column role '" + spec + "'");
}

bool is_missing(const std::string& s) {
    return s.empty() || s == "NA" || s == "NaN" || s == "nan" || s == "null";
}

std::optional<double> parse_number(const std::string& s) {
    const std::string t = trim(s);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    const char* first = t.data();
    if (*first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

}  // namespace

void Schema::bind(const std::string& role_spec, const std::string& file_column) {
    by_file_column[file_column] = parse_role(trim(role_spec));
}

Schema Schema::from_assignments(const std::vector<std::string>& assignments) {
    Schema s;
    for (const auto& raw : assignments) {
        std::string line = raw.substr(0, raw.find('#'));
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw DataError("schema entry '" + line + "' must look like role=column");
        }
        s.bind(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return s;
}

Schema Schema::from_config(std::istream& in) {
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) lines.push_back(line);
    return from_assignments(lines);
}

Dataset load_table(std::istream& source, const Schema& schema) {
    auto rows = parse_csv(source);
    if (rows.empty()) throw DataError("empty file: no header row");
    const auto& header = rows.front();

    std::vector<RoleBinding> bindings(header.size());
    if (schema.by_file_column.empty()) {
        for (std::size_t j = 0; j < header.size(); ++j) {
            try {
                auto b = parse_role(trim(header[j]));
                if (b.role != Role::metafeature) bindings[j] = b;
            } catch (const DataError&) {
                // not a canonical role name; ignored
            }
        }
    } else {
        for (const auto& [file_col, binding] : schema.by_file_column) {
            auto it = std::find_if(header.begin(), header.end(),
                                   [&](const std::string& h) { return trim(h) == file_col; });
            if (it == header.end()) {
                throw DataError("schema column '" + file_col + "' not found in CSV header");
            }
            bindings[static_cast<std::size_t>(it - header.begin())] = binding;
        }
    }

    std::vector<std::string> names(header.size());
    std::vector<std::size_t> used;
    std::map<std::string, std::size_t> seen;
    for (std::size_t j = 0; j < header.size(); ++j) {
        const auto& b = bindings[j];
        if (b.role == Role::ignore) continue;
        names[j] = b.role == Role::metafeature ? b.metafeature : role_column_name(b.role);
        if (!seen.emplace(names[j], j).second) {
            throw DataError("role '" + names[j] + "' is bound to more than one column");
        }
        used.push_back(j);
    }
    for (Role mandatory : {Role::loss, Role::algorithm}) {
        if (!seen.count(role_column_name(mandatory))) {
            throw DataError("mandatory role '" + role_column_name(mandatory) + "' unmapped");
        }
    }
    if (rows.size() == 1) throw DataError("empty file: header row only");

    auto numeric_role = [&](std::size_t j) {
        return bindings[j].role == Role::loss || bindings[j].role == Role::budget;
    };

    std::vector<std::vector<double>> numbers(header.size());
    std::vector<std::vector<std::string>> labels(header.size());
    std::size_t dropped = 0;
    std::size_t loss_parsed = 0;
    const std::size_t loss_col = seen.at("loss");
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.size() != header.size()) {
            throw DataError("CSV record " + std::to_string(r + 1) + " has " +
                            std::to_string(row.size()) + " fields, header has " +
                            std::to_string(header.size()));
        }
        bool ok = true;
        std::vector<double> parsed(header.size(), 0.0);
        for (auto j : used) {
            if (numeric_role(j)) {
                auto v = parse_number(row[j]);
                if (!v) {
                    ok = false;
                } else {
                    parsed[j] = *v;
                    if (j == loss_col) ++loss_parsed;
                }
            } else if (is_missing(trim(row[j]))) {
                ok = false;
            }
        }
        if (!ok) {
            ++dropped;
            continue;
        }
        for (auto j : used) {
            if (numeric_role(j))
                numbers[j].push_back(parsed[j]);
            else
                labels[j].push_back(trim(row[j]));
        }
    }
    if (loss_parsed == 0) throw DataError("loss column is non-numeric throughout");
    if (dropped == rows.size() - 1) throw DataError("no complete rows after dropping missing values");

    Dataset ds;
    for (auto j : used) {
        if (numeric_role(j))
            ds.add_column(Column::numeric(names[j], std::move(numbers[j])));
        else
            ds.add_column(Column::categorical(names[j], labels[j]));
    }
    ds.set_dropped_rows(dropped);
    return ds;
}

}  // namespace mixedrank
