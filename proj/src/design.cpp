#include "mixedrank/design.hpp"

#include <algorithm>
#include <cstring>
#include <numeric>

namespace mixedrank {

std::size_t RandomBlock::n_theta() const noexcept {
    const std::size_t t = inner_size();
    return covariance == CovarianceStructure::diagonal ? t : t * (t + 1) / 2;
}

std::size_t DesignMatrices::n_theta() const noexcept {
    std::size_t n = 0;
    for (const auto& b : random_blocks) n += b.n_theta();
    return n;
}

std::uint64_t checksum(std::span<const double> y) {
    std::uint64_t h = 1469598103934665603ULL;
    for (double v : y) {
        std::uint64_t bits;
        std::memcpy(&bits, &v, sizeof bits);
        for (int i = 0; i < 8; ++i) {
            h ^= (bits >> (8 * i)) & 0xffU;
            h *= 1099511628211ULL;
        }
    }
    return h;
}

std::size_t FixedEncoder::variable_index(const std::string& name) const {
    for (std::size_t i = 0; i < variables.size(); ++i)
        if (variables[i].name == name) return i;
    throw DesignError("variable '" + name + "' is not a fixed effect of the model");
}

void FixedEncoder::encode(std::span<const double> values, Eigen::Ref<Eigen::RowVectorXd, 0, Eigen::InnerStride<>> out) const {
    std::size_t col = 0;
    if (intercept) out(col++) = 1.0;
    for (const auto& term : terms) {
        // Cartesian product of per-factor columns, first factor varying fastest.
        std::vector<double> cols{1.0};
        for (const auto& f : term.factors) {
            const auto& var = variables[f.variable];
            std::vector<double> own;
            if (var.numeric) {
                own.push_back(values[f.variable]);
            } else {
                const auto level = static_cast<std::size_t>(values[f.variable]);
                for (std::size_t l = f.full_dummy ? 0 : 1; l < var.levels.size(); ++l)
                    own.push_back(level == l ? 1.0 : 0.0);
            }
            std::vector<double> next;
            next.reserve(cols.size() * own.size());
            for (double o : own)
                for (double c : cols) next.push_back(c * o);
            cols = std::move(next);
        }
        for (double c : cols) out(col++) = c;
    }
}

std::vector<std::string> FixedEncoder::column_labels() const {
    std::vector<std::string> labels;
    if (intercept) labels.emplace_back("(Intercept)");
    for (const auto& term : terms) {
        std::vector<std::string> cols{""};
        for (const auto& f : term.factors) {
            const auto& var = variables[f.variable];
            std::vector<std::string> own;
            if (var.numeric) {
                own.push_back(var.name);
            } else {
                for (std::size_t l = f.full_dummy ? 0 : 1; l < var.levels.size(); ++l)
                    own.push_back(var.name + "[" + var.levels[l] + "]");
            }
            std::vector<std::string> next;
            for (const auto& o : own)
                for (const auto& c : cols) next.push_back(c.empty() ? o : c + ":" + o);
            cols = std::move(next);
        }
        labels.insert(labels.end(), cols.begin(), cols.end());
    }
    return labels;
}

namespace {

bool model_has_term(const FormulaAst& ast, const std::vector<std::string>& vars) {
    if (vars.empty()) return ast.has_intercept;
    FixedTerm probe{vars};
    return std::any_of(ast.fixed_terms.begin(), ast.fixed_terms.end(),
                       [&](const FixedTerm& t) { return t.same_term(probe); });
}

const Column& require_column(const Dataset& data, const std::string& name) {
    if (!data.has(name)) throw DesignError("unknown variable '" + name + "'");
    return data.column(name);
}

}  // namespace

DesignMatrices build_design(const FormulaAst& ast, const Dataset& data) {
    DesignMatrices dm;
    dm.formula = ast;
    const std::size_t n = data.n_rows();

    const Column& response = require_column(data, ast.response);
    if (!response.is_numeric()) {
        throw DesignError("response '" + ast.response + "' must be numeric");
    }
    for (const auto& v : ast.variables()) {
        require_column(data, v);
        if (v == ast.response) throw DesignError("response '" + v + "' also appears as a predictor");
    }
    dm.y = Eigen::Map<const Eigen::VectorXd>(response.values().data(), static_cast<Eigen::Index>(n));
    dm.response_checksum = checksum(response.values());

    // Fixed effects.
    FixedEncoder& enc = dm.encoder;
    enc.intercept = ast.has_intercept;
    std::vector<const Column*> fixed_cols;
    auto fixed_var = [&](const std::string& name) {
        for (std::size_t i = 0; i < enc.variables.size(); ++i)
            if (enc.variables[i].name == name) return i;
        const Column& c = data.column(name);
        FixedVariable v;
        v.name = name;
        v.numeric = c.is_numeric();
        if (v.numeric) {
            auto vals = c.values();
            v.mean = n ? std::accumulate(vals.begin(), vals.end(), 0.0) / static_cast<double>(n) : 0.0;
        } else {
            v.levels = c.levels();
            v.level_counts.assign(v.levels.size(), 0);
            for (auto code : c.codes()) ++v.level_counts[code];
            if (v.levels.size() < 2) {
                throw DesignError("categorical variable '" + name +
                                  "' has a single level and cannot be a fixed effect");
            }
        }
        enc.variables.push_back(std::move(v));
        fixed_cols.push_back(&c);
        return enc.variables.size() - 1;
    };

    std::size_t col = ast.has_intercept ? 1 : 0;
    if (ast.has_intercept) dm.term_map.push_back({"(Intercept)", 0, 1});
    for (const auto& term : ast.fixed_terms) {
        EncodedTerm et;
        et.label = term.label();
        et.first_column = col;
        std::size_t width = 1;
        for (const auto& name : term.variables) {
            FactorCoding f;
            f.variable = fixed_var(name);
            const auto& var = enc.variables[f.variable];
            if (!var.numeric) {
                std::vector<std::string> rest;
                for (const auto& o : term.variables)
                    if (o != name) rest.push_back(o);
                f.full_dummy = !model_has_term(ast, rest);
                width *= f.full_dummy ? var.levels.size() : var.levels.size() - 1;
                if (!f.full_dummy && term.variables.size() == 1) dm.contrasts[name] = var.levels.front();
            }
            et.factors.push_back(f);
        }
        et.width = width;
        col += width;
        dm.term_map.push_back({et.label, et.first_column, et.width});
        enc.terms.push_back(std::move(et));
    }
    enc.n_columns = col;
    if (col == 0) throw DesignError("the fixed-effects design has no columns");

    dm.X.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(col));
    std::vector<double> values(enc.variables.size());
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t v = 0; v < enc.variables.size(); ++v) {
            values[v] = enc.variables[v].numeric ? fixed_cols[v]->values()[r]
                                                 : static_cast<double>(fixed_cols[v]->codes()[r]);
        }
        enc.encode(values, dm.X.row(static_cast<Eigen::Index>(r)));
    }
    dm.x_labels = enc.column_labels();

    if (n > 0) {
        Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(dm.X);
        if (static_cast<std::size_t>(qr.rank()) < col) {
            throw DesignError("rank-deficient fixed-effects design: " + std::to_string(col) +
                              " columns but rank " + std::to_string(qr.rank()));
        }
    }

    // Random effects.
    std::size_t zcol = 0;
    struct InnerSource {
        const Column* column = nullptr;  // null for the intercept
        std::size_t level = 0;           // categorical indicator level
    };
    std::vector<std::vector<InnerSource>> inner_sources;
    std::vector<Column> groups;
    for (const auto& rt : ast.random_terms) {
        RandomBlock b;
        b.label = rt.label();
        b.group = rt.group;
        b.covariance = rt.covariance;
        b.first_column = zcol;
        Column g = data.column(rt.group).as_categorical();
        b.group_levels = g.levels();
        std::vector<InnerSource> sources;
        bool spanned = rt.inner_intercept;
        if (rt.inner_intercept) {
            b.inner_labels.emplace_back("(Intercept)");
            sources.push_back({});
        }
        for (const auto& name : rt.inner_variables) {
            const Column& c = data.column(name);
            if (c.is_numeric()) {
                b.inner_labels.push_back(name);
                sources.push_back({&c, 0});
                continue;
            }
            for (std::size_t l = spanned ? 1 : 0; l < c.levels().size(); ++l) {
                b.inner_labels.push_back(name + "[" + c.levels()[l] + "]");
                sources.push_back({&c, l});
            }
            spanned = true;
        }
        if (b.inner_labels.empty()) {
            throw DesignError("random term '" + b.label + "' has no inner columns");
        }
        zcol += b.width();
        dm.random_blocks.push_back(std::move(b));
        inner_sources.push_back(std::move(sources));
        groups.push_back(std::move(g));
    }

    dm.Z = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(zcol));
    for (std::size_t k = 0; k < dm.random_blocks.size(); ++k) {
        const auto& b = dm.random_blocks[k];
        const auto& sources = inner_sources[k];
        const auto codes = groups[k].codes();
        const std::size_t t = b.inner_size();
        for (std::size_t r = 0; r < n; ++r) {
            const std::size_t base = b.first_column + codes[r] * t;
            for (std::size_t i = 0; i < t; ++i) {
                const auto& s = sources[i];
                double v = 1.0;
                if (s.column) {
                    v = s.column->is_numeric() ? s.column->values()[r]
                                               : (s.column->codes()[r] == s.level ? 1.0 : 0.0);
                }
                dm.Z(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(base + i)) = v;
            }
        }
        for (std::size_t j = 0; j < b.n_groups(); ++j)
            for (std::size_t i = 0; i < t; ++i)
                dm.z_labels.push_back({k, b.group_levels[j], b.inner_labels[i]});
    }
    return dm;
}

}  // namespace mixedrank
