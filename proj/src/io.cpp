#include "neckflow/io.hpp"

#include <charconv>
#include <cmath>
#include <ostream>

#include "neckflow/error.hpp"

#ifndef NECKFLOW_VERSION
#define NECKFLOW_VERSION "v0.0.0-unknown"
#endif

namespace neckflow {

void Table::add_row(std::vector<Cell> row)
{
    if (row.size() != columns.size())
        throw DomainError("row width does not match the columns of table " + name);
    rows.push_back(std::move(row));
}

bool NamedFit::within_target() const noexcept
{
    return !has_target || std::fabs(fit.exponent - target) <= tolerance;
}

std::string version() { return NECKFLOW_VERSION; }

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
    return std::string(buf, res.ptr);
}

namespace {

Json cell_json(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> Json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>) {
                if (!std::isfinite(v))
                    return nullptr;
            }
            return v;
        },
        c);
}

std::string cell_csv(const Cell& c)
{
    return std::visit(
        [](const auto& v) -> std::string {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, double>)
                return format_double(v);
            else if constexpr (std::is_same_v<T, bool>)
                return v ? "1" : "0";
            else if constexpr (std::is_same_v<T, std::string>)
                return v;
            else
                return std::to_string(v);
        },
        c);
}

} // namespace

Json to_json(const Table& table)
{
    Json rows = Json::array();
    for (const auto& row : table.rows) {
        Json r = Json::object();
        for (std::size_t i = 0; i < row.size(); ++i)
            r[table.columns[i]] = cell_json(row[i]);
        rows.push_back(std::move(r));
    }
    return Json{{"name", table.name}, {"columns", table.columns}, {"rows", std::move(rows)}};
}

Json to_json(const NamedFit& f)
{
    Json j{{"name", f.name},
           {"exponent", f.fit.exponent},
           {"stderr", f.fit.stderr_exponent},
           {"log_constant", f.fit.log_constant},
           {"r_squared", f.fit.r_squared},
           {"residual_max", f.fit.residual_max},
           {"index_min", f.fit.index_min},
           {"index_max", f.fit.index_max},
           {"points", f.fit.count}};
    if (f.has_target) {
        j["target"] = f.target;
        j["tolerance"] = f.tolerance;
        j["pass"] = f.within_target();
    }
    return j;
}

Json to_json(const Document& doc)
{
    Json j = Json::object();
    j["config"] = doc.config;
    j["version"] = version();
    Json tables = Json::array();
    for (const Table& t : doc.tables)
        tables.push_back(to_json(t));
    j["tables"] = std::move(tables);
    Json fits = Json::array();
    for (const NamedFit& f : doc.fits)
        fits.push_back(to_json(f));
    j["fits"] = std::move(fits);
    for (auto it = doc.extra.begin(); it != doc.extra.end(); ++it)
        j[it.key()] = it.value();
    return j;
}

void write_csv(std::ostream& os, const Table& table)
{
    for (std::size_t i = 0; i < table.columns.size(); ++i)
        os << (i ? "," : "") << table.columns[i];
    os << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i)
            os << (i ? "," : "") << cell_csv(row[i]);
        os << '\n';
    }
}

Table fits_table(const std::vector<NamedFit>& fits)
{
    Table t{"fits",
            {"name", "exponent", "stderr", "log_constant", "r_squared", "residual_max", "index_min", "index_max",
             "target", "tolerance", "pass"},
            {}};
    for (const NamedFit& f : fits) {
        const double nan = std::nan("");
        t.add_row({f.name, f.fit.exponent, f.fit.stderr_exponent, f.fit.log_constant, f.fit.r_squared,
                   f.fit.residual_max, f.fit.index_min, f.fit.index_max, f.has_target ? f.target : nan,
                   f.has_target ? f.tolerance : nan, f.within_target()});
    }
    return t;
}

} // namespace neckflow
