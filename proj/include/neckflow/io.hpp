#pragma once

// Tables and run documents shared by the experiment drivers and the CLI.
// CSV: '.' decimals, '\n' line ends, one header row, doubles as %.17g.
// JSON: one object {"config", "version", "tables", "fits"}.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "neckflow/asymptotics.hpp"

namespace neckflow {

using Json = nlohmann::ordered_json;

using Cell = std::variant<std::int64_t, double, std::string, bool>;

struct Table {
    std::string name;
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    void add_row(std::vector<Cell> row);
};

/// A fitted exponent with the value it is compared against.
struct NamedFit {
    std::string name;
    ScalingFit fit;
    double target = 0.0;
    double tolerance = 0.0;
    bool has_target = false;

    bool within_target() const noexcept;
};

struct Document {
    Json config = Json::object();
    std::vector<Table> tables;
    std::vector<NamedFit> fits;
    Json extra = Json::object(); ///< merged into the top-level object
};

/// git-describe style build identifier.
std::string version();

/// %.17g with a '.' decimal point regardless of locale.
std::string format_double(double x);

Json to_json(const Table& table);
Json to_json(const NamedFit& fit);
Json to_json(const Document& doc);

void write_csv(std::ostream& os, const Table& table);

/// Table with one row per fit.
Table fits_table(const std::vector<NamedFit>& fits);

} // namespace neckflow
