#pragma once

#include "qfc/quantum.hpp"
#include "qfc/units.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

// Numeric CSV tables with unit-tagged headers. A header cell is either the
// bare column name (SI) or `name_<unit>` with a tag from the unit table,
// e.g. `pump_mW`. Values are converted to SI on read; writing always uses SI
// tags and shortest round-trip number formatting, so write -> read -> write
// is a fixpoint.
namespace qfc::csv {

struct Column {
    std::string name;
    units::Quantity quantity = units::Quantity::Dimensionless;
};

using Schema = std::vector<Column>;

struct Table {
    Schema schema;
    std::vector<std::vector<double>> rows;

    size_t index(std::string_view name) const;
    std::vector<double> column(std::string_view name) const;
};

std::string header_cell(const Column& column);
std::string format_number(double value);

void write(std::ostream& out, const Table& table);
void write_file(const std::filesystem::path& path, const Table& table);

// Columns may appear in any order; the result follows `schema`. Throws
// DataError naming the line and column on header mismatch, unknown unit
// tags and unparseable or non-finite cells.
Table read(std::istream& in, const Schema& schema, std::string_view source = "<csv>");
Table read_file(const std::filesystem::path& path, const Schema& schema);

// Analyzer counts: columns phase_setting, bin, counts. phase_setting is one
// of 0, pi, pi/2, 3pi/2 (or a number in the header's angle unit), bin is
// e, l or ll. All twelve combinations must be present exactly once.
RawBins read_counts(std::istream& in, std::string_view source = "<csv>");
RawBins read_counts_file(const std::filesystem::path& path);
void write_counts(std::ostream& out, const RawBins& bins);

}  // namespace qfc::csv
