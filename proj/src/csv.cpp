#include "qfc/csv.hpp"

#include "qfc/error.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <optional>
#include <sstream>

namespace qfc::csv {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> cells;
    size_t pos = 0;
    while (true) {
        const size_t comma = line.find(',', pos);
        cells.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return cells;
}

[[noreturn]] void fail(std::string_view source, int line, const std::string& what) {
    std::ostringstream msg;
    msg << source << ":" << line << ": " << what;
    throw DataError(msg.str());
}

// Reads lines, dropping blank ones; returns false at EOF.
bool next_line(std::istream& in, std::string& line, int& number) {
    while (std::getline(in, line)) {
        ++number;
        if (!trim(line).empty()) return true;
    }
    return false;
}

struct Binding {
    size_t column;  // schema index
    double factor;
};

std::vector<Binding> bind_header(std::string_view header, const Schema& schema,
                                 std::string_view source, int line) {
    const auto cells = split(header);
    if (cells.size() != schema.size()) {
        std::ostringstream msg;
        msg << "header has " << cells.size() << " columns, expected " << schema.size() << " (";
        for (size_t i = 0; i < schema.size(); ++i) msg << (i ? ", " : "") << schema[i].name;
        msg << ")";
        fail(source, line, msg.str());
    }
    std::vector<Binding> out;
    std::vector<bool> seen(schema.size(), false);
    for (auto cell : cells) {
        // Longest schema name that prefixes the cell wins.
        std::optional<size_t> match;
        for (size_t i = 0; i < schema.size(); ++i) {
            const auto& name = schema[i].name;
            const bool exact = cell == name;
            const bool tagged = cell.size() > name.size() + 1 && cell.starts_with(name) &&
                                cell[name.size()] == '_';
            if ((exact || tagged) && (!match || name.size() > schema[*match].name.size())) {
                match = i;
            }
        }
        if (!match) fail(source, line, "unexpected column '" + std::string(cell) + "'");
        if (seen[*match]) fail(source, line, "duplicate column '" + std::string(cell) + "'");
        seen[*match] = true;
        const auto& col = schema[*match];
        double factor = 1.0;
        if (cell.size() > col.name.size()) {
            const auto tag = cell.substr(col.name.size() + 1);
            try {
                factor = units::unit_factor(col.quantity, tag);
            } catch (const ConfigError&) {
                fail(source, line,
                     "unknown unit tag '" + std::string(tag) + "' in column '" + col.name + "'");
            }
        }
        out.push_back({*match, factor});
    }
    return out;
}

double parse_cell(std::string_view cell, std::string_view source, int line,
                  const std::string& column) {
    double v = 0.0;
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (!cell.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (cell.empty() || ec != std::errc{} || ptr != last || !std::isfinite(v)) {
        fail(source, line, "column " + column + ": cannot parse '" + std::string(cell) + "'");
    }
    return v;
}

}  // namespace

size_t Table::index(std::string_view name) const {
    for (size_t i = 0; i < schema.size(); ++i) {
        if (schema[i].name == name) return i;
    }
    throw PreconditionError("no column named '" + std::string(name) + "'");
}

std::vector<double> Table::column(std::string_view name) const {
    const size_t i = index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r[i]);
    return out;
}

std::string header_cell(const Column& column) {
    const auto tag = units::si_unit(column.quantity);
    return tag.empty() ? column.name : column.name + "_" + std::string(tag);
}

std::string format_number(double value) {
    if (value == 0.0) return "0";  // drop the sign of -0
    char buf[32];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) throw NumericalFailure("number formatting failed");
    return std::string(buf, ptr);
}

void write(std::ostream& out, const Table& table) {
    for (size_t i = 0; i < table.schema.size(); ++i) {
        out << (i ? "," : "") << header_cell(table.schema[i]);
    }
    out << '\n';
    for (const auto& row : table.rows) {
        if (row.size() != table.schema.size()) {
            throw PreconditionError("row width does not match the schema");
        }
        for (size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << format_number(row[i]);
        out << '\n';
    }
}

void write_file(const std::filesystem::path& path, const Table& table) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open " + path.string() + " for writing");
    write(f, table);
    if (!f) throw Error("failed writing " + path.string());
}

Table read(std::istream& in, const Schema& schema, std::string_view source) {
    std::string line;
    int number = 0;
    if (!next_line(in, line, number)) fail(source, 1, "empty file, header row required");
    const auto bindings = bind_header(line, schema, source, number);

    Table table{schema, {}};
    while (next_line(in, line, number)) {
        const auto cells = split(line);
        if (cells.size() != schema.size()) {
            std::ostringstream msg;
            msg << "row has " << cells.size() << " cells, expected " << schema.size();
            fail(source, number, msg.str());
        }
        std::vector<double> row(schema.size());
        for (size_t j = 0; j < cells.size(); ++j) {
            const auto& b = bindings[j];
            row[b.column] = parse_cell(cells[j], source, number, schema[b.column].name) * b.factor;
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

Table read_file(const std::filesystem::path& path, const Schema& schema) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());
    return read(f, schema, path.string());
}

namespace {

constexpr std::string_view kPhaseTokens[4] = {"0", "pi", "pi/2", "3pi/2"};
constexpr std::string_view kBinTokens[3] = {"e", "l", "ll"};

}  // namespace

RawBins read_counts(std::istream& in, std::string_view source) {
    std::string line;
    int number = 0;
    if (!next_line(in, line, number)) fail(source, 1, "empty file, header row required");
    const Schema schema{{"phase_setting", units::Quantity::Angle},
                        {"bin", units::Quantity::Dimensionless},
                        {"counts", units::Quantity::Dimensionless}};
    const auto bindings = bind_header(line, schema, source, number);
    size_t col_of[3];
    double phase_factor = 1.0;
    for (size_t j = 0; j < 3; ++j) {
        col_of[bindings[j].column] = j;
        if (bindings[j].column == 0) phase_factor = bindings[j].factor;
    }

    RawBins bins{};
    bool present[4][3] = {};
    while (next_line(in, line, number)) {
        const auto cells = split(line);
        if (cells.size() != 3) fail(source, number, "row must have 3 cells");
        const auto phase_cell = cells[col_of[0]];
        std::optional<size_t> setting;
        for (size_t s = 0; s < 4; ++s) {
            if (phase_cell == kPhaseTokens[s]) setting = s;
        }
        if (!setting) {
            const double phi = parse_cell(phase_cell, source, number, "phase_setting") * phase_factor;
            for (size_t s = 0; s < 4; ++s) {
                if (std::abs(phi - kAnalyzerPhases[s]) < 1e-6) setting = s;
            }
            if (!setting) {
                fail(source, number,
                     "column phase_setting: '" + std::string(phase_cell) +
                         "' is not one of 0, pi, pi/2, 3pi/2");
            }
        }
        std::optional<size_t> bin;
        for (size_t j = 0; j < 3; ++j) {
            if (cells[col_of[1]] == kBinTokens[j]) bin = j;
        }
        if (!bin) {
            fail(source, number,
                 "column bin: '" + std::string(cells[col_of[1]]) + "' is not one of e, l, ll");
        }
        const auto count_cell = cells[col_of[2]];
        long long count = 0;
        auto [ptr, ec] =
            std::from_chars(count_cell.data(), count_cell.data() + count_cell.size(), count);
        if (count_cell.empty() || ec != std::errc{} || ptr != count_cell.data() + count_cell.size()) {
            fail(source, number, "column counts: '" + std::string(count_cell) + "' is not an integer");
        }
        if (count < 0) {
            fail(source, number, "column counts: negative count " + std::to_string(count));
        }
        if (present[*setting][*bin]) {
            fail(source, number,
                 "duplicate entry for phase_setting " + std::string(kPhaseTokens[*setting]) +
                     ", bin " + std::string(kBinTokens[*bin]));
        }
        present[*setting][*bin] = true;
        bins[*setting][*bin] = count;
    }
    for (size_t s = 0; s < 4; ++s) {
        for (size_t j = 0; j < 3; ++j) {
            if (!present[s][j]) {
                fail(source, number,
                     "missing entry for phase_setting " + std::string(kPhaseTokens[s]) + ", bin " +
                         std::string(kBinTokens[j]));
            }
        }
    }
    return bins;
}

RawBins read_counts_file(const std::filesystem::path& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw DataError("cannot open " + path.string());
    return read_counts(f, path.string());
}

void write_counts(std::ostream& out, const RawBins& bins) {
    out << "phase_setting,bin,counts\n";
    for (size_t s = 0; s < 4; ++s) {
        for (size_t j = 0; j < 3; ++j) {
            out << kPhaseTokens[s] << ',' << kBinTokens[j] << ',' << bins[s][j] << '\n';
        }
    }
}

}  // namespace qfc::csv
