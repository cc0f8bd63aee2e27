#include "qfc/csv.hpp"
#include "qfc/error.hpp"

#include <gtest/gtest.h>

#include <sstream>

using namespace qfc;
using units::Quantity;

namespace {

const csv::Schema kCurve{{"pump", Quantity::Power}, {"eta", Quantity::Dimensionless}};

csv::Table parse(const std::string& text, const csv::Schema& schema = kCurve) {
    std::istringstream in(text);
    return csv::read(in, schema, "test.csv");
}

std::string message_of(const std::string& text, const csv::Schema& schema = kCurve) {
    try {
        parse(text, schema);
    } catch (const DataError& e) {
        return e.what();
    }
    return "";
}

RawBins sample() { return {{{10, 0, 12}, {11, 40, 9}, {9, 20, 13}, {12, 21, 10}}}; }

std::string counts_text(const RawBins& b) {
    std::ostringstream out;
    csv::write_counts(out, b);
    return out.str();
}

}  // namespace

TEST(Csv, FormatNumberShortestRoundTrip) {
    EXPECT_EQ(csv::format_number(0.1), "0.1");
    EXPECT_EQ(csv::format_number(-0.0), "0");
    EXPECT_EQ(csv::format_number(1550e-9), "1.55e-06");
    const double x = 0.27832245663053384;
    EXPECT_EQ(std::stod(csv::format_number(x)), x);
}

TEST(Csv, UnitSuffixConvertedToSi) {
    auto t = parse("pump_mW,eta\n10,0.1\n20.5,0.2\n");
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(t.rows[0][0], 0.010);
    EXPECT_DOUBLE_EQ(t.rows[1][0], 0.0205);
    EXPECT_DOUBLE_EQ(t.rows[1][1], 0.2);
}

TEST(Csv, BareAndSiHeadersAndReordering) {
    auto a = parse("eta,pump_W\n0.1,0.01\n");
    EXPECT_DOUBLE_EQ(a.rows[0][0], 0.01);
    EXPECT_DOUBLE_EQ(a.rows[0][1], 0.1);
    auto b = parse("pump,eta\r\n0.01,0.1\r\n\r\n");
    EXPECT_EQ(b.rows, a.rows);
}

TEST(Csv, WriteReadWriteFixpoint) {
    csv::Table t{{{"wavelength", Quantity::Length}, {"efficiency", Quantity::Dimensionless}},
                 {{1.533e-6, 0.27832245663053384}, {1.5331e-6, 1e-300}, {1.5332e-6, 0.0}}};
    std::ostringstream first;
    csv::write(first, t);
    EXPECT_EQ(first.str().substr(0, first.str().find('\n')), "wavelength_m,efficiency");
    std::istringstream in(first.str());
    auto back = csv::read(in, t.schema);
    EXPECT_EQ(back.rows, t.rows);
    std::ostringstream second;
    csv::write(second, back);
    EXPECT_EQ(first.str(), second.str());
}

TEST(Csv, Errors) {
    EXPECT_NE(message_of("pump_furlongs,eta\n1,2\n").find("unknown unit tag 'furlongs'"),
              std::string::npos);
    EXPECT_NE(message_of("pump_mW,gain\n1,2\n").find("unexpected column 'gain'"),
              std::string::npos);
    EXPECT_NE(message_of("pump_mW\n1\n").find("header has 1 columns"), std::string::npos);
    const auto bad = message_of("pump_mW,eta\n1,0.1\n2,abc\n");
    EXPECT_NE(bad.find("test.csv:3"), std::string::npos) << bad;
    EXPECT_NE(bad.find("column eta"), std::string::npos) << bad;
    EXPECT_NE(message_of("pump_mW,eta\n1,nan\n").find("cannot parse"), std::string::npos);
    EXPECT_NE(message_of("pump_mW,eta\n1\n").find("row has 1 cells"), std::string::npos);
    EXPECT_NE(message_of("").find("header row required"), std::string::npos);
}

TEST(Counts, RoundTrip) {
    const auto b = sample();
    std::istringstream in(counts_text(b));
    EXPECT_EQ(csv::read_counts(in), b);
}

TEST(Counts, ProjectorMappingFromFile) {
    std::istringstream in(counts_text(sample()));
    const auto rec = projector_counts(csv::read_counts(in));
    EXPECT_EQ(rec.n0, 21);
    EXPECT_EQ(rec.n1, 21);
    EXPECT_EQ(rec.minus, 0);
    EXPECT_EQ(rec.plus, 40);
    EXPECT_EQ(rec.left, 20);
    EXPECT_EQ(rec.right, 21);
}

TEST(Counts, NumericPhasesInDegrees) {
    std::string text = "bin,phase_setting_deg,counts\n";
    const char* bins[] = {"e", "l", "ll"};
    const int deg[] = {0, 180, 90, 270};
    const auto b = sample();
    for (int s = 0; s < 4; ++s) {
        for (int j = 0; j < 3; ++j) {
            text += std::string(bins[j]) + "," + std::to_string(deg[s]) + "," +
                    std::to_string(b[s][j]) + "\n";
        }
    }
    std::istringstream in(text);
    EXPECT_EQ(csv::read_counts(in), b);
}

TEST(Counts, NegativeCountNamesRowAndColumn) {
    auto text = counts_text(sample());
    text.replace(text.find("pi/2,l,20"), 9, "pi/2,l,-20");
    std::istringstream in(text);
    try {
        csv::read_counts(in, "counts.csv");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        const std::string msg = e.what();
        EXPECT_NE(msg.find("counts.csv:9"), std::string::npos) << msg;
        EXPECT_NE(msg.find("column counts"), std::string::npos) << msg;
        EXPECT_NE(msg.find("negative"), std::string::npos) << msg;
    }
}

TEST(Counts, MissingDuplicateAndBadTokens) {
    auto text = counts_text(sample());
    auto drop = text;
    drop.erase(drop.find("3pi/2,ll,10\n"));
    std::istringstream a(drop);
    EXPECT_THROW(csv::read_counts(a), DataError);
    std::istringstream b(text + "pi,e,1\n");
    EXPECT_THROW(csv::read_counts(b), DataError);
    std::istringstream c("phase_setting,bin,counts\npi/3,e,1\n");
    EXPECT_THROW(csv::read_counts(c), DataError);
    std::istringstream d("phase_setting,bin,counts\npi,x,1\n");
    EXPECT_THROW(csv::read_counts(d), DataError);
    std::istringstream e("phase_setting,bin,counts\npi,e,1.5\n");
    EXPECT_THROW(csv::read_counts(e), DataError);
}
