#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include <causaldii/panel.hpp>

using namespace causaldii;

namespace {

TimeSeriesPanel small_panel() {
    TimeSeriesPanel p;
    p.names = {"a", "b"};
    p.values.resize(3, 2);
    p.values << 1.0, -2.5, 0.125, 1e-17, 3.14159265358979, 1e300;
    return p;
}

} // namespace

TEST_CASE("csv round trip preserves values exactly") {
    TimeSeriesPanel p = small_panel();
    std::ostringstream out;
    write_csv(out, p);
    std::istringstream in(out.str());
    CsvReadResult r = read_csv(in);
    REQUIRE(r.dropped_rows == 0);
    REQUIRE(r.panel.names == p.names);
    REQUIRE(r.panel.values == p.values); // %.17g round-trips doubles
}

TEST_CASE("date column becomes timestamps") {
    std::istringstream in("date,a,b\n2020-01-01,1,2\n2020-01-02,3,4\n");
    CsvReadResult r = read_csv(in);
    REQUIRE(r.panel.timestamps ==
            std::vector<std::string>{"2020-01-01", "2020-01-02"});
    REQUIRE(r.panel.names == std::vector<std::string>{"a", "b"});
    REQUIRE(r.panel.values(1, 1) == 4.0);

    std::ostringstream out;
    write_csv(out, r.panel);
    REQUIRE(out.str() == "date,a,b\n2020-01-01,1,2\n2020-01-02,3,4\n");
}

TEST_CASE("ragged rows are rejected with the line number") {
    std::istringstream in("a,b\n1,2\n3\n");
    try {
        read_csv(in, "test.csv");
        FAIL("expected CsvFormatError");
    } catch (const CsvFormatError& e) {
        REQUIRE(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("rows with missing entries are dropped and counted") {
    std::istringstream in("a,b\n1,2\n,4\n5,\n7,8\n");
    CsvReadResult r = read_csv(in);
    REQUIRE(r.dropped_rows == 2);
    REQUIRE(r.panel.rows() == 2);
    REQUIRE(r.panel.values(1, 0) == 7.0);
}

TEST_CASE("unparsable and non-finite fields are errors") {
    std::istringstream garbage("a\n1\nxyz\n");
    REQUIRE_THROWS_AS(read_csv(garbage), CsvFormatError);
    std::istringstream nan_in("a\n1\nnan\n");
    REQUIRE_THROWS_AS(read_csv(nan_in), NonFiniteError);
    std::istringstream inf_in("a\ninf\n");
    REQUIRE_THROWS_AS(read_csv(inf_in), NonFiniteError);
    std::istringstream empty;
    REQUIRE_THROWS_AS(read_csv(empty), CsvFormatError);
}

TEST_CASE("panel validation catches structural problems") {
    TimeSeriesPanel p = small_panel();
    p.names = {"a", "a"};
    REQUIRE_THROWS_AS(p.validate(), ValidationError);

    p = small_panel();
    p.names = {"a"};
    REQUIRE_THROWS_AS(p.validate(), DimensionMismatchError);

    p = small_panel();
    p.values(0, 0) = std::numeric_limits<double>::quiet_NaN();
    REQUIRE_THROWS_AS(p.validate(), NonFiniteError);

    p = small_panel();
    p.timestamps = {"t0"};
    REQUIRE_THROWS_AS(p.validate(), DimensionMismatchError);
}

TEST_CASE("column selection reorders by name") {
    TimeSeriesPanel p = small_panel();
    TimeSeriesPanel q = p.select({"b", "a"});
    REQUIRE(q.names == std::vector<std::string>{"b", "a"});
    REQUIRE(q.values.col(0) == p.values.col(1));
    REQUIRE_THROWS_AS(p.select({"missing"}), UnknownVariableError);
    REQUIRE(p.column_index("b") == 1);
    REQUIRE_THROWS_AS(p.column_index("c"), UnknownVariableError);
}
