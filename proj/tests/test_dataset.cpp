#include <doctest.h>

#include <sstream>

#include "mixedrank/dataset.hpp"

using namespace mixedrank;

namespace {

Dataset read(const std::string& csv, const Schema& schema = {}) {
    std::istringstream in(csv);
    return load_table(in, schema);
}

}  // namespace

TEST_CASE("four-line table") {
    const Dataset d = read("loss,algorithm\n0.5,A\n0.7,B\n0.6,A\n0.8,B\n");
    CHECK(d.n_rows() == 4);
    CHECK(d.column("algorithm").levels() == std::vector<std::string>{"A", "B"});
    CHECK(d.column("loss").is_numeric());
    CHECK(d.column("loss").values()[3] == doctest::Approx(0.8));
}

TEST_CASE("schema maps file columns to roles") {
    const std::string csv =
        "result,optimizer,task,repetition,used_fidelity,prior\n"
        "0.1,HB,t1,0,1,good\n"
        "0.2,PB,t1,0,3,bad\n"
        "0.3,HB,t2,1,1,good\n";
    const Schema schema = Schema::from_assignments(
        {"loss=result", "algorithm=optimizer", "benchmark=task", "seed=repetition", "budget=used_fidelity",
         "prior=prior  # prior quality"});
    const Dataset d = read(csv, schema);
    CHECK(d.columns().size() == 6);
    CHECK(d.column("budget").is_numeric());
    CHECK_FALSE(d.column("seed").is_numeric());
    CHECK(d.column("benchmark").levels() == std::vector<std::string>{"t1", "t2"});
    CHECK(d.column("prior").levels() == std::vector<std::string>{"good", "bad"});
}

TEST_CASE("metafeature role keeps its own name") {
    Schema s;
    s.bind("loss", "y");
    s.bind("algorithm", "a");
    s.bind("metafeature:quality", "q");
    const Dataset d = read("y,a,q\n1,A,hi\n2,B,lo\n", s);
    CHECK(d.has("quality"));
}

TEST_CASE("config file schema") {
    std::istringstream cfg("# roles\nloss = y\nalgorithm = a\n\n");
    const Schema s = Schema::from_config(cfg);
    CHECK(s.by_file_column.size() == 2);
}

TEST_CASE("ingestion errors") {
    Schema only_alg;
    only_alg.bind("algorithm", "algorithm");
    try {
        read("loss,algorithm\n1,A\n", only_alg);
        FAIL("expected an error");
    } catch (const DataError& e) {
        CHECK(std::string(e.what()) == "mandatory role 'loss' unmapped");
    }
    CHECK_THROWS_AS(read(""), DataError);
    CHECK_THROWS_AS(read("loss,algorithm\nx,A\ny,B\n"), DataError);
    CHECK_THROWS_AS(read("loss\n1\n"), DataError);
    CHECK_THROWS_AS(Schema::from_assignments({"loss"}), DataError);
    Schema bad;
    bad.bind("loss", "nope");
    bad.bind("algorithm", "algorithm");
    CHECK_THROWS_AS(read("loss,algorithm\n1,A\n", bad), DataError);
}

TEST_CASE("rows with missing or non-finite values are dropped and counted") {
    const Dataset d = read("loss,algorithm\n1,A\n,B\nnan,A\n2,\n3,B\n");
    CHECK(d.n_rows() == 2);
    CHECK(d.dropped_rows() == 3);
}

TEST_CASE("RFC-4180 quoting and BOM") {
    const Dataset d = read("\xEF\xBB\xBFloss,algorithm\r\n1,\"A, with comma\"\r\n2,\"say \"\"hi\"\"\"\r\n");
    CHECK(d.n_rows() == 2);
    CHECK(d.column("algorithm").levels()[0] == "A, with comma");
    CHECK(d.column("algorithm").levels()[1] == "say \"hi\"");
}

TEST_CASE("explicit level order") {
    const Column c = Column::categorical("a", {"x", "y", "x"}, std::vector<std::string>{"y", "x"});
    CHECK(c.levels() == std::vector<std::string>{"y", "x"});
    CHECK(c.codes()[0] == 1);
    CHECK_THROWS_AS(Column::categorical("a", {"z"}, std::vector<std::string>{"y"}), DataError);
}

TEST_CASE("subset and filter drop unused levels in order") {
    Dataset d;
    d.add_column(Column::numeric("loss", {1, 2, 3, 4}));
    d.add_column(Column::categorical("algorithm", {"A", "B", "C", "B"}));
    const Dataset f = d.filter_levels("algorithm", {"C", "B"});
    CHECK(f.n_rows() == 3);
    CHECK(f.column("algorithm").levels() == std::vector<std::string>{"B", "C"});
    CHECK_THROWS_AS(d.add_column(Column::numeric("short", {1})), DataError);
}

TEST_CASE("numeric as categorical uses shortest text") {
    const Column c = Column::numeric("budget", {1, 2.5, 1}).as_categorical();
    CHECK(c.levels() == std::vector<std::string>{"1", "2.5"});
}

TEST_CASE("CSV export re-ingests to an identical table") {
    Dataset d;
    d.add_column(Column::numeric("loss", {0.1, 1.0 / 3.0, -2e-9}));
    d.add_column(Column::categorical("algorithm", {"A", "B,1", "A"}));
    d.add_column(Column::categorical("seed", {"0", "1", "2"}));
    d.add_column(Column::numeric("budget", {1, 2, 3}));
    std::ostringstream out;
    d.write_csv(out);
    CHECK(read(out.str()) == d);
}
