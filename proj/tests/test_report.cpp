#include "core/commands.hpp"
#include "core/report.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <limits>

using namespace nqd;
using namespace nqd::report;

TEST(Num, Formatting) {
  EXPECT_EQ(num(0.0), "0");
  EXPECT_EQ(num(-0.0), "0");
  EXPECT_EQ(num(0.25), "0.25");
  EXPECT_EQ(num(1.0 / 3.0), "0.333333333333");
  EXPECT_EQ(num(-1e-20), "-1e-20");
  EXPECT_EQ(num(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(num(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(num(std::nan("")), "nan");
}

TEST(Round12, NestedValues) {
  nlohmann::ordered_json j = {{"a", 1.0 / 3.0}, {"b", {0.1 + 0.2, 7}}, {"c", "text"}};
  const auto r = round12(j);
  EXPECT_EQ(r["a"].get<double>(), 0.333333333333);
  EXPECT_EQ(r["b"][0].get<double>(), 0.3);
  EXPECT_EQ(r["b"][1].get<int>(), 7);
  EXPECT_EQ(r["c"], "text");
  EXPECT_EQ(round12(nlohmann::ordered_json(std::nan(""))), "nan");
}

TEST(Table, Csv) {
  Table t;
  t.header = {"r", "phi"};
  t.add({"1", "2.5"});
  t.add({"2", "3"});
  EXPECT_EQ(t.csv(), "r,phi\n1,2.5\n2,3\n");
  EXPECT_THROW(t.add({"1"}), Error);
}

TEST(Report, JsonKeepsKeyOrder) {
  Report r;
  r.json["zeta"] = 1;
  r.json["alpha"] = 0.5;
  EXPECT_EQ(r.render(Format::Json), "{\n  \"zeta\": 1,\n  \"alpha\": 0.5\n}\n");
}

TEST(Report, CommandsAreDeterministic) {
  commands::RunConfig c;
  c.domain = nqd::testing::load_domain("paraboloid.json");
  c.command = "density";
  c.rho = {1, 10};
  c.seed = 4;
  c.samples = 20000;
  const auto a = commands::run(c), b = commands::run(c);
  EXPECT_EQ(a.render(Format::Json), b.render(Format::Json));
  EXPECT_EQ(a.render(Format::Csv), b.render(Format::Csv));
  c.seed = 5;
  EXPECT_NE(commands::run(c).render(Format::Csv), a.render(Format::Csv));
}

TEST(Report, UnknownCommand) {
  commands::RunConfig c;
  c.command = "nope";
  EXPECT_THROW(commands::run(c), Error);
  EXPECT_EQ(commands::command_names().size(), 9u);
}

TEST(Io, RoundTripAndErrors) {
  const std::string path = ::testing::TempDir() + "nqd_report_io.txt";
  write_text(path, "line\n");
  EXPECT_EQ(read_text(path), "line\n");
  std::remove(path.c_str());
  EXPECT_THROW(read_text(path), Error);
  EXPECT_THROW(write_text("/nonexistent-dir/x.txt", "x"), Error);
}
