#include "fibrebend/config.hpp"
#include "fibrebend/csv.hpp"
#include "fibrebend/errors.hpp"
#include "fibrebend/schedule.hpp"

#include <gtest/gtest.h>

using namespace fibrebend;

TEST(Config, SectionsAndComments) {
  const Config c = parse_config(
      "; comment\n"
      "[geometry]\n"
      "kind = A\n"
      "L = 30\n"
      "\n"
      "[winding]\n"
      "style=DH\n");
  ASSERT_EQ(c.size(), 2u);
  EXPECT_EQ(c.at("geometry").at("kind"), "A");
  EXPECT_EQ(c.at("geometry").at("L"), "30");
  EXPECT_EQ(c.at("winding").at("style"), "DH");
}

TEST(Config, MalformedTextRejected) {
  EXPECT_THROW(parse_config("[geometry\nkind = A\n"), ValidationError);
  EXPECT_THROW(parse_config("[geometry]\nL = 1\nL = 2\n"), ValidationError);
  EXPECT_THROW(load_config("/nonexistent/fibrebend.ini"), ValidationError);
}

TEST(KvReader, TypedAccess) {
  const KeyValues kv{{"a", "1.5"}, {"n", "7"}, {"b", "yes"}, {"s", "word"}};
  KvReader r(kv, "test");
  EXPECT_EQ(r.get_double("a", 0.0), 1.5);
  EXPECT_EQ(r.get_int("n", 0), 7);
  EXPECT_TRUE(r.get_bool("b", false));
  EXPECT_EQ(r.get_string("s", ""), "word");
  EXPECT_EQ(r.get_double("missing", 3.0), 3.0);
  EXPECT_NO_THROW(r.finish());
}

TEST(KvReader, BadValuesRejected) {
  const KeyValues kv{{"a", "1.5mm"}, {"n", "7.5"}, {"b", "maybe"}, {"e", ""}};
  KvReader r(kv, "test");
  EXPECT_THROW(r.get_double("a", 0.0), ValidationError);
  EXPECT_THROW(r.get_int("n", 0), ValidationError);
  EXPECT_THROW(r.get_bool("b", false), ValidationError);
  EXPECT_THROW(r.get_double("e", 0.0), ValidationError);
}

TEST(KvReader, UnconsumedKeyReportedByName) {
  const KeyValues kv{{"L", "30"}, {"Lenght", "31"}};
  KvReader r(kv, "geometry");
  r.get_double("L", 0.0);
  try {
    r.finish();
    FAIL() << "finish() accepted an unknown key";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("Lenght"), std::string::npos);
  }
}

TEST(ScheduleKv, Kinds) {
  const PressureSchedule p = schedule_from_kv({{"kind", "proportional"}, {"p_max", "80"}, {"samples", "4"}});
  EXPECT_EQ(pressure_levels(p), (std::vector<double>{0, 20, 40, 60, 80}));

  const PressureSchedule s = schedule_from_kv({{"kind", "stepped"}, {"increment", "25"}, {"with_reverse", "true"}});
  EXPECT_EQ(pressure_levels(s), (std::vector<double>{0, 25, 50, 75, 100, 75, 50, 25, 0}));
  EXPECT_EQ(forward_count(s), 5u);

  const PressureSchedule e = schedule_from_kv({{"kind", "explicit"}, {"pressures", "0, 10,30"}});
  EXPECT_EQ(pressure_levels(e), (std::vector<double>{0, 10, 30}));
  EXPECT_EQ(forward_count(e), 3u);
}

TEST(ScheduleKv, UnevenIncrementEndsAtPeak) {
  const PressureSchedule s = schedule_from_kv({{"kind", "stepped"}, {"increment", "30"}});
  EXPECT_EQ(pressure_levels(s), (std::vector<double>{0, 30, 60, 90, 100}));
}

TEST(ScheduleKv, Errors) {
  EXPECT_THROW(schedule_from_kv({{"kind", "ramp"}}), ValidationError);
  EXPECT_THROW(schedule_from_kv({{"kind", "explicit"}, {"pressures", "0,x"}}), ValidationError);
  EXPECT_THROW(schedule_from_kv({{"kind", "stepped"}, {"increment", "0"}}), ValidationError);
  EXPECT_THROW(schedule_from_kv({{"p_mx", "80"}}), ValidationError);
  EXPECT_THROW(schedule_from_kv({{"samples", "0"}}), ValidationError);
}

TEST(ScheduleJson, NamesKind) {
  EXPECT_EQ(to_json(PressureSchedule{SteppedSchedule{}})["kind"], "stepped");
  EXPECT_EQ(to_json(PressureSchedule{ProportionalSchedule{}})["p_max"], 100.0);
}

TEST(Csv, ParseWithCommentsAndWhitespace) {
  const CsvTable t = parse_csv("# header follows\n a , b \n1, 2\n\n# gap\n3,4\n");
  EXPECT_EQ(t.header, (std::vector<std::string>{"a", "b"}));
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.number(1, t.column("b")), 4.0);
  EXPECT_EQ(t.integer(0, t.column("a")), 1);
}

TEST(Csv, Errors) {
  EXPECT_THROW(parse_csv(""), ValidationError);
  EXPECT_THROW(parse_csv("a,b\n1\n"), ValidationError);
  const CsvTable t = parse_csv("a,b\n1.5,x\n");
  EXPECT_THROW(t.column("c"), ValidationError);
  EXPECT_THROW(t.number(0, 1), ValidationError);
  EXPECT_THROW(t.integer(0, 0), ValidationError);
}
