#include <gtest/gtest.h>

#include <bit>
#include <cmath>
#include <sstream>

#include "bnpcea/data.hpp"
#include "bnpcea/errors.hpp"
#include "bnpcea/simulator.hpp"
#include "test_util.hpp"

using namespace bnpcea;

namespace {

Dataset parse(const std::string& text, CostModel model = CostModel::gaussian) {
  std::istringstream in(text);
  return read_dataset(in, model, "test.csv");
}

template <class E>
std::string error_of(const std::string& text, CostModel model = CostModel::gaussian) {
  try {
    parse(text, model);
  } catch (const E& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected an exception";
  return {};
}

}  // namespace

TEST(DataModel, SingleRowLoads) {
  const auto d = parse("y,t,delta,a,l1\n5.0,1.2,1,0,0.3\n");
  EXPECT_EQ(d.n(), 1u);
  EXPECT_EQ(d.q(), 1u);
  EXPECT_DOUBLE_EQ(d[0].y, 5.0);
  EXPECT_DOUBLE_EQ(d[0].t, 1.2);
  EXPECT_EQ(d[0].delta, 1);
  EXPECT_EQ(d[0].a, 0);
  EXPECT_DOUBLE_EQ(d[0].l.at(0), 0.3);
}

TEST(DataModel, NegativeTimeNamesRowThree) {
  const auto msg = error_of<ValidationError>("y,t,delta,a,l1\n1,1,1,0,0\n1,1,1,1,0\n1,-1,1,0,0\n");
  EXPECT_NE(msg.find("row 3"), std::string::npos) << msg;
  EXPECT_NE(msg.find("field t"), std::string::npos) << msg;
}

TEST(DataModel, InvariantViolationsAreValidationErrors) {
  EXPECT_THROW(parse("y,t,delta,a\n1,0,1,0\n"), ValidationError);
  EXPECT_THROW(parse("y,t,delta,a\n1,1,2,0\n"), ValidationError);
  EXPECT_THROW(parse("y,t,delta,a\n1,1,1,3\n"), ValidationError);
  EXPECT_THROW(parse("y,t,delta,a\nnan,1,1,0\n"), ValidationError);
  const auto msg = error_of<ValidationError>("y,t,delta,a\n2,1,1,0\n0,1,1,1\n", CostModel::lognormal);
  EXPECT_NE(msg.find("row 2"), std::string::npos) << msg;
  EXPECT_NE(msg.find("field y"), std::string::npos) << msg;
  EXPECT_NO_THROW(parse("y,t,delta,a\n-4,1,1,0\n", CostModel::gaussian));
}

TEST(DataModel, MalformedRowIsParseErrorWithLine) {
  const auto msg = error_of<ParseError>("y,t,delta,a,l1\n1,1,1,0,0\n1,1,1,0\n");
  EXPECT_NE(msg.find("test.csv:3"), std::string::npos) << msg;
  const auto msg2 = error_of<ParseError>("y,t,delta,a\n1,abc,1,0\n");
  EXPECT_NE(msg2.find("test.csv:2"), std::string::npos) << msg2;
  EXPECT_THROW(parse("y,t,delta,a\n1,1,,0\n"), ParseError);
  EXPECT_THROW(parse("y,t,a,delta\n1,1,1,0\n"), ParseError);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(DataModel, CommentsSkippedAndOrderPreserved) {
  const auto d = parse("# provenance\ny,t,delta,a\n# mid\n3,1,1,0\n1,2,0,1\n2,3,1,1\n");
  ASSERT_EQ(d.n(), 3u);
  EXPECT_DOUBLE_EQ(d[0].y, 3.0);
  EXPECT_DOUBLE_EQ(d[1].y, 1.0);
  EXPECT_DOUBLE_EQ(d[2].y, 2.0);
  EXPECT_EQ(d.q(), 0u);
}

TEST(DataModel, RequireFittable) {
  EXPECT_THROW(parse("y,t,delta,a\n1,1,1,0\n").require_fittable(), ValidationError);
  EXPECT_THROW(parse("y,t,delta,a\n1,1,1,0\n1,1,1,0\n").require_fittable(), ValidationError);
  EXPECT_THROW(parse("y,t,delta,a\n1,1,0,0\n1,1,0,1\n").require_fittable(), ValidationError);
  EXPECT_NO_THROW(parse("y,t,delta,a\n1,1,1,0\n1,1,0,1\n").require_fittable());
}

TEST(DataModel, SimulatorOutputRoundTripsBitForBit) {
  DGPConfig cfg;
  cfg.n = 400;
  cfg.p_c = 0.5;
  cfg.seed = 99;
  const auto sim = simulate(cfg);
  std::stringstream buf;
  write_dataset(buf, sim.data, {"round trip"});
  const auto back = read_dataset(buf);
  ASSERT_EQ(back.n(), sim.data.n());
  EXPECT_TRUE(back == sim.data);
  for (std::size_t i = 0; i < back.n(); ++i) {
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i].y), std::bit_cast<std::uint64_t>(sim.data[i].y));
    EXPECT_EQ(std::bit_cast<std::uint64_t>(back[i].t), std::bit_cast<std::uint64_t>(sim.data[i].t));
  }
}

TEST(DataModel, RandomDoublesRoundTripThroughText) {
  Rng rng(5);
  std::vector<Subject> subjects;
  for (int i = 0; i < 300; ++i) {
    Subject s;
    s.y = rng.normal() * std::pow(10.0, rng.normal() * 5);
    s.t = std::exp(rng.normal() * 4);
    s.delta = i % 2;
    s.a = (i / 2) % 2;
    s.l = {rng.normal(), -1e-300 * rng.uniform(), 1e300 * rng.uniform()};
    subjects.push_back(s);
  }
  const Dataset d(subjects);
  std::stringstream buf;
  write_dataset(buf, d);
  EXPECT_TRUE(read_dataset(buf) == d);
}

TEST(DataModel, FileRoundTrip) {
  testutil::TempDir dir("data");
  const auto d = testutil::toy_dataset(20, 2, 3);
  save_dataset(dir / "d.csv", d);
  EXPECT_TRUE(load_dataset(dir / "d.csv") == d);
  EXPECT_THROW(load_dataset(dir / "missing.csv"), ValidationError);
}

TEST(DataModel, WithInterceptPrependsOne) {
  const auto d = testutil::toy_dataset(5, 2, 1);
  const auto w = with_intercept(d);
  ASSERT_EQ(w.q(), 3u);
  for (std::size_t i = 0; i < d.n(); ++i) {
    EXPECT_EQ(w[i].l[0], 1.0);
    EXPECT_EQ(w[i].l[1], d[i].l[0]);
    EXPECT_EQ(w[i].l[2], d[i].l[1]);
  }
}

TEST(DataModel, FormatDoubleIsShortestExact) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(5.0), "5");
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::exp(rng.normal() * 20);
    EXPECT_EQ(parse_double(format_double(v)), v);
  }
}
