#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "digitforge/io.hpp"

using namespace digitforge;

TEST(SchemeIo, Shorthand) {
  EXPECT_EQ(parse_scheme("base_q:10"), Scheme::base_q(10));
  EXPECT_EQ(parse_scheme("pseudo_golden:3"), Scheme::pseudo_golden(3));
  EXPECT_EQ(parse_scheme("luroth"), Scheme::luroth());
  EXPECT_EQ(parse_scheme("continued_fraction"), Scheme::continued_fraction());
  EXPECT_THROW(parse_scheme("base_q:ten"), domain_error);
  EXPECT_THROW(parse_scheme("base_q:"), domain_error);
  EXPECT_THROW(parse_scheme("luroth:2"), domain_error);
  EXPECT_THROW(parse_scheme("cantor"), domain_error);
  EXPECT_THROW(parse_scheme("base_q:1"), domain_error);
}

TEST(SchemeIo, JsonRoundTrip) {
  const std::vector<Scheme> schemes{Scheme::base_q(7), Scheme::pseudo_golden(2), Scheme::luroth(),
                                    Scheme::continued_fraction(),
                                    Scheme::gls({Rational(1, 2), Rational(1, 3), Rational(1, 6)}, {1, -1, 1})};
  for (const Scheme& s : schemes) {
    const json j = scheme_to_json(s);
    EXPECT_EQ(scheme_from_json(j), s) << j.dump();
    EXPECT_EQ(parse_scheme(j.dump()), s);
  }
  EXPECT_EQ(parse_scheme(R"({"kind":"gls","lengths":["1/4","3/4"]})"),
            Scheme::gls({Rational(1, 4), Rational(3, 4)}, {1, 1}));
  EXPECT_THROW(parse_scheme(R"({"kind":"gls","lengths":["1/4","1/4"]})"), domain_error);
  EXPECT_THROW(parse_scheme(R"({"q":3})"), domain_error);
  EXPECT_THROW(parse_scheme(R"({"kind":"base_q")"), domain_error);
}

TEST(DensityIo, Parsing) {
  const Scheme b = Scheme::base_q(2);
  const Density u = parse_density("uniform", &b);
  ASSERT_TRUE(u.is_piecewise());
  EXPECT_EQ(u.piecewise().values().front(), Number(1));
  EXPECT_THROW(parse_density("uniform"), domain_error);
  EXPECT_FALSE(parse_density("gauss").is_piecewise());
  EXPECT_THROW(parse_density("lognormal"), domain_error);

  const Density pw = parse_density(R"({"kind":"piecewise","scheme":"base_q:2","depth":1,"values":["3/2","1/2"]})");
  EXPECT_EQ(pw.piecewise().values()[0], Number::ratio(3, 2));
  const Density masses = parse_density(R"({"kind":"piecewise","scheme":"base_q:2","depth":1,"masses":[0.25,0.75]})");
  EXPECT_EQ(masses.piecewise().values()[1], Number::ratio(3, 2));
  EXPECT_THROW(parse_density(R"({"kind":"piecewise","scheme":"base_q:2","depth":1,"values":["1","2"]})"), domain_error);
  EXPECT_THROW(parse_density(R"({"kind":"piecewise","depth":1,"values":["1","1"]})"), domain_error);
}

TEST(DensityIo, RoundTrip) {
  const Density d = PiecewiseDensity::from_values(Scheme::gls({Rational(1, 3), Rational(2, 3)}, {1, -1}), 1,
                                                  {Number::ratio(3, 2), Number::ratio(3, 4)});
  const Density back = density_from_json(density_to_json(d));
  EXPECT_EQ(back.scheme(), d.scheme());
  EXPECT_EQ(back.piecewise().values(), d.piecewise().values());
  EXPECT_EQ(density_to_json(Density::gauss()).at("kind"), "gauss");
}

TEST(SpecResolution, FilesAndAtSign) {
  const std::string path = ::testing::TempDir() + "/digitforge_io_density.json";
  {
    std::ofstream out(path);
    out << R"({"kind":"uniform","scheme":"pseudo_golden:2"})";
  }
  EXPECT_EQ(parse_density("@" + path).scheme(), Scheme::pseudo_golden(2));
  EXPECT_EQ(parse_density(path).scheme(), Scheme::pseudo_golden(2));
  std::remove(path.c_str());
  EXPECT_THROW(parse_density("@" + path), domain_error);
}

TEST(NumberIo, Json) {
  EXPECT_EQ(number_from_json(json("3/8")), Number::ratio(3, 8));
  EXPECT_EQ(number_from_json(json(5)), Number(5));
  EXPECT_EQ(number_from_json(json(0.25)), Number::ratio(1, 4));
  EXPECT_THROW(number_from_json(json::array()), domain_error);
  EXPECT_EQ(number_to_json(Number::ratio(3, 8)), json("3/8"));
  EXPECT_EQ(number_to_json(Number::approx(0.5)), json(0.5));
}

TEST(PolyaIo, Parsing) {
  const PolyaParams p = parse_polya(
      R"({"scheme":"base_q:2","depth":2,"pmf_n":[0.2,0.3,0.5],"default_alpha":[2,2],"alphas":{"":[3,1],"01":[0,1]}})");
  EXPECT_EQ(p.depth(), 2u);
  EXPECT_EQ(p.alpha({}), AlphaPair(3, 1));
  EXPECT_EQ(p.alpha({1}), AlphaPair(2, 2));
  EXPECT_EQ(p.alphas().at({0, 1}), AlphaPair(0, 1));
  EXPECT_THROW(parse_polya(R"({"depth":1,"pmf_n":[0.5,0.5],"alphas":{"2":[1,1]}})"), domain_error);
  EXPECT_THROW(parse_polya(R"({"depth":1,"pmf_n":[0.5,0.5],"default_alpha":[1]})"), domain_error);
  EXPECT_THROW(parse_polya(R"({"depth":1,"pmf_n":[0.5,0.4]})"), domain_error);

  PolyaRealization r;
  r.y[{}] = 0.25;
  r.y[{1}] = 0.5;
  const json j = realization_to_json(r);
  EXPECT_EQ(j.at(""), 0.25);
  EXPECT_EQ(j.at("1"), 0.5);
}

TEST(ChainIo, Json) {
  const ResidualChain c = build_chain(Scheme::pseudo_golden(2), 1);
  const StatePmf pi = invariant_pmf(c);
  const json j = chain_to_json(c, &pi);
  EXPECT_EQ(j.at("s"), 1);
  EXPECT_EQ(j.at("omega").size(), 2u);
  EXPECT_EQ(j.at("P")[1][0], 1.0);
  EXPECT_NEAR(j.at("pi_inv")[0].get<double>(), 0.7236068, 1e-7);
  EXPECT_EQ(j.at("scheme").at("kind"), "pseudo_golden");
}

TEST(DrawIo, CsvRows) {
  CouplingDraw d;
  d.x = Number::ratio(3, 8);
  d.n = 2;
  d.s = {0, 1};
  d.u = Number::ratio(1, 2);
  d.e = Number::ratio(1, 8);
  d.l = Number::ratio(1, 4);
  EXPECT_EQ(coupling_csv_row(d), "3/8,2,0;1,1/2,1/8,1/4");
  EXPECT_EQ(std::string(coupling_csv_header()), "x,n,s,u,e,l");
  d.x = Number::approx(0.1);
  EXPECT_EQ(coupling_csv_row(d).substr(0, 20), "0.10000000000000001,");
  EXPECT_EQ(coupling_to_json(d).at("s"), json::array({0, 1}));

  const ResidualChain c = build_chain(Scheme::pseudo_golden(2), 1);
  PerfectDraw p;
  p.coupling = d;
  p.m1 = 2;
  p.m2 = 1;
  p.m = 2;
  p.k = 3;
  p.window = 1;
  const std::string row = perfect_csv_row(p, c);
  EXPECT_EQ(row.substr(row.size() - 10), ",2,1,2,3,1");
  EXPECT_EQ(perfect_to_json(p, c).at("window"), json::array({1}));
  EXPECT_EQ(format_digits({}), "");
}
