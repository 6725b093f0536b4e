#include <cmath>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "reiterhom/config.hpp"
#include "reiterhom/error.hpp"

using namespace reiterhom;

namespace {

config::ProblemConfig parse_text(const std::string& text) {
  std::istringstream in(text);
  return config::parse(in, "test");
}

Errc code_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return Errc::io;
}

}  // namespace

TEST(Expression, ArithmeticAndFunctions) {
  const auto f = config::parse_expression("2 * x^2 - 3*y + sin(pi * x) / 2");
  const fields::Point p{0.5, 2.0};
  EXPECT_NEAR(f(p), 2 * 0.25 - 6.0 + 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(config::parse_expression("2^3^2")({0, 0}), 512.0);
  EXPECT_DOUBLE_EQ(config::parse_expression("-x^2")({3.0, 0}), -9.0);
  EXPECT_DOUBLE_EQ(config::parse_expression("exp(log(3)) + abs(-2) + sqrt(16)")({0, 0}), 9.0);
  EXPECT_NEAR(config::parse_expression("cos(2*pi*y) + tan(0)")({0, 0.5}), -1.0, 1e-15);
}

TEST(Expression, SyntaxErrors) {
  for (const char* bad : {"", "1 +", "(x", "foo(x)", "x y", "2 ** 3", "z"}) {
    EXPECT_EQ(code_of([&] { config::parse_expression(bad); }), Errc::config) << bad;
  }
}

TEST(ConfigList, FractionsAndDecimals) {
  const auto v = config::parse_list("1/4, 0.125,1/16");
  ASSERT_EQ(v.size(), 3u);
  EXPECT_DOUBLE_EQ(v[0], 0.25);
  EXPECT_DOUBLE_EQ(v[1], 0.125);
  EXPECT_DOUBLE_EQ(v[2], 0.0625);
  EXPECT_THROW(config::parse_list("1/0"), Error);
  EXPECT_THROW(config::parse_list("a"), Error);
}

TEST(ConfigNFunction, InlineForms) {
  const auto p = config::parse_nfunction_inline("{ kind = \"power\", p = 3.0 }");
  EXPECT_DOUBLE_EQ(p(2.0), 8.0 / 3.0);
  const auto l = config::parse_nfunction_inline("{kind=\"power_log\", p=1}");
  EXPECT_NEAR(l(1.0), std::log(2.0), 1e-15);
  EXPECT_EQ(config::parse_nfunction_inline("{ kind = \"exp_minus_one\" }").kind(), nfunc::Kind::exp_minus_one);
  EXPECT_THROW(config::parse_nfunction_inline("{ kind = \"cubic\" }"), Error);
  EXPECT_DOUBLE_EQ(config::parse_nfunction_inline("{ kind = \"power\" }")(2.0), 2.0);
  EXPECT_THROW(config::parse_nfunction_inline("{ kind = \"exp_minus_one\", p = 2 }"), Error);
}

TEST(ConfigFile, FullDocument) {
  const auto cfg = parse_text(R"(; comment
nfunction = { kind = "power", p = 3.0 }

[coefficient]
name = plap2d
p = 3

[domain]
dim = 2
lower = 0, 0
upper = 1, 2
f = 1 + x*y

[solver]
macro_n = 32
cell_n = 8
cell_n_y = 4
eps = 1/4, 1/8
fine_factor = 4
seed = 7
)");
  EXPECT_EQ(cfg.coefficient, "plap2d");
  EXPECT_EQ(cfg.dim, 2);
  EXPECT_DOUBLE_EQ(cfg.upper[1], 2.0);
  EXPECT_EQ(cfg.solver.y_cells(), 4);
  EXPECT_EQ(cfg.solver.seed, 7u);
  EXPECT_DOUBLE_EQ(cfg.rhs()({1.0, 2.0}), 3.0);
  cfg.check();
  const auto c = cfg.build_coefficient();
  EXPECT_EQ(c.dim, 2);
  EXPECT_DOUBLE_EQ(c.phi(2.0), 8.0 / 3.0);
  EXPECT_EQ(cfg.macro_mesh().cells_per_axis(), 32);
}

TEST(ConfigFile, NFunctionSectionForm) {
  const auto cfg = parse_text("[nfunction]\nkind = power_log\np = 1\n[coefficient]\nname = deg1d\n");
  ASSERT_TRUE(cfg.nfunction.has_value());
  EXPECT_EQ(cfg.nfunction->kind(), nfunc::Kind::power_log);
}

TEST(ConfigFile, Rejections) {
  EXPECT_EQ(code_of([] { parse_text("[solver]\nmacro_m = 3\n"); }), Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[mystery]\na = 1\n"); }), Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[solver]\nmacro_n = many\n"); }), Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[solver]\neps =\n").check(); }), Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[solver]\neps = 1/8, 1/4\n").check(); }), Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[solver]\neps = 2\n").check(); }), Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[solver]\nfine_factor = 2\n").check(); }), Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[domain]\ndim = 2\n[solver]\neps = 1/4, 1/16\n").check(); }), Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[coefficient]\nname = plap2d\n[domain]\ndim = 1\n").build_coefficient(); }),
            Errc::config);
  EXPECT_EQ(code_of([] { parse_text("[coefficient]\nname = unknown\n").build_coefficient(); }), Errc::catalog);
  EXPECT_EQ(code_of([] { config::load("/nonexistent/file.cfg"); }), Errc::io);
}

TEST(ConfigFile, ShippedConfigsLoadAndCheck) {
  for (const char* name : {"lin1d", "const1d", "deg1d", "ap1d", "plap2d"}) {
    const auto cfg = config::load(std::string(REITERHOM_CONFIG_DIR) + "/" + name + ".cfg");
    EXPECT_NO_THROW(cfg.check()) << name;
    EXPECT_EQ(cfg.build_coefficient().name, name);
  }
}
