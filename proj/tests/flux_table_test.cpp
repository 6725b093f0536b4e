#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "reiterhom/error.hpp"
#include "reiterhom/flux_table.hpp"

using namespace reiterhom;
using cell::FluxTable;
using cell::Vec;
using fields::Mesh;

namespace {

// Multilinear interpolation reproduces functions that are affine in each argument.
Vec trilinear(double r, Vec xi) {
  return {1.0 + 2.0 * r - xi[0] + 0.5 * r * xi[0] * xi[1], -3.0 + xi[1] + r * xi[1]};
}

}  // namespace

TEST(FluxTable, MultilinearIsExactOnTrilinearData) {
  const FluxTable t = FluxTable::from_function(2, cell::linspace(-1, 1, 5), {cell::linspace(-2, 2, 7), cell::linspace(-1, 3, 4)},
                                               trilinear);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> r(-1, 1), a(-2, 2), b(-1, 3);
  for (int k = 0; k < 200; ++k) {
    const double rv = r(rng);
    const Vec xi{a(rng), b(rng)};
    const auto q = t.evaluate(rv, xi);
    EXPECT_FALSE(q.clamped);
    EXPECT_NEAR(q.q[0], trilinear(rv, xi)[0], 1e-12);
    EXPECT_NEAR(q.q[1], trilinear(rv, xi)[1], 1e-12);
    // The second component is affine in xi_2 with slope 1 + r.
    EXPECT_NEAR(q.dq_dxi[1][1], 1.0 + rv, 1e-12);
  }
}

TEST(FluxTable, OutOfRangeClampsAndFlags) {
  const FluxTable t = FluxTable::from_function(1, {0.0}, {cell::linspace(-1, 1, 3), {0.0}},
                                               [](double, Vec xi) { return Vec{3.0 * xi[0], 0.0}; });
  const auto q = t.evaluate(0.0, {5.0, 0.0});
  EXPECT_TRUE(q.clamped);
  EXPECT_DOUBLE_EQ(q.q[0], 3.0);
  // A single r node never clamps in r.
  EXPECT_FALSE(t.evaluate(100.0, {0.5, 0.0}).clamped);
}

TEST(FluxTable, RejectsMalformedGrids) {
  EXPECT_THROW(FluxTable(1, {0.0}, {std::vector<double>{0.0, 0.0}, {0.0}}, {Vec{}, Vec{}}), Error);
  EXPECT_THROW(FluxTable(1, {0.0}, {std::vector<double>{0.0, 1.0}, {0.0}}, {Vec{}}), Error);
  EXPECT_THROW(FluxTable(1, {0.0}, {std::vector<double>{0.0, 1.0}, {0.0}}, {Vec{}, Vec{NAN, 0.0}}), Error);
  EXPECT_THROW(FluxTable(3, {0.0}, {std::vector<double>{0.0, 1.0}, {0.0}}, {Vec{}, Vec{}}), Error);
}

TEST(FluxTable, CsvRoundTripIsBitExact) {
  FluxTable t = FluxTable::from_function(2, cell::linspace(0, 1, 2), {cell::linspace(-1, 1, 3), cell::linspace(-1, 1, 3)},
                                         [](double r, Vec xi) { return Vec{std::sin(xi[0] + r) / 3.0, std::exp(xi[1])}; });
  t.metadata["note"] = "\"unit\"";
  std::stringstream ss;
  cell::write_csv(ss, t);
  const std::string text = ss.str();
  EXPECT_NE(text.find("# reiterhom flux_table v1"), std::string::npos);
  EXPECT_NE(text.find("r,xi_1,xi_2,q_1,q_2"), std::string::npos);
  const FluxTable back = cell::read_csv_table(ss);
  ASSERT_EQ(back.values().size(), t.values().size());
  for (std::size_t i = 0; i < t.values().size(); ++i) {
    EXPECT_EQ(back.values()[i][0], t.values()[i][0]);
    EXPECT_EQ(back.values()[i][1], t.values()[i][1]);
  }
  EXPECT_EQ(back.r_grid(), t.r_grid());
}

TEST(FluxTable, Lin1dTableIsLinearWithSlopeThree) {
  const auto c = coeff::builtin_problem("lin1d");
  const FluxTable t = cell::tabulate_flux(c, {-1.0, 0.0, 1.0}, {cell::linspace(-2, 2, 5), {0.0}}, Mesh::unit_cell(1, 256),
                                          Mesh::unit_cell(1, 256));
  for (std::size_t ir = 0; ir < 3; ++ir) {
    for (std::size_t i = 0; i < 5; ++i) {
      EXPECT_EQ(t.at(ir, i)[0], t.at(0, i)[0]);  // constant in r
      const double xi = t.xi_grid(0)[i];
      EXPECT_NEAR(t.at(ir, i)[0], 3.0 * xi, 1e-4);
    }
  }
}

TEST(FluxTable, TabulationIndependentOfJobs) {
  const auto c = coeff::builtin_problem("deg1d");
  cell::TableOptions one, three;
  three.jobs = 3;
  const auto grid = cell::linspace(-1, 1, 5);
  const FluxTable a = cell::tabulate_flux(c, {-0.5, 0.5}, {grid, {0.0}}, Mesh::unit_cell(1, 8), Mesh::unit_cell(1, 8), one);
  const FluxTable b =
      cell::tabulate_flux(c, {-0.5, 0.5}, {grid, {0.0}}, Mesh::unit_cell(1, 8), Mesh::unit_cell(1, 8), three);
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_EQ(a.values()[i][0], b.values()[i][0]);
}

TEST(FluxTable, Plap2dTableIsOdd) {
  const auto c = coeff::builtin_problem("plap2d", {{"p", 3.0}});
  const auto grid = cell::linspace(-1, 1, 3);
  const FluxTable t = cell::tabulate_flux(c, {0.0}, {grid, grid}, Mesh::unit_cell(2, 2), Mesh::unit_cell(2, 8));
  for (std::size_t i = 0; i < 3; ++i) {
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_NEAR(t.at(0, i, j)[0], -t.at(0, 2 - i, 2 - j)[0], 1e-7);
      EXPECT_NEAR(t.at(0, i, j)[1], -t.at(0, 2 - i, 2 - j)[1], 1e-7);
    }
  }
}
