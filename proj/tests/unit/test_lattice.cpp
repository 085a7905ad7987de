#include <cmath>
#include <filesystem>
#include <numbers>

#include <gtest/gtest.h>

#include "lqc/field_io.hpp"
#include "lqc/lattice.hpp"

using namespace lqc;

TEST(Lattice, RejectsTinyGrid) {
  EXPECT_THROW(LatticeSpec(1), DomainError);
  EXPECT_NO_THROW(LatticeSpec(2));
}

TEST(Lattice, FlattenRoundTrip) {
  const LatticeSpec lat(7);
  for (std::size_t i = 0; i < lat.sites(); ++i)
    ASSERT_EQ(lat.flatten(lat.unflatten(i)), i);
  EXPECT_EQ(lat.flatten(1, 0, 0), 1u);
  EXPECT_EQ(lat.flatten(0, 1, 0), 7u);
  EXPECT_EQ(lat.flatten(0, 0, 1), 49u);
}

TEST(Lattice, PeriodicDistanceUsesMinimumImage) {
  const LatticeSpec open(10), per(10, Boundary::periodic);
  EXPECT_DOUBLE_EQ(open.distance({0, 0, 0}, {9, 0, 0}), 9.0);
  EXPECT_DOUBLE_EQ(per.distance({0, 0, 0}, {9, 0, 0}), 1.0);
}

TEST(Potential, CoulombValues) {
  const auto c = PotentialKind::coulomb();
  EXPECT_DOUBLE_EQ(potential_eval(c, 1.0, 2.0), 0.5);
  EXPECT_DOUBLE_EQ(potential_eval(c, 1.0, 0.0), std::numbers::pi);
  double prev = potential_eval(c, 1.0, 0.01);
  for (double r = 0.02; r < 50; r += 0.37) {
    const double v = potential_eval(c, 1.0, r);
    ASSERT_LT(v, prev);
    prev = v;
  }
}

TEST(Potential, YukawaValues) {
  EXPECT_NEAR(potential_eval(PotentialKind::yukawa(10.0), 1.0, 10.0), 0.1 * std::exp(-1.0), 1e-15);
  EXPECT_NEAR(potential_eval(PotentialKind::yukawa(10.0, 0.25), 2.0, 0.0),
              0.25 + 2.0 * std::numbers::pi, 1e-15);
}

TEST(Potential, YukawaApproachesCoulomb) {
  const auto y = PotentialKind::yukawa(1e6);
  const auto c = PotentialKind::coulomb();
  for (double r = 0.5; r <= 1000.0; r *= 1.3) {
    const double vc = potential_eval(c, 1.0, r);
    ASSERT_LE(std::abs(potential_eval(y, 1.0, r) - vc) / vc, 1.01 * r / 1e6) << r;
  }
}

TEST(NuclearField, HalfOffsetNeighbours) {
  const std::size_t n = 8, m = n / 2;
  const LatticeSpec lat(n);
  auto p = params_for_ratio(1.0, {Nucleus{1.0, centered_nucleus(n)}}, 1);
  p.v0 = 0.7;
  const auto w = nuclear_field(lat, p);
  EXPECT_DOUBLE_EQ(w[lat.flatten(m, m, m)], 2.0 * 0.7);
  EXPECT_DOUBLE_EQ(w[lat.flatten(m, m + 1, m)], 2.0 * 0.7);
  for (double v : w)
    ASSERT_TRUE(std::isfinite(v));
}

TEST(NuclearField, Superposition) {
  const LatticeSpec lat(9);
  const auto p = params_for_ratio(1.0, {Nucleus{1.0, {4, 4, 1.5}}, Nucleus{1.0, {4, 4, 6.5}}}, 2);
  const auto w = nuclear_field(lat, p);
  EXPECT_DOUBLE_EQ(w[lat.flatten(4, 4, 4)], 2.0 * (1.0 / 2.5));
}

TEST(NuclearField, OnSiteNucleusNeedsOptIn) {
  const LatticeSpec lat(6);
  const auto p = params_for_ratio(1.0, {Nucleus{1.0, {3, 3, 3}}}, 1);
  EXPECT_THROW(nuclear_field(lat, p), DomainError);
  const auto w = nuclear_field(lat, p, OnSiteNucleus::cutoff);
  EXPECT_DOUBLE_EQ(w[lat.flatten(3, 3, 3)], std::numbers::pi);
}

TEST(NuclearField, OutsideGridRejected) {
  const auto p = params_for_ratio(1.0, {Nucleus{1.0, {3, 9.5, 3}}}, 1);
  EXPECT_THROW(nuclear_field(LatticeSpec(6), p), DomainError);
}

TEST(NucleusPair, PositionsFollowCeilFloor) {
  const auto pr = nucleus_pair(20, 5);
  EXPECT_DOUBLE_EQ(pr[0][0], 10.0 - 3.0);
  EXPECT_DOUBLE_EQ(pr[1][0], 10.0 + 2.0);
  EXPECT_DOUBLE_EQ(pr[0][1], 10.5);
  EXPECT_DOUBLE_EQ(pr[1][1], 10.5);
}

TEST(Units, AtomicConversion) {
  ChemistryParams p;
  p.t_f = 1.0;
  p.v0 = 0.5;
  p.n_e = 1;
  EXPECT_DOUBLE_EQ(p.bohr_radius(), 4.0);
  EXPECT_DOUBLE_EQ(p.rydberg(), 0.0625);
  EXPECT_DOUBLE_EQ(to_atomic_units(-6.0625, p), -1.0);
  EXPECT_DOUBLE_EQ(to_atomic_units(-6.0, p), 0.0);
  p.n_e = 2;
  EXPECT_DOUBLE_EQ(to_atomic_units(-12.0, p), 0.0);
  EXPECT_DOUBLE_EQ(from_atomic_units(to_atomic_units(-3.3, p), p), -3.3);
  EXPECT_LT(to_atomic_units(-5.0, p), to_atomic_units(-4.9, p));
}

TEST(Params, Validation) {
  EXPECT_THROW(params_for_ratio(0.0, {}, 1), DomainError);
  EXPECT_THROW(params_for_ratio(1.0, {}, 0), DomainError);
  EXPECT_THROW(params_for_ratio(1.0, {Nucleus{-1.0, {}}}, 1), DomainError);
}

TEST(FieldIo, BinaryRoundTripAndLayout) {
  const LatticeSpec lat(3);
  std::vector<double> v(lat.sites());
  for (std::size_t i = 0; i < v.size(); ++i)
    v[i] = 0.5 * static_cast<double>(i) - 3.0;
  const auto path = std::filesystem::temp_directory_path() / "lqc_field_test.bin";
  write_field_binary(path, lat, v);
  EXPECT_EQ(std::filesystem::file_size(path), 24u + 8u * 27u);
  const auto snap = read_field_binary(path);
  EXPECT_EQ(snap.lattice.n(), 3u);
  EXPECT_EQ(snap.values, v);
  std::filesystem::remove(path);
}

TEST(FieldIo, CsvHasHeaderAndRows) {
  const LatticeSpec lat(2);
  std::vector<double> v(8, 1.25);
  const auto path = std::filesystem::temp_directory_path() / "lqc_field_test.csv";
  write_field_csv(path, lat, v);
  std::ifstream is(path);
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "x,y,z,value");
  std::getline(is, line);
  EXPECT_EQ(line, "0,0,0,1.25");
  std::size_t rows = 1;
  while (std::getline(is, line))
    ++rows;
  EXPECT_EQ(rows, 8u);
  std::filesystem::remove(path);
}

TEST(FieldIo, SizeMismatchRejected) {
  const auto path = std::filesystem::temp_directory_path() / "lqc_bad.bin";
  EXPECT_THROW(write_field_binary(path, LatticeSpec(3), std::vector<double>(5)), DomainError);
}
