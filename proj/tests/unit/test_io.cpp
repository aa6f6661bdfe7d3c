#include <gtest/gtest.h>

#include <cstring>
#include <random>
#include <sstream>

#include "regext/io.hpp"

using namespace regext;

TEST(Io, GfnLayoutIsBitExact) {
  Grid g(2, {2, 3, 1}, {-1.0, 0.5, 0.0}, 0.25);
  GridFunction f(g);
  for (std::size_t i = 0; i < g.size(); ++i) f[i] = 0.5 * i;
  std::ostringstream os;
  io::write_gfn(os, f);
  const std::string b = os.str();
  ASSERT_EQ(b.size(), 4 + 4 + 2 * 4 + 2 * 8 + 8 + 6 * 8u);
  EXPECT_EQ(b.substr(0, 4), "GFN1");
  std::uint32_t n, d0, d1;
  std::memcpy(&n, b.data() + 4, 4);
  std::memcpy(&d0, b.data() + 8, 4);
  std::memcpy(&d1, b.data() + 12, 4);
  EXPECT_EQ(n, 2u);
  EXPECT_EQ(d0, 2u);
  EXPECT_EQ(d1, 3u);
  double o0, hh, v5;
  std::memcpy(&o0, b.data() + 16, 8);
  std::memcpy(&hh, b.data() + 32, 8);
  std::memcpy(&v5, b.data() + 40 + 5 * 8, 8);
  EXPECT_EQ(o0, -1.0);
  EXPECT_EQ(hh, 0.25);
  EXPECT_EQ(v5, 2.5);
}

TEST(Io, SetBitsPackedLsbFirst) {
  Grid g(1, {10, 1, 1}, {0.0, 0.0, 0.0}, 0.1);
  CellSet s(g);
  s.set(0);
  s.set(3);
  s.set(9);
  std::ostringstream os;
  io::write_set(os, s);
  const std::string b = os.str();
  const std::size_t header = 4 + 4 + 4 + 8 + 8;
  ASSERT_EQ(b.size(), header + 2);
  EXPECT_EQ(b.substr(0, 4), "SET1");
  EXPECT_EQ(static_cast<unsigned char>(b[header]), 0b00001001);
  EXPECT_EQ(static_cast<unsigned char>(b[header + 1]), 0b00000010);
}

TEST(Io, RoundTrip) {
  Grid g(3, {3, 5, 7}, {0.1, 0.2, 0.3}, 0.05);
  std::mt19937 rng(5);
  std::normal_distribution<double> N;
  GridFunction f(g);
  CellSet s(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    f[i] = N(rng);
    s.set(i, N(rng) > 0);
  }
  std::stringstream a, b;
  io::write_gfn(a, f);
  io::write_set(b, s);
  const auto f2 = io::read_gfn(a);
  const auto s2 = io::read_set(b);
  EXPECT_TRUE(f2.grid() == g);
  EXPECT_EQ(f2.values(), f.values());
  EXPECT_EQ(s2, s);
}

TEST(Io, RejectsBadMagicAndTruncation) {
  std::stringstream bad("XXXX0000");
  EXPECT_THROW(io::read_gfn(bad), Error);
  Grid g(1, {4, 1, 1}, {}, 1.0);
  std::ostringstream os;
  io::write_gfn(os, GridFunction(g, 1.0));
  std::stringstream cut(os.str().substr(0, os.str().size() - 3));
  EXPECT_THROW(io::read_gfn(cut), Error);
}
