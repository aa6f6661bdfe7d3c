#include "regext/io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace regext::io {

namespace {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is) {
  T v{};
  is.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!is) throw Error("truncated grid file");
  return v;
}

void write_header(std::ostream& os, const char* magic, const Grid& g) {
  os.write(magic, 4);
  put<std::uint32_t>(os, static_cast<std::uint32_t>(g.n()));
  for (int i = 0; i < g.n(); ++i) put<std::uint32_t>(os, static_cast<std::uint32_t>(g.dims()[i]));
  for (int i = 0; i < g.n(); ++i) put<double>(os, g.origin()[i]);
  put<double>(os, g.h());
}

Grid read_header(std::istream& is, const char* magic) {
  char m[4];
  is.read(m, 4);
  if (!is || std::memcmp(m, magic, 4) != 0) throw Error(std::string("bad magic, expected ") + magic);
  const auto n = get<std::uint32_t>(is);
  if (n < 1 || n > kMaxDim) throw Error("unsupported dimension in grid file");
  Index dims{1, 1, 1};
  Point origin{0, 0, 0};
  for (std::uint32_t i = 0; i < n; ++i) dims[i] = static_cast<int>(get<std::uint32_t>(is));
  for (std::uint32_t i = 0; i < n; ++i) origin[i] = get<double>(is);
  const double h = get<double>(is);
  return Grid(static_cast<int>(n), dims, origin, h);
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot open for writing: " + path);
  return os;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error("cannot open for reading: " + path);
  return is;
}

}  // namespace

void write_gfn(std::ostream& os, const GridFunction& f) {
  write_header(os, "GFN1", f.grid());
  os.write(reinterpret_cast<const char*>(f.values().data()),
           static_cast<std::streamsize>(f.values().size() * sizeof(double)));
}

GridFunction read_gfn(std::istream& is) {
  Grid g = read_header(is, "GFN1");
  std::vector<double> v(g.size());
  is.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!is) throw Error("truncated GFN1 payload");
  GridFunction f(g, std::move(v));
  f.require_finite();
  return f;
}

void write_set(std::ostream& os, const CellSet& s) {
  write_header(os, "SET1", s.grid());
  std::vector<std::uint8_t> packed((s.grid().size() + 7) / 8, 0);
  for (std::size_t i = 0; i < s.grid().size(); ++i)
    if (s.contains(i)) packed[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  os.write(reinterpret_cast<const char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
}

CellSet read_set(std::istream& is) {
  Grid g = read_header(is, "SET1");
  std::vector<std::uint8_t> packed((g.size() + 7) / 8);
  is.read(reinterpret_cast<char*>(packed.data()), static_cast<std::streamsize>(packed.size()));
  if (!is) throw Error("truncated SET1 payload");
  std::vector<std::uint8_t> bits(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) bits[i] = (packed[i / 8] >> (i % 8)) & 1u;
  return CellSet(g, std::move(bits));
}

void save_gfn(const std::string& path, const GridFunction& f) {
  auto os = open_out(path);
  write_gfn(os, f);
}

GridFunction load_gfn(const std::string& path) {
  auto is = open_in(path);
  return read_gfn(is);
}

void save_set(const std::string& path, const CellSet& s) {
  auto os = open_out(path);
  write_set(os, s);
}

CellSet load_set(const std::string& path) {
  auto is = open_in(path);
  return read_set(is);
}

}  // namespace regext::io
