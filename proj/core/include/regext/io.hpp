#pragma once

#include <iosfwd>
#include <string>

#include "regext/grid.hpp"

namespace regext::io {

// Binary layouts (all little-endian):
//   GFN1: "GFN1", u32 n, u32 dims[n], f64 origin[n], f64 h, f64 values[cells]
//   SET1: "SET1", same header, then cell bits packed LSB-first in flat order,
//         zero-padded to a byte boundary.

void write_gfn(std::ostream& os, const GridFunction& f);
GridFunction read_gfn(std::istream& is);
void write_set(std::ostream& os, const CellSet& s);
CellSet read_set(std::istream& is);

void save_gfn(const std::string& path, const GridFunction& f);
GridFunction load_gfn(const std::string& path);
void save_set(const std::string& path, const CellSet& s);
CellSet load_set(const std::string& path);

}  // namespace regext::io
