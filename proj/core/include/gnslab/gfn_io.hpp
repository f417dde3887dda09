#pragma once

#include <iosfwd>
#include <string>

#include "gnslab/grid_function.hpp"

namespace gnslab {

/// GFN container: one UTF-8 JSON header line
///   {"magic":"GFN1","dim":n,"shape":[...],"spacing":[...],"origin":[...],
///    "dtype":"f64le"}
/// terminated by '\n', followed by product(shape) IEEE-754 binary64
/// little-endian values, row-major with the last axis fastest. The origin
/// array must be all zeros (grids are centered at the origin).
GridFunction read_gfn(std::istream& in);
GridFunction read_gfn_file(const std::string& path);

void write_gfn(std::ostream& out, const GridFunction& u);
void write_gfn_file(const std::string& path, const GridFunction& u);

}  // namespace gnslab
