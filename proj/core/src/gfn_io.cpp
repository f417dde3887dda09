#include "gnslab/gfn_io.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <vector>

#include <json.hpp>

#include "gnslab/errors.hpp"

namespace gnslab {

namespace {

using nlohmann::json;

double decode_f64le(const unsigned char* b) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | b[i];
  }
  return std::bit_cast<double>(bits);
}

void encode_f64le(double v, unsigned char* b) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    b[i] = static_cast<unsigned char>(bits >> (8 * i));
  }
}

}  // namespace

GridFunction read_gfn(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) {
    throw FormatError("GFN: missing header line");
  }
  json h;
  try {
    h = json::parse(header);
  } catch (const json::exception& e) {
    throw FormatError(std::string("GFN: header is not valid JSON: ") + e.what());
  }
  if (!h.is_object() || !h.contains("magic") || !h["magic"].is_string() ||
      h["magic"].get<std::string>() != "GFN1") {
    throw FormatError("GFN: bad magic, expected \"GFN1\"");
  }
  for (const char* key : {"dim", "shape", "spacing", "origin", "dtype"}) {
    if (!h.contains(key)) {
      throw FormatError(std::string("GFN: header missing field \"") + key + "\"");
    }
  }
  if (!h["dtype"].is_string() || h["dtype"].get<std::string>() != "f64le") {
    throw FormatError("GFN: unsupported dtype, expected \"f64le\"");
  }
  if (!h["dim"].is_number_integer() || h["dim"].get<long long>() < 1) {
    throw FormatError("GFN: dim must be a positive integer");
  }
  const std::size_t dim = h["dim"].get<std::size_t>();
  if (!h["shape"].is_array() || h["shape"].size() != dim ||
      !h["spacing"].is_array() || h["spacing"].size() != dim ||
      !h["origin"].is_array() || h["origin"].size() != dim) {
    throw FormatError("GFN: shape, spacing and origin must be arrays of length dim");
  }
  std::vector<std::size_t> shape(dim);
  std::vector<double> spacing(dim);
  std::size_t cells = 1;
  for (std::size_t k = 0; k < dim; ++k) {
    if (!h["shape"][k].is_number_integer() || h["shape"][k].get<long long>() < 1) {
      throw FormatError("GFN: shape entries must be positive integers");
    }
    shape[k] = h["shape"][k].get<std::size_t>();
    if (!h["spacing"][k].is_number() ) {
      throw FormatError("GFN: spacing entries must be numbers");
    }
    spacing[k] = h["spacing"][k].get<double>();
    if (!h["origin"][k].is_number() || h["origin"][k].get<double>() != 0.0) {
      throw FormatError("GFN: origin must be all zeros (grids are origin-centered)");
    }
    cells *= shape[k];
  }

  std::vector<double> values(cells);
  std::vector<unsigned char> buf(cells * 8);
  in.read(reinterpret_cast<char*>(buf.data()),
          static_cast<std::streamsize>(buf.size()));
  if (static_cast<std::size_t>(in.gcount()) != buf.size()) {
    throw FormatError("GFN: payload truncated, expected " +
                      std::to_string(cells) + " values");
  }
  char extra;
  if (in.read(&extra, 1), in.gcount() != 0) {
    throw FormatError("GFN: trailing bytes after payload");
  }
  for (std::size_t i = 0; i < cells; ++i) {
    values[i] = decode_f64le(buf.data() + 8 * i);
    if (!std::isfinite(values[i])) {
      throw FormatError("GFN: payload contains a non-finite value at index " +
                        std::to_string(i));
    }
  }
  try {
    return GridFunction(std::move(shape), std::move(spacing), std::move(values));
  } catch (const ValidationError& e) {
    throw FormatError(std::string("GFN: ") + e.what());
  }
}

GridFunction read_gfn_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw FormatError("GFN: cannot open " + path);
  }
  return read_gfn(in);
}

void write_gfn(std::ostream& out, const GridFunction& u) {
  json h;
  h["magic"] = "GFN1";
  h["dim"] = u.dim();
  h["shape"] = u.shape();
  h["spacing"] = u.spacing();
  h["origin"] = std::vector<double>(u.dim(), 0.0);
  h["dtype"] = "f64le";
  out << h.dump() << '\n';
  std::vector<unsigned char> buf(u.size() * 8);
  for (std::size_t i = 0; i < u.size(); ++i) {
    encode_f64le(u.values()[i], buf.data() + 8 * i);
  }
  out.write(reinterpret_cast<const char*>(buf.data()),
            static_cast<std::streamsize>(buf.size()));
  if (!out) {
    throw NumericalError("GFN: write failed");
  }
}

void write_gfn_file(const std::string& path, const GridFunction& u) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw FormatError("GFN: cannot open " + path + " for writing");
  }
  write_gfn(out, u);
}

}  // namespace gnslab
