#pragma once

// Matrix Market coordinate files: real/integer, symmetric or general,
// 1-based indices, '%' comment lines.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "reprocg/csr_matrix.hpp"
#include "reprocg/errors.hpp"

namespace reprocg {

enum class MatrixSymmetry { general, symmetric };

namespace detail {

inline std::string lowercase(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace detail

/// Reads a coordinate real matrix. Symmetric files store one triangle and
/// are mirrored; general files must already be symmetric. Duplicate entries
/// are summed.
[[nodiscard]] inline CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw parse_error("empty Matrix Market stream", 0);
  ++lineno;
  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw parse_error("missing %%MatrixMarket banner", lineno);
  object = detail::lowercase(object);
  format = detail::lowercase(format);
  field = detail::lowercase(field);
  symmetry = detail::lowercase(symmetry);
  if (object != "matrix" || format != "coordinate")
    throw parse_error("only 'matrix coordinate' files are supported", lineno);
  if (field == "pattern") throw precondition_error("Matrix Market pattern matrices carry no values");
  if (field != "real" && field != "integer" && field != "double")
    throw parse_error("unsupported field '" + field + "'", lineno);
  MatrixSymmetry sym;
  if (symmetry == "symmetric") sym = MatrixSymmetry::symmetric;
  else if (symmetry == "general") sym = MatrixSymmetry::general;
  else throw parse_error("unsupported symmetry '" + symmetry + "'", lineno);

  // Size line, after comments and blank lines.
  std::size_t rows = 0, cols = 0, entries = 0;
  for (;;) {
    if (!std::getline(in, line)) throw parse_error("missing size line", lineno);
    ++lineno;
    if (line.empty() || line[0] == '%' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream sz(line);
    if (!(sz >> rows >> cols >> entries)) throw parse_error("malformed size line", lineno);
    break;
  }
  if (rows != cols) throw precondition_error("Matrix Market matrix is not square");

  std::vector<Triplet> triplets;
  triplets.reserve(sym == MatrixSymmetry::symmetric ? 2 * entries : entries);
  std::size_t seen = 0;
  while (seen < entries && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const char* p = line.c_str();
    char* end = nullptr;
    const long long i = std::strtoll(p, &end, 10);
    if (end == p) throw parse_error("bad row index", lineno);
    p = end;
    const long long j = std::strtoll(p, &end, 10);
    if (end == p) throw parse_error("bad column index", lineno);
    p = end;
    const double v = std::strtod(p, &end);
    if (end == p) throw parse_error("missing value", lineno);
    if (i < 1 || j < 1 || static_cast<std::size_t>(i) > rows || static_cast<std::size_t>(j) > cols)
      throw parse_error("index out of range", lineno);
    const auto r = static_cast<std::size_t>(i - 1);
    const auto c = static_cast<std::size_t>(j - 1);
    triplets.push_back({r, c, v});
    if (sym == MatrixSymmetry::symmetric && r != c) triplets.push_back({c, r, v});
    ++seen;
  }
  if (seen != entries) throw parse_error("file ends before all entries were read", lineno);
  CsrMatrix a = assemble_csr(rows, std::move(triplets));
  if (sym == MatrixSymmetry::general && !a.is_symmetric())
    throw precondition_error("general Matrix Market matrix is not symmetric");
  return a;
}

[[nodiscard]] inline CsrMatrix load_matrix_market(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_matrix_market(in);
}

/// Writes every stored entry (general) or the lower triangle (symmetric),
/// values in shortest round-trip decimal.
inline void write_matrix_market(std::ostream& out, const CsrMatrix& a,
                                MatrixSymmetry sym = MatrixSymmetry::general) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (auto c : a.row_cols(i))
      if (sym == MatrixSymmetry::general || static_cast<std::size_t>(c) <= i) ++count;
  out << "%%MatrixMarket matrix coordinate real " << (sym == MatrixSymmetry::general ? "general" : "symmetric")
      << "\n";
  out << a.rows() << ' ' << a.rows() << ' ' << count << '\n';
  char buf[64];
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto cols = a.row_cols(i);
    const auto vals = a.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const auto c = static_cast<std::size_t>(cols[k]);
      if (sym == MatrixSymmetry::symmetric && c > i) continue;
      const auto res = std::to_chars(buf, buf + sizeof buf, vals[k]);
      out << i + 1 << ' ' << c + 1 << ' ' << std::string_view(buf, static_cast<std::size_t>(res.ptr - buf)) << '\n';
    }
  }
}

inline void save_matrix_market(const std::string& path, const CsrMatrix& a,
                               MatrixSymmetry sym = MatrixSymmetry::general) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  write_matrix_market(out, a, sym);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace reprocg
