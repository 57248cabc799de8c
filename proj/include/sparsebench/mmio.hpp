#pragma once

#include <filesystem>
#include <istream>
#include <string>
#include <string_view>

#include "sparsebench/matrix.hpp"

namespace sparsebench {

/// Coordinate-format Matrix Market reader. Supports real/integer/pattern
/// fields with general/symmetric storage; symmetric files are expanded to
/// both triangles. Indices become 0-based. Errors carry the line number.
CooEntries read_matrix_market(const std::filesystem::path& path);
CooEntries parse_matrix_market(std::string_view text);

/// Writes "coordinate real general" with round-trip exact values.
void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path);
std::string format_matrix_market(const CsrMatrix& a);

inline CsrMatrix load_matrix_market(const std::filesystem::path& path) {
  return csr_from_coo(read_matrix_market(path));
}

}  // namespace sparsebench
