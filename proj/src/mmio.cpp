#include "sparsebench/mmio.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <vector>

namespace sparsebench {

namespace {

enum class Field { real, integer, pattern };

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c) != 0; });
}

template <class T>
T parse_number(std::string_view tok, std::size_t lineno, const char* what) {
  if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
  T out{};
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), out);
  if (ec != std::errc() || ptr != tok.data() + tok.size())
    throw ParseError(lineno, std::string("invalid ") + what + " '" + std::string(tok) + "'");
  return out;
}

// Splits text into lines without copying; handles \n and \r\n.
class LineReader {
public:
  explicit LineReader(std::string_view text) : text_(text) {}
  bool next(std::string_view& line) {
    if (pos_ >= text_.size()) return false;
    std::size_t end = text_.find('\n', pos_);
    if (end == std::string_view::npos) end = text_.size();
    line = text_.substr(pos_, end - pos_);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    pos_ = end + 1;
    ++lineno_;
    return true;
  }
  std::size_t lineno() const { return lineno_; }

private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t lineno_ = 0;
};

}  // namespace

CooEntries parse_matrix_market(std::string_view text) {
  LineReader lines(text);
  std::string_view line;
  if (!lines.next(line)) throw ParseError(1, "empty input");

  auto header = split_ws(line);
  if (header.empty() || lower(header[0]) != "%%matrixmarket")
    throw ParseError(1, "missing %%MatrixMarket banner");
  if (header.size() != 5) throw ParseError(1, "banner must have 5 tokens");
  if (lower(header[1]) != "matrix") throw ParseError(1, "unsupported object '" + std::string(header[1]) + "'");
  if (lower(header[2]) != "coordinate")
    throw ParseError(1, "unsupported format '" + std::string(header[2]) + "' (coordinate only)");

  Field field;
  const std::string f = lower(header[3]);
  if (f == "real" || f == "double") field = Field::real;
  else if (f == "integer") field = Field::integer;
  else if (f == "pattern") field = Field::pattern;
  else throw ParseError(1, "unsupported field '" + std::string(header[3]) + "'");

  const std::string sym = lower(header[4]);
  bool symmetric;
  if (sym == "general") symmetric = false;
  else if (sym == "symmetric") symmetric = true;
  else throw ParseError(1, "unsupported symmetry '" + std::string(header[4]) + "'");

  // Skip comments up to the size line.
  do {
    if (!lines.next(line)) throw ParseError(lines.lineno(), "missing size line");
  } while (blank(line) || line.front() == '%');

  auto size = split_ws(line);
  if (size.size() != 3) throw ParseError(lines.lineno(), "size line must be 'rows cols entries'");
  const auto m = parse_number<std::int64_t>(size[0], lines.lineno(), "row count");
  const auto n = parse_number<std::int64_t>(size[1], lines.lineno(), "column count");
  const auto declared = parse_number<std::int64_t>(size[2], lines.lineno(), "entry count");
  constexpr std::int64_t max_index = std::numeric_limits<index_t>::max();
  if (m < 0 || n < 0 || declared < 0 || m > max_index || n > max_index)
    throw ParseError(lines.lineno(), "size out of range");
  if (symmetric && m != n) throw ParseError(lines.lineno(), "symmetric matrix must be square");

  CooEntries coo;
  coo.m = static_cast<index_t>(m);
  coo.n = static_cast<index_t>(n);
  coo.entries.reserve(static_cast<std::size_t>(symmetric ? 2 * declared : declared));

  const std::size_t want_tokens = field == Field::pattern ? 2 : 3;
  std::int64_t seen = 0;
  while (lines.next(line)) {
    if (blank(line) || line.front() == '%') continue;
    if (seen == declared) throw ParseError(lines.lineno(), "more entries than declared");
    auto tok = split_ws(line);
    if (tok.size() != want_tokens)
      throw ParseError(lines.lineno(), "expected " + std::to_string(want_tokens) + " fields");
    const auto i = parse_number<std::int64_t>(tok[0], lines.lineno(), "row index");
    const auto j = parse_number<std::int64_t>(tok[1], lines.lineno(), "column index");
    if (i < 1 || i > m || j < 1 || j > n)
      throw ParseError(lines.lineno(), "index (" + std::to_string(i) + ", " + std::to_string(j) +
                                           ") outside declared " + std::to_string(m) + "x" +
                                           std::to_string(n));
    double v = 1.0;
    if (field == Field::real) v = parse_number<double>(tok[2], lines.lineno(), "value");
    else if (field == Field::integer)
      v = static_cast<double>(parse_number<std::int64_t>(tok[2], lines.lineno(), "integer value"));
    const auto r = static_cast<index_t>(i - 1);
    const auto c = static_cast<index_t>(j - 1);
    coo.entries.push_back({r, c, v});
    if (symmetric && r != c) coo.entries.push_back({c, r, v});
    ++seen;
  }
  if (seen != declared)
    throw ParseError(lines.lineno(), "expected " + std::to_string(declared) + " entries, found " +
                                         std::to_string(seen));
  return coo;
}

CooEntries read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(0, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_matrix_market(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path.string() + ": " + e.detail());
  }
}

std::string format_matrix_market(const CsrMatrix& a) {
  std::string out = "%%MatrixMarket matrix coordinate real general\n";
  out += std::to_string(a.rows()) + " " + std::to_string(a.cols()) + " " + std::to_string(a.nnz()) + "\n";
  out.reserve(out.size() + a.nnz() * 32);
  char buf[64];
  for (index_t i = 0; i < a.rows(); ++i) {
    auto c = a.row_cids(i);
    auto v = a.row_values(i);
    for (std::size_t p = 0; p < c.size(); ++p) {
      out += std::to_string(i + 1);
      out += ' ';
      out += std::to_string(c[p] + 1);
      out += ' ';
      // Shortest representation that parses back to the same double.
      auto res = std::to_chars(buf, buf + sizeof buf, v[p]);
      out.append(buf, res.ptr);
      out += '\n';
    }
  }
  return out;
}

void write_matrix_market(const CsrMatrix& a, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  const std::string text = format_matrix_market(a);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  out.flush();
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace sparsebench
