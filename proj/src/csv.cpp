#include "rdm/csv.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "rdm/errors.hpp"

namespace rdm {

HeaderMode parse_header_mode(std::string_view text) {
  if (text == "yes") return HeaderMode::yes;
  if (text == "no") return HeaderMode::no;
  if (text == "auto") return HeaderMode::detect;
  throw ConfigError("unknown header mode '" + std::string(text) + "' (expected yes, no or auto)");
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '"' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::optional<double> to_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  if (s.front() == '+') s.remove_prefix(1);
  double v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

bool skip_line(const std::string& line) {
  const auto t = trim(line);
  return t.empty() || t.front() == '#';
}

std::ifstream open(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  return in;
}

bool all_numeric(const std::vector<std::string>& fields, std::size_t from) {
  for (std::size_t i = from; i < fields.size(); ++i)
    if (!to_number(fields[i])) return false;
  return true;
}

}  // namespace

std::vector<std::string> split_csv_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    const auto field = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
    out.emplace_back(trim(field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

NumericTable read_numeric_csv(std::istream& in, HeaderMode header) {
  NumericTable table;
  std::string line;
  bool first = true;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    auto fields = split_csv_line(line);
    if (first) {
      first = false;
      const bool is_header =
          header == HeaderMode::yes || (header == HeaderMode::detect && !all_numeric(fields, 0));
      table.columns.resize(fields.size());
      if (is_header) {
        table.names = fields;
        continue;
      }
      for (std::size_t i = 0; i < fields.size(); ++i) table.names.push_back("x" + std::to_string(i + 1));
    }
    if (fields.size() != table.columns.size())
      throw DataError("line " + std::to_string(line_no) + ": expected " +
                      std::to_string(table.columns.size()) + " fields, found " +
                      std::to_string(fields.size()));
    for (std::size_t i = 0; i < fields.size(); ++i) {
      const auto v = to_number(fields[i]);
      if (!v || !std::isfinite(*v))
        throw DataError("line " + std::to_string(line_no) + ": field " + std::to_string(i + 1) +
                        " is not a finite number");
      table.columns[i].push_back(*v);
    }
  }
  return table;
}

NumericTable read_numeric_csv(const std::string& path, HeaderMode header) {
  auto in = open(path);
  return read_numeric_csv(in, header);
}

ScreenTable read_screen_csv(const std::string& path, HeaderMode header) {
  auto in = open(path);
  ScreenTable out;
  std::string line;
  bool first = true;
  std::size_t width = 0;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    auto fields = split_csv_line(line);
    if (fields.size() < 2) throw DataError("line " + std::to_string(line_no) + ": no values");
    if (first) {
      first = false;
      width = fields.size();
      bool is_header = header == HeaderMode::yes;
      if (header == HeaderMode::detect) {
        // A header either has a non-numeric value column or a non-numeric identifier slot
        // followed by numeric time points; data rows carry an identifier and values.
        bool values_numeric = true;
        for (std::size_t i = 1; i < fields.size(); ++i)
          if (!fields[i].empty() && !to_number(fields[i])) values_numeric = false;
        is_header = !values_numeric || fields[0].empty() || fields[0] == "id";
      }
      if (is_header) {
        std::vector<double> times;
        bool numeric = true;
        for (std::size_t i = 1; i < fields.size(); ++i) {
          const auto v = to_number(fields[i]);
          if (!v) numeric = false;
          else times.push_back(*v);
        }
        if (numeric) {
          out.input.response = std::move(times);
          out.response_from_header = true;
        }
        continue;
      }
    }
    if (fields.size() != width)
      throw DataError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                      " fields, found " + std::to_string(fields.size()));
    std::vector<std::optional<double>> values;
    for (std::size_t i = 1; i < fields.size(); ++i) {
      if (fields[i].empty() || fields[i] == "NA" || fields[i] == "NaN") {
        values.push_back(std::nullopt);
        continue;
      }
      const auto v = to_number(fields[i]);
      if (!v) throw DataError("line " + std::to_string(line_no) + ": field " + std::to_string(i + 1) + " is not a number");
      values.push_back(std::isfinite(*v) ? v : std::nullopt);
    }
    out.input.ids.push_back(fields[0]);
    out.input.rows.push_back(std::move(values));
  }
  if (!out.response_from_header && width > 1) {
    out.input.response.resize(width - 1);
    for (std::size_t t = 0; t + 1 < width; ++t) out.input.response[t] = double(t + 1);
  }
  return out;
}

std::vector<double> read_vector_csv(const std::string& path) {
  auto in = open(path);
  std::vector<double> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (skip_line(line)) continue;
    for (const auto& f : split_csv_line(line)) {
      const auto v = to_number(f);
      if (!v) {
        if (out.empty() && line_no == 1) break;  // header line
        throw DataError("line " + std::to_string(line_no) + ": '" + f + "' is not a number");
      }
      out.push_back(*v);
    }
  }
  return out;
}

void write_checkerboard(std::ostream& out, const Checkerboard& a) {
  out << a.rows() << ',' << a.cols() << '\n';
  for (Index k = 0; k < a.rows(); ++k) {
    for (Index l = 0; l < a.cols(); ++l) {
      if (l) out << ',';
      out << format_double(a(k, l));
    }
    out << '\n';
  }
}

namespace {

Checkerboard read_rows(const std::vector<std::vector<double>>& rows) {
  const auto n1 = static_cast<Index>(rows.size());
  const auto n2 = static_cast<Index>(rows.front().size());
  Matrix<double> m(n1, n2);
  for (Index k = 0; k < n1; ++k) {
    if (static_cast<Index>(rows[static_cast<std::size_t>(k)].size()) != n2)
      throw DataError("checkerboard: ragged rows");
    for (Index l = 0; l < n2; ++l) m(k, l) = rows[static_cast<std::size_t>(k)][static_cast<std::size_t>(l)];
  }
  try {
    return Checkerboard(std::move(m));
  } catch (const InvariantError& e) {
    throw DataError(e.what());
  }
}

}  // namespace

Checkerboard read_checkerboard(std::istream& in) {
  std::string line;
  std::vector<std::vector<double>> rows;
  std::optional<std::pair<Index, Index>> dims;
  bool first = true;
  while (std::getline(in, line)) {
    if (skip_line(line)) continue;
    auto fields = split_csv_line(line);
    if (first) {
      first = false;
      if (fields.size() == 2 && fields[0] == "N1" && fields[1] == "N2") continue;
      if (fields.size() == 2) {
        const auto a = to_number(fields[0]);
        const auto b = to_number(fields[1]);
        if (a && b && *a == std::floor(*a) && *b == std::floor(*b) && *a >= 1 && *b >= 1) {
          dims = {static_cast<Index>(*a), static_cast<Index>(*b)};
          continue;
        }
      }
    }
    std::vector<double> row;
    for (const auto& f : fields) {
      const auto v = to_number(f);
      if (!v) throw DataError("checkerboard: '" + f + "' is not a number");
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError("checkerboard: no rows");
  const auto n1 = static_cast<Index>(rows.size());
  const auto n2 = static_cast<Index>(rows.front().size());
  if (dims && (dims->first != n1 || dims->second != n2)) {
    // A two-column matrix whose first row looked like dimensions.
    if (n2 != 2)
      throw DataError("checkerboard: declared dimensions do not match the matrix");
    rows.insert(rows.begin(), {double(dims->first), double(dims->second)});
    return read_rows(rows);
  }
  return read_rows(rows);
}

}  // namespace rdm
