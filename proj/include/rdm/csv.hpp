#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "rdm/checkerboard.hpp"
#include "rdm/inference.hpp"

namespace rdm {

enum class HeaderMode { yes, no, detect };

HeaderMode parse_header_mode(std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double x);

/// Splits one CSV line on commas; surrounding whitespace and double quotes are stripped.
std::vector<std::string> split_csv_line(std::string_view line);

/// Numeric columns of a CSV file without missing values. Lines starting with '#' and blank
/// lines are skipped. Throws DataError on malformed input.
struct NumericTable {
  std::vector<std::string> names;
  std::vector<std::vector<double>> columns;
};
NumericTable read_numeric_csv(std::istream& in, HeaderMode header);
NumericTable read_numeric_csv(const std::string& path, HeaderMode header);

/// Screening dataset: identifier in the first column, one row per series, empty fields are
/// missing. With a header, numeric column names after the first serve as the response.
struct ScreenTable {
  ScreenInput input;
  bool response_from_header = false;
};
ScreenTable read_screen_csv(const std::string& path, HeaderMode header);

/// A single row or single column of numbers.
std::vector<double> read_vector_csv(const std::string& path);

/// First line "N1,N2" with the dimensions, then the N1 rows of the matrix.
void write_checkerboard(std::ostream& out, const Checkerboard& a);
Checkerboard read_checkerboard(std::istream& in);

}  // namespace rdm
