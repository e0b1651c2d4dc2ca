#pragma once

// Plain numeric CSV: comma separated, '.' decimal point, no quoting.
// Reals are written in shortest round-trip form so doubles read back exactly.

#include <iosfwd>
#include <stdexcept>
#include <string>
#include <string_view>

#include <Eigen/Dense>

namespace tyshrink::csv {

/// Thrown for malformed input; carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Reads a rectangular numeric table. With skip_header the first non-empty
/// line is ignored. Blank lines are skipped.
Eigen::MatrixXd read_matrix(std::istream& in, bool skip_header = false);
Eigen::MatrixXd read_matrix_file(const std::string& path, bool skip_header = false);

std::string format_real(double value);
double parse_real(std::string_view text);

void write_matrix(std::ostream& out, const Eigen::Ref<const Eigen::MatrixXd>& m);
void write_matrix_file(const std::string& path, const Eigen::Ref<const Eigen::MatrixXd>& m);

}  // namespace tyshrink::csv
