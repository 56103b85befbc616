#pragma once

// Dense matrices as CSV: one row per line, comma separated, written with
// enough digits to round-trip every double.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace wgcs {

void write_matrix_csv(std::ostream& os, const Eigen::MatrixXd& m);
void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& m);
std::string matrix_to_csv(const Eigen::MatrixXd& m);

/// Throws StructuralError on ragged rows or unparsable fields.
Eigen::MatrixXd read_matrix_csv(std::istream& is);
Eigen::MatrixXd read_matrix_csv(const std::string& path);
Eigen::MatrixXd matrix_from_csv(const std::string& text);

}  // namespace wgcs
