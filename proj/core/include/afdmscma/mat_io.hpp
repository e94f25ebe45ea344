#pragma once

#include <Eigen/Dense>
#include <string>

namespace afdmscma {

// Plain-text complex matrix format: first line "rows cols", then one line per
// row with interleaved "re im" pairs, full double precision.
void save_matrix(const Eigen::MatrixXcd& m, const std::string& path);
Eigen::MatrixXcd load_matrix(const std::string& path);

}  // namespace afdmscma
