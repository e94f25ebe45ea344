#include "afdmscma/mat_io.hpp"

#include <fstream>
#include <iomanip>
#include <stdexcept>

namespace afdmscma {

void save_matrix(const Eigen::MatrixXcd& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("mat_io: cannot write " + path);
  out << m.rows() << " " << m.cols() << "\n";
  out << std::setprecision(17);
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      out << m(r, c).real() << " " << m(r, c).imag();
      out << (c + 1 < m.cols() ? " " : "\n");
    }
    if (m.cols() == 0) out << "\n";
  }
}

Eigen::MatrixXcd load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("mat_io: cannot open " + path);
  Eigen::Index rows = 0, cols = 0;
  in >> rows >> cols;
  if (!in || rows < 0 || cols < 0) throw std::runtime_error("mat_io: malformed header");
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      double re = 0.0, im = 0.0;
      in >> re >> im;
      if (!in) throw std::runtime_error("mat_io: truncated matrix body");
      m(r, c) = {re, im};
    }
  return m;
}

}  // namespace afdmscma
