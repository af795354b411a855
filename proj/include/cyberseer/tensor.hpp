// Row-major 2-D tensor of doubles, the carrier for feature matrices and
// model parameters.
#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "cyberseer/common.hpp"

namespace cyberseer {

struct Tensor2 {
  size_t rows = 0;
  size_t cols = 0;
  std::vector<double> data;  // row-major, rows*cols

  Tensor2() = default;
  Tensor2(size_t r, size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {
    if (r == 0 || c == 0) fail(ErrorKind::shape_error, "tensor dimensions must be positive");
  }

  static Tensor2 from_rows(const std::vector<std::vector<double>>& rows_in) {
    if (rows_in.empty() || rows_in[0].empty())
      fail(ErrorKind::shape_error, "from_rows: empty input");
    Tensor2 t(rows_in.size(), rows_in[0].size());
    for (size_t r = 0; r < rows_in.size(); ++r) {
      if (rows_in[r].size() != t.cols) fail(ErrorKind::shape_error, "from_rows: ragged rows");
      for (size_t c = 0; c < t.cols; ++c) t.at(r, c) = rows_in[r][c];
    }
    return t;
  }

  static Tensor2 column(const std::vector<double>& v) {
    Tensor2 t(v.size(), 1);
    t.data = v;
    return t;
  }

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }
  double* row_ptr(size_t r) { return data.data() + r * cols; }
  const double* row_ptr(size_t r) const { return data.data() + r * cols; }
  size_t size() const { return data.size(); }

  bool same_shape(const Tensor2& o) const { return rows == o.rows && cols == o.cols; }

  void check_finite(const std::string& what) const {
    for (double v : data)
      if (!std::isfinite(v)) fail(ErrorKind::numerical_failure, what + ": non-finite value");
  }
};

}  // namespace cyberseer
