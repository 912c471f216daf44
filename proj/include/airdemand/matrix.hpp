#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace airdemand {

// Dense row-major design matrix with integer class labels (0..2), or -1
// for unlabeled rows.
struct FeatureMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;  // rows * cols
  std::vector<int> labels;     // size rows
  std::vector<std::string> column_names;

  double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
  double* row(std::size_t r) { return values.data() + r * cols; }
  const double* row(std::size_t r) const { return values.data() + r * cols; }
};

// Columns that move together under permutation importance: a one-hot
// block, or a single continuous column.
struct FeatureGroup {
  std::string name;
  std::vector<std::size_t> columns;
};

inline FeatureMatrix select_rows(const FeatureMatrix& m,
                                 const std::vector<std::size_t>& idx) {
  FeatureMatrix out;
  out.rows = idx.size();
  out.cols = m.cols;
  out.column_names = m.column_names;
  out.values.resize(out.rows * out.cols);
  out.labels.resize(out.rows);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double* src = m.row(idx[r]);
    std::copy(src, src + m.cols, out.row(r));
    out.labels[r] = m.labels[idx[r]];
  }
  return out;
}

}  // namespace airdemand
