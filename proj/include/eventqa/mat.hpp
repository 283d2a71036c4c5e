#ifndef EVENTQA_MAT_HPP
#define EVENTQA_MAT_HPP

#include <cassert>
#include <cstddef>
#include <vector>

namespace eventqa {

// Dense row-major matrix of doubles. All model math is 64-bit so gradient
// checks against central finite differences are meaningful.
struct Mat {
  int rows = 0;
  int cols = 0;
  std::vector<double> a;

  Mat() = default;
  Mat(int r, int c, double fill = 0.0) : rows(r), cols(c), a(static_cast<size_t>(r) * c, fill) {}

  double& at(int r, int c) {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return a[static_cast<size_t>(r) * cols + c];
  }
  double at(int r, int c) const {
    assert(r >= 0 && r < rows && c >= 0 && c < cols);
    return a[static_cast<size_t>(r) * cols + c];
  }

  int size() const { return rows * cols; }
  bool same_shape(const Mat& o) const { return rows == o.rows && cols == o.cols; }

  void fill(double v) { std::fill(a.begin(), a.end(), v); }
  void zero() { fill(0.0); }

  static Mat scalar(double v) {
    Mat m(1, 1);
    m.a[0] = v;
    return m;
  }

  static Mat row_vector(const std::vector<double>& v) {
    Mat m(1, static_cast<int>(v.size()));
    m.a = v;
    return m;
  }

  static Mat col_vector(const std::vector<double>& v) {
    Mat m(static_cast<int>(v.size()), 1);
    m.a = v;
    return m;
  }
};

inline void matmul_into(const Mat& a, const Mat& b, Mat& out, bool accumulate = false) {
  assert(a.cols == b.rows);
  if (!accumulate) {
    out = Mat(a.rows, b.cols);
  }
  assert(out.rows == a.rows && out.cols == b.cols);
  for (int i = 0; i < a.rows; ++i) {
    for (int k = 0; k < a.cols; ++k) {
      double aik = a.at(i, k);
      if (aik == 0.0) continue;
      const double* brow = &b.a[static_cast<size_t>(k) * b.cols];
      double* orow = &out.a[static_cast<size_t>(i) * out.cols];
      for (int j = 0; j < b.cols; ++j) orow[j] += aik * brow[j];
    }
  }
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat out;
  matmul_into(a, b, out);
  return out;
}

inline Mat transpose(const Mat& m) {
  Mat out(m.cols, m.rows);
  for (int i = 0; i < m.rows; ++i)
    for (int j = 0; j < m.cols; ++j) out.at(j, i) = m.at(i, j);
  return out;
}

}  // namespace eventqa

#endif  // EVENTQA_MAT_HPP
