#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "acarec/error.hpp"

namespace acarec::nn {

// Dense row-major matrix. Row vectors are 1 x n matrices.
template <std::floating_point T>
class BasicMatrix {
 public:
  using value_type = T;

  BasicMatrix() = default;
  BasicMatrix(std::size_t rows, std::size_t cols, T fill = T(0))
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static BasicMatrix from_rows(std::initializer_list<std::initializer_list<T>> rows) {
    BasicMatrix m(rows.size(), rows.size() ? rows.begin()->size() : 0);
    std::size_t r = 0;
    for (const auto& row : rows) {
      if (row.size() != m.cols_) fail(ErrorKind::Dimension, "from_rows: ragged initializer");
      std::copy(row.begin(), row.end(), m.row(r++).begin());
    }
    return m;
  }

  static BasicMatrix row_vector(std::span<const T> values) {
    BasicMatrix m(1, values.size());
    std::copy(values.begin(), values.end(), m.data_.begin());
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
  const T& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
  T& operator[](std::size_t i) noexcept { return data_[i]; }
  const T& operator[](std::size_t i) const noexcept { return data_[i]; }

  std::span<T> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<const T> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
  std::span<T> flat() noexcept { return data_; }
  std::span<const T> flat() const noexcept { return data_; }
  T* data() noexcept { return data_.data(); }
  const T* data() const noexcept { return data_.data(); }

  void fill(T value) { std::fill(data_.begin(), data_.end(), value); }
  void set_zero() { fill(T(0)); }

  bool same_shape(const BasicMatrix& other) const noexcept {
    return rows_ == other.rows_ && cols_ == other.cols_;
  }

  template <std::floating_point U>
  BasicMatrix<U> cast() const {
    BasicMatrix<U> out(rows_, cols_);
    std::transform(data_.begin(), data_.end(), out.flat().begin(),
                   [](T v) { return static_cast<U>(v); });
    return out;
  }

  BasicMatrix& operator+=(const BasicMatrix& other) {
    check_same(other, "operator+=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }
  BasicMatrix& operator-=(const BasicMatrix& other) {
    check_same(other, "operator-=");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
  }
  BasicMatrix& operator*=(T s) {
    for (auto& v : data_) v *= s;
    return *this;
  }

  friend bool operator==(const BasicMatrix&, const BasicMatrix&) = default;

 private:
  void check_same(const BasicMatrix& other, const char* what) const {
    if (!same_shape(other)) {
      fail(ErrorKind::Dimension, std::string(what) + ": shape " + shape_string() +
                                     " vs " + other.shape_string());
    }
  }

 public:
  std::string shape_string() const {
    return std::to_string(rows_) + "x" + std::to_string(cols_);
  }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using Matrix = BasicMatrix<float>;
using MatrixD = BasicMatrix<double>;

template <class T>
inline BasicMatrix<T> operator+(BasicMatrix<T> a, const BasicMatrix<T>& b) {
  a += b;
  return a;
}
template <class T>
inline BasicMatrix<T> operator-(BasicMatrix<T> a, const BasicMatrix<T>& b) {
  a -= b;
  return a;
}
template <class T>
inline BasicMatrix<T> operator*(BasicMatrix<T> a, T s) {
  a *= s;
  return a;
}

inline void require(bool ok, const std::string& message) {
  if (!ok) fail(ErrorKind::Dimension, message);
}

// C = A * B
template <class T>
BasicMatrix<T> matmul(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  require(a.cols() == b.rows(), "matmul: " + a.shape_string() + " * " + b.shape_string());
  BasicMatrix<T> c(a.rows(), b.cols());
  const std::size_t n = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    T* crow = c.data() + i * n;
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      if (aik == T(0)) continue;
      const T* brow = b.data() + k * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

// C = A * B^T
template <class T>
BasicMatrix<T> matmul_nt(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  require(a.cols() == b.cols(), "matmul_nt: " + a.shape_string() + " * (" + b.shape_string() + ")^T");
  BasicMatrix<T> c(a.rows(), b.rows());
  const std::size_t inner = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const T* arow = a.data() + i * inner;
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const T* brow = b.data() + j * inner;
      T acc = T(0);
      for (std::size_t k = 0; k < inner; ++k) acc += arow[k] * brow[k];
      c(i, j) = acc;
    }
  }
  return c;
}

// C += A^T * B
template <class T>
void matmul_tn_acc(const BasicMatrix<T>& a, const BasicMatrix<T>& b, BasicMatrix<T>& c) {
  require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
          "matmul_tn: (" + a.shape_string() + ")^T * " + b.shape_string() + " -> " +
              c.shape_string());
  const std::size_t n = b.cols();
  for (std::size_t r = 0; r < a.rows(); ++r) {
    const T* brow = b.data() + r * n;
    for (std::size_t i = 0; i < a.cols(); ++i) {
      const T ari = a(r, i);
      if (ari == T(0)) continue;
      T* crow = c.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += ari * brow[j];
    }
  }
}

template <class T>
BasicMatrix<T> matmul_tn(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  BasicMatrix<T> c(a.cols(), b.cols());
  matmul_tn_acc(a, b, c);
  return c;
}

template <class T>
BasicMatrix<T> transpose(const BasicMatrix<T>& a) {
  BasicMatrix<T> t(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

// [A | B]
template <class T>
BasicMatrix<T> hconcat(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  require(a.rows() == b.rows(), "hconcat: " + a.shape_string() + " | " + b.shape_string());
  BasicMatrix<T> c(a.rows(), a.cols() + b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    std::copy(a.row(i).begin(), a.row(i).end(), c.row(i).begin());
    std::copy(b.row(i).begin(), b.row(i).end(), c.row(i).begin() + a.cols());
  }
  return c;
}

// Columns [begin, begin + count).
template <class T>
BasicMatrix<T> col_slice(const BasicMatrix<T>& a, std::size_t begin, std::size_t count) {
  require(begin + count <= a.cols(), "col_slice out of range");
  BasicMatrix<T> c(a.rows(), count);
  for (std::size_t i = 0; i < a.rows(); ++i)
    std::copy_n(a.row(i).begin() + begin, count, c.row(i).begin());
  return c;
}

template <class T>
void col_slice_add(BasicMatrix<T>& dst, std::size_t begin, const BasicMatrix<T>& src) {
  require(dst.rows() == src.rows() && begin + src.cols() <= dst.cols(), "col_slice_add out of range");
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j) dst(i, begin + j) += src(i, j);
}

template <class T>
BasicMatrix<T> hadamard(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  require(a.same_shape(b), "hadamard: " + a.shape_string() + " vs " + b.shape_string());
  BasicMatrix<T> c(a.rows(), a.cols());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
  return c;
}

template <class T>
BasicMatrix<T> column_mean(const BasicMatrix<T>& a) {
  BasicMatrix<T> m(1, a.cols());
  if (a.rows() == 0) return m;
  for (std::size_t j = 0; j < a.cols(); ++j) {
    double acc = 0;
    for (std::size_t i = 0; i < a.rows(); ++i) acc += static_cast<double>(a(i, j));
    m[j] = static_cast<T>(acc / static_cast<double>(a.rows()));
  }
  return m;
}

// Rows of `src` selected by `index`, in order.
template <class T, class Index>
BasicMatrix<T> gather_rows(const BasicMatrix<T>& src, std::span<const Index> index) {
  BasicMatrix<T> out(index.size(), src.cols());
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto r = static_cast<std::size_t>(index[i]);
    require(r < src.rows(), "gather_rows: index out of range");
    std::copy(src.row(r).begin(), src.row(r).end(), out.row(i).begin());
  }
  return out;
}

template <class T>
T dot(std::span<const T> a, std::span<const T> b) {
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

template <class T>
T squared_norm(const BasicMatrix<T>& a) {
  T acc = T(0);
  for (T v : a.flat()) acc += v * v;
  return acc;
}

template <class T>
bool all_finite(const BasicMatrix<T>& a) {
  return std::all_of(a.flat().begin(), a.flat().end(), [](T v) { return std::isfinite(v); });
}

template <class T>
T max_abs_diff(const BasicMatrix<T>& a, const BasicMatrix<T>& b) {
  require(a.same_shape(b), "max_abs_diff shape mismatch");
  T m = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

template <class T>
T sigmoid(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

}  // namespace acarec::nn
