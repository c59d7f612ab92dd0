#pragma once

// Dense vectors and small matrices with the norm and eigenvalue primitives
// used throughout the library. Summation always runs in ascending index
// order so that results are bit-reproducible.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "relugd/errors.hpp"

namespace relugd {

namespace detail {

inline void require_finite(std::span<const double> values, const char* what) {
  for (double v : values) {
    if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite entry");
  }
}

}  // namespace detail

// Finite vector of doubles, length >= 1.
class RealVector {
 public:
  RealVector() = default;
  explicit RealVector(std::vector<double> values) : values_(std::move(values)) { validate(); }
  RealVector(std::initializer_list<double> values) : values_(values) { validate(); }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](std::size_t i) const noexcept { return values_[i]; }
  std::span<const double> span() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }
  const std::vector<double>& values() const noexcept { return values_; }

  friend bool operator==(const RealVector&, const RealVector&) = default;

 private:
  void validate() const {
    if (values_.empty()) throw DimensionError("RealVector: empty");
    detail::require_finite(values_, "RealVector");
  }

  std::vector<double> values_;
};

// Row-major rows x cols matrix with finite entries.
class RectMatrix {
 public:
  RectMatrix() = default;
  RectMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {
    if (rows == 0 || cols == 0) throw DimensionError("RectMatrix: zero dimension");
  }
  RectMatrix(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0) throw DimensionError("RectMatrix: zero dimension");
    if (data_.size() != rows * cols) throw DimensionError("RectMatrix: data size mismatch");
    detail::require_finite(data_, "RectMatrix");
  }
  RectMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ == 0 ? 0 : rows.begin()->size();
    if (rows_ == 0 || cols_ == 0) throw DimensionError("RectMatrix: zero dimension");
    for (const auto& r : rows) {
      if (r.size() != cols_) throw DimensionError("RectMatrix: ragged rows");
      data_.insert(data_.end(), r.begin(), r.end());
    }
    detail::require_finite(data_, "RectMatrix");
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * cols_ + j]; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  std::span<const double> row(std::size_t i) const noexcept { return {data_.data() + i * cols_, cols_}; }
  std::span<const double> data() const noexcept { return data_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// Square matrix whose entries satisfy a(i,j) == a(j,i) exactly.
class SymMatrix {
 public:
  // Relative asymmetry accepted by from_square before symmetrizing.
  static constexpr double kSymmetryTolerance = 1e-12;

  SymMatrix() = default;
  explicit SymMatrix(std::size_t order) : order_(order), data_(order * order, 0.0) {
    if (order == 0) throw DimensionError("SymMatrix: zero order");
  }
  SymMatrix(std::initializer_list<std::initializer_list<double>> rows) {
    *this = from_square(RectMatrix(rows));
  }

  // Accepts a square matrix that is symmetric up to kSymmetryTolerance relative
  // to its largest entry and stores the averaged symmetric part.
  static SymMatrix from_square(const RectMatrix& a) {
    if (a.rows() != a.cols()) throw DimensionError("SymMatrix: matrix is not square");
    const std::size_t n = a.rows();
    double scale = 1.0;
    for (double v : a.data()) scale = std::max(scale, std::abs(v));
    SymMatrix s(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i; j < n; ++j) {
        const double aij = a(i, j);
        const double aji = a(j, i);
        if (std::abs(aij - aji) > kSymmetryTolerance * scale) {
          throw ContractError("SymMatrix: asymmetric input at (" + std::to_string(i) + "," +
                              std::to_string(j) + ")");
        }
        s.set(i, j, i == j ? aij : 0.5 * (aij + aji));
      }
    }
    return s;
  }

  std::size_t order() const noexcept { return order_; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * order_ + j]; }
  void set(std::size_t i, std::size_t j, double v) {
    if (!std::isfinite(v)) throw DomainError("SymMatrix: non-finite entry");
    data_[i * order_ + j] = v;
    data_[j * order_ + i] = v;
  }
  std::span<const double> data() const noexcept { return data_; }

  RectMatrix as_rect() const { return RectMatrix(order_, order_, data_); }

  friend bool operator==(const SymMatrix&, const SymMatrix&) = default;

 private:
  std::size_t order_ = 0;
  std::vector<double> data_;
};

inline double scalar_product(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw DimensionError("scalar_product: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) acc += u[i] * v[i];
  return acc;
}

inline double euclidean_norm(std::span<const double> v) {
  if (v.empty()) throw DimensionError("euclidean_norm: empty vector");
  detail::require_finite(v, "euclidean_norm");
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

inline double frobenius_norm(const RectMatrix& a) { return euclidean_norm(a.data()); }

inline double entrywise_abs_sum(const RectMatrix& a) {
  double acc = 0.0;
  for (double v : a.data()) acc += std::abs(v);
  return acc;
}

inline std::vector<double> multiply(const RectMatrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) throw DimensionError("multiply: length mismatch");
  std::vector<double> out(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) out[i] = scalar_product(a.row(i), x);
  return out;
}

// <x, A x>
inline double quadratic_form(const SymMatrix& a, std::span<const double> x) {
  if (x.size() != a.order()) throw DimensionError("quadratic_form: length mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.order(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < a.order(); ++j) row += a(i, j) * x[j];
    acc += x[i] * row;
  }
  return acc;
}

inline SymMatrix difference(const SymMatrix& a, const SymMatrix& b) {
  if (a.order() != b.order()) throw DimensionError("difference: order mismatch");
  SymMatrix out(a.order());
  for (std::size_t i = 0; i < a.order(); ++i)
    for (std::size_t j = i; j < a.order(); ++j) out.set(i, j, a(i, j) - b(i, j));
  return out;
}

// A^T A, accumulated in ascending index order.
inline SymMatrix normal_matrix(const RectMatrix& a) {
  SymMatrix out(a.cols());
  for (std::size_t i = 0; i < a.cols(); ++i) {
    for (std::size_t j = i; j < a.cols(); ++j) {
      double acc = 0.0;
      for (std::size_t r = 0; r < a.rows(); ++r) acc += a(r, i) * a(r, j);
      out.set(i, j, acc);
    }
  }
  return out;
}

struct JacobiOptions {
  double rotation_threshold = 1e-14;
  int max_sweeps = 100;
};

// All eigenvalues of a symmetric matrix, ascending, by cyclic Jacobi rotations.
inline std::vector<double> symmetric_eigenvalues(const SymMatrix& s, JacobiOptions opts = {}) {
  const std::size_t n = s.order();
  std::vector<double> a(s.data().begin(), s.data().end());
  auto at = [&](std::size_t i, std::size_t j) -> double& { return a[i * n + j]; };

  double scale = 0.0;
  for (double v : a) scale += v * v;
  scale = std::sqrt(scale);

  for (int sweep = 0; sweep < opts.max_sweeps && scale > 0.0; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * at(p, q) * at(p, q);
    if (std::sqrt(off) <= opts.rotation_threshold * scale) break;

    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = at(p, q);
        if (apq == 0.0) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        at(p, p) -= t * apq;
        at(q, q) += t * apq;
        at(p, q) = 0.0;
        at(q, p) = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
          if (k == p || k == q) continue;
          const double akp = at(k, p);
          const double akq = at(k, q);
          const double new_kp = c * akp - sn * akq;
          const double new_kq = sn * akp + c * akq;
          at(k, p) = new_kp;
          at(p, k) = new_kp;
          at(k, q) = new_kq;
          at(q, k) = new_kq;
        }
      }
    }
  }

  std::vector<double> eig(n);
  for (std::size_t i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

inline double lambda_min(const SymMatrix& a) { return symmetric_eigenvalues(a).front(); }

inline double lambda_max(const SymMatrix& a) { return symmetric_eigenvalues(a).back(); }

// Largest singular value, sqrt(lambda_max(A^T A)).
inline double spectral_norm(const RectMatrix& a) {
  detail::require_finite(a.data(), "spectral_norm");
  return std::sqrt(std::max(0.0, lambda_max(normal_matrix(a))));
}

inline double spectral_norm(const SymMatrix& a) { return spectral_norm(a.as_rect()); }

}  // namespace relugd
