#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <vector>

#include "cgc/errors.hpp"

namespace cgc {

/// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols);
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  Matrix transpose() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

Matrix operator*(const Matrix& a, const Matrix& b);

/// y = M x
std::vector<double> multiply(const Matrix& m, std::span<const double> x);
/// y = Mᵀ x
std::vector<double> multiply_transposed(const Matrix& m, std::span<const double> x);

struct Shape {
  std::size_t rows = 0;
  std::size_t cols = 0;

  std::size_t size() const { return rows * cols; }
  friend bool operator==(const Shape&, const Shape&) = default;
};

/// Flat parameter vector partitioned into per-layer row-major matrices.
///
/// The flat order (layer-major, then row, then column) is the canonical
/// edge order of a network: layer k holds an out×in matrix whose entry
/// (target, source) is the weight of edge source→target.
class ParamBlock {
 public:
  ParamBlock() = default;
  explicit ParamBlock(std::vector<Shape> shapes);

  /// Single 1×d layer holding `values`.
  static ParamBlock vector(std::vector<double> values);
  static ParamBlock from_matrices(std::span<const Matrix> layers);

  std::size_t size() const { return values_.size(); }
  std::size_t num_layers() const { return shapes_.size(); }
  const std::vector<Shape>& shapes() const { return shapes_; }
  Shape shape(std::size_t k) const { return shapes_[k]; }
  std::size_t offset(std::size_t k) const { return offsets_[k]; }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  std::span<double> layer(std::size_t k) { return {values_.data() + offsets_[k], shapes_[k].size()}; }
  std::span<const double> layer(std::size_t k) const {
    return {values_.data() + offsets_[k], shapes_[k].size()};
  }

  double& operator()(std::size_t k, std::size_t r, std::size_t c) {
    return values_[offsets_[k] + r * shapes_[k].cols + c];
  }
  double operator()(std::size_t k, std::size_t r, std::size_t c) const {
    return values_[offsets_[k] + r * shapes_[k].cols + c];
  }
  double& operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  Matrix layer_matrix(std::size_t k) const;
  void set_layer(std::size_t k, const Matrix& m);

  /// Same layer shapes, all zeros.
  ParamBlock zeros_like() const { return ParamBlock(shapes_); }
  bool same_shape(const ParamBlock& other) const { return shapes_ == other.shapes_; }

  friend bool operator==(const ParamBlock&, const ParamBlock&) = default;

 private:
  std::vector<Shape> shapes_;
  std::vector<std::size_t> offsets_;
  std::vector<double> values_;
};

/// Largest singular value with its unit singular vectors.
struct SingularTriple {
  double sigma = 0.0;
  std::vector<double> u;
  std::vector<double> v;
};

/// power_method hit max_iter; `best` is the last iterate.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, SingularTriple best)
      : Error(what), best_(std::move(best)) {}
  const SingularTriple& best() const { return best_; }

 private:
  SingularTriple best_;
};

double frobenius_norm(const Matrix& m);
double norm2(std::span<const double> x);
double norm1(std::span<const double> x);
double norm_inf(std::span<const double> x);

/// Σ aᵢbᵢ; throws DimensionError on length mismatch.
double dot(std::span<const double> a, std::span<const double> b);
double dot(const ParamBlock& a, const ParamBlock& b);

/// Top singular triple by Gram iteration v ← normalize(MᵀMv).
///
/// Starts from a unit vector drawn from `seed` and stops once the Rayleigh
/// quotient ‖Mv‖² changes by at most tol relative to its value. On return
/// u = Mv/σ, so ‖Mv − σu‖ vanishes up to rounding. Throws
/// DegenerateInputError for a zero (or empty) matrix and ConvergenceError
/// after max_iter iterations.
SingularTriple power_method(const Matrix& m, double tol, std::size_t max_iter, std::uint64_t seed);

/// Sum of singular values. Used for reporting constraint values only.
double nuclear_norm(const Matrix& m);

}  // namespace cgc
