#include "cgc/linalg.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace cgc {

Matrix::Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw DimensionError("matrix data has " + std::to_string(data_.size()) + " entries, expected " +
                         std::to_string(rows_ * cols_));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.reserve(rows_ * cols_);
  for (const auto& r : rows) {
    if (r.size() != cols_) throw DimensionError("ragged matrix literal");
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t r = 0; r < rows_; ++r)
    for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
  return t;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw DimensionError("matrix product: inner dimensions differ");
  Matrix out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  }
  return out;
}

std::vector<double> multiply(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.cols()) throw DimensionError("matrix-vector product: length mismatch");
  std::vector<double> y(m.rows(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    y[r] = std::inner_product(row.begin(), row.end(), x.begin(), 0.0);
  }
  return y;
}

std::vector<double> multiply_transposed(const Matrix& m, std::span<const double> x) {
  if (x.size() != m.rows()) throw DimensionError("transposed matrix-vector product: length mismatch");
  std::vector<double> y(m.cols(), 0.0);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const double xr = x[r];
    const auto row = m.row(r);
    for (std::size_t c = 0; c < m.cols(); ++c) y[c] += row[c] * xr;
  }
  return y;
}

ParamBlock::ParamBlock(std::vector<Shape> shapes) : shapes_(std::move(shapes)) {
  offsets_.reserve(shapes_.size());
  std::size_t total = 0;
  for (const auto& s : shapes_) {
    offsets_.push_back(total);
    total += s.size();
  }
  values_.assign(total, 0.0);
}

ParamBlock ParamBlock::vector(std::vector<double> values) {
  ParamBlock p({Shape{1, values.size()}});
  p.values_ = std::move(values);
  return p;
}

ParamBlock ParamBlock::from_matrices(std::span<const Matrix> layers) {
  std::vector<Shape> shapes;
  shapes.reserve(layers.size());
  for (const auto& m : layers) shapes.push_back({m.rows(), m.cols()});
  ParamBlock p(std::move(shapes));
  for (std::size_t k = 0; k < layers.size(); ++k) p.set_layer(k, layers[k]);
  return p;
}

Matrix ParamBlock::layer_matrix(std::size_t k) const {
  const auto src = layer(k);
  return Matrix(shapes_[k].rows, shapes_[k].cols, std::vector<double>(src.begin(), src.end()));
}

void ParamBlock::set_layer(std::size_t k, const Matrix& m) {
  if (Shape{m.rows(), m.cols()} != shapes_[k]) throw DimensionError("set_layer: shape mismatch");
  std::copy(m.data().begin(), m.data().end(), layer(k).begin());
}

double frobenius_norm(const Matrix& m) { return norm2(m.data()); }

double norm2(std::span<const double> x) {
  // Scaled accumulation so huge weights (path-norm runs with λ ~ 1e12) do not overflow.
  double scale = 0.0;
  for (double v : x) scale = std::max(scale, std::abs(v));
  if (scale == 0.0) return 0.0;
  double sum = 0.0;
  for (double v : x) {
    const double s = v / scale;
    sum += s * s;
  }
  return scale * std::sqrt(sum);
}

double norm1(std::span<const double> x) {
  double sum = 0.0;
  for (double v : x) sum += std::abs(v);
  return sum;
}

double norm_inf(std::span<const double> x) {
  double m = 0.0;
  for (double v : x) m = std::max(m, std::abs(v));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw DimensionError("dot: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
  }
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double dot(const ParamBlock& a, const ParamBlock& b) {
  if (!a.same_shape(b)) throw DimensionError("dot: parameter blocks have different layer shapes");
  return dot(a.values(), b.values());
}

namespace {

void normalize(std::vector<double>& x) {
  const double n = norm2(x);
  for (double& v : x) v /= n;
}

}  // namespace

SingularTriple power_method(const Matrix& m, double tol, std::size_t max_iter, std::uint64_t seed) {
  if (m.empty() || norm_inf(m.data()) == 0.0) {
    throw DegenerateInputError("power_method: zero matrix has no top singular direction");
  }
  if (!(tol > 0.0)) throw DegenerateInputError("power_method: tolerance must be positive");

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> v(m.cols());
  for (double& x : v) x = normal(rng);
  normalize(v);

  std::vector<double> mv = multiply(m, v);
  double rayleigh = dot(mv, mv);
  if (rayleigh == 0.0) {
    // Unlucky start in the null space; restart along a canonical basis vector that is not.
    for (std::size_t j = 0; j < m.cols() && rayleigh == 0.0; ++j) {
      std::fill(v.begin(), v.end(), 0.0);
      v[j] = 1.0;
      mv = multiply(m, v);
      rayleigh = dot(mv, mv);
    }
  }

  auto finish = [&]() {
    SingularTriple t;
    t.sigma = norm2(mv);
    t.u = mv;
    for (double& x : t.u) x /= t.sigma;
    t.v = v;
    return t;
  };

  for (std::size_t it = 0; it < max_iter; ++it) {
    v = multiply_transposed(m, mv);
    normalize(v);
    mv = multiply(m, v);
    const double next = dot(mv, mv);
    const bool converged = std::abs(next - rayleigh) <= tol * next;
    rayleigh = next;
    if (converged) return finish();
  }
  throw ConvergenceError("power_method: no convergence after " + std::to_string(max_iter) + " iterations",
                         finish());
}

double nuclear_norm(const Matrix& m) {
  if (m.empty()) return 0.0;
  Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> view(
      m.data().data(), static_cast<Eigen::Index>(m.rows()), static_cast<Eigen::Index>(m.cols()));
  Eigen::BDCSVD<Eigen::MatrixXd> svd(view);
  return svd.singularValues().sum();
}

}  // namespace cgc
