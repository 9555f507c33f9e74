#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "cgc/linalg.hpp"
#include "cgc/oracles.hpp"

using namespace cgc;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  Matrix m(r, c);
  for (double& v : m.data()) v = n(rng);
  return m;
}

double residual(const Matrix& m, const SingularTriple& t) {
  const auto mv = multiply(m, t.v);
  double s = 0.0;
  for (std::size_t i = 0; i < mv.size(); ++i) s += (mv[i] - t.sigma * t.u[i]) * (mv[i] - t.sigma * t.u[i]);
  return std::sqrt(s);
}

}  // namespace

TEST_CASE("frobenius norm of small matrices") {
  CHECK(frobenius_norm(Matrix{{3, 4}}) == doctest::Approx(5.0));
  CHECK(frobenius_norm(Matrix(3, 2)) == 0.0);
  CHECK(frobenius_norm(Matrix{{1, 1}, {1, 1}}) == doctest::Approx(2.0));
  CHECK(frobenius_norm(Matrix()) == 0.0);
}

TEST_CASE("dot products and length mismatch") {
  const std::vector<double> a{1, 2}, b{3, 4}, zero{0, 0}, e1{1, 0}, e2{0, 1};
  CHECK(dot(a, b) == 11.0);
  CHECK(dot(a, zero) == 0.0);
  CHECK(dot(e1, e2) == 0.0);
  const std::vector<double> three{1, 2, 3};
  CHECK_THROWS_AS(dot(a, three), DimensionError);
}

TEST_CASE("vector norms") {
  const std::vector<double> x{3, -4, 0};
  CHECK(norm2(x) == doctest::Approx(5.0));
  CHECK(norm1(x) == 7.0);
  CHECK(norm_inf(x) == 4.0);
  const std::vector<double> huge{1e200, 1e200};
  CHECK(norm2(huge) == doctest::Approx(std::sqrt(2.0) * 1e200));
}

TEST_CASE("matrix products against hand values") {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  CHECK(a * b == Matrix{{2, 1}, {4, 3}});
  CHECK(a.transpose() == Matrix{{1, 3}, {2, 4}});
  const std::vector<double> x{1, 1};
  CHECK(multiply(a, x) == std::vector<double>{3, 7});
  CHECK(multiply_transposed(a, x) == std::vector<double>{4, 6});
  CHECK_THROWS_AS(a * Matrix(3, 1), DimensionError);
}

TEST_CASE("param block layout is layer, row, column") {
  const Matrix l0{{1, 2, 3}, {4, 5, 6}};
  const Matrix l1{{7, 8}};
  const std::vector<Matrix> layers{l0, l1};
  ParamBlock p = ParamBlock::from_matrices(layers);
  CHECK(p.size() == 8);
  CHECK(p.num_layers() == 2);
  CHECK(p(0, 1, 0) == 4.0);
  CHECK(p(1, 0, 1) == 8.0);
  CHECK(p[5] == 6.0);
  CHECK(p.offset(1) == 6);
  CHECK(p.layer(1)[0] == 7.0);
  CHECK(p.layer_matrix(0) == l0);
  p.set_layer(1, Matrix{{0, 0}});
  CHECK(p[6] == 0.0);
  CHECK(p.zeros_like().same_shape(p));
  CHECK(dot(p, p) == doctest::Approx(1 + 4 + 9 + 16 + 25 + 36));
}

TEST_CASE("power method on identity and diagonal matrices") {
  const auto id = power_method(Matrix::identity(3), 1e-12, 1000, 1);
  CHECK(id.sigma == doctest::Approx(1.0).epsilon(1e-12));

  const std::vector<double> diag{3.0, 1.0};
  const Matrix d = Matrix::diagonal(diag);
  const auto t = power_method(d, 1e-14, 10000, 2);
  CHECK(t.sigma == doctest::Approx(3.0).epsilon(1e-10));
  CHECK(std::abs(std::abs(t.u[0]) - 1.0) < 1e-6);
  CHECK(std::abs(std::abs(t.v[0]) - 1.0) < 1e-6);
  CHECK(norm2(t.u) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm2(t.v) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("power method on a seeded 20x20 matrix matches the Jacobi oracle") {
  const Matrix m = random_matrix(20, 20, 7);
  const auto t = power_method(m, 1e-12, 200000, 7);
  const double sigma = jacobi_singular_values(m).front();
  CHECK(std::abs(t.sigma - sigma) <= 1e-6 * sigma);
  CHECK(t.sigma <= frobenius_norm(m));
  CHECK(residual(m, t) <= 1e-6 * t.sigma);
  const auto mv = multiply(m, t.v);
  CHECK(t.sigma >= std::abs(dot(t.u, mv)) - 1e-12);
}

TEST_CASE("power method is bitwise deterministic per seed") {
  const Matrix m = random_matrix(8, 5, 3);
  const auto a = power_method(m, 1e-12, 100000, 11);
  const auto b = power_method(m, 1e-12, 100000, 11);
  CHECK(a.sigma == b.sigma);
  CHECK(a.u == b.u);
  CHECK(a.v == b.v);
}

TEST_CASE("power method on rectangular matrices") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Matrix m = random_matrix(3 + seed, 7, seed + 100);
    const auto t = power_method(m, 1e-13, 200000, seed);
    const double sigma = jacobi_singular_values(m).front();
    CHECK(std::abs(t.sigma - sigma) <= 1e-6 * sigma);
    CHECK(t.u.size() == m.rows());
    CHECK(t.v.size() == m.cols());
  }
}

TEST_CASE("power method errors") {
  CHECK_THROWS_AS(power_method(Matrix(3, 3), 1e-12, 100, 0), DegenerateInputError);
  // Two nearly equal top singular values converge slowly: one iteration cannot meet 1e-15.
  const std::vector<double> diag{1.0, 0.999999, 0.5};
  const Matrix d = Matrix::diagonal(diag);
  try {
    (void)power_method(d, 1e-15, 1, 5);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best().sigma > 0.0);
    CHECK(e.best().v.size() == 3);
  }
}

TEST_CASE("nuclear norm against the Jacobi oracle") {
  const Matrix m = random_matrix(6, 4, 21);
  double expected = 0.0;
  for (double s : jacobi_singular_values(m)) expected += s;
  CHECK(nuclear_norm(m) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(nuclear_norm(Matrix::identity(4)) == doctest::Approx(4.0));
}

TEST_CASE("jacobi oracle on a known spectrum") {
  const Matrix m{{2, 0}, {0, -5}};
  const auto s = jacobi_singular_values(m);
  CHECK(s[0] == doctest::Approx(5.0));
  CHECK(s[1] == doctest::Approx(2.0));
}
