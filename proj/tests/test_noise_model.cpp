#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <complex>

#include "corrsense/errors.hpp"
#include "corrsense/noise_model.hpp"
#include "corrsense/rng.hpp"

using namespace corrsense;

namespace {

NoiseModel chain2() {
  Eigen::MatrixXd V(2, 2);
  V << 2.0, 0.5, 0.5, 2.0;
  return NoiseModel::real(V);
}

Eigen::VectorXi bits(std::initializer_list<int> v) {
  Eigen::VectorXi out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) out[i++] = x;
  return out;
}

// Sign convention used throughout: bit 0 -> +1, bit 1 -> -1.
Eigen::VectorXi signs_of(const Eigen::VectorXi& b) {
  return Eigen::VectorXi::Ones(b.size()) - 2 * b;
}

}  // namespace

TEST_CASE("validate accepts a well-formed model and reports its spectrum") {
  const ValidationReport rep = validate(chain2());
  CHECK(rep.ok());
  CHECK(rep.v_symmetric);
  CHECK(rep.psd);
  CHECK(rep.diag_nonnegative);
  CHECK(rep.min_eigenvalue == doctest::Approx(1.5).epsilon(1e-12));
  CHECK(rep.violations.empty());
  CHECK(rep.sparsity.s == 1);
}

TEST_CASE("validate flags asymmetry, indefiniteness and negative diagonals") {
  NoiseModel m = chain2();
  m.V(0, 1) += 0.1;
  const ValidationReport rep = validate(m);
  CHECK_FALSE(rep.v_symmetric);
  CHECK_FALSE(rep.ok());
  CHECK_FALSE(rep.violations.empty());

  Eigen::MatrixXd V(2, 2);
  V << 1.0, 2.0, 2.0, 1.0;
  const ValidationReport indef = validate(NoiseModel::real(V));
  CHECK_FALSE(indef.psd);
  CHECK(indef.min_eigenvalue == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_FALSE(indef.ok());

  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 1.0;
  D(1, 1) = -0.5;
  const ValidationReport neg = validate(NoiseModel::real(D));
  CHECK_FALSE(neg.diag_nonnegative);
  CHECK_FALSE(neg.psd);
}

TEST_CASE("validate flags a non-skew imaginary part and asymmetric frequency part") {
  NoiseModel m = chain2();
  m.T(0, 1) = 0.3;  // T(1,0) left at 0: not skew-symmetric
  CHECK_FALSE(validate(m).t_skew_symmetric);

  NoiseModel m2 = chain2();
  m2.R(0, 1) = 0.2;
  CHECK_FALSE(validate(m2).r_symmetric);
}

TEST_CASE("decay rate of the two-qubit chain matches hand arithmetic") {
  Eigen::VectorXi r(2);
  r << 1, -1;
  // 2 r^T V r with V = [[2,.5],[.5,2]]: 2 * (2 + 2 - 1) = 6.
  CHECK(decay_rate(chain2(), r) == doctest::Approx(6.0).epsilon(1e-15));
  r << 1, 1;
  CHECK(decay_rate(chain2(), r) == doctest::Approx(10.0).epsilon(1e-15));
  r << 1, 0;
  CHECK(decay_rate(chain2(), r) == doctest::Approx(4.0).epsilon(1e-15));
}

TEST_CASE("decay rate is even in r and zero for empty superpositions") {
  Rng rng(314);
  const NoiseModel m = random_sparse_model(6, 3, 99);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::VectorXi r(6);
    for (int i = 0; i < 6; ++i) r[i] = static_cast<int>(rng.uniform_below(3)) - 1;
    CHECK(decay_rate(m, r) == doctest::Approx(decay_rate(m, (-r).eval())).epsilon(1e-15));
    CHECK(decay_rate(m, r) >= -1e-9);
  }
  Eigen::VectorXi zero = Eigen::VectorXi::Zero(6);
  CHECK(decay_rate(m, zero) == 0.0);
}

TEST_CASE("decay rate rejects malformed superposition vectors") {
  Eigen::VectorXi wrong_len(3);
  wrong_len << 1, 0, -1;
  CHECK_THROWS_AS((void)decay_rate(chain2(), wrong_len), StructuralError);
  Eigen::VectorXi out_of_range(2);
  out_of_range << 2, 0;
  CHECK_THROWS_AS((void)decay_rate(chain2(), out_of_range), ParameterError);
}

TEST_CASE("complex rates reproduce a hand-evaluated two-qubit case") {
  NoiseModel m = chain2();
  m.V = 2.0 * Eigen::MatrixXd::Identity(2, 2);
  m.T << 0.0, 1.0, -1.0, 0.0;
  m.R << 0.0, 0.5, 0.5, 0.0;
  const ComplexRates cr = complex_rates(m, signs_of(bits({0, 1})), signs_of(bits({0, 0})));
  CHECK(cr.gamma == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(cr.omega == doctest::Approx(4.0).epsilon(1e-15));

  const std::complex<double> f = coherence_factor(m, bits({0, 1}), bits({0, 0}), 0.25);
  CHECK(std::abs(f - std::exp(std::complex<double>(-1.0, 1.0))) < 1e-14);
}

TEST_CASE("pure phase part contributes an antisymmetric frequency") {
  // V = 2I keeps the model PSD for |t| <= 2; frequency comes from T alone.
  for (double tval : {0.3, 0.7, 1.5}) {
    NoiseModel m = chain2();
    m.V = 2.0 * Eigen::MatrixXd::Identity(2, 2);
    m.T << 0.0, tval, -tval, 0.0;
    const ComplexRates cr = complex_rates(m, signs_of(bits({0, 0})), signs_of(bits({0, 1})));
    CHECK(cr.omega == doctest::Approx(-2.0 * tval).epsilon(1e-14));
    // Swapping the two states flips the sign of the frequency.
    const ComplexRates sw = complex_rates(m, signs_of(bits({0, 1})), signs_of(bits({0, 0})));
    CHECK(sw.omega == doctest::Approx(2.0 * tval).epsilon(1e-14));
    CHECK(sw.gamma == doctest::Approx(cr.gamma).epsilon(1e-14));
  }
}

TEST_CASE("identical states neither decay nor rotate") {
  const ComplexRates cr = complex_rates(chain2(), signs_of(bits({1, 0})), signs_of(bits({1, 0})));
  CHECK(cr.gamma == 0.0);
  CHECK(cr.omega == 0.0);
}

TEST_CASE("real models give matching quadratic-form and complex-path rates") {
  Rng rng(2718);
  for (int rep = 0; rep < 10000; ++rep) {
    const int n = 2 + static_cast<int>(rng.uniform_below(4));
    const NoiseModel m = random_sparse_model(n, static_cast<int>(rng.uniform_below(n)), rep);
    Eigen::VectorXi a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = static_cast<int>(rng.uniform_below(2));
      b[i] = static_cast<int>(rng.uniform_below(2));
    }
    const Eigen::VectorXi r = b - a;
    const ComplexRates cr = complex_rates(m, signs_of(a), signs_of(b));
    CHECK(cr.gamma == doctest::Approx(decay_rate(m, r)).epsilon(1e-12));
    CHECK(cr.omega == 0.0);
  }
}

TEST_CASE("coherence factor starts at one and only shrinks") {
  const NoiseModel m = random_sparse_model(5, 2, 17);
  const Eigen::VectorXi a = bits({0, 1, 0, 0, 1});
  const Eigen::VectorXi b = bits({1, 0, 0, 1, 1});
  CHECK(coherence_factor(m, a, b, 0.0) == std::complex<double>(1.0, 0.0));
  double prev = 1.0;
  for (double t = 0.05; t <= 1.0; t += 0.05) {
    const double mag = std::abs(coherence_factor(m, a, b, t));
    CHECK(mag <= prev + 1e-15);
    CHECK(mag <= 1.0);
    prev = mag;
  }
  CHECK_THROWS_AS((void)coherence_factor(m, a, b, -0.1), ParameterError);
}

TEST_CASE("half-life of a unit-rate pair is reached at log two") {
  Eigen::MatrixXd V = Eigen::MatrixXd::Zero(2, 2);
  V(0, 0) = 0.5;
  const NoiseModel m = NoiseModel::real(V);
  const std::complex<double> f = coherence_factor(m, bits({1, 0}), bits({0, 0}), std::log(2.0));
  CHECK(f.real() == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(f.imag() == 0.0);
}

TEST_CASE("random sparse models have the advertised shape") {
  const NoiseModel none = random_sparse_model(4, 0, 5);
  CHECK(none.V == 2.0 * Eigen::MatrixXd::Identity(4, 4));

  const NoiseModel m = random_sparse_model(64, 12, 123);
  CHECK(m.V.diagonal() == Eigen::VectorXd::Constant(64, 2.0));
  int nonzeros = 0;
  for (int i = 0; i < 64; ++i)
    for (int j = 0; j < 64; ++j)
      if (i != j && m.V(i, j) != 0.0) {
        CHECK(m.V(i, j) == 0.5);
        ++nonzeros;
      }
  CHECK(nonzeros == 24);
  const SparsityProfile sp = sparsity_of(m);
  CHECK(sp.s == 12);
  CHECK(validate(m).ok());

  CHECK(random_sparse_model(64, 12, 123).V == m.V);
  CHECK(random_sparse_model(64, 12, 124).V != m.V);
  CHECK_THROWS_AS((void)random_sparse_model(4, 4, 1), ParameterError);
}

TEST_CASE("every seed in a thousand-seed sweep yields a valid model") {
  for (std::uint64_t seed = 0; seed < 1000; ++seed) {
    const NoiseModel m = random_sparse_model(8, 5, seed);
    CHECK(validate(m).ok());
  }
}

TEST_CASE("upper-triangle packing round-trips") {
  Eigen::MatrixXd M(2, 2);
  M << 0.0, 3.0, 3.0, 0.0;
  const Eigen::VectorXd u = uvec(M);
  REQUIRE(u.size() == 1);
  CHECK(u[0] == 3.0);
  CHECK(uvec(Eigen::MatrixXd::Identity(3, 3)) == Eigen::VectorXd::Zero(3));

  Rng rng(55);
  Eigen::MatrixXd S(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = i; j < 5; ++j) S(i, j) = S(j, i) = rng.normal();
  const Eigen::MatrixXd back = uvec_inverse(uvec(S));
  CHECK((back - off_diag_of(S)).cwiseAbs().maxCoeff() == 0.0);
  CHECK((diag_of(S).asDiagonal().toDenseMatrix() + back - S).cwiseAbs().maxCoeff() == 0.0);

  CHECK_THROWS_AS((void)uvec_inverse(Eigen::VectorXd::Zero(4)), StructuralError);
}

TEST_CASE("pair indexing is a bijection onto the strict upper triangle") {
  const int n = 6;
  int k = 0;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      CHECK(pair_index(i, j, n) == k);
      const auto [pi, pj] = pair_from_index(k, n);
      CHECK(pi == i);
      CHECK(pj == j);
      ++k;
    }
  CHECK(k == n * (n - 1) / 2);
}
