#include "doctest.h"
#include "test_support.hpp"

#include <cmath>
#include <numbers>

using namespace fmc;
using namespace fmc::chain;
using fmc::quasifree::FreeCpMap;

namespace {

CMatrix scalar(Complex v) { return CMatrix::Constant(1, 1, v); }

ChainSpec scalar_spec(Complex a, Real b, Complex x) { return ChainSpec(FreeCpMap(scalar(a), scalar(b)), scalar(x)); }

// Frozen from an independent dense eigendecomposition of the scalar chain at
// (a, b, x) = (0.5, 0.5, 0), whose symbol entries are q = 2/3 on the diagonal
// and a^k / 6 at distance k.
constexpr Real kIncrement256 = 0.5842747214867074;
constexpr Real kIncrement128 = 0.5842751816516483;
constexpr Real kAverage256 = 0.584673040833076;
constexpr Real kSzego = 0.5842746526871101;

}  // namespace

TEST_CASE("chain symbol blocks") {
  const auto spec = scalar_spec(0.5, 0.5, 0.0);
  CHECK(std::abs(spec.invariant().matrix()(0, 0).real() - 2.0 / 3.0) < 1e-14);
  CHECK(std::abs(spec.correlation()(0, 0).real() - 1.0 / 6.0) < 1e-14);
  CHECK(qinfinity_block(spec, 0).isApprox(spec.invariant().matrix()));
  for (long k = 1; k <= 5; ++k)
    CHECK(std::abs(qinfinity_block(spec, k)(0, 0).real() - std::pow(0.5, k) / 6.0) < 1e-15);

  const auto section = finite_symbol(spec, 2).matrix();
  CHECK(std::abs(section(0, 1).real() - 1.0 / 12.0) < 1e-15);
  CHECK(std::abs(section(1, 0).real() - 1.0 / 12.0) < 1e-15);
  CHECK(std::abs(section(0, 0).real() - 2.0 / 3.0) < 1e-14);

  const auto product = scalar_spec(0.5, 0.5, 0.5 - 2.0 / 3.0);
  for (long k = 1; k <= 3; ++k) CHECK(qinfinity_block(product, k).norm() < 1e-15);
  const auto pr = finite_symbol(product, 5).matrix();
  CHECK((pr - CMatrix::Identity(5, 5) * (2.0 / 3.0)).cwiseAbs().maxCoeff() < 1e-14);

  fmc::testing::Gen gen(1);
  const auto zero_a = ChainSpec::with_strategy(FreeCpMap(CMatrix::Zero(2, 2), gen.with_spectrum(2, 0.1, 0.9)),
                                               quasifree::ProductSeed{});
  CHECK(qinfinity_block(zero_a, 1).norm() < 1e-15);
}

TEST_CASE("recursion matches the Toeplitz assembly") {
  fmc::testing::Gen gen(2);
  for (int t = 0; t < 10; ++t) {
    const auto spec = gen.chain_spec(gen.integer(1, 3));
    CHECK(recursion_matrix(spec, 0).isApprox(spec.invariant().matrix()));
    const Eigen::Index d = spec.dim();
    for (long n = 1; n <= 6; ++n) {
      const CMatrix r = recursion_matrix(spec, n);
      CHECK(r.rows() == (n + 1) * d);
      const CMatrix s = toeplitz::finite_section(symbol_operator(spec), n);
      CHECK((r.bottomRightCorner(n * d, n * d) - s).cwiseAbs().maxCoeff() < 1e-12);
    }
    CHECK_NOTHROW(recursion_Rn(spec, 4));
  }
}

TEST_CASE("generating function") {
  const auto spec = scalar_spec(0.5, 0.5, 0.0);
  const Real q = 2.0 / 3.0, m = 1.0 / 6.0;
  for (Real theta : {0.0, 0.3, 1.7, -2.9}) {
    const Complex z = std::polar(0.5, theta);
    const Real expected = q + 2.0 * (m * z / (1.0 - z)).real();
    const CMatrix g = generating_function(spec, theta);
    CHECK(std::abs(g(0, 0) - expected) < 1e-14);
  }
  CHECK(std::abs(generating_function(spec, 0.0)(0, 0) - (q + 2 * 0.5 * m / 0.5)) < 1e-14);
  const auto product = scalar_spec(0.5, 0.5, 0.5 - 2.0 / 3.0);
  CHECK(std::abs(generating_function(product, 1.0)(0, 0) - q) < 1e-14);

  // Fourier coefficients of the closed form reproduce the symbol blocks.
  fmc::testing::Gen gen(3);
  for (int t = 0; t < 5; ++t) {
    const auto s = gen.chain_spec(gen.integer(1, 3));
    const long nodes = 512;
    for (long k = -3; k <= 3; ++k) {
      CMatrix acc = CMatrix::Zero(s.dim(), s.dim());
      for (long j = 0; j < nodes; ++j) {
        const Real theta = 2 * std::numbers::pi * static_cast<Real>(j) / static_cast<Real>(nodes);
        acc += generating_function(s, theta) * std::polar(1.0, -static_cast<Real>(k) * theta);
      }
      acc /= static_cast<Real>(nodes);
      CHECK((acc - qinfinity_block(s, k)).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("entropy densities") {
  const auto spec = scalar_spec(0.5, 0.5, 0.0);
  CHECK(std::abs(entropy_density(spec, Increment{256}) - kIncrement256) < 1e-11);
  CHECK(std::abs(entropy_density(spec, Increment{128}) - kIncrement128) < 1e-11);
  CHECK(std::abs(entropy_density(spec, Average{256}) - kAverage256) < 1e-11);
  CHECK(std::abs(entropy_density(spec, Szego{4096}) - kSzego) < 1e-9);

  const auto product = scalar_spec(0.5, 0.5, 0.5 - 2.0 / 3.0);
  const Real target = fmc::testing::h2(2.0 / 3.0);
  CHECK(std::abs(target - 0.636514) < 1e-6);
  for (long n : {1, 2, 17, 64}) {
    CHECK(std::abs(entropy_density(product, Average{n}) - target) < 1e-12);
    CHECK(std::abs(entropy_density(product, Increment{n}) - target) < 1e-12);
  }
  CHECK(std::abs(entropy_density(product, Szego{}) - target) < 1e-9);

  fmc::testing::Gen gen(4);
  const CMatrix b = gen.with_spectrum(3, 0.05, 0.95);
  const auto zero_a = ChainSpec::with_strategy(FreeCpMap(CMatrix::Zero(3, 3), b), quasifree::ProductSeed{});
  const Real sb = fmc::testing::fermi_entropy(b);
  CHECK(std::abs(entropy_density(zero_a, Average{8}) - sb) < 1e-12);
  CHECK(std::abs(entropy_density(zero_a, Increment{8}) - sb) < 1e-12);
  CHECK(std::abs(entropy_density(zero_a, Szego{}) - sb) < 1e-9);

  CHECK_THROWS_AS(entropy_density(spec, Average{0}), ValidationError);
  CHECK_THROWS_AS(scalar_spec(0.5, 0.5, 0.4), InfeasibleError);
}

TEST_CASE("extension scan") {
  const auto scan = scan_extension_scalar(0.5, 0.5, 21, 128);
  CHECK(scan.feasible);
  CHECK(scan.rows.size() == 441);
  long feasible = 0;
  for (const auto& row : scan.rows) {
    CHECK(row.feasible == fmc::testing::in_disks({row.x_re, row.x_im}, 0.5, 0.5));
    if (row.feasible) {
      ++feasible;
      CHECK(std::isfinite(row.density));
      CHECK(row.density >= scan.min_density);
    } else {
      CHECK(std::isnan(row.density));
    }
    if (row.x_im == 0.0) CHECK(row.feasible == (row.x_re >= -0.5 - 1e-15 && row.x_re <= 1e-15));
  }
  CHECK(feasible > 0);
  CHECK(scan.boundary_distance <= scan.cell);

  const auto empty = scan_extension_scalar(0.8, 0.2, 11);
  CHECK_FALSE(empty.feasible);
  CHECK(empty.rows.size() == 121);
  for (const auto& row : empty.rows) CHECK_FALSE(row.feasible);
  CHECK_THROWS_AS(scan_extension_scalar(0.5, 0.5, 1), ValidationError);
}
