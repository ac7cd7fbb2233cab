#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "vwave/mollifier.hpp"

using namespace vwave;
using Catch::Approx;

namespace {

double unit_bump_mass() {
  boost::math::quadrature::tanh_sinh<double> q;
  return q.integrate([](double s) { return std::exp(-1.0 / (1.0 - s * s)); }, -1.0, 1.0);
}

}  // namespace

TEST_CASE("compact bump peak value against the normalization oracle") {
  const auto phi = build_bump(1.0, 1.0 / 64);
  const double oracle = std::exp(-1.0) / unit_bump_mass();
  CHECK(phi.value(0.0).real() == Approx(oracle).epsilon(1e-9));
  // frozen: e^-1 / int_{-1}^{1} exp(-1/(1-s^2)) ds
  CHECK(phi.value(0.0).real() == Approx(0.828568839869105).epsilon(1e-9));
  CHECK(phi.id() == "bump-R1-b1");
}

TEST_CASE("compact bump is a non-negative unit-mass kernel with compact support") {
  for (double R : {0.5, 1.0, 2.0}) {
    const auto phi = build_bump(R, R / 32);
    CHECK(phi.is_nonnegative());
    CHECK(phi.is_real());
    CHECK(phi.moment_table()[0].real() == Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(phi.moment_table()[1]) < 1e-14);
    CHECK(phi.value(1.0001 * R).real() == 0.0);
    CHECK(phi.value(-1.0001 * R).real() == 0.0);
    for (double x = -R; x <= R; x += R / 50) CHECK(phi.value(x).real() >= 0.0);
    CHECK(phi.cdf(-R) == 0.0);
    CHECK(phi.cdf(R) == Approx(1.0).epsilon(1e-12));
    CHECK(phi.cdf(0.0) == Approx(0.5).epsilon(1e-10));
  }
}

TEST_CASE("compact bump needs 16 samples across its support") {
  CHECK_THROWS_AS(build_bump(1.0, 0.2), ResolutionError);
  CHECK_NOTHROW(build_bump(1.0, 0.125));
  CHECK_THROWS_AS(build_bump(-1.0, 0.01), ConfigError);
}

TEST_CASE("shifted bump keeps unit mass and moves its first moment") {
  const auto phi = build_bump(1.0, 1.0 / 64, 1.0, 0.5);
  CHECK(phi.moment_table()[0].real() == Approx(1.0).epsilon(1e-12));
  CHECK(phi.moment_table()[1].real() == Approx(0.5).epsilon(1e-10));
  CHECK(phi.value(1.45).real() > 0.0);
  CHECK(phi.value(-0.55).real() == 0.0);
}

TEST_CASE("scaled kernel is omega^-1 phi(x / omega) with scaled moments") {
  const auto phi = build_bump(1.0, 1.0 / 64);
  const double w = 0.125;
  const auto s = scale_kernel(phi, w);
  CHECK(s.support_radius() == Approx(w));
  for (double x : {-0.1, -0.03, 0.0, 0.07})
    CHECK(s.value(x).real() == Approx(phi.value(x / w).real() / w).epsilon(1e-12));
  CHECK(s.moment_table()[2].real() == Approx(phi.moment_table()[2].real() * w * w).epsilon(1e-12));
  CHECK(s.derivative_sup(1) == Approx(phi.derivative_sup(1) / (w * w)).epsilon(1e-12));
  CHECK_THROWS_AS(scale_kernel(phi, 0.0), ConfigError);
}

TEST_CASE("bump derivatives agree with central differences and with GK quadrature of the cdf") {
  const auto phi = build_bump(0.8, 0.8 / 64, 2.0);
  const double h = 1e-6;
  for (double x : {-0.5, -0.2, 0.0, 0.33, 0.6}) {
    CHECK(phi.derivative(x, 1) ==
          Approx((phi.value(x + h).real() - phi.value(x - h).real()) / (2 * h)).epsilon(1e-6).margin(1e-9));
    const double cdf = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
        [&](double y) { return phi.value(y).real(); }, -0.8, x, 15, 1e-13);
    CHECK(phi.cdf(x) == Approx(cdf).epsilon(1e-9).margin(1e-12));
  }
  CHECK_THROWS_AS(phi.derivative(0.0, 4), UnsupportedError);
}

TEST_CASE("bump with prescribed derivative sup") {
  for (double target : {0.5, 2.0, 8.0}) {
    for (double beta : {1.0, 2.0}) {
      const auto phi = build_bump_matching_derivative(target, beta, 1.0 / 64);
      CHECK(phi.derivative_sup(1) == Approx(target).epsilon(1e-6));
    }
  }
  CHECK_THROWS_AS(build_bump_matching_derivative(-1.0, 1.0, 1.0 / 64), ConfigError);
}

TEST_CASE("vanishing-moments kernel has unit mass and vanishing moments 1..4") {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  CHECK_FALSE(psi.is_nonnegative());
  CHECK(psi.is_real());
  const auto& m = psi.moment_table();
  REQUIRE(m.size() >= 5);
  CHECK(std::abs(m[0] - 1.0) <= 1e-8);
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(m[static_cast<std::size_t>(k)]) <= 1e-8);
  CHECK(psi.tail_mass() < 1e-10);
  CHECK(psi.id() == "vm-p4-w1");
  // psi takes negative values somewhere: it cannot be a bump
  bool negative = false;
  for (double x = 0.0; x < 10.0; x += 0.05) negative = negative || psi.value(x).real() < 0.0;
  CHECK(negative);
}

TEST_CASE("vanishing-moments kernel is symmetric and decays fast") {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  for (double x : {0.25, 1.0, 3.5, 10.0}) CHECK(psi.value(x).real() == Approx(psi.value(-x).real()).margin(1e-15));
  CHECK(std::abs(psi.value(40.0)) < 1e-6 * std::abs(psi.value(0.0)));
}

TEST_CASE("vanishing-moments kernel has the plateau as Fourier transform") {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  // direct quadrature of the stored samples
  for (double xi : {0.0, 0.5, 1.0, 2.0, 3.0, 4.5, 6.0}) {
    cplx acc = 0.0;
    const auto& x = psi.abscissae();
    const auto& v = psi.samples();
    for (std::size_t j = 0; j < x.size(); ++j) acc += v[j] * std::exp(cplx(0.0, -xi * x[j]));
    acc *= psi.grid_spacing();
    CHECK(acc.real() == Approx(psi.fourier(xi)).margin(1e-8));
    CHECK(std::abs(acc.imag()) < 1e-8);
  }
  CHECK(psi.fourier(0.7) == 1.0);
  CHECK(psi.fourier(5.1) == 0.0);
}

TEST_CASE("asymmetric transition widths give a complex kernel with vanishing moments") {
  Mollifier::CutoffParams shape;
  shape.left_width = 3.0;
  shape.right_width = 5.0;
  const auto psi = build_vanishing_moments(4, 1.0, 0.25, &shape);
  CHECK_FALSE(psi.is_real());
  const auto& m = psi.moment_table();
  CHECK(std::abs(m[0] - 1.0) <= 1e-8);
  for (int k = 1; k <= 4; ++k) CHECK(std::abs(m[static_cast<std::size_t>(k)]) <= 1e-8);
  CHECK(psi.id() == "vm-p4-w1-complex");
}

TEST_CASE("vanishing-moments construction errors") {
  // the spacing has to resolve the bandwidth w + delta
  CHECK_THROWS_AS(build_vanishing_moments(4, 1.0, 1.0), ResolutionError);
  CHECK_THROWS_AS(build_vanishing_moments(0, 1.0, 0.25), ConfigError);
  // an unattainable moment tolerance names the failing moment
  try {
    build_vanishing_moments(4, 1.0, 0.25, nullptr, 1e-30);
    FAIL("expected a construction error");
  } catch (const ConstructionError& e) {
    CHECK(std::string(e.what()).find("moment") != std::string::npos);
  }
}

TEST_CASE("kernel csv round trip preserves samples bitwise") {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  std::stringstream ss;
  write_kernel_csv(psi, ss);
  const auto t = read_kernel_csv(ss);
  REQUIRE(t.values.size() == psi.samples().size());
  for (std::size_t j = 0; j < t.values.size(); ++j) {
    CHECK(t.values[j] == psi.samples()[j]);
    CHECK(t.x[j] == psi.abscissae()[j]);
  }
  CHECK(std::abs(t.integral() - 1.0) < 1e-8);
  std::stringstream bad("a,b\n1,2\n");
  CHECK_THROWS_AS(read_kernel_csv(bad), ConfigError);
}

TEST_CASE("tensor kernel value is the product of 1D factors") {
  const auto phi = scale_kernel(build_bump(1.0, 1.0 / 64), 0.5, 2);
  const double x[2] = {0.1, -0.2};
  CHECK(phi.value_nd(x).real() == Approx(phi.value(0.1).real() * phi.value(-0.2).real()));
  CHECK(phi.dimension() == 2);
}
