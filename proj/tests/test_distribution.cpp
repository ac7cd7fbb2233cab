#include <catch_amalgamated.hpp>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <vector>

#include "vwave/distribution.hpp"
#include "vwave/fit.hpp"

using namespace vwave;
using Catch::Approx;

TEST_CASE("data functions and their derivatives") {
  const double h = 1e-5;
  for (const auto& f : {data::gaussian(1.5, 0.2, 0.7), data::bump(2.0, 0.1, 1.5, 1.0), data::cosine(1.0, 2.0, 0.3),
                        data::polynomial({1.0, -2.0, 0.5, 0.25})}) {
    for (double x : {-0.9, -0.3, 0.0, 0.45, 1.1}) {
      for (int k = 1; k <= 2; ++k) {
        const double fd = (f.derivative(x + h, k - 1) - f.derivative(x - h, k - 1)) / (2 * h);
        CHECK(f.derivative(x, k) == Approx(fd).epsilon(1e-6).margin(1e-8));
      }
      // antiderivative consistency
      const double fd = (f.antiderivative(x + h) - f.antiderivative(x - h)) / (2 * h);
      CHECK(f(x) == Approx(fd).epsilon(1e-6).margin(1e-8));
    }
  }
  CHECK(data::bump(1.0, 0.0, 2.0).compact());
  CHECK_FALSE(data::gaussian().compact());
  CHECK_THROWS_AS(data::gaussian(1.0, 0.0, 0.0), ConfigError);
  CHECK_THROWS_AS(data::example1().derivative(0.5, 3), UnsupportedError);
}

TEST_CASE("example-1 profile is x^2/2 on the plateau and vanishes for x <= 0") {
  const auto a = data::example1(1.0, 2.0);
  CHECK(a(-0.5) == 0.0);
  CHECK(a(0.0) == 0.0);
  CHECK(a(0.8) == Approx(0.32));
  CHECK(a.derivative(0.8, 1) == Approx(0.8));
  CHECK(a.derivative(0.8, 2) == Approx(1.0));
  CHECK(a.derivative(-0.8, 2) == 0.0);
  CHECK(a(2.5) == 0.0);
}

TEST_CASE("Heaviside mollified by a bump is the kernel cdf; its derivative is the kernel") {
  const auto phi = build_bump(1.0, 1.0 / 64);
  const auto g = symmetric_grid(2.0, 1.0 / 128);
  const double w = 0.25;
  const auto H = Distribution::heaviside(0.1, 2.0);
  const auto c0 = convolve(H, phi, w, g, 0);
  const auto c1 = convolve(H, phi, w, g, 1);
  const auto s = scale_kernel(phi, w);
  for (std::size_t i = 0; i < g.points; i += 7) {
    const double x = g.x(i);
    CHECK(c0[i].real() == Approx(2.0 * s.cdf(x - 0.1)).margin(1e-14));
    CHECK(c1[i].real() == Approx(2.0 * s.value(x - 0.1).real()).margin(1e-12));
  }
  CHECK(c0.front().real() == 0.0);
  CHECK(c0.back().real() == Approx(2.0));
}

TEST_CASE("point mass mollified is the translated kernel") {
  const auto phi = build_bump(1.0, 1.0 / 64);
  const auto g = symmetric_grid(2.0, 1.0 / 128);
  const auto d = Distribution::point_mass(-0.3, 0.5) + Distribution::point_mass(0.4, 1.0);
  const auto c = convolve(d, phi, 0.25, g, 0);
  const auto s = scale_kernel(phi, 0.25);
  for (std::size_t i = 0; i < g.points; i += 5) {
    const double x = g.x(i);
    CHECK(c[i].real() == Approx(0.5 * s.value(x + 0.3).real() + s.value(x - 0.4).real()).margin(1e-12));
  }
  const auto narrow = symmetric_grid(0.5, 1.0 / 128);
  CHECK_THROWS_AS(convolve(Distribution::point_mass(0.45), phi, 0.25, narrow, 0), DomainError);
}

TEST_CASE("x^2 * phi_omega = x^2 + omega^2 m2 for a symmetric bump") {
  const auto phi = build_bump(1.0, 1.0 / 64);
  boost::math::quadrature::tanh_sinh<double> ts;
  const auto b = [](double y) { return std::exp(-1.0 / (1.0 - y * y)); };
  const double m2 = ts.integrate([&](double y) { return y * y * b(y); }, -1.0, 1.0) / ts.integrate(b, -1.0, 1.0);
  const auto g = symmetric_grid(1.0, 1.0 / 16);
  const auto x2 = Distribution::smooth(data::polynomial({0.0, 0.0, 1.0}));
  for (double w : {0.5, 0.125}) {
    const auto c = convolve(x2, phi, w, g, 0);
    const auto c2 = convolve(x2, phi, w, g, 2);
    for (std::size_t i = 0; i < g.points; ++i) {
      const double x = g.x(i);
      CHECK(c[i].real() == Approx(x * x + w * w * m2).epsilon(1e-10).margin(1e-12));
      CHECK(c2[i].real() == Approx(2.0).epsilon(1e-10));
    }
  }
}

TEST_CASE("polynomials of degree <= 4 are reproduced by the vanishing-moments kernel") {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  const auto g = symmetric_grid(1.0, 1.0 / 8);
  const auto p = Distribution::smooth(data::polynomial({0.5, -1.0, 1.0, 0.3, -0.2}));
  const auto c = convolve(p, psi, 0.3, g, 0);
  const auto f = data::polynomial({0.5, -1.0, 1.0, 0.3, -0.2});
  for (std::size_t i = 0; i < g.points; ++i) CHECK(std::abs(c[i] - f(g.x(i))) < 1e-7);
}

TEST_CASE("smooth compact data mollified by psi converges at order >= 4") {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  const auto f = data::bump(1.0, 0.0, 2.0, 1.0);
  const auto g = symmetric_grid(3.0, 1.0 / 64);
  const auto exact = sample(f, g);
  // the approximation error is super-algebraic; order 4 is the floor once omega resolves the bump
  std::vector<double> omegas{0.25, 0.125, 0.0625, 0.03125}, err;
  for (double w : omegas) {
    const auto c = convolve(Distribution::smooth(f), psi, w, g, 0);
    double e = 0.0;
    for (std::size_t i = 0; i < g.points; ++i) e = std::max(e, std::abs(c[i] - exact[i]));
    err.push_back(e);
  }
  for (std::size_t k = 1; k < err.size(); ++k) CHECK(err[k] < err[k - 1]);
  CHECK(fit_loglog(omegas, err).slope >= 4.0);
}

TEST_CASE("weak second derivative of example-1 is a mollified jump") {
  // a'' jumps from 0 to 1 at x = 0, so (a * phi_w)'' at 0 is the kernel cdf at 0
  const auto phi = build_bump(1.0, 1.0 / 64);
  const auto g = symmetric_grid(2.5, 1.0 / 256);
  const auto c = convolve(Distribution::smooth(data::example1()), phi, 0.125, g, 2);
  const std::size_t mid = g.points / 2;
  REQUIRE(g.x(mid) == 0.0);
  CHECK(c[mid].real() == Approx(0.5).epsilon(1e-8));
  CHECK(c[mid - 64].real() == Approx(0.0).margin(1e-14));
  CHECK(c[mid + 64].real() == Approx(1.0).epsilon(1e-10));
}

TEST_CASE("unsupported convolutions") {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  const auto g = symmetric_grid(1.0, 1.0 / 16);
  CHECK_THROWS_AS(convolve(Distribution::heaviside(), psi, 0.5, g, 0), UnsupportedError);
  CHECK_THROWS_AS(convolve(Distribution::point_mass(0.0), psi, 0.5, g, 1), UnsupportedError);
  CHECK_THROWS_AS(convolve(Distribution::heaviside(), build_bump(1.0, 1.0 / 64), 0.5, g, -1), ConfigError);
}

TEST_CASE("sampling returns derivative samples") {
  const auto g = symmetric_grid(1.0, 0.25);
  const auto s = sample(data::cosine(), g, 1);
  for (std::size_t i = 0; i < g.points; ++i) CHECK(s[i].real() == Approx(-std::sin(g.x(i))).margin(1e-15));
}
