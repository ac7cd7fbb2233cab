#include <catch_amalgamated.hpp>

#include <cmath>
#include <sstream>
#include <vector>

#include "vwave/coefficients.hpp"

using namespace vwave;
using Catch::Approx;

namespace {

const auto ladder8 = geometric_ladder(2, 9);

}  // namespace

TEST_CASE("regularized Heaviside satisfies Glaeser on the whole ladder") {
  const auto phi = build_bump(1.0, 1.0 / 64);
  for (const auto& scale : {PositiveScale::sqrtlog(), PositiveScale::loglog(), PositiveScale::power(1.0)}) {
    const auto g = symmetric_grid(1.5, std::ldexp(1.0, -12));
    const auto net = regularize(CoefficientField::heaviside(0.2, 1.5), phi, scale, ladder8, g);
    const auto rep = glaeser_check(net);
    CHECK(rep.passed);
    CHECK(rep.max_rho() <= 1.0 + 1e-6);
    CHECK(rep.max_rho() > 0.5);  // the inequality is nearly sharp for a bump cdf
    CHECK(net.min_value() >= 0.0);
    CHECK(net.max_value() == Approx(1.5).epsilon(1e-9));
  }
}

TEST_CASE("regularized example-1 satisfies Glaeser on the whole ladder") {
  const auto phi = build_bump(1.0, 1.0 / 64);
  const auto g = symmetric_grid(3.0, 1.0 / 256);
  const auto net = regularize(CoefficientField::example1(), phi, PositiveScale::power(0.5), ladder8, g);
  const auto rep = glaeser_check(net);
  CHECK(rep.max_rho() <= 1.0 + 1e-6);
  // a'' is bounded (it jumps at 0), so M_eps <= sup |a''| and tends to it
  const double exact_M = exact_net(CoefficientField::example1(), g).supnorm[0][2];
  for (double m : rep.M) CHECK(m <= exact_M * (1 + 1e-9));
  CHECK(rep.M.back() == Approx(exact_M).epsilon(0.05));
}

TEST_CASE("example-1 net approaches a within R omega sup|a'|, at second order") {
  const auto field = CoefficientField::example1();
  const auto g = symmetric_grid(3.0, 1.0 / 1024);
  const auto ladder = geometric_ladder(2, 6);
  const auto net = regularize(field, build_bump(1.0, 1.0 / 64), PositiveScale::power(1.0), ladder, g);
  const auto exact = exact_net(field, g);
  std::vector<double> err;
  for (std::size_t e = 0; e < ladder.size(); ++e) {
    double m = 0.0;
    for (std::size_t i = 0; i < g.points; ++i) m = std::max(m, std::abs(net.values(e)[i] - exact.values(0)[i]));
    // |a * phi_w - a|(x) <= int |a(x - y) - a(x)| phi_w(y) dy <= R w sup|a'|
    CHECK(m <= net.omegas[e] * exact.supnorm[0][1]);
    err.push_back(m);
  }
  // a'' is bounded, so the symmetric kernel gains one order over the bound
  CHECK(fit_loglog(net.omegas, err).slope == Approx(2.0).margin(0.2));
}

TEST_CASE("x^2 is the equality case of Glaeser's inequality") {
  const auto g = symmetric_grid(1.0, 1.0 / 128);
  const auto field = CoefficientField::smooth(data::polynomial({0.0, 0.0, 1.0}), g);
  const auto rep = glaeser_check(exact_net(field, g));
  CHECK(rep.max_rho() == Approx(1.0).margin(1e-8));
  CHECK(rep.M.front() == 2.0);
  // the regularized field x^2 + omega^2 m2 stays strictly below
  const auto net = regularize(field, build_bump(1.0, 1.0 / 64), PositiveScale::power(1.0), ladder8, g);
  const auto r2 = glaeser_check(net);
  CHECK(r2.max_rho() < 1.0);
  CHECK(r2.max_rho() > 1.0 - 1e-5);
}

TEST_CASE("a net that is negative somewhere violates Glaeser") {
  RegularizedNet net;
  net.ladder = {0.5};
  net.omegas = {0.1};
  net.grid = symmetric_grid(1.0, 0.01);
  net.k_max = 2;
  std::vector<std::vector<double>> per(3, std::vector<double>(net.grid.points));
  for (std::size_t i = 0; i < net.grid.points; ++i) {
    const double x = net.grid.x(i);
    per[0][i] = x * x - 0.01;
    per[1][i] = 2 * x;
    per[2][i] = 2.0;
  }
  net.derivatives = {per};
  net.finalize_norms();
  CHECK_THROWS_AS(glaeser_check(net), GlaeserViolation);
  const auto rep = glaeser_check(net, 1e-6, 1e-14, false);
  CHECK_FALSE(rep.passed);
  CHECK(rep.max_rho() > 1.0);
  CHECK(rep.to_json()["passed"] == false);
}

TEST_CASE("constant coefficient net") {
  const auto g = symmetric_grid(1.0, 1.0 / 32);
  const auto net = regularize(CoefficientField::constant(2.0), build_bump(1.0, 1.0 / 64), PositiveScale::power(1.0),
                              ladder8, g);
  for (std::size_t e = 0; e < net.size(); ++e) {
    CHECK(net.supnorm[e][0] == 2.0);
    CHECK(net.supnorm[e][1] == 0.0);
    CHECK(net.supnorm[e][2] == 0.0);
  }
  const auto rep = glaeser_check(net);
  CHECK(rep.max_rho() == 0.0);
  CHECK(rep.exponent.identically_zero);
}

TEST_CASE("point-mass sum is regularized to translated kernels") {
  const auto phi = build_bump(1.0, 1.0 / 64);
  const auto g = symmetric_grid(2.0, 1.0 / 512);
  const auto field = CoefficientField::point_mass_sum({-0.5, 0.5}, {1.0, 2.0});
  const auto net = regularize(field, phi, PositiveScale::constant(0.25), {0.5, 0.25}, g);
  const auto s = scale_kernel(phi, 0.25);
  for (std::size_t i = 0; i < g.points; i += 31)
    CHECK(net.values(0)[i] == Approx(s.value(g.x(i) + 0.5).real() + 2.0 * s.value(g.x(i) - 0.5).real()).margin(1e-12));
  CHECK(glaeser_check(net).max_rho() <= 1.0 + 1e-6);
  CHECK_THROWS_AS(field.value(0.0), UnsupportedError);
  CHECK_THROWS_AS(CoefficientField::point_mass_sum({0.0}, {-1.0}), ConfigError);
}

TEST_CASE("distributional coefficients reject a sign-changing kernel") {
  const auto psi = build_vanishing_moments(4, 1.0, 0.25);
  const auto g = symmetric_grid(1.0, 1.0 / 64);
  CHECK_THROWS_AS(regularize(CoefficientField::heaviside(), psi, PositiveScale::power(1.0), ladder8, g), ConfigError);
  CHECK_THROWS_AS(regularize(CoefficientField::point_mass_sum({0.0}, {1.0}), psi, PositiveScale::power(1.0), ladder8, g),
                  ConfigError);
}

TEST_CASE("regularization refuses an unresolved kernel") {
  const auto g = symmetric_grid(1.0, 1.0 / 64);
  CHECK_THROWS_AS(regularize(CoefficientField::heaviside(), build_bump(1.0, 1.0 / 64), PositiveScale::power(1.0),
                             ladder8, g),
                  ResolutionError);
}

TEST_CASE("sup-norm exponents of the regularized Heaviside are 1 and 2 for omega = eps") {
  const auto g = symmetric_grid(1.0, std::ldexp(1.0, -13));
  const auto net = regularize(CoefficientField::heaviside(), build_bump(1.0, 1.0 / 64), PositiveScale::power(1.0),
                              geometric_ladder(2, 8), g);
  CHECK(supnorm_exponent_fit(net, 0).slope == Approx(0.0).margin(1e-9));
  CHECK(supnorm_exponent_fit(net, 1).slope == Approx(1.0).margin(0.01));
  CHECK(supnorm_exponent_fit(net, 2).slope == Approx(2.0).margin(0.01));
  // grid sup of phi_omega' against the analytic sup
  const auto phi = build_bump(1.0, 1.0 / 64);
  for (std::size_t e = 0; e < net.size(); ++e)
    CHECK(net.supnorm[e][1] == Approx(scale_kernel(phi, net.omegas[e]).derivative_sup(0)).epsilon(1e-3));
}

TEST_CASE("coefficient fields") {
  const auto g = symmetric_grid(1.0, 0.1);
  CHECK_THROWS_AS(CoefficientField::smooth(data::polynomial({-1.0, 0.0, 1.0}), g), ConfigError);
  CHECK_THROWS_AS(CoefficientField::constant(-1.0), ConfigError);
  CHECK_THROWS_AS(CoefficientField::heaviside(0.0, -1.0), ConfigError);
  const auto h = CoefficientField::heaviside(0.3, 2.0);
  CHECK(h.value(0.3) == 2.0);
  CHECK(h.value(0.29) == 0.0);
  CHECK(h.distributional());
  CHECK_FALSE(CoefficientField::example1().distributional());
  const auto s = CoefficientField::smooth_sampled(g, std::vector<double>(g.points, 1.0));
  CHECK(s.value(0.05) == 1.0);
  CHECK(s.value(2.0) == 0.0);
}

TEST_CASE("net csv has one derivative column per stored order") {
  const auto g = symmetric_grid(1.0, 0.25);
  const auto net = exact_net(CoefficientField::example1(), g);
  std::ostringstream os;
  write_net_csv(net, 0, os);
  const auto text = os.str();
  CHECK(text.rfind("x,a_eps,a_eps',a_eps''\n", 0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') == static_cast<long>(g.points + 1));
}
