#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <memory>
#include <random>

#include "proxpnp/prior.hpp"

using namespace proxpnp;

namespace {

Signal random_signal(Shape s, std::mt19937_64& rng, double lo = -1.0, double hi = 2.0) {
  std::uniform_real_distribution<double> unif(lo, hi);
  Signal x(s);
  for (double& v : x.data) v = unif(rng);
  return x;
}

// Scalar prior with smoother multiplier 0.5 and scale 1: L = 0.25,
// D(x) = 0.75 x, phi(x) = x^2/6 in closed form.
std::shared_ptr<const LinearSmootherPotential> scalar_potential() {
  return std::make_shared<LinearSmootherPotential>(CircularConvOp(Kernel2d{1, 1, {0.5}}), 1.0,
                                                   Shape{1, 1, 1});
}

std::shared_ptr<const LinearSmootherPotential> smoother_1d(int n, double scale = 0.9) {
  Kernel2d k{1, 3, {0.25, 0.5, 0.25}};
  return std::make_shared<LinearSmootherPotential>(CircularConvOp(k), scale, Shape{1, n, 1});
}

std::shared_ptr<const RandomNonlinearPotential> nonlinear(int n = 8, int hidden = 16,
                                                          std::uint64_t seed = 5) {
  return std::make_shared<RandomNonlinearPotential>(Shape{1, n, 1}, hidden, seed, 0.8);
}

// Independent quadratic oracle for the linear-smoother regularizer: phi is
// diagonal in Fourier with multiplier q = g_mult / (1 - gamma*g_mult) scaled
// by gamma, evaluated with a hand-rolled DFT (no FFT library involved).
double phi_quadratic_oracle(const LinearSmootherPotential& pot, double gamma, const Signal& x) {
  const int n = x.shape.width * x.shape.height;
  const auto& gm = pot.grad_multiplier();
  double acc = 0.0;
  for (int ch = 0; ch < x.shape.channels; ++ch) {
    const double* src = x.channel(ch);
    for (int w = 0; w < n; ++w) {
      std::complex<double> xt(0.0, 0.0);
      for (int j = 0; j < n; ++j) {
        const double ang = -2.0 * M_PI * w * j / n;
        xt += src[j] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      const double q = gamma * gm[w] / (1.0 - gamma * gm[w]);
      acc += q * std::norm(xt);
    }
  }
  return 0.5 * acc / n;
}

}  // namespace

TEST_CASE("scalar closed forms") {
  ProxDenoiser d(scalar_potential(), 1.0);
  Signal two({1, 1, 1}, 2.0);
  Signal d2 = d.denoise(two);
  CHECK(d2[0] == doctest::Approx(1.5).epsilon(1e-14));
  Signal back = d.invert(d2);
  CHECK(back[0] == doctest::Approx(2.0).epsilon(1e-13));
  CHECK(d.phi(d2) == doctest::Approx(0.375).epsilon(1e-13));
  CHECK(d.phi(d2) == doctest::Approx(1.5 * 1.5 / 6.0).epsilon(1e-13));
  CHECK(d.phi_grad(d2)[0] == doctest::Approx(0.5).epsilon(1e-12));  // phi'(x) = x/3
  CHECK(d.weak_convexity_constant() == doctest::Approx(0.2).epsilon(1e-14));
  // the contraction path reproduces the closed form
  Signal back2 = d.invert_contraction(d2);
  CHECK(back2[0] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("gamma = 0 degenerates to the identity with zero regularizer") {
  ProxDenoiser d(scalar_potential(), 0.0);
  std::mt19937_64 rng(21);
  Signal x = random_signal({1, 1, 1}, rng);
  CHECK(max_abs_diff(d.denoise(x), x) == 0.0);
  CHECK(d.phi(x) == 0.0);
  CHECK(d.weak_convexity_constant() == 0.0);
}

TEST_CASE("weak convexity constant formula") {
  // relaxation scales the effective constant
  ProxDenoiser half(scalar_potential(), 0.5);
  const double gl = 0.5 * 0.25;
  CHECK(half.weak_convexity_constant() == doctest::Approx(gl / (gl + 1.0)).epsilon(1e-15));
  // L near 1 pushes M toward 1/2
  auto tight = std::make_shared<LinearSmootherPotential>(
      CircularConvOp(Kernel2d{1, 1, {0.002}}), 1.0, Shape{1, 1, 1});
  ProxDenoiser d(tight, 1.0);
  CHECK(d.weak_convexity_constant() == doctest::Approx(0.5).epsilon(2e-3));
}

TEST_CASE("denoiser Lipschitz sampling") {
  std::mt19937_64 rng(22);
  auto pot = smoother_1d(16);
  ProxDenoiser d(pot, 0.8);
  const double bound = 1.0 + d.effective_lipschitz();
  for (int trial = 0; trial < 200; ++trial) {
    Signal a = random_signal({1, 16, 1}, rng);
    Signal b = random_signal({1, 16, 1}, rng);
    CHECK(norm(d.denoise(a) - d.denoise(b)) <= bound * norm(a - b) + 1e-12);
  }
}

TEST_CASE("gradient Lipschitz ratio stays below the certificate") {
  std::mt19937_64 rng(23);
  for (const std::shared_ptr<const GradPotential>& pot :
       {std::shared_ptr<const GradPotential>(smoother_1d(12)),
        std::shared_ptr<const GradPotential>(nonlinear(8))}) {
    const double l = pot->lipschitz();
    CHECK(l < 1.0);
    for (int trial = 0; trial < 1000; ++trial) {
      Signal a = random_signal(pot->domain_shape(), rng);
      Signal b = random_signal(pot->domain_shape(), rng);
      const double dist = norm(a - b);
      if (dist < 1e-12) continue;
      CHECK(norm(pot->grad(a) - pot->grad(b)) <= l * dist + 1e-10);
    }
  }
}

TEST_CASE("inversion undoes the denoiser on both priors") {
  std::mt19937_64 rng(24);
  for (const std::shared_ptr<const GradPotential>& pot :
       {std::shared_ptr<const GradPotential>(smoother_1d(12)),
        std::shared_ptr<const GradPotential>(nonlinear(8))}) {
    ProxDenoiser d(pot, 0.9);
    for (int trial = 0; trial < 20; ++trial) {
      Signal x = random_signal(pot->domain_shape(), rng);
      Signal roundtrip = d.invert(d.denoise(x));
      CHECK(max_abs_diff(roundtrip, x) < 1e-9);
    }
  }
}

TEST_CASE("contraction residual decays at rate gamma*L") {
  std::mt19937_64 rng(25);
  auto pot = smoother_1d(12, 0.9);
  ProxDenoiser d(pot, 1.0);
  const double rate = d.effective_lipschitz();
  Signal x = random_signal({1, 12, 1}, rng);
  InvertStats stats;
  stats.record_history = true;
  d.invert_contraction(x, &stats);
  REQUIRE(stats.residual_history.size() > 4);
  // least-squares slope of log(residual) against the iteration index
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (std::size_t i = 0; i < stats.residual_history.size(); ++i) {
    if (stats.residual_history[i] <= 0.0) break;
    const double lx = static_cast<double>(i);
    const double ly = std::log(stats.residual_history[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  REQUIRE(n > 4);
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope <= std::log(rate) + 0.01);
  // per-step contraction above the floating-point floor
  for (std::size_t i = 1; i < stats.residual_history.size(); ++i) {
    if (stats.residual_history[i] < 1e-8) break;
    CHECK(stats.residual_history[i] <= rate * stats.residual_history[i - 1] * (1.0 + 1e-6));
  }
}

TEST_CASE("implicit regularizer matches its quadratic closed form") {
  std::mt19937_64 rng(26);
  auto pot = smoother_1d(8, 0.85);
  for (double gamma : {1.0, 0.6}) {
    ProxDenoiser d(pot, gamma);
    for (int trial = 0; trial < 10; ++trial) {
      Signal x = random_signal({1, 8, 1}, rng);
      CHECK(d.phi(x) == doctest::Approx(phi_quadratic_oracle(*pot, gamma, x)).epsilon(1e-10));
    }
  }
}

TEST_CASE("phi dominates the relaxed potential and is exact at fixed points") {
  std::mt19937_64 rng(27);
  for (const std::shared_ptr<const GradPotential>& pot :
       {std::shared_ptr<const GradPotential>(smoother_1d(12)),
        std::shared_ptr<const GradPotential>(nonlinear(8))}) {
    ProxDenoiser d(pot, 0.8);
    for (int trial = 0; trial < 100; ++trial) {
      Signal x = random_signal(pot->domain_shape(), rng);
      CHECK(d.phi(x) - d.gamma() * pot->value(x) >= -1e-9);
    }
  }
  // constants are fixed points of the smoother prior: phi = gamma*g = 0 there
  auto pot = smoother_1d(12);
  ProxDenoiser d(pot, 0.8);
  Signal c({1, 12, 1}, 0.4);
  CHECK(std::abs(d.phi(c)) < 1e-12);
  CHECK(norm(d.phi_grad(c)) < 1e-12);
}

TEST_CASE("phi gradient agrees with central differences") {
  std::mt19937_64 rng(28);
  for (const std::shared_ptr<const GradPotential>& pot :
       {std::shared_ptr<const GradPotential>(smoother_1d(6, 0.8)),
        std::shared_ptr<const GradPotential>(nonlinear(6, 12, 7))}) {
    ProxDenoiser d(pot, 0.9);
    for (int trial = 0; trial < 10; ++trial) {
      Signal x = d.denoise(random_signal(pot->domain_shape(), rng));
      Signal g = d.phi_grad(x);
      const double h = 1e-4;
      for (std::int64_t i = 0; i < x.size(); ++i) {
        Signal xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (d.phi(xp) - d.phi(xm)) / (2.0 * h);
        CHECK(std::abs(fd - g[i]) < 1e-5);
      }
    }
  }
}

TEST_CASE("phi gradient Lipschitz ratio on the denoiser image") {
  std::mt19937_64 rng(29);
  auto pot = smoother_1d(12, 0.9);
  ProxDenoiser d(pot, 1.0);
  const double gl = d.effective_lipschitz();
  const double bound = gl / (1.0 - gl) + 1e-6;
  for (int trial = 0; trial < 300; ++trial) {
    Signal a = d.denoise(random_signal({1, 12, 1}, rng));
    Signal b = d.denoise(random_signal({1, 12, 1}, rng));
    const double dist = norm(a - b);
    if (dist < 1e-12) continue;
    CHECK(norm(d.phi_grad(a) - d.phi_grad(b)) <= bound * dist + 1e-12);
  }
}

TEST_CASE("weak convexity inequalities for phi") {
  std::mt19937_64 rng(30);
  auto pot = smoother_1d(10, 0.9);
  ProxDenoiser d(pot, 1.0);
  const double m = d.weak_convexity_constant();
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const Shape s{1, 10, 1};

  for (int trial = 0; trial < 300; ++trial) {
    Signal x = random_signal(s, rng);
    Signal y = random_signal(s, rng);
    const double t = unif(rng);

    // segment inequality
    const double lhs = d.phi(lincomb(t, x, 1.0 - t, y));
    const double rhs =
        t * d.phi(x) + (1.0 - t) * d.phi(y) + 0.5 * m * t * (1.0 - t) * sqdist(x, y);
    CHECK(lhs <= rhs + 1e-9);

    // subgradient-style bound at points of the denoiser image
    Signal yim = d.denoise(y);
    Signal z = d.phi_grad(yim);
    CHECK(d.phi(x) >= d.phi(yim) + dot(z, x - yim) - 0.5 * m * sqdist(x, yim) - 1e-9);

    // three-point inequality with z+ = denoise(z)
    Signal zz = random_signal(s, rng);
    Signal zp = d.denoise(zz);
    const double lhs3 = d.phi(x) + 0.5 * sqdist(x, zz);
    const double rhs3 =
        d.phi(zp) + 0.5 * sqdist(zp, zz) + 0.5 * (1.0 - m) * sqdist(x, zp);
    CHECK(lhs3 >= rhs3 - 1e-9);
  }
}

TEST_CASE("scaled prox of the implicit regularizer") {
  std::mt19937_64 rng(31);
  auto pot = smoother_1d(10, 0.9);
  ProxDenoiser d(pot, 1.0);
  Signal x = random_signal({1, 10, 1}, rng);
  // tau = 1 is exactly the denoiser
  CHECK(max_abs_diff(d.prox_phi(x, 1.0), d.denoise(x)) < 1e-14);
  for (double tau : {0.5, 1.5}) {
    Signal u = d.prox_phi(x, tau);
    Signal res = u - x;
    axpy(tau, d.phi_grad(u), res);
    CHECK(norm(res) < 1e-9);
  }
  CHECK_THROWS(d.prox_phi(x, 1.0 / d.weak_convexity_constant() + 1.0));
}

TEST_CASE("brute-force prox grid search") {
  ProxDenoiser d(scalar_potential(), 1.0);
  auto phi1 = [&](const std::vector<double>& u) {
    return d.phi(Signal({1, 1, 1}, {u[0]}));
  };

  // argmin of 1/2(u-2)^2 + u^2/6 is the denoised point 1.5
  GridArgmin res = brute_force_prox(phi1, {2.0}, {0.0, 3.0, 1e-3});
  CHECK(std::abs(res.point[0] - 1.5) <= 1e-3 + 1e-12);
  CHECK(res.boundary_margin > 0.0);

  // a fixed point of the denoiser is its own prox
  GridArgmin fixed = brute_force_prox(phi1, {0.0}, {-1.0, 1.0, 1e-3});
  CHECK(std::abs(fixed.point[0]) <= 1e-3 + 1e-12);

  // unbracketed minimizer is an error
  CHECK_THROWS(brute_force_prox(phi1, {5.0}, {0.0, 1.0, 1e-2}));

  // 2D instance, coarse-to-fine refinement against denoise
  auto pot2 = smoother_1d(2, 0.9);
  ProxDenoiser d2(pot2, 1.0);
  std::mt19937_64 rng(32);
  auto phi2 = [&](const std::vector<double>& u) {
    return d2.phi(Signal({1, 2, 1}, {u[0], u[1]}));
  };
  for (int trial = 0; trial < 3; ++trial) {
    Signal z = random_signal({1, 2, 1}, rng, 0.0, 1.0);
    Signal expected = d2.denoise(z);
    double lo = -1.0, hi = 2.0, step = 0.05;
    std::vector<double> zv(z.data.begin(), z.data.end());
    GridArgmin g{};
    for (int level = 0; level < 4; ++level) {
      GridSpec grid{lo, hi, step};
      g = brute_force_prox(phi2, zv, grid);
      const double span = 3.0 * step;
      lo = std::min(g.point[0], g.point[1]) - span;
      hi = std::max(g.point[0], g.point[1]) + span;
      step /= 8.0;
    }
    for (int i = 0; i < 2; ++i) CHECK(std::abs(g.point[i] - expected[i]) < 1e-3);
  }
}

TEST_CASE("nonlinear potential certificate and determinism") {
  auto a = nonlinear(8, 16, 99);
  auto b = nonlinear(8, 16, 99);
  std::mt19937_64 rng(33);
  Signal x = random_signal({1, 8, 1}, rng);
  CHECK(max_abs_diff(a->grad(x), b->grad(x)) == 0.0);  // same seed, same potential
  CHECK(a->lipschitz() == 0.8);
  CHECK(a->value(x) >= 0.0);
}

TEST_CASE("coercive wrapper") {
  auto inner = smoother_1d(8, 0.9);
  auto wrapped = std::make_shared<CoerciveWrapper>(inner, -1.0, 2.0);
  CHECK(wrapped->lipschitz() == doctest::Approx(inner->lipschitz()).epsilon(1e-15));

  std::mt19937_64 rng(34);
  // inside the box the gradient is the scaled inner gradient
  Signal in = random_signal({1, 8, 1}, rng, -0.9, 1.9);
  Signal expect = inner->grad(in);
  for (double& v : expect.data) v *= wrapped->scale();
  CHECK(max_abs_diff(wrapped->grad(in), expect) < 1e-14);

  // outside, the clamp term pushes back toward the box
  Signal out({1, 8, 1}, 5.0);
  Signal g = wrapped->grad(out);
  for (double v : g.data) CHECK(v > 0.0);

  // coercivity: values grow along rays leaving the box
  CHECK(wrapped->value(Signal({1, 8, 1}, 50.0)) > wrapped->value(Signal({1, 8, 1}, 10.0)));

  // gradient ratio certificate holds across the box boundary
  const double l = wrapped->lipschitz();
  for (int trial = 0; trial < 500; ++trial) {
    Signal a = random_signal({1, 8, 1}, rng, -3.0, 4.0);
    Signal b = random_signal({1, 8, 1}, rng, -3.0, 4.0);
    const double dist = norm(a - b);
    if (dist < 1e-12) continue;
    CHECK(norm(wrapped->grad(a) - wrapped->grad(b)) <= l * dist + 1e-10);
  }

  // a denoiser built on the wrapper keeps every identity
  ProxDenoiser d(wrapped, 1.0);
  Signal x = random_signal({1, 8, 1}, rng);
  CHECK(max_abs_diff(d.invert(d.denoise(x)), x) < 1e-9);
}

TEST_CASE("construction guards") {
  CHECK_THROWS(ProxDenoiser(scalar_potential(), 1.5));
  CHECK_THROWS(ProxDenoiser(scalar_potential(), -0.1));
  CHECK_THROWS(LinearSmootherPotential(CircularConvOp(Kernel2d{1, 1, {0.5}}), 1.5, {1, 1, 1}));
  // multiplier outside [0,1] is rejected
  CHECK_THROWS(LinearSmootherPotential(CircularConvOp(Kernel2d{1, 1, {-0.5}}), 1.0, {1, 1, 1}));
}
