#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>

#include "torusflow/fourier_multiplier.hpp"
#include "torusflow/philox.hpp"
#include "torusflow/presets.hpp"
#include "torusflow/pseudospectral.hpp"
#include "torusflow/snapshot.hpp"
#include "torusflow/spectral_field.hpp"

using namespace torusflow;

namespace {

// Non-solenoidal random field: divergence-free part plus a gradient.
SpectralField random_mixed_field(int n, std::uint64_t seed) {
  SpectralField u = presets::random_divergence_free(n, n, 1.0, seed);
  const CounterRng rng(seed + 1000);
  std::uint32_t e = 0;
  for (int k1 = 0; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const std::complex<double> q(0.3 * rng.gaussian(0, 0, e), 0.3 * rng.gaussian(0, 1, e));
      ++e;
      const double kk = static_cast<double>(k1) * k1 + static_cast<double>(k2) * k2;
      const std::complex<double> g = q / (1.0 + kk);
      u.at(k1, k2, 0) += std::complex<double>(0.0, k1) * g;
      u.at(k1, k2, 1) += std::complex<double>(0.0, k2) * g;
      u.at(-k1, -k2, 0) += std::conj(std::complex<double>(0.0, k1) * g);
      u.at(-k1, -k2, 1) += std::conj(std::complex<double>(0.0, k2) * g);
    }
  u.set_divergence_free_flag(false);
  return u;
}

}  // namespace

TEST_CASE("sobolev norm on single-mode and trivial fields") {
  SpectralField f(4, 1);
  f.set_mode_pair(1, 0, 0, {1.0, 0.0});
  const double n2 = sobolev_norm(f, SobolevIndex(2.0));
  CHECK(n2 * n2 == doctest::Approx(8.0).epsilon(1e-14));  // two conjugate modes, (1+1)^2 each

  const SpectralField zero(4, 1);
  CHECK(sobolev_norm(zero, SobolevIndex(3.0)) == 0.0);

  SpectralField constant(4, 1);
  constant.at(0, 0, 0) = {-2.5, 0.0};
  for (double s : {0.0, 1.0, 2.7})
    CHECK(sobolev_norm(constant, SobolevIndex(s)) == doctest::Approx(2.5).epsilon(1e-15));
}

TEST_CASE("sobolev norm is monotone in the index") {
  const SpectralField f = presets::random_divergence_free(8, 8, 0.8, 3);
  double prev = 0.0;
  for (double s : {0.0, 0.5, 1.0, 2.0, 3.5}) {
    const double cur = sobolev_norm(f, SobolevIndex(s));
    CHECK(cur >= prev);
    prev = cur;
  }
  CHECK_THROWS_AS(SobolevIndex(-1.0), std::invalid_argument);
}

TEST_CASE("leray projection kills gradients and fixes divergence-free fields") {
  const int n = 8;
  // pure gradient: u = grad q
  SpectralField grad(n, 2);
  const CounterRng rng(17);
  std::uint32_t e = 0;
  for (int k1 = 0; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2) {
      if (k1 == 0 && k2 <= 0) continue;
      const std::complex<double> q(rng.gaussian(0, 0, e), rng.gaussian(0, 1, e));
      ++e;
      grad.set_mode_pair(k1, k2, 0, std::complex<double>(0.0, k1) * q);
      grad.set_mode_pair(k1, k2, 1, std::complex<double>(0.0, k2) * q);
    }
  const SpectralField pg = leray_project(grad);
  CHECK(l2_norm(pg) <= 1e-13 * l2_norm(grad));

  const SpectralField df = presets::random_divergence_free(n, n, 1.0, 4);
  const SpectralField pdf = leray_project(df);
  double worst = 0.0;
  for (std::size_t i = 0; i < df.raw().size(); ++i)
    worst = std::max(worst, std::abs(df.raw()[i] - pdf.raw()[i]));
  CHECK(worst <= 1e-14);
}

TEST_CASE("leray projection of shear plus gradient recovers the shear") {
  const int n = 6;
  SpectralField u(n, 2);
  u.set_mode_pair(0, 1, 0, {0.0, -0.5});  // sin y in the first component
  SpectralField q(n, 2);
  q.set_mode_pair(2, 1, 0, std::complex<double>(0.0, 2.0) * std::complex<double>(0.2, 0.1));
  q.set_mode_pair(2, 1, 1, std::complex<double>(0.0, 1.0) * std::complex<double>(0.2, 0.1));
  const SpectralField projected = leray_project(u + q);
  const SpectralField diff = projected - u;
  CHECK(l2_norm(diff) <= 1e-14);
}

TEST_CASE("leray projection is idempotent and self-adjoint") {
  const int n = 8;
  const SpectralField u = random_mixed_field(n, 11);
  const SpectralField v = random_mixed_field(n, 12);

  const SpectralField pu = leray_project(u);
  const SpectralField ppu = leray_project(pu);
  double worst = 0.0;
  for (std::size_t i = 0; i < pu.raw().size(); ++i)
    worst = std::max(worst, std::abs(pu.raw()[i] - ppu.raw()[i]));
  CHECK(worst <= 1e-14);

  CHECK(pu.divergence_residual() <= 1e-12);
  CHECK(l2_inner_product(pu, v) ==
        doctest::Approx(l2_inner_product(u, leray_project(v))).epsilon(1e-12));

  // the mean mode passes through unchanged
  SpectralField with_mean = u;
  with_mean.at(0, 0, 0) = {0.7, 0.0};
  const SpectralField pm = leray_project(with_mean);
  CHECK(pm.at(0, 0, 0).real() == doctest::Approx(0.7));
}

TEST_CASE("projection matrices are orthogonal projections") {
  for (const auto& [k1, k2] : {std::pair{1, 0}, {2, 3}, {-4, 7}, {0, 0}}) {
    const auto p = leray_matrix(k1, k2);
    // p^2 = p and p symmetric
    const double a = p[0] * p[0] + p[1] * p[2];
    const double b = p[0] * p[1] + p[1] * p[3];
    CHECK(std::abs(a - p[0]) <= 1e-14);
    CHECK(std::abs(b - p[1]) <= 1e-14);
    CHECK(std::abs(p[1] - p[2]) <= 1e-14);
  }
}

TEST_CASE("convective term vanishes on shear and Taylor-Green") {
  const SpectralField shear = presets::shear(8);
  CHECK(l2_norm(convective_term(shear)) <= 1e-13);

  const SpectralField tg = presets::taylor_green(16);
  CHECK(l2_norm(convective_term(tg)) <= 1e-12);

  const SpectralField zero(8, 2);
  CHECK(l2_norm(convective_term(zero)) == 0.0);

  CHECK_THROWS_AS(convective_term(SpectralField(3, 2)), std::invalid_argument);
}

TEST_CASE("convective term is energy-orthogonal and structure-preserving") {
  const SpectralField u = presets::random_divergence_free(12, 12, 1.3, 21);
  const SpectralField adv = convective_term(u);
  CHECK(std::abs(l2_inner_product(adv, u)) <= 1e-10 * l2_norm(adv) * l2_norm(u) + 1e-14);
  CHECK(adv.divergence_residual() <= 1e-12);
  CHECK(adv.has_zero_mean());
  CHECK(adv.is_hermitian(1e-12));
}

TEST_CASE("smoothing operator halves the first mode at delta = 1") {
  SpectralField f(4, 1);
  f.set_mode_pair(1, 0, 0, {1.0, 0.0});
  const SpectralField g = regularize(f, 1.0);
  CHECK(g.at(1, 0, 0).real() == doctest::Approx(0.5).epsilon(1e-15));

  SpectralField c(4, 1);
  c.at(0, 0, 0) = {3.0, 0.0};
  const SpectralField gc = regularize(c, 0.5);
  CHECK(gc.at(0, 0, 0).real() == doctest::Approx(3.0).epsilon(1e-16));

  CHECK_THROWS_AS(regularize(f, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(regularize(f, -1.0), std::invalid_argument);
}

TEST_CASE("smoothing contracts every Sobolev norm and converges as delta -> 0") {
  const SpectralField f = presets::random_divergence_free(16, 16, 0.9, 33);
  double prev = 1e300;
  for (double delta : {1e-1, 1e-2, 1e-3}) {
    const SpectralField g = regularize(f, delta);
    for (double s : {0.0, 2.0, 3.0})
      CHECK(sobolev_norm(g, SobolevIndex(s)) <= sobolev_norm(f, SobolevIndex(s)) * (1 + 1e-14));
    const double dist = sobolev_norm(g - f, SobolevIndex(2.0));
    CHECK(dist < prev);
    prev = dist;
  }
}

TEST_CASE("smoothing gains two derivatives with constant 1/delta") {
  const SpectralField f = presets::random_divergence_free(16, 16, 0.4, 8);
  for (double delta : {1e-1, 1e-2}) {
    const SpectralField g = regularize(f, delta);
    for (double s : {0.0, 1.0, 2.0}) {
      const double lhs = sobolev_norm(g, SobolevIndex(s + 2.0));
      const double rhs = sobolev_norm(f, SobolevIndex(s)) / delta;
      CHECK(lhs <= rhs * (1 + 1e-13));
    }
  }
}

TEST_CASE("every operation preserves the Hermitian symmetry") {
  const SpectralField u = random_mixed_field(10, 66);
  CHECK(leray_project(u).is_hermitian(1e-13));
  CHECK(regularize(u, 0.03).is_hermitian(1e-13));
  CHECK(partial_derivative(u, 0).is_hermitian(1e-13));
  CHECK(partial_derivative(u, 1).is_hermitian(1e-13));
  CHECK((2.0 * u).is_hermitian(1e-13));
  CHECK((u + u).is_hermitian(1e-13));
  CHECK(u.resampled(6).is_hermitian(1e-13));
  CHECK(convective_term(leray_project(u)).is_hermitian(1e-13));
}

TEST_CASE("smoothing commutes with the projection") {
  const SpectralField u = random_mixed_field(8, 44);
  const SpectralField a = regularize(leray_project(u), 0.05);
  const SpectralField b = leray_project(regularize(u, 0.05));
  double worst = 0.0;
  for (std::size_t i = 0; i < a.raw().size(); ++i)
    worst = std::max(worst, std::abs(a.raw()[i] - b.raw()[i]));
  CHECK(worst <= 1e-15);
}

TEST_CASE("pointwise evaluation matches closed forms and the FFT grid") {
  SpectralField f(4, 1);
  f.set_mode_pair(1, 0, 0, {0.5, 0.0});  // cos x
  CHECK(evaluate_at(f, {0.0, 0.0})[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(evaluate_at(f, {kTwoPi / 4.0, 0.0})[0]) <= 1e-14);

  const SpectralField u = presets::random_divergence_free(8, 8, 1.0, 55);
  const int g = 16;
  const auto grid0 = sample_on_grid(u, 0, g);
  FftGrid work(8);
  std::vector<double> phys;
  work.to_physical(u, 0, phys);
  // compare on the coincident points of the two grids (work grid is 32)
  const int gw = work.grid_size();
  double worst = 0.0;
  for (int i = 0; i < g; ++i)
    for (int j = 0; j < g; ++j) {
      const double direct = grid0[static_cast<std::size_t>(i) * g + j];
      const double fft = phys[static_cast<std::size_t>(i * (gw / g)) * gw + j * (gw / g)];
      worst = std::max(worst, std::abs(direct - fft));
    }
  CHECK(worst <= 1e-12);
}

TEST_CASE("fft grid round-trips band-limited data exactly") {
  const SpectralField u = presets::random_divergence_free(8, 8, 0.7, 77);
  FftGrid work(8);
  std::vector<double> phys;
  work.to_physical(u, 0, phys);
  SpectralField back(8, 2);
  work.to_spectral(phys, back, 0);
  double worst = 0.0;
  const int n = 8;
  for (int k1 = -n; k1 <= n; ++k1)
    for (int k2 = -n; k2 <= n; ++k2)
      worst = std::max(worst, std::abs(back.at(k1, k2, 0) - u.at(k1, k2, 0)));
  CHECK(worst <= 1e-14);
}

TEST_CASE("hermitian symmetry helpers") {
  SpectralField f(4, 1);
  f.at(1, 2, 0) = {1.0, 0.5};
  CHECK_FALSE(f.is_hermitian(1e-12));
  f.enforce_hermitian();
  CHECK(f.is_hermitian(1e-15));

  const SpectralField u = presets::random_divergence_free(6, 6, 1.0, 5);
  CHECK(u.is_hermitian(1e-15));
  CHECK(u.divergence_residual() <= 1e-13);
  CHECK(u.has_zero_mean());
}

TEST_CASE("resampling truncates and pads modes") {
  const SpectralField u = presets::random_divergence_free(8, 8, 1.0, 6);
  const SpectralField down = u.resampled(4);
  const SpectralField up = down.resampled(8);
  for (int k1 = -4; k1 <= 4; ++k1)
    for (int k2 = -4; k2 <= 4; ++k2)
      CHECK(std::abs(up.at(k1, k2, 0) - u.at(k1, k2, 0)) == 0.0);
  CHECK(std::abs(up.at(6, 1, 0)) == 0.0);
  CHECK(sobolev_norm(down, SobolevIndex(2.0)) <= sobolev_norm(u, SobolevIndex(2.0)));
}

TEST_CASE("snapshot files round-trip bit-exactly") {
  const SpectralField u = presets::random_divergence_free(10, 10, 1.1, 99);
  const std::string path =
      (std::filesystem::temp_directory_path() / "torusflow_snapshot_test.fld").string();
  write_snapshot(u, path);
  const SpectralField back = read_snapshot(path);
  REQUIRE(back.resolution() == u.resolution());
  REQUIRE(back.components() == u.components());
  CHECK(back.divergence_free_flag() == u.divergence_free_flag());
  for (std::size_t i = 0; i < u.raw().size(); ++i) {
    CHECK(std::memcmp(&u.raw()[i], &back.raw()[i], sizeof(std::complex<double>)) == 0);
  }
  std::filesystem::remove(path);
}

TEST_CASE("velocity evaluator agrees with the generic mode sum") {
  const SpectralField u = presets::random_divergence_free(16, 16, 1.0, 123);
  const VelocityEvaluator eval(u);
  for (int i = 0; i < 25; ++i) {
    const Vec2 p{0.37 * i + 0.1, 2.11 * i + 0.05};
    const auto ref = evaluate_at(u, p);
    const Vec2 v = eval(p);
    CHECK(std::abs(v.x - ref[0]) <= 1e-12);
    CHECK(std::abs(v.y - ref[1]) <= 1e-12);
  }
}
