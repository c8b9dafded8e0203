#include <doctest.h>

#include <vector>

#include "navsim/rng.hpp"

using namespace navsim;

TEST_CASE("identical seeds produce identical streams") {
  Rng a(42), b(42);
  for (int i = 0; i < 1000; ++i) CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("different seeds produce different streams") {
  Rng a(42), b(43);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);
}

TEST_CASE("uniform stays in [0, 1) and covers the range") {
  Rng rng(7);
  double lo = 1.0, hi = 0.0;
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
    lo = std::min(lo, u);
    hi = std::max(hi, u);
  }
  CHECK(lo < 0.001);
  CHECK(hi > 0.999);
}

TEST_CASE("uniform(lo, hi) respects the bounds") {
  Rng rng(8);
  for (int i = 0; i < 1000; ++i) {
    const double u = rng.uniform(-3.0, 5.0);
    CHECK(u >= -3.0);
    CHECK(u < 5.0);
  }
}

TEST_CASE("normal has the requested first two moments") {
  Rng rng(9);
  const int n = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = rng.normal(2.0, 3.0);
    sum += x;
    sum2 += x * x;
  }
  const double mean = sum / n;
  const double var = sum2 / n - mean * mean;
  // Standard errors: sigma/sqrt(n) ~ 0.0067 for the mean.
  CHECK(mean == doctest::Approx(2.0).epsilon(0.02));
  CHECK(var == doctest::Approx(9.0).epsilon(0.03));
}

TEST_CASE("poisson matches its mean and variance in both regimes") {
  Rng rng(10);
  for (double lambda : {3.0, 100.0}) {
    const int n = 100000;
    double sum = 0.0, sum2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double k = static_cast<double>(rng.poisson(lambda));
      sum += k;
      sum2 += k * k;
    }
    const double mean = sum / n;
    const double var = sum2 / n - mean * mean;
    CHECK(mean == doctest::Approx(lambda).epsilon(0.03));
    CHECK(var == doctest::Approx(lambda).epsilon(0.06));
  }
  CHECK(rng.poisson(0.0) == 0);
  CHECK(rng.poisson(-1.0) == 0);
}

TEST_CASE("uniform_index stays in range and hits every bucket") {
  Rng rng(11);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 7000; ++i) {
    const auto k = rng.uniform_index(7);
    REQUIRE(k < 7);
    ++counts[k];
  }
  for (int c : counts) CHECK(c > 700);  // expected 1000 each
}

TEST_CASE("unit_vector is unit norm with near-zero mean direction") {
  Rng rng(12);
  Vector3d sum = Vector3d::Zero();
  const int n = 50000;
  for (int i = 0; i < n; ++i) {
    const Vector3d u = rng.unit_vector();
    CHECK(u.norm() == doctest::Approx(1.0).epsilon(1e-12));
    sum += u;
  }
  // Mean of n isotropic unit vectors has norm ~ 1/sqrt(n) per axis.
  CHECK((sum / n).norm() < 0.02);
}

TEST_CASE("derive_stream decorrelates consecutive indices") {
  Rng a = derive_stream(123, 0);
  Rng b = derive_stream(123, 1);
  int same = 0;
  for (int i = 0; i < 100; ++i)
    if (a.next_u64() == b.next_u64()) ++same;
  CHECK(same == 0);

  // Same (seed, index) reproduces the stream.
  Rng c = derive_stream(123, 5), d = derive_stream(123, 5);
  for (int i = 0; i < 100; ++i) CHECK(c.next_u64() == d.next_u64());
}
