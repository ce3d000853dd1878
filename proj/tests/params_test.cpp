#include "marlens/params.hpp"

#include <doctest.h>

#include <cmath>

using namespace marlens;

namespace {
using Md = MatrixX<double>;
}

TEST_SUITE("params") {

TEST_CASE("store add/at and duplicate rejection") {
  ParamStore<double> store;
  store.add("w", 2, 3);
  CHECK(store.has("w"));
  CHECK(store.at("w").value.rows() == 2);
  CHECK_THROWS_AS(store.add("w", 2, 3), std::logic_error);
  CHECK_THROWS_AS(store.at("missing"), std::out_of_range);
}

TEST_CASE("clip_global_norm scales to the bound and is idempotent") {
  ParamStore<double> store;
  store.add("a", 1, 2);
  store.at("a").grad << 3.0, 4.0; // norm 5
  const double before = clip_global_norm(store, 1.0);
  CHECK(before == doctest::Approx(5.0));
  CHECK(store.at("a").grad.norm() == doctest::Approx(1.0));
  clip_global_norm(store, 1.0);
  CHECK(store.at("a").grad.norm() == doctest::Approx(1.0));

  // under the bound: untouched
  store.at("a").grad << 0.3, 0.4;
  clip_global_norm(store, 1.0);
  CHECK(store.at("a").grad(0, 0) == doctest::Approx(0.3));
}

TEST_CASE("joint clip treats several stores as one vector") {
  ParamStore<double> a, b;
  a.add("x", 1, 1);
  b.add("y", 1, 1);
  a.at("x").grad << 3.0;
  b.at("y").grad << 4.0;
  clip_global_norm<double>({&a, &b}, 1.0);
  CHECK(a.at("x").grad(0, 0) == doctest::Approx(0.6));
  CHECK(b.at("y").grad(0, 0) == doctest::Approx(0.8));
}

TEST_CASE("Adam first step matches the closed form") {
  // With bias correction, the first update is exactly -lr * g/(|g| + eps)
  ParamStore<double> store;
  store.add("w", 1, 2);
  store.at("w").value << 1.0, -2.0;
  store.at("w").grad << 0.5, -0.25;
  Adam<double> opt(0.01);
  opt.step(store);
  CHECK(store.at("w").value(0, 0) == doctest::Approx(1.0 - 0.01 * 0.5 / (0.5 + 1e-8)));
  CHECK(store.at("w").value(0, 1) == doctest::Approx(-2.0 + 0.01 * 0.25 / (0.25 + 1e-8)));
  CHECK(store.step_count() == 1);
}

TEST_CASE("Adam two steps match a hand simulation") {
  ParamStore<double> store;
  store.add("w", 1, 1);
  store.at("w").value << 0.0;
  Adam<double> opt(0.1);
  double m = 0.0, v = 0.0, w = 0.0;
  for (int t = 1; t <= 2; ++t) {
    const double g = t == 1 ? 1.0 : -2.0;
    store.at("w").grad << g;
    opt.step(store);
    m = 0.9 * m + 0.1 * g;
    v = 0.999 * v + 0.001 * g * g;
    const double mh = m / (1 - std::pow(0.9, t));
    const double vh = v / (1 - std::pow(0.999, t));
    w -= 0.1 * mh / (std::sqrt(vh) + 1e-8);
    CHECK(store.at("w").value(0, 0) == doctest::Approx(w).epsilon(1e-12));
  }
}

TEST_CASE("Adam rejects non-finite gradients") {
  ParamStore<double> store;
  store.add("w", 1, 1);
  store.at("w").grad << std::numeric_limits<double>::quiet_NaN();
  Adam<double> opt(0.1);
  CHECK_THROWS_AS(opt.step(store), NonFiniteGradient);
}

TEST_CASE("hard target update copies only on the interval") {
  ParamStore<double> online, target;
  online.add("w", 1, 1).setConstant(5.0);
  target.add("w", 1, 1).setConstant(0.0);
  const TargetUpdate cfg{TargetMode::Hard, 3, 0.01};
  target_update(online, target, cfg, 1);
  CHECK(target.at("w").value(0, 0) == 0.0);
  target_update(online, target, cfg, 2);
  CHECK(target.at("w").value(0, 0) == 0.0);
  target_update(online, target, cfg, 3);
  CHECK(target.at("w").value(0, 0) == 5.0);
}

TEST_CASE("soft target update blends with tau") {
  ParamStore<double> online, target;
  online.add("w", 1, 1).setConstant(1.0);
  target.add("w", 1, 1).setConstant(0.0);
  const TargetUpdate cfg{TargetMode::Soft, 200, 0.01};
  target_update(online, target, cfg, 1);
  CHECK(target.at("w").value(0, 0) == doctest::Approx(0.01));
  target_update(online, target, cfg, 2);
  CHECK(target.at("w").value(0, 0) == doctest::Approx(0.01 + 0.99 * 0.01));
}

TEST_CASE("clone is a deep copy") {
  ParamStore<double> store;
  store.add("w", 1, 1).setConstant(2.0);
  ParamStore<double> copy = store.clone();
  store.at("w").value.setConstant(9.0);
  CHECK(copy.at("w").value(0, 0) == 2.0);
  copy.copy_values_from(store);
  CHECK(copy.at("w").value(0, 0) == 9.0);
}

} // TEST_SUITE
