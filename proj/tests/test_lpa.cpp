#include <doctest.h>

#include "tailrisk/econ.hpp"
#include "tailrisk/parallel.hpp"
#include "tailrisk/synth.hpp"

using namespace tailrisk;

namespace {

constexpr double kOmega = 0.05, kAlpha = 0.1, kBeta = 0.85;

}  // namespace

TEST_CASE("a ladder with one rung is returned without testing") {
  const auto x = synth::simulate_garch11(kOmega, kAlpha, kBeta, 600, 4);
  econ::LpaOptions opt;
  opt.min_length = 300;
  opt.max_length = 300;
  const auto out = econ::lpa_select_interval(x, 599, opt);
  CHECK(out.candidates == 1);
  CHECK(out.start == 300);
  CHECK(out.length() == 300);
  CHECK(out.rejected_statistic == 0.0);
  CHECK_NOTHROW(out.params.validate());

  // Fewer than one step of room past the shortest rung also leaves one rung.
  opt.max_length = 2880;
  const auto tight = econ::lpa_select_interval(x, 302, opt);
  CHECK(tight.candidates == 1);
  CHECK(tight.start == 3);
}

TEST_CASE("too little history is rejected") {
  const auto x = synth::simulate_garch11(kOmega, kAlpha, kBeta, 500, 1);
  econ::LpaOptions opt;
  CHECK_THROWS_AS(econ::lpa_select_interval(x, 200, opt), DataError);
  CHECK_THROWS_AS(econ::lpa_select_interval(x, 500, opt), DataError);
  opt.step = 0;
  CHECK_THROWS_AS(econ::lpa_select_interval(x, 499, opt), ConfigError);
}

TEST_CASE("selection is bit-reproducible and matches the serial twin") {
  const auto x = synth::simulate_omega_break(kOmega, kAlpha, kBeta, 1400, 900, 10.0, 3);
  econ::LpaOptions opt;
  opt.max_length = 1200;
  opt.seed = 99;
  const auto a = [&] {
    const ScopedWorkers w(4);
    return econ::lpa_select_interval(x, 1399, opt);
  }();
  const auto b = econ::lpa_select_interval(x, 1399, opt);
  const auto s = econ::lpa_select_interval_serial(x, 1399, opt);
  for (const auto* other : {&b, &s}) {
    CHECK(a.start == other->start);
    CHECK(a.critical_value == other->critical_value);
    CHECK(a.rejected_statistic == other->rejected_statistic);
    CHECK(a.params.to_vector() == other->params.to_vector());
  }
}

TEST_CASE("homogeneous GARCH(1,1): longest interval in at least 90% of trials") {
  const econ::LpaOptions opt;
  int longest = 0;
  const int trials = 50;
  for (int s = 0; s < trials; ++s) {
    const auto x = synth::simulate_garch11(kOmega, kAlpha, kBeta, 3000, 1000 + s);
    const auto out = econ::lpa_select_interval(x, 2999, opt);
    longest += out.length() == opt.max_length ? 1 : 0;
  }
  MESSAGE("longest interval kept in " << longest << " of " << trials << " trials");
  CHECK(longest >= 45);
}

TEST_CASE("omega jump x10: start within two steps of the break in at least 80% of trials") {
  const econ::LpaOptions opt;
  const std::size_t change = 2000;
  int near = 0, detected = 0;
  const int trials = 50;
  for (int s = 0; s < trials; ++s) {
    const auto x = synth::simulate_omega_break(kOmega, kAlpha, kBeta, 3000, change, 10.0, 2000 + s);
    const auto out = econ::lpa_select_interval(x, 2999, opt);
    detected += out.rejected_statistic > 0.0 ? 1 : 0;
    near += out.start + 2 * opt.step >= change && out.start <= change + 2 * opt.step ? 1 : 0;
  }
  MESSAGE("break detected in " << detected << ", located within 10 in " << near << " of " << trials << " trials");
  CHECK(detected >= 45);
  CHECK(near >= 40);
}
