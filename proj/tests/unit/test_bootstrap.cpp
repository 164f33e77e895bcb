#include <cmath>

#include "doctest.h"
#include "fluidspan/bootstrap.hpp"
#include "fluidspan/errors.hpp"

using namespace fluidspan;

namespace {

constexpr double kE = 2.718281828459045235;
constexpr double kLog2 = 0.693147180559945309;

int domain_level(const LifespanBound& b, double delta) {
  try {
    b.T(delta);
  } catch (const DomainError& e) {
    return e.level();
  }
  return 0;
}

StretchingSample sample(double t) {
  StretchingSample s;
  s.t = t;
  return s;
}

}  // namespace

TEST_CASE("growth constants") {
  auto L = growth_constants(3.0);
  CHECK(L.Lambda1 == doctest::Approx(1 + std::log(4.0)).epsilon(1e-15));
  CHECK(L.Lambda1 == doctest::Approx(2.386294).epsilon(1e-6));
  CHECK(L.Lambda2 == 3.0);
  CHECK(L.Lambda3 == 6.0);
  CHECK(L.Lambda4 == 15.0);
  CHECK(growth_constants(10.0).Lambda1 == doctest::Approx(3.397895).epsilon(1e-6));
  CHECK_THROWS_AS(growth_constants(kE), HypothesisError);
  CHECK_THROWS_AS(growth_constants(1.0), HypothesisError);
  CHECK(corrected_lambda1(3.0) == doctest::Approx(3 * (1 + std::log(4.0))));
}

TEST_CASE("generic closure examples") {
  auto b = closure_lifespan({{1.0}, {1.0}, 1.0, 1.0, 1.0});
  CHECK(b.provenance() == BoundKind::generic_closure);
  CHECK(b.C0() == 0.99);
  CHECK(b.ln_delta0() == doctest::Approx(std::log(0.99) - kE * kE).epsilon(1e-15));
  CHECK(std::exp(b.ln_delta0()) == doctest::Approx(6.118e-4).epsilon(1e-3));
  CHECK(b.T_ln(b.ln_delta0()) == doctest::Approx(kLog2).epsilon(1e-12));
  CHECK(b.T(1e-6) == doctest::Approx(0.96510).epsilon(1e-5));
  CHECK(b.T(1e-6) == doctest::Approx(std::log(std::log(std::log(0.99e6)))).epsilon(1e-14));
  CHECK(b.budget(0, 1e-3) == doctest::Approx(990.0));
}

TEST_CASE("nested-log domain errors name the failing level") {
  auto b = closure_lifespan({{1.0}, {1.0}, 1.0, 1.0, 1.0});
  CHECK(domain_level(b, 0.99) == 1);
  CHECK(domain_level(b, 2.0) == 1);
  CHECK(domain_level(b, 0.5) == 2);  // log(1.98) < C1
  CHECK(domain_level(b, 1e-3) == 0);
  CHECK_THROWS_AS(b.T(0.0), DomainError);
  CHECK_THROWS_AS(closure_lifespan({{1.0}, {0.5}, 1.0, 1.0, 1.0}), ParameterError);
  CHECK_THROWS_AS(closure_lifespan({{}, {}, 1.0, 1.0, 1.0}), ParameterError);
}

TEST_CASE("closure properties over a family of specs") {
  for (double c1 : {0.5, 1.0, 3.0})
    for (double c2 : {0.7, 1.0, 2.0})
      for (double c3 : {0.1, 1.0, 6.0}) {
        ClosureSpec spec{{1.0, 2.5}, {1.0, 4.0}, c1, c2, c3};
        auto b = closure_lifespan(spec);
        CAPTURE(c1);
        CAPTURE(c2);
        CAPTURE(c3);
        CHECK(b.C0() == doctest::Approx(0.099));
        CHECK(b.T_ln(b.ln_delta0()) == doctest::Approx(kLog2 / c3).epsilon(1e-12));
        // 50 log-spaced points strictly inside the domain
        double prev = -std::numeric_limits<double>::infinity();
        for (int k = 0; k < 50; ++k) {
          const double ln_d = b.ln_delta0() - 1e-3 * std::pow(1e8, k / 49.0);
          const double T = b.T_ln(ln_d);
          CHECK(T > prev);
          prev = T;
          CHECK(b.budget_certificate_error(ln_d) <= 1e-10);
        }
      }
}

TEST_CASE("Boussinesq bound") {
  auto b = boussinesq_bound(growth_constants(3.0));
  CHECK(b.provenance() == BoundKind::boussinesq);
  CHECK(b.C0() == doctest::Approx(0.066).epsilon(1e-15));
  CHECK(b.T_ln(b.ln_delta0()) == doctest::Approx(kLog2 / (1 + std::log(4.0))).epsilon(1e-12));
  CHECK(domain_level(b, 0.066) == 1);
  CHECK(domain_level(b, 0.5) == 1);
  CHECK_THROWS_AS(boussinesq_bound(GrowthConstants{kE, 1, 1, 1, 1}), HypothesisError);
}

TEST_CASE("IIE bounds") {
  auto b = iie_bound(1.0);
  const auto L = growth_constants(9 * kE * kE);
  CHECK(b.C0() == doctest::Approx(99.0 / (100.0 * L.Lambda4)));
  CHECK(b.T_ln(b.ln_delta0()) == doctest::Approx(kLog2 / L.Lambda1).epsilon(1e-12));

  auto c = iie_continuation_budget(1.0);
  CHECK(c.ln_delta0_bound == doctest::Approx(std::log(0.03) - 12 * kE).epsilon(1e-15));
  CHECK(std::exp(c.ln_delta0_bound) == doctest::Approx(2.045e-16).epsilon(1e-3));
  // at the bound the budget collapses to zero
  CHECK(std::abs(c.U_budget.T_ln(c.ln_delta0_bound)) <= 1e-14);
  double prev = 0.0;
  for (int k = 1; k <= 40; ++k) {
    const double U = c.U_budget.T_ln(c.ln_delta0_bound - std::pow(2.0, k));
    CHECK(U > prev);
    prev = U;
  }
  CHECK_THROWS_AS(iie_continuation_budget(0.5), HypothesisError);
}

TEST_CASE("MHD constants in log space") {
  auto k = mhd_constants(1.0);
  CHECK(k.C1 == 6.0);
  CHECK(k.C2 == doctest::Approx(kE * kE / 6).epsilon(1e-15));
  CHECK(k.C2 == doctest::Approx(1.231509).epsilon(1e-6));
  CHECK(k.C4 == doctest::Approx(1 / (4 * kE * kE)).epsilon(1e-15));
  CHECK(k.C4 == doctest::Approx(0.033834).epsilon(1e-5));
  CHECK(k.C4p == doctest::Approx(0.99 * 4 * kE * kE).epsilon(1e-15));
  CHECK(k.C3 == doctest::Approx(kE / (2 * std::pow(kE, 3) * 6 * kE * kE / 6)).epsilon(1e-15));
  const double log10_d0 = k.bound.log10_delta0();
  CHECK(log10_d0 < -3.6e12);
  CHECK(log10_d0 > -3.8e12);
  CHECK(k.alpha0 == doctest::Approx(k.C2 * std::exp(4 * kE * kE)).epsilon(1e-12));
  CHECK(k.beta0 == doctest::Approx(4 * kE * kE).epsilon(1e-12));
  CHECK(k.gamma0 == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(k.certificate());
  CHECK(k.ln_f_delta0 < -1e12);
  // δ₀ is chosen so that γ(δ₀) = 2, hence T(δ₀) = 2/C₁
  CHECK(k.bound.T_ln(k.ln_delta0) == doctest::Approx(2.0 / k.C1).epsilon(1e-12));
  // f′ > 0 on (0, δ₀)
  for (int j = 0; j < 20; ++j) {
    const double ln_d = k.ln_delta0 - std::pow(10.0, j / 2.0);
    CHECK(mhd_threshold_terms(k, ln_d).f_prime > 0.0);
  }
  CHECK_THROWS_AS(mhd_constants(0.5), HypothesisError);
}

TEST_CASE("saturated generic system against the envelopes") {
  SUBCASE("initial values") {
    auto r = integrate_saturated_system(SaturatedKind::generic, 3.0, 0.1);
    CHECK(r.t.front() == 0.0);
    CHECK(r.log_M.front() == 0.0);
    CHECK(r.log_N.front() == 0.0);
    CHECK(r.log1p_Q.front() == 0.0);
    CHECK(r.envelopes[0].min_margin <= 1.0);
    CHECK(r.t.back() == doctest::Approx(0.1));
  }
  SUBCASE("with the rate C(1+log(1+C)) every envelope holds") {
    for (double C : {3.0, 5.0, 10.0}) {
      CAPTURE(C);
      SaturatedOptions o;
      o.lambda1 = corrected_lambda1(C);
      auto r = integrate_saturated_system(SaturatedKind::generic, C, 0.5, o);
      for (const auto& e : r.envelopes) {
        CAPTURE(e.name);
        CHECK(e.holds());
        CHECK(e.min_margin >= 0.0);
      }
    }
  }
  SUBCASE("with Λ₁ = 1 + log(1+C) the M envelope has a counterexample") {
    auto r = integrate_saturated_system(SaturatedKind::generic, 3.0, 0.5);
    REQUIRE(r.envelopes[0].first_violation.has_value());
    CHECK(*r.envelopes[0].first_violation < 0.2);
    CHECK(r.envelopes[0].lhs_at_violation > r.envelopes[0].rhs_at_violation);
  }
}

TEST_CASE("saturated model systems") {
  SUBCASE("Boussinesq") {
    SaturatedOptions o;
    o.lambda1 = corrected_lambda1(2 * 3.0 * (1 + std::log(2.0)));
    auto r = integrate_saturated_system(SaturatedKind::boussinesq, 3.0, 0.3, o);
    CHECK(r.all_hold());
    // Ẏ = M + N ≥ 2 so Y(t) ≥ 2t
    CHECK(logspace::log_from_log1p(r.log1p_Q.back()) >= std::log(0.6));
  }
  SUBCASE("IIE relaxed") {
    SaturatedOptions o;
    o.lambda1 = corrected_lambda1(9 * kE * kE * 3.0);
    auto r = integrate_saturated_system(SaturatedKind::iie_relaxed, 3.0, 0.02, o);
    CHECK(r.all_hold());
  }
  SUBCASE("MHD simplified") {
    SaturatedOptions o;
    o.delta = 1e-3;
    auto r = integrate_saturated_system(SaturatedKind::mhd_simplified, 1.0, 0.2, o);
    CHECK(r.envelopes.size() == 4);
    for (const auto& e : r.envelopes) {
      CAPTURE(e.name);
      CHECK(e.holds());
    }
    CHECK(r.log1p_Q.back() > 0.0);
  }
  CHECK_THROWS_AS(integrate_saturated_system(SaturatedKind::generic, 2.0, 0.5), HypothesisError);
  CHECK_THROWS_AS(integrate_saturated_system(SaturatedKind::generic, 3.0, 6.0), ParameterError);
}

TEST_CASE("bootstrap monitor") {
  SUBCASE("motionless Boussinesq: δY crosses 1 at t = 1/(2δ)") {
    StretchingSeries s{ModelKind::Boussinesq, 0.1};
    for (int k = 0; k <= 40; ++k) {
      auto x = sample(0.25 * k);
      x.Y = 2 * x.t;
      x.Z = x.t;
      s.samples.push_back(x);
    }
    auto r = bootstrap_monitor(s, ModelKind::Boussinesq, 0.1, 3.0);
    REQUIRE(r.T_emp.has_value());
    CHECK(*r.T_emp == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(r.components.size() == 2);
    CHECK_FALSE(r.components[0].first_violation.has_value());  // δZ reaches exactly 1 at t = 10
  }
  SUBCASE("motionless IIE never violates M or N") {
    StretchingSeries s{ModelKind::IIE, 0.01};
    for (int k = 0; k <= 20; ++k) {
      auto x = sample(k);
      x.Q = 0.0;
      s.samples.push_back(x);
    }
    auto r = bootstrap_monitor(s, ModelKind::IIE, 0.01, 3.0);
    CHECK_FALSE(r.T_emp.has_value());
    CHECK(r.T_emp_string() == "none");
  }
  SUBCASE("synthetic crossing") {
    StretchingSeries s{ModelKind::IIE, 0.5};
    for (int k = 0; k <= 8; ++k) {
      auto x = sample(0.5 * k);
      x.Q = x.t;  // δQ = t/2 crosses 1 at t = 2
      s.samples.push_back(x);
    }
    auto r = bootstrap_monitor(s, ModelKind::IIE, 0.5, 0.1);
    REQUIRE(r.T_emp.has_value());
    CHECK(*r.T_emp == doctest::Approx(2.0));
  }
  SUBCASE("delta = 0 is unconditional") {
    StretchingSeries s{ModelKind::Boussinesq, 0.0};
    s.samples.push_back(sample(0.0));
    auto r = bootstrap_monitor(s, ModelKind::Boussinesq, 0.0, 3.0);
    CHECK(r.unconditional);
    CHECK(r.T_emp_string() == "unconditional");
  }
  SUBCASE("MHD time component") {
    StretchingSeries s{ModelKind::MHD_VorticityCurrent, 0.1};
    for (int k = 0; k <= 10; ++k) {
      auto x = sample(k);
      x.Q = 0.0;
      s.samples.push_back(x);
    }
    auto r = bootstrap_monitor(s, ModelKind::MHD_VorticityCurrent, 0.1, 2.0);
    CHECK(*r.T_emp == doctest::Approx(5.0));
  }
}

TEST_CASE("calibrated constant") {
  StretchingSeries s{ModelKind::Boussinesq};
  auto x = sample(0.0);
  x.M = 2.0;
  x.N = 3.0;
  x.M_dot = 2.0 * 4.0;
  x.N_dot = 3.0 * 12.0;  // Ṅ/N = 12 = 4(1+M)
  s.samples.push_back(x);
  const double c = calibrate_c_fit(s);
  CHECK(c == doctest::Approx(std::max(4.0, 4.0 / (1 + std::log(13.0)))));
  s.samples[0].N_dot = 0.0;
  s.samples[0].M_dot = 0.0;
  CHECK(calibrate_c_fit(s) > kE);
  CHECK(lifespan_for_model(ModelKind::Boussinesq, 3.0).provenance() == BoundKind::boussinesq);
  CHECK(lifespan_for_model(ModelKind::MHD_Elsasser, 1.0).provenance() == BoundKind::mhd);
  CHECK_THROWS_AS(lifespan_for_model(ModelKind::Euler, 3.0), ParameterError);
}
