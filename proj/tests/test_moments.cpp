#include <doctest.h>

#include <cmath>
#include <sstream>

#include "sigmav/error.hpp"
#include "sigmav/moments.hpp"

using namespace sigmav;

TEST_SUITE("moments") {

TEST_CASE("base distribution cumulants") {
  CHECK(BaseSpec::uniform(-0.5, 0.5).variance() == doctest::Approx(1.0 / 12));
  CHECK(BaseSpec::uniform(-0.5, 0.5).kappa4() == doctest::Approx(-1.0 / 120));
  CHECK(BaseSpec::gaussian(0.3, 2.0).kappa4() == 0.0);
  CHECK(BaseSpec::exponential(2.0).variance() == doctest::Approx(0.25));
  CHECK(BaseSpec::rademacher().kappa4() == doctest::Approx(-2.0));
  CHECK(BaseSpec::parse("rademacher").kind == BaseKind::Rademacher);
  CHECK_THROWS_AS(BaseSpec::parse("cauchy"), ContractError);
  CHECK_THROWS_AS(BaseSpec::uniform(1.0, 0.0).validate(), ContractError);
}

TEST_CASE("variance of the uniform sum function scales as 1/N") {
  const auto rep = sum_function_moments(BaseSpec::uniform(-0.5, 0.5), {1, 2, 4, 8, 16, 32}, 400000, 11, 0);
  for (const auto& r : rep.rows) CHECK(std::abs(r.nb - 1.0 / 12) <= 4 * r.nb_err);
  CHECK(rep.b_fit.slope == doctest::Approx(-1.0).epsilon(0.01));
}

TEST_CASE("Gaussian summands have vanishing excess") {
  const auto rep = sum_function_moments(BaseSpec::gaussian(), {1, 4, 16}, 400000, 12, 0);
  for (const auto& r : rep.rows) {
    CHECK(std::abs(r.k) <= 4 * r.k_err);
    CHECK(std::abs(r.c) <= 4 * r.c_err);
  }
}

TEST_CASE("fourth cumulant of the uniform sum function at small N") {
  const auto rep = sum_function_moments(BaseSpec::uniform(-0.5, 0.5), {1, 2, 3, 4}, 2000000, 13, 0);
  for (const auto& r : rep.rows) {
    CHECK_MESSAGE(std::abs(r.n3k + 1.0 / 120) <= 4 * r.n3k_err, "N=" << r.n << " " << r.n3k << " +- " << r.n3k_err);
    CHECK(r.k_tilde == doctest::Approx(r.k / 3.0).epsilon(1e-12));
  }
}

TEST_CASE("third moment of skewed and symmetric summands") {
  const auto ex = sum_function_moments(BaseSpec::exponential(), {1, 2, 4, 8}, 400000, 14, 0);
  for (const auto& r : ex.rows) CHECK(std::abs(r.n2c - 2.0) <= 4 * r.n2c_err);
  for (const auto& base : {BaseSpec::uniform(-1, 1), BaseSpec::rademacher(), BaseSpec::gaussian()}) {
    const auto s = sum_function_moments(base, {1, 3, 9}, 200000, 15, 0);
    for (const auto& r : s.rows) CHECK(std::abs(r.c) <= 4 * r.c_err);
  }
}

TEST_CASE("fourth moment dominates the squared variance") {
  for (const auto& base : {BaseSpec::uniform(-0.5, 0.5), BaseSpec::rademacher(), BaseSpec::exponential()}) {
    const auto rep = sum_function_moments(base, {1, 2, 5}, 20000, 16, 0);
    for (const auto& r : rep.rows) CHECK(r.d >= r.b * r.b);
  }
}

TEST_CASE("trial count floor") {
  CHECK_THROWS_AS(sum_function_moments(BaseSpec::gaussian(), {4}, 9999, 1), ContractError);
  CHECK_THROWS_AS(sum_function_moments(BaseSpec::gaussian(), {}, 10000, 1), ContractError);
  CHECK_THROWS_AS(gaussianity_distance(std::vector<double>(100, 0.0)), ContractError);
}

TEST_CASE("distance to the normal law") {
  const auto g = sum_function_samples(BaseSpec::gaussian(), 1, 100000, 3, 0);
  CHECK(gaussianity_distance(g) < 0.01);
  const auto u = sum_function_samples(BaseSpec::uniform(-0.5, 0.5), 1, 100000, 3, 0);
  CHECK(gaussianity_distance(u) > 0.03);
  const auto e1 = gaussianity_distance(sum_function_samples(BaseSpec::exponential(), 1, 100000, 4, 0));
  const auto e64 = gaussianity_distance(sum_function_samples(BaseSpec::exponential(), 64, 100000, 4, 0));
  CHECK(e64 < e1);
}

TEST_CASE("samples do not depend on the thread count") {
  const auto a = sum_function_samples(BaseSpec::exponential(), 7, 50000, 21, 1);
  const auto b = sum_function_samples(BaseSpec::exponential(), 7, 50000, 21, 8);
  CHECK(a == b);
  const auto c = sum_function_samples(BaseSpec::exponential(), 7, 50000, 22, 8);
  CHECK(a != c);
}

TEST_CASE("ratio average gap") {
  const auto same = ratio_average_check(BaseSpec::uniform(0.5, 1.5), BaseSpec::uniform(0.5, 1.5), {1, 4, 16}, 20000, 5,
                                        0, true);
  for (const auto& r : same.rows) {
    CHECK(r.mean_ratio == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(r.gap) < 1e-12);
  }

  const auto constant = ratio_average_check(BaseSpec::uniform(0.0, 1.0), BaseSpec::constant(2.0), {1, 8}, 20000, 6, 0);
  for (const auto& r : constant.rows) CHECK(std::abs(r.gap) < 1e-12);

  const auto indep = ratio_average_check(BaseSpec::uniform(0.0, 1.0), BaseSpec::uniform(0.5, 1.5), {2, 4, 8, 16, 32, 64},
                                         400000, 7, 0);
  REQUIRE(indep.fitted);
  CHECK(indep.fit.slope == doctest::Approx(-1.0).epsilon(0.1));
  // independent X, Y: gap = <X> (<1/Y> - 1/<Y>) > 0 by Jensen
  for (const auto& r : indep.rows) CHECK(r.gap > 0.0);

  CHECK_THROWS_AS(ratio_average_check(BaseSpec::uniform(0, 1), BaseSpec::uniform(-1, 1), {1}, 1000, 8), ContractError);
}

TEST_CASE("moment table format") {
  const auto rep = sum_function_moments(BaseSpec::rademacher(), {1, 2}, 10000, 1);
  std::ostringstream os;
  write_moment_csv(os, rep);
  std::istringstream is(os.str());
  std::string header;
  std::getline(is, header);
  CHECK(header == "N,B,C,D,K,Ktilde,NB,N2C,N3K,NB_err,N2C_err,N3K_err,KS");
  int rows = 0;
  for (std::string line; std::getline(is, line);) ++rows;
  CHECK(rows == 2);
}

}
