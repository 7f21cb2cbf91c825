#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

#include "fbbai/bandit.hpp"
#include "fbbai/divergence.hpp"
#include "fbbai/io.hpp"

using namespace fbbai;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("kl_bernoulli closed forms and conventions") {
  // KL(Ber(0.5) || Ber(0.45)) = 0.5 ln(0.25 / (0.45 * 0.55)) = 0.5 ln(100/99).
  CHECK(kl_bernoulli(0.5, 0.45) ==
        doctest::Approx(0.5 * std::log(100.0 / 99.0)).epsilon(1e-14));
  CHECK(kl_bernoulli(0.3, 0.3) == 0.0);
  CHECK(kl_bernoulli(0.0, 0.0) == 0.0);
  CHECK(kl_bernoulli(1.0, 1.0) == 0.0);
  CHECK(kl_bernoulli(0.0, 0.4) == doctest::Approx(std::log(1.0 / 0.6)).epsilon(1e-14));
  CHECK(kl_bernoulli(1.0, 0.4) == doctest::Approx(std::log(1.0 / 0.4)).epsilon(1e-14));
  CHECK(kl_bernoulli(0.5, 0.0) == kInf);
  CHECK(kl_bernoulli(0.5, 1.0) == kInf);
  CHECK_THROWS_AS((void)kl_bernoulli(-0.1, 0.5), std::domain_error);
  CHECK_THROWS_AS((void)kl_bernoulli(0.5, 1.1), std::domain_error);
}

TEST_CASE("kl_bernoulli dominates the Pinsker quadratic") {
  for (int a = 1; a < 20; ++a) {
    for (int b = 1; b < 20; ++b) {
      const double q = a / 20.0, p = b / 20.0;
      CHECK(kl_bernoulli(q, p) >= 2.0 * (q - p) * (q - p) - 1e-15);
    }
  }
}

TEST_CASE("kl_gaussian closed form") {
  CHECK(kl_gaussian(0.0, 1.0, 1.0) == 0.5);
  CHECK(kl_gaussian(1.0, 0.0, 1.0) == 0.5);
  CHECK(kl_gaussian(0.3, 0.3, 2.0) == 0.0);
  // Scale invariance: halving sigma quadruples the divergence.
  CHECK(kl_gaussian(0.0, 1.0, 0.5) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK_THROWS_AS((void)kl_gaussian(0.0, 1.0, 0.0), std::domain_error);
  CHECK(kl(Family::kGaussian, 0.0, 1.0, 1.0) == 0.5);
  CHECK(kl(Family::kBernoulli, 0.5, 0.45) == kl_bernoulli(0.5, 0.45));
}

TEST_CASE("complexity measures") {
  const Complexity h1{ComplexityKind::kH1, 1.0};
  const Complexity h2{ComplexityKind::kH2, 1.0};
  const Complexity hc{ComplexityKind::kConstant, 2.5};
  const std::vector<double> inst1{0.5, 0.45, 0.3};

  // Gaps 0.05 and 0.2: 1/0.0025 + 1/0.04 = 425.
  CHECK(complexity(h1, inst1) == doctest::Approx(425.0).epsilon(1e-12));
  // Audibert: sorted gaps (0, 0.05, 0.2), max(2/0.05^2, 3/0.2^2) = 800.
  CHECK(complexity(h2, inst1) == doctest::Approx(800.0).epsilon(1e-12));
  CHECK(complexity(hc, inst1) == 2.5);
  // A tie with the best arm puts a zero gap in the sum.
  CHECK(complexity(h1, std::vector<double>{0.5, 0.5, 0.3}) == kInf);
}

TEST_CASE("rate_objective zero-weight convention") {
  const BanditInstance p = make_bernoulli({0.5, 0.5});  // H1 = inf
  const Complexity h1{ComplexityKind::kH1, 1.0};
  // r puts no mass on any diverging arm and the sum is zero: 0 * inf = 0.
  CHECK(rate_objective(p, {0.5, 0.5}, {0.5, 0.5}, h1) == 0.0);
  // Infinite divergence beneath zero weight is ignored.
  const BanditInstance p2 = make_bernoulli({0.0, 0.6});
  const Complexity hc{ComplexityKind::kConstant, 1.0};
  CHECK(rate_objective(p2, {0.5, 0.5}, {0.0, 1.0}, hc) ==
        doctest::Approx(kl_bernoulli(0.5, 0.6)).epsilon(1e-14));
  CHECK(rate_objective(p2, {0.5, 0.5}, {1.0, 0.0}, hc) == kInf);
}

TEST_CASE("best-arm helpers") {
  CHECK(best_arm_set({0.3, 0.5, 0.5}) == std::vector<int>{1, 2});
  CHECK(best_arm({0.3, 0.5, 0.5}) == 1);
  CHECK(best_arm_set({0.5, 0.49, 0.5}, 0.02) == std::vector<int>{0, 1, 2});
  CHECK(is_error({0.5, 0.45}, 1));
  CHECK_FALSE(is_error({0.5, 0.5}, 1));
  // Dyadic means keep the subtractions exact.
  CHECK(gaps({0.25, 1.0, 0.5}) == std::vector<double>{0.0, 0.5, 0.75});
}

TEST_CASE("instance validation") {
  CHECK_THROWS_AS(validate_instance(make_bernoulli({0.5})), std::domain_error);
  CHECK_THROWS_AS(validate_instance(make_bernoulli({0.5, 1.2})), std::domain_error);
  CHECK_THROWS_AS(validate_instance(make_gaussian({0.0, 1.0}, 0.0)), std::domain_error);
  CHECK_NOTHROW(validate_instance(make_gaussian({-3.0, 4.0}, 2.0)));
}

TEST_CASE("empirical state bookkeeping") {
  EmpiricalState st;
  st.reset(2);
  CHECK(st.t == 0);
  st.update(0, 1.0);
  st.update(0, 0.0);
  st.update(1, 1.0);
  CHECK(st.t == 3);
  CHECK(st.counts == std::vector<std::int64_t>{2, 1});
  CHECK(st.means[0] == 0.5);
  CHECK(st.means[1] == 1.0);
}

TEST_CASE("reward substreams ignore interleaving") {
  const BanditInstance p = make_bernoulli({0.6, 0.4, 0.2});

  RewardStream a(7, 3, p.k());
  std::vector<double> solo;
  for (int n = 0; n < 8; ++n) solo.push_back(a.draw(p, 1));

  RewardStream b(7, 3, p.k());
  std::vector<double> mixed;
  for (int n = 0; n < 8; ++n) {
    (void)b.draw(p, 0);
    mixed.push_back(b.draw(p, 1));
    (void)b.draw(p, 2);
  }
  CHECK(solo == mixed);

  // A different trial produces a different stream.
  RewardStream c(7, 4, p.k());
  std::vector<double> other;
  for (int n = 0; n < 8; ++n) other.push_back(c.draw(p, 1));
  CHECK(solo != other);
}

TEST_CASE("family and complexity names round trip") {
  CHECK(family_from_name(family_name(Family::kBernoulli)) == Family::kBernoulli);
  CHECK(family_from_name(family_name(Family::kGaussian)) == Family::kGaussian);
  CHECK_THROWS_AS((void)family_from_name("cauchy"), std::invalid_argument);

  for (const char* name : {"h1", "h2", "const:2.5"})
    CHECK(complexity_name(complexity_from_name(name)) == name);
  const Complexity third{ComplexityKind::kConstant, 1.0 / 3.0};
  const Complexity back = complexity_from_name(complexity_name(third));
  CHECK(back.constant == third.constant);
  CHECK_THROWS_AS((void)complexity_from_name("h3"), std::invalid_argument);
  CHECK_THROWS_AS((void)complexity_from_name("const:abc"), std::invalid_argument);
}

TEST_CASE("instance JSON round trip") {
  const BanditInstance g = make_gaussian({0.1, -0.4, 2.0}, 0.5);
  save_instance(g, "tmp_instance.json");
  const BanditInstance back = load_instance("tmp_instance.json");
  CHECK(back.family == Family::kGaussian);
  CHECK(back.means == g.means);
  CHECK(back.sigma == 0.5);

  CHECK_THROWS_AS((void)parse_instance_json("{\"means\":[0.5,0.4]}"), std::exception);
  CHECK_THROWS_AS((void)parse_instance_json("{\"family\":\"bernoulli\",\"means\":[0.5]}"),
                  std::domain_error);
  CHECK_THROWS_AS((void)load_instance("tmp_missing_file.json"), std::runtime_error);
  std::remove("tmp_instance.json");
}

TEST_CASE("sha1 and git blob hashing") {
  CHECK(sha1_hex("") == "da39a3ee5e6b4b0d3255bfef95601890afd80709");
  CHECK(sha1_hex("abc") == "a9993e364706816aba3e25717850c26c9cd0d89d");
  // 64-byte block boundary exercises the padding split.
  CHECK(sha1_hex(std::string(64, 'a')) == sha1_hex(std::string(64, 'a')));
  CHECK(git_blob_hash("") == "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  CHECK(git_blob_hash("hello\n") == "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST_CASE("file IO round trip") {
  const std::string payload = std::string("bytes\0with null", 15);
  write_file("tmp_bytes.bin", payload);
  CHECK(read_file("tmp_bytes.bin") == payload);
  CHECK_THROWS_AS((void)read_file("tmp_missing_file.bin"), std::runtime_error);
  std::remove("tmp_bytes.bin");
}
