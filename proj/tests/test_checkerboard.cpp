#include <catch2/catch_amalgamated.hpp>

#include "rdm/checkerboard.hpp"
#include "rdm/copula_models.hpp"
#include "rdm/rearrangement.hpp"
#include "support.hpp"

using namespace rdm;
using Catch::Matchers::WithinAbs;

namespace {

Checkerboard make(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix<double> m(Index(rows.size()), Index(rows.begin()->size()));
  Index k = 0;
  for (auto r : rows) {
    Index l = 0;
    for (double x : r) m(k, l++) = x;
    ++k;
  }
  return Checkerboard(m);
}

}  // namespace

TEST_CASE("checkerboard matrices validate their margins") {
  CHECK_THROWS_AS(make({{2, 0}, {1, 2}}), InvariantError);
  CHECK_THROWS_AS(make({{3, -1}, {-1, 3}}), InvariantError);
  CHECK_NOTHROW(make({{2, 0}, {0, 2}}));
  // Small violations are renormalized away.
  const auto a = make({{2 + 1e-12, 0}, {0, 2}});
  CHECK(a.entries().row(0).sum() == Catch::Approx(2).epsilon(1e-15));
  std::vector<Index> bad{0, 0};
  CHECK_THROWS_AS(Checkerboard::from_permutation(bad), InvariantError);
}

TEST_CASE("grid copulas validate breakpoints and margins") {
  Vector<double> u(3), v(2);
  u << 0, 0.4, 1;
  v << 0, 1;
  Matrix<double> m(2, 1);
  m << 0.4, 0.6;
  CHECK_NOTHROW(Grid(u, v, m));
  m << 0.5, 0.5;
  CHECK_THROWS_AS(Grid(u, v, m), InvariantError);
  Vector<double> bad(3);
  bad << 0, 0, 1;
  Matrix<double> m2(2, 1);
  m2 << 0, 1;
  CHECK_THROWS_AS(Grid(bad, v, m2), InvariantError);
}

TEST_CASE("eval_cdf") {
  const auto pi = Checkerboard::independence(2, 2);
  CHECK_THAT(eval_cdf(pi, 0.3, 0.7), WithinAbs(0.21, 1e-15));
  const auto m = make({{2, 0}, {0, 2}});
  CHECK_THAT(eval_cdf(m, 0.5, 0.5), WithinAbs(0.5, 1e-15));
  CHECK_THROWS_AS(eval_cdf(m, 1.2, 0.5), DomainError);
  CHECK_THROWS_AS(eval_cdf(m, 0.5, -0.1), DomainError);

  Rng rng(11);
  std::uniform_real_distribution<double> unif(0, 1);
  for (int rep = 0; rep < 10; ++rep) {
    const Grid g = test::random_grid(rng, 2 + rep % 4, 3 + rep % 3);
    for (int i = 0; i < 100; ++i) {
      const double u = unif(rng), v = unif(rng);
      const double c = eval_cdf(g, u, v);
      CHECK_THAT(c, WithinAbs(test::cdf_oracle(g, u, v), 1e-13));
      CHECK(c <= std::min(u, v) + 1e-13);
      CHECK(c >= std::max(u + v - 1, 0.0) - 1e-13);
      CHECK_THAT(eval_cdf(g, u, 1.0), WithinAbs(u, 1e-13));
      CHECK_THAT(eval_cdf(g, 1.0, v), WithinAbs(v, 1e-13));
    }
  }
}

TEST_CASE("partial1_slices") {
  const auto pi = as_grid(Checkerboard::independence(2, 2));
  const auto s = partial1_slices(pi);
  REQUIRE(s.size() == 2);
  for (const auto& p : s.back().pieces()) CHECK_THAT(p.value, WithinAbs(1.0, 1e-15));

  const auto m = partial1_slices(as_grid(make({{2, 0}, {0, 2}})));
  CHECK_THAT(m[0](0.25), WithinAbs(1.0, 1e-15));
  CHECK_THAT(m[0](0.75), WithinAbs(0.0, 1e-15));
  const auto w = partial1_slices(as_grid(make({{0, 2}, {2, 0}})));
  CHECK_THAT(w[0](0.25), WithinAbs(0.0, 1e-15));
  CHECK_THAT(w[0](0.75), WithinAbs(1.0, 1e-15));

  Rng rng(3);
  const Grid g = test::random_grid(rng, 4, 5);
  const auto slices = partial1_slices(g);
  for (Index l = 0; l < g.v_cells(); ++l)
    CHECK_THAT(slices[std::size_t(l)].integral(), WithinAbs(g.v_breaks()(l + 1), 1e-13));
}

TEST_CASE("induced checkerboards of models") {
  const auto pi = induced_checkerboard(CopulaModel::independence(), 3, 5);
  CHECK((pi.entries().array() - 1.0).abs().maxCoeff() < 1e-14);
  const auto m = induced_checkerboard(CopulaModel::comonotone(), 2, 2);
  CHECK((m.entries() - make({{2, 0}, {0, 2}}).entries()).cwiseAbs().maxCoeff() < 1e-14);

  // Ordinal sum: 2 Pi on [0,1/2]^2 and M on [1/2,1]^2. Four corner evaluations by hand:
  // C(1/2,1/2) = 1/2, C(1/2,1) = C(1,1/2) = 1/2, so each block carries mass 1/2 and the
  // off-diagonal blocks carry none.
  const auto o = induced_checkerboard(CopulaModel::ordinal_sum(), 2, 2);
  CHECK((o.entries() - make({{2, 0}, {0, 2}}).entries()).cwiseAbs().maxCoeff() < 1e-14);
  const auto o4 = induced_checkerboard(CopulaModel::ordinal_sum(), 4, 4);
  // Lower-left quarter: uniform 2 Pi spread over four cells of mass 1/8 each, a = 16/8 = 2.
  CHECK_THAT(o4(0, 0), WithinAbs(2.0, 1e-14));
  CHECK_THAT(o4(1, 0), WithinAbs(2.0, 1e-14));
  CHECK_THAT(o4(2, 2), WithinAbs(4.0, 1e-14));
  CHECK_THAT(o4(2, 3), WithinAbs(0.0, 1e-14));

  // Uniform convergence to the model CDF on {8, 16, 32}.
  const auto gauss = CopulaModel::gaussian(0.75);
  double prev = 1.0;
  for (Index n : {8, 16, 32}) {
    const auto a = induced_checkerboard(gauss, n, n);
    double gap = 0;
    for (Index k = 0; k < n; ++k)
      for (Index l = 0; l < n; ++l) {
        const double u = (double(k) + 0.5) / double(n), v = (double(l) + 0.5) / double(n);
        gap = std::max(gap, std::abs(eval_cdf(a, u, v) - cdf(gauss, u, v)));
      }
    CHECK(gap < prev);
    prev = gap;
  }
}

TEST_CASE("coarsen") {
  const std::vector<Index> id4{0, 1, 2, 3};
  const auto c4 = coarsen(Checkerboard::from_permutation(id4), 2, 2);
  CHECK((c4.entries() - make({{2, 0}, {0, 2}}).entries()).cwiseAbs().maxCoeff() < 1e-14);
  const std::vector<Index> id3{0, 1, 2};
  const auto c3 = coarsen(Checkerboard::from_permutation(id3), 2, 2);
  CHECK_THAT(c3(0, 0), WithinAbs(5.0 / 3, 1e-14));
  CHECK_THAT(c3(0, 1), WithinAbs(1.0 / 3, 1e-14));
  CHECK_THAT(c3(1, 0), WithinAbs(1.0 / 3, 1e-14));
  CHECK_THAT(c3(1, 1), WithinAbs(5.0 / 3, 1e-14));

  Rng rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const Index n = 5 + rep;
    const auto p = Checkerboard::from_permutation(test::random_permutation(rng, n));
    CHECK(coarsen(p, n, n) == p);
    const Index n1 = 1 + rep % 4, n2 = 2 + rep % 3;
    const auto c = coarsen(p, n1, n2);
    CHECK((c.entries().rowwise().sum().array() - double(n2)).abs().maxCoeff() < 1e-12);
    CHECK((c.entries().colwise().sum().array() - double(n1)).abs().maxCoeff() < 1e-12);
    // Coarsening keeps C on the coarse lattice.
    for (Index k = 0; k <= n1; ++k)
      for (Index l = 0; l <= n2; ++l) {
        const double u = double(k) / double(n1), v = double(l) / double(n2);
        CHECK_THAT(eval_cdf(c, u, v), WithinAbs(eval_cdf(p, u, v), 1e-13));
      }
  }
  CHECK_THROWS_AS(coarsen(Checkerboard::independence(3, 3), 4, 2), DomainError);
}

TEST_CASE("markov products") {
  Rng rng(8);
  const Checkerboard a = test::random_checkerboard(rng, 4, 4);
  const auto pi = markov_product(a, Checkerboard::independence(4, 4));
  CHECK((pi.entries().array() - 1.0).abs().maxCoeff() < 1e-13);
  const auto same = markov_product(a, Checkerboard::comonotone(4));
  CHECK((same.entries() - a.entries()).cwiseAbs().maxCoeff() < 1e-13);
  const auto w = make({{0, 2}, {2, 0}});
  CHECK(markov_product(w, w) == make({{2, 0}, {0, 2}}));
  CHECK_THROWS_AS(markov_product(a, Checkerboard::independence(3, 3)), DomainError);
  for (int rep = 0; rep < 20; ++rep) {
    const auto x = test::random_checkerboard(rng, 5, 5);
    const auto y = test::birkhoff_checkerboard(rng, 5, 3);
    const auto z = markov_product(x, y);
    CHECK((z.entries().rowwise().sum().array() - 5.0).abs().maxCoeff() < 1e-12);
    CHECK((z.entries().colwise().sum().array() - 5.0).abs().maxCoeff() < 1e-12);
    CHECK(z.entries().minCoeff() >= 0);
  }
}

TEST_CASE("d_p distances") {
  Rng rng(21);
  const Grid g = test::random_grid(rng, 3, 4);
  CHECK(d_p_distance(g, g, 1.0) == 0.0);
  CHECK(d_p_distance(g, g, 2.0) == 0.0);

  // D_1(Pi, M) = int 2v(1 - v) dv = 1/3; at resolution N the comonotone checkerboard smooths
  // the indicator over one cell, which changes the integral by O(1/N).
  const double d = d_p_distance(Checkerboard::independence(64, 64), Checkerboard::comonotone(64), 1.0);
  CHECK_THAT(d, WithinAbs(1.0 / 3, 1.0 / 64));

  // Brute-force oracle on a fine midpoint lattice.
  for (double p : {1.0, 2.0, 1.5}) {
    const Grid a = test::random_grid(rng, 3, 3);
    const Grid b = test::random_grid(rng, 4, 2);
    const int m = 600;
    double acc = 0;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) {
        const double u = (i + 0.5) / m, v = (j + 0.5) / m;
        acc += std::pow(std::abs(test::partial1_oracle(a, u, v) - test::partial1_oracle(b, u, v)), p);
      }
    const double oracle = std::pow(acc / (double(m) * m), 1 / p);
    CHECK_THAT(d_p_distance(a, b, p), WithinAbs(oracle, 2e-3));
    CHECK(d_p_distance(a, b, 1.0) <= 2.0);
  }
  CHECK_THROWS_AS(d_p_distance(g, g, 0.5), DomainError);
}
