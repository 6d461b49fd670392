#include "doctest.h"

#include <cmath>

#include "mcm/empirical.hpp"
#include "mcm/error.hpp"
#include "mcm/rng.hpp"

using namespace mcm;

namespace {

SampleSet column(const std::vector<double>& xs, int label) {
  PointMatrix p(static_cast<Eigen::Index>(xs.size()), 1);
  for (std::size_t i = 0; i < xs.size(); ++i) p(static_cast<Eigen::Index>(i), 0) = xs[i];
  return SampleSet(std::move(p), label);
}

SampleSet gaussian_mix(Rng& rng, std::size_t n, double w_first, double m0, double m1, int label) {
  std::vector<double> xs(n);
  for (auto& x : xs) x = (rng.uniform() < w_first ? m0 : m1) + rng.normal();
  return column(xs, label);
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

TEST_CASE("vc epsilon") {
  CHECK(vc_epsilon(2, 100, 0.01) == doctest::Approx(1.1435).epsilon(1e-3));
  CHECK(vc_epsilon(2, 100, 2.0) == doctest::Approx(3.0 * std::sqrt(2.0 * std::log(101.0) / 100.0)));
  CHECK(vc_epsilon(2, 1000000, 0.01) == doctest::Approx(0.0164).epsilon(5e-3));
  CHECK(vc_epsilon(2, 1000, 0.01) < vc_epsilon(2, 100, 0.01));
  CHECK(vc_epsilon(3, 100, 0.01) > vc_epsilon(2, 100, 0.01));
  CHECK_THROWS_AS(vc_epsilon(2, 10, 0.0), Error);
}

TEST_CASE("nested ranks are prefixes of each other") {
  auto big = nested_ranks(1000, 50);
  auto small = nested_ranks(1000, 20);
  for (std::size_t i = 0; i < small.size(); ++i) CHECK(small[i] == big[i]);
  CHECK(nested_ranks(5, 100).size() == 5);
}

TEST_CASE("interval family masses") {
  std::vector<SampleSet> src{column({0.0, 1.0, 2.0, 3.0}, 0), column({1.0, 1.0, 5.0, 6.0}, 1)};
  auto fam = CandidateFamily::build(src, {SetFamily::Intervals, 1, 0});
  CHECK(fam.size() == 6 * 7 / 2);  // six distinct anchors
  for (Eigen::Index s = 0; s < fam.size(); ++s) {
    const double lo = fam.geometry()(s, 0), hi = fam.geometry()(s, 1);
    for (int k = 0; k < 2; ++k) {
      double expect = 0.0;
      for (Eigen::Index i = 0; i < 4; ++i) {
        const double x = src[static_cast<std::size_t>(k)].points(i, 0);
        if (x >= lo && x <= hi) expect += 0.25;
      }
      CHECK(fam.masses()(s, k) == doctest::Approx(expect));
    }
  }
}

TEST_CASE("rectangle and ball masses match a direct count") {
  Rng rng(3);
  PointMatrix a(40, 2), b(30, 2);
  for (Eigen::Index i = 0; i < a.rows(); ++i) a.row(i) << rng.normal(), rng.normal();
  for (Eigen::Index i = 0; i < b.rows(); ++i) b.row(i) << 1 + rng.normal(), rng.normal();
  std::vector<SampleSet> src{SampleSet(a, 0), SampleSet(b, 1)};
  auto rect = CandidateFamily::build(src, {SetFamily::AxisRectangles, 2, 2000});
  CHECK(rect.size() <= 2000);
  for (Eigen::Index s = 0; s < rect.size(); s += 37) {
    for (int k = 0; k < 2; ++k) {
      const auto& p = src[static_cast<std::size_t>(k)].points;
      double expect = 0.0;
      for (Eigen::Index i = 0; i < p.rows(); ++i) {
        bool in = true;
        for (int d = 0; d < 2; ++d) in = in && p(i, d) >= rect.geometry()(s, d) && p(i, d) <= rect.geometry()(s, 2 + d);
        if (in) expect += 1.0 / static_cast<double>(p.rows());
      }
      CHECK(rect.masses()(s, k) == doctest::Approx(expect));
    }
  }
  auto balls = CandidateFamily::build(src, {SetFamily::Balls, 2, 400});
  for (Eigen::Index s = 0; s < balls.size(); s += 23) {
    const auto& p = src[0].points;
    double expect = 0.0;
    for (Eigen::Index i = 0; i < p.rows(); ++i) {
      const double dx = p(i, 0) - balls.geometry()(s, 0), dy = p(i, 1) - balls.geometry()(s, 1);
      if (std::sqrt(dx * dx + dy * dy) <= balls.geometry()(s, 2)) expect += 1.0 / 40.0;
    }
    CHECK(balls.masses()(s, 0) == doctest::Approx(expect));
  }
}

TEST_CASE("evaluate is monotone on nested intervals") {
  Rng rng(5);
  std::vector<SampleSet> src{gaussian_mix(rng, 500, 1.0, 0, 0, 0)};
  auto fam = CandidateFamily::build(src, {SetFamily::Intervals, 1, 5000});
  auto f = SignedMixture::empirical(1, 0);
  auto v = f.evaluate(fam);
  for (Eigen::Index s = 0; s < fam.size(); ++s)
    for (Eigen::Index t = 0; t < fam.size(); t += 97)
      if (fam.geometry()(t, 0) <= fam.geometry()(s, 0) && fam.geometry()(s, 1) <= fam.geometry()(t, 1))
        CHECK(v(s) <= v(t) + 1e-15);
}

TEST_CASE("kappa hat two-sample basics") {
  std::vector<double> lo, hi;
  for (int i = 0; i < 10; ++i) {
    lo.push_back(0.1 * i);
    hi.push_back(10.0 + 0.1 * i);
  }
  std::vector<SampleSet> src{column(lo, 0), column(hi, 1)};
  auto fam = CandidateFamily::build(src, {SetFamily::Intervals, 1, 0});
  auto f = SignedMixture::empirical(2, 0), h = SignedMixture::empirical(2, 1);
  CHECK(kappa_hat_two(f, f, fam, 0.0).value == doctest::Approx(1.0));
  CHECK(kappa_hat_two(f, h, fam, 0.0).value == 0.0);
  CHECK(sup_deviation(f, h, fam) == doctest::Approx(1.0));
  CHECK(sup_deviation(f, f, fam) == 0.0);
  CHECK_THROWS_AS(residue_hat(f, f, fam, 0.0), Error);
  auto r = residue_hat(f, h, fam, 0.0);
  CHECK(r.kappa.value == 0.0);
  CHECK(r.residue.coefficients() == f.coefficients());
  CHECK(r.residue.order() == 0);
}

TEST_CASE("planted two-Gaussian kappa and residue") {
  Rng rng(11);
  const std::size_t n = 50000;
  std::vector<SampleSet> src{gaussian_mix(rng, n, 0.5, 0.0, 5.0, 0), gaussian_mix(rng, n, 0.0, 0.0, 5.0, 1)};
  VCClassSpec vc{SetFamily::Intervals, 1, 200000};
  auto fam = CandidateFamily::build(src, vc);
  const double eps = epsilon_n(vc.vc_dimension(), {n, n});
  auto f = SignedMixture::empirical(2, 0), h = SignedMixture::empirical(2, 1);
  const double k = kappa_hat_two(f, h, fam, eps).value;
  CHECK(k >= 0.5 - 2 * eps - 0.05);
  CHECK(k <= 0.5 + 2 * eps + 0.05);

  // The full bound over-corrects at this n; a twentieth of it gives a usable residue.
  auto g = residue_hat(f, h, fam, 0.05 * eps);
  Eigen::VectorXd truth = fam.measure([](SetFamily, const Eigen::Ref<const Eigen::RowVectorXd>& geo) {
    return normal_cdf(geo(1)) - normal_cdf(geo(0));
  });
  CHECK(sup_deviation(g.residue, truth, fam) <= 0.1);
  CHECK(g.residue.coefficients().sum() == doctest::Approx(1.0).epsilon(1e-12));
  Eigen::VectorXd back = (1 - g.kappa.value) * g.residue.coefficients() + g.kappa.value * h.coefficients();
  CHECK((back - f.coefficients()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("two samples of one law are close") {
  Rng rng(2);
  std::vector<SampleSet> src{gaussian_mix(rng, 10000, 1.0, 0, 0, 0), gaussian_mix(rng, 10000, 1.0, 0, 0, 1)};
  auto fam = CandidateFamily::build(src, {SetFamily::Intervals, 1, 100000});
  CHECK(sup_deviation(SignedMixture::empirical(2, 0), SignedMixture::empirical(2, 1), fam) <= 0.05);
}

TEST_CASE("larger budgets give supersets") {
  Rng rng(9);
  std::vector<SampleSet> src{gaussian_mix(rng, 2000, 0.5, 0, 3, 0), gaussian_mix(rng, 2000, 0.0, 0, 3, 1)};
  auto f = SignedMixture::empirical(2, 0), h = SignedMixture::empirical(2, 1);
  double prev_kappa = 2.0, prev_dev = -1.0;
  for (std::size_t budget : {10u, 100u, 1000u, 10000u, 100000u}) {
    auto fam = CandidateFamily::build(src, {SetFamily::Intervals, 1, budget});
    const double k = kappa_hat_two(f, h, fam, 0.01).raw;
    const double dev = sup_deviation(f, h, fam);
    CHECK(k <= prev_kappa);
    CHECK(dev >= prev_dev);
    prev_kappa = k;
    prev_dev = dev;
  }
}

TEST_CASE("multi-sample kappa hat") {
  Rng rng(21);
  const std::size_t n = 50000;
  std::vector<SampleSet> src{gaussian_mix(rng, n, 0.5, 0, 10, 0), gaussian_mix(rng, n, 1.0, 0, 0, 1),
                             gaussian_mix(rng, n, 0.0, 0, 10, 2)};
  VCClassSpec vc{SetFamily::Intervals, 1, 100000};
  auto fam = CandidateFamily::build(src, vc);
  const double e = vc_epsilon(2, n, 1.0 / n);
  auto f0 = SignedMixture::empirical(3, 0);
  auto res = kappa_hat_multi(f0, {SignedMixture::empirical(3, 1), SignedMixture::empirical(3, 2)}, fam, e, {e, e});
  CHECK(res.kappa >= 0.8);
  CHECK(res.nu.sum() == doctest::Approx(res.kappa));

  // One reference: the two-sample estimate with the same epsilons.
  auto one = kappa_hat_multi(SignedMixture::empirical(3, 1), {f0}, fam, e, {e});
  auto two = kappa_hat_two(SignedMixture::empirical(3, 1), f0, fam, e, e);
  CHECK(one.kappa == doctest::Approx(two.value).epsilon(1e-9));

  std::vector<double> a, b;
  for (int i = 0; i < 10; ++i) {
    a.push_back(i);
    b.push_back(100 + i);
  }
  std::vector<SampleSet> far{column(a, 0), column(b, 1)};
  auto ffam = CandidateFamily::build(far, {SetFamily::Intervals, 1, 0});
  auto zero = kappa_hat_multi(SignedMixture::empirical(2, 0), {SignedMixture::empirical(2, 1)}, ffam, 0, {0.0});
  CHECK(zero.kappa == 0.0);
  CHECK(zero.nu.cwiseAbs().maxCoeff() == 0.0);
}
