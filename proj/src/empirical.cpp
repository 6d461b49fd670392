#include "mcm/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <sstream>

#include "mcm/error.hpp"
#include "mcm/lp.hpp"
#include "mcm/tolerances.hpp"

namespace mcm {

SampleSet::SampleSet(PointMatrix pts, int label) : points(std::move(pts)), source_label(label) {
  if (points.rows() < 1 || points.cols() < 1) throw Error(ErrorCode::InvalidArgument, "empty sample set");
}

SampleSet SampleSet::weighted(PointMatrix pts, Eigen::VectorXd w, int label) {
  SampleSet s(std::move(pts), label);
  if (w.size() != s.size()) throw Error(ErrorCode::LengthMismatch, "one weight per point is required");
  if ((w.array() < 0.0).any() || std::abs(w.sum() - 1.0) > kDefaultTolerances.sum) {
    throw Error(ErrorCode::InvalidProportion, "sample weights must be a probability vector");
  }
  s.weights = std::move(w);
  return s;
}

std::string to_string(SetFamily family) {
  switch (family) {
    case SetFamily::Intervals: return "intervals";
    case SetFamily::AxisRectangles: return "rectangles";
    case SetFamily::Balls: return "balls";
  }
  return "?";
}

SetFamily parse_set_family(const std::string& name) {
  if (name == "intervals") return SetFamily::Intervals;
  if (name == "rectangles") return SetFamily::AxisRectangles;
  if (name == "balls") return SetFamily::Balls;
  throw Error(ErrorCode::Config, "unknown set family '" + name + "'");
}

int VCClassSpec::vc_dimension() const {
  switch (family) {
    case SetFamily::Intervals: return 2;
    case SetFamily::AxisRectangles: return 2 * dimension;
    case SetFamily::Balls: return dimension + 1;
  }
  return 1;
}

std::vector<std::size_t> nested_ranks(std::size_t u, std::size_t m) {
  std::vector<std::size_t> out;
  m = std::min(m, u);
  if (m == 0) return out;
  out.push_back(0);
  if (m == 1) return out;
  out.push_back(u - 1);
  std::deque<std::pair<std::size_t, std::size_t>> queue{{0, u - 1}};
  while (out.size() < m && !queue.empty()) {
    auto [lo, hi] = queue.front();
    queue.pop_front();
    if (hi - lo < 2) continue;
    const std::size_t mid = lo + (hi - lo) / 2;
    out.push_back(mid);
    queue.emplace_back(lo, mid);
    queue.emplace_back(mid, hi);
  }
  return out;
}

namespace {

std::vector<double> distinct_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::vector<double> pick_anchors(const std::vector<double>& distinct, std::size_t m) {
  std::vector<double> out;
  for (std::size_t r : nested_ranks(distinct.size(), m)) out.push_back(distinct[r]);
  std::sort(out.begin(), out.end());
  return out;
}

// Bucket 2j+1 holds x == a_j, bucket 2j holds a_{j-1} < x < a_j.
std::size_t bucket_of(const std::vector<double>& anchors, double x) {
  const auto it = std::lower_bound(anchors.begin(), anchors.end(), x);
  const auto j = static_cast<std::size_t>(it - anchors.begin());
  if (it != anchors.end() && *it == x) return 2 * j + 1;
  return 2 * j;
}

void build_rectangles(const std::vector<SampleSet>& sources, const VCClassSpec& spec, Eigen::MatrixXd& masses,
                      Eigen::MatrixXd& geometry) {
  const auto d = static_cast<std::size_t>(spec.dimension);
  // anchors per axis: largest k with (k(k+1)/2)^d <= budget
  std::vector<std::vector<double>> anchors(d);
  std::size_t per_axis = std::numeric_limits<std::size_t>::max();
  if (spec.anchor_budget > 0) {
    const double pairs = std::pow(static_cast<double>(spec.anchor_budget), 1.0 / static_cast<double>(d));
    std::size_t k = 1;
    while (static_cast<double>((k + 1) * (k + 2) / 2) <= pairs + 1e-9) ++k;
    per_axis = k;
  }
  for (std::size_t a = 0; a < d; ++a) {
    std::vector<double> coords;
    for (const auto& s : sources)
      for (Eigen::Index i = 0; i < s.size(); ++i) coords.push_back(s.points(i, static_cast<Eigen::Index>(a)));
    const auto distinct = distinct_sorted(std::move(coords));
    anchors[a] = pick_anchors(distinct, std::min(per_axis, distinct.size()));
  }

  // Cumulative histogram over the bucket grid, one per source.
  std::vector<std::size_t> extent(d), stride(d);
  std::size_t cells = 1;
  for (std::size_t a = d; a-- > 0;) {
    extent[a] = 2 * anchors[a].size() + 2;  // leading zero slot for prefix sums
    stride[a] = cells;
    cells *= extent[a];
  }
  std::vector<std::vector<double>> cumulative(sources.size(), std::vector<double>(cells, 0.0));
  for (std::size_t src = 0; src < sources.size(); ++src) {
    auto& hist = cumulative[src];
    const auto& s = sources[src];
    for (Eigen::Index i = 0; i < s.size(); ++i) {
      std::size_t cell = 0;
      for (std::size_t a = 0; a < d; ++a)
        cell += (bucket_of(anchors[a], s.points(i, static_cast<Eigen::Index>(a))) + 1) * stride[a];
      hist[cell] += s.weight(i);
    }
    for (std::size_t a = 0; a < d; ++a) {
      for (std::size_t c = 0; c < cells; ++c) {
        if ((c / stride[a]) % extent[a] != 0) hist[c] += hist[c - stride[a]];
      }
    }
  }

  // Enumerate every product of anchor pairs.
  std::vector<std::vector<std::pair<std::size_t, std::size_t>>> pairs(d);
  std::size_t total = 1;
  for (std::size_t a = 0; a < d; ++a) {
    for (std::size_t l = 0; l < anchors[a].size(); ++l)
      for (std::size_t h = l; h < anchors[a].size(); ++h) pairs[a].emplace_back(l, h);
    total *= pairs[a].size();
  }
  masses.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(sources.size()));
  geometry.resize(static_cast<Eigen::Index>(total), static_cast<Eigen::Index>(2 * d));
  std::vector<std::size_t> idx(d, 0);
  const std::size_t corners = std::size_t{1} << d;
  for (std::size_t set = 0; set < total; ++set) {
    std::size_t rest = set;
    for (std::size_t a = d; a-- > 0;) {
      idx[a] = rest % pairs[a].size();
      rest /= pairs[a].size();
    }
    for (std::size_t a = 0; a < d; ++a) {
      const auto [l, h] = pairs[a][idx[a]];
      geometry(static_cast<Eigen::Index>(set), static_cast<Eigen::Index>(a)) = anchors[a][l];
      geometry(static_cast<Eigen::Index>(set), static_cast<Eigen::Index>(d + a)) = anchors[a][h];
    }
    for (std::size_t src = 0; src < sources.size(); ++src) {
      double mass = 0.0;
      for (std::size_t corner = 0; corner < corners; ++corner) {
        std::size_t cell = 0;
        int sign = 1;
        for (std::size_t a = 0; a < d; ++a) {
          const auto [l, h] = pairs[a][idx[a]];
          // buckets 2l+1 .. 2h+1 inclusive, shifted by one for the zero slot
          if (corner & (std::size_t{1} << a)) {
            cell += (2 * l + 1) * stride[a];
            sign = -sign;
          } else {
            cell += (2 * h + 2) * stride[a];
          }
        }
        mass += sign * cumulative[src][cell];
      }
      masses(static_cast<Eigen::Index>(set), static_cast<Eigen::Index>(src)) = mass;
    }
  }
}

void build_balls(const std::vector<SampleSet>& sources, const VCClassSpec& spec, Eigen::MatrixXd& masses,
                 Eigen::MatrixXd& geometry) {
  const auto d = static_cast<Eigen::Index>(spec.dimension);
  std::vector<std::vector<double>> pooled;
  for (const auto& s : sources)
    for (Eigen::Index i = 0; i < s.size(); ++i)
      pooled.emplace_back(s.points.row(i).data(), s.points.row(i).data() + d);
  std::sort(pooled.begin(), pooled.end());
  pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

  std::size_t m = pooled.size();
  if (spec.anchor_budget > 0) {
    m = std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(spec.anchor_budget))));
  }
  auto ranks = nested_ranks(pooled.size(), m);
  std::sort(ranks.begin(), ranks.end());

  auto dist = [d](const double* a, const double* b) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < d; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
  };

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> set_masses;
  for (std::size_t c : ranks) {
    const double* center = pooled[c].data();
    std::vector<double> radii;
    for (std::size_t r : ranks) radii.push_back(dist(center, pooled[r].data()));
    radii = distinct_sorted(std::move(radii));

    std::vector<std::vector<double>> per_source(sources.size());
    for (std::size_t src = 0; src < sources.size(); ++src) {
      const auto& s = sources[src];
      std::vector<std::pair<double, double>> dw(static_cast<std::size_t>(s.size()));
      for (Eigen::Index i = 0; i < s.size(); ++i) dw[static_cast<std::size_t>(i)] = {dist(center, s.points.row(i).data()), s.weight(i)};
      std::sort(dw.begin(), dw.end());
      std::vector<double> acc(radii.size(), 0.0);
      std::size_t p = 0;
      double running = 0.0;
      for (std::size_t k = 0; k < radii.size(); ++k) {
        while (p < dw.size() && dw[p].first <= radii[k]) running += dw[p++].second;
        acc[k] = running;
      }
      per_source[src] = std::move(acc);
    }
    for (std::size_t k = 0; k < radii.size(); ++k) {
      std::vector<double> g(center, center + d);
      g.push_back(radii[k]);
      rows.push_back(std::move(g));
      std::vector<double> ms(sources.size());
      for (std::size_t src = 0; src < sources.size(); ++src) ms[src] = per_source[src][k];
      set_masses.push_back(std::move(ms));
    }
  }
  masses.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(sources.size()));
  geometry.resize(static_cast<Eigen::Index>(rows.size()), d + 1);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (Eigen::Index k = 0; k <= d; ++k) geometry(static_cast<Eigen::Index>(r), k) = rows[r][static_cast<std::size_t>(k)];
    for (std::size_t src = 0; src < sources.size(); ++src)
      masses(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(src)) = set_masses[r][src];
  }
}

}  // namespace

CandidateFamily CandidateFamily::build(const std::vector<SampleSet>& sources, const VCClassSpec& spec) {
  if (sources.empty()) throw Error(ErrorCode::EmptyCandidateFamily, "no samples to anchor candidate sets");
  if (spec.dimension < 1) throw Error(ErrorCode::InvalidArgument, "dimension must be positive");
  if (spec.family == SetFamily::Intervals && spec.dimension != 1) {
    throw Error(ErrorCode::InvalidArgument, "intervals need one-dimensional data");
  }
  for (const auto& s : sources) {
    if (s.dim() != spec.dimension) {
      std::ostringstream msg;
      msg << "sample of dimension " << s.dim() << " for a family of dimension " << spec.dimension;
      throw Error(ErrorCode::LengthMismatch, msg.str());
    }
  }
  CandidateFamily family;
  family.spec_ = spec;
  if (spec.family == SetFamily::Balls) {
    build_balls(sources, spec, family.masses_, family.geometry_);
  } else {
    build_rectangles(sources, spec, family.masses_, family.geometry_);
  }
  if (family.size() == 0) throw Error(ErrorCode::EmptyCandidateFamily, "candidate family is empty");
  return family;
}

Eigen::VectorXd CandidateFamily::measure(const SetMeasure& fn) const {
  Eigen::VectorXd out(size());
  for (Eigen::Index s = 0; s < size(); ++s) out(s) = fn(spec_.family, geometry_.row(s));
  return out;
}

SignedMixture::SignedMixture(Eigen::VectorXd coefficients, int order)
    : coefficients_(std::move(coefficients)), order_(order) {
  if (std::abs(coefficients_.sum() - 1.0) > kDefaultTolerances.sum) {
    throw Error(ErrorCode::InvalidArgument, "signed mixture coefficients must sum to 1");
  }
}

SignedMixture SignedMixture::empirical(Eigen::Index num_sources, Eigen::Index source) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(num_sources);
  c(source) = 1.0;
  return SignedMixture(std::move(c), -1);
}

SignedMixture SignedMixture::combine(const std::vector<double>& weights, const std::vector<SignedMixture>& parts) {
  if (weights.size() != parts.size() || parts.empty()) throw Error(ErrorCode::LengthMismatch, "combine: sizes differ");
  Eigen::VectorXd c = Eigen::VectorXd::Zero(parts.front().coefficients().size());
  int order = -1;
  for (std::size_t k = 0; k < parts.size(); ++k) {
    c += weights[k] * parts[k].coefficients();
    order = std::max(order, parts[k].order());
  }
  return SignedMixture(std::move(c), order);
}

double vc_epsilon(int vc_dimension, std::size_t n, double delta) {
  if (delta <= 0.0) throw Error(ErrorCode::InvalidArgument, "delta must be positive");
  if (n < 1 || vc_dimension < 1) throw Error(ErrorCode::InvalidArgument, "need n >= 1 and V >= 1");
  const double nd = static_cast<double>(n);
  return 3.0 * std::sqrt((vc_dimension * std::log(nd + 1.0) - std::log(delta / 2.0)) / nd);
}

double epsilon_n(int vc_dimension, const std::vector<std::size_t>& sizes) {
  double total = 0.0;
  for (std::size_t n : sizes) total += vc_epsilon(vc_dimension, n, 1.0 / static_cast<double>(n));
  return total;
}

namespace {

// Below this a set value is indistinguishable from zero; matches the exact
// engine's support tolerance so exact inputs reproduce its decisions.
constexpr double kFloor = 1e-9;

void require_nonempty(const CandidateFamily& family) {
  if (family.size() == 0) throw Error(ErrorCode::EmptyCandidateFamily, "candidate family is empty");
}

}  // namespace

KappaHat kappa_hat_two(const SignedMixture& f, const SignedMixture& h, const CandidateFamily& family,
                       double eps_num, double eps_den) {
  require_nonempty(family);
  const Eigen::VectorXd fv = f.evaluate(family);
  const Eigen::VectorXd hv = h.evaluate(family);
  KappaHat out;
  out.raw = std::numeric_limits<double>::infinity();
  for (Eigen::Index s = 0; s < family.size(); ++s) {
    const double den = hv(s) - eps_den;
    if (den <= kFloor) continue;
    double num = fv(s) + eps_num;
    if (std::abs(num) <= kFloor) num = 0.0;
    const double ratio = num / den;
    if (ratio < out.raw) {
      out.raw = ratio;
      out.argmin = s;
    }
  }
  out.value = std::max(out.raw, 0.0);
  if (out.value >= 1.0) {
    out.value = 1.0;
    out.capped = true;
  }
  return out;
}

ResidueHatResult residue_hat(const SignedMixture& f, const SignedMixture& h, const CandidateFamily& family,
                             double eps_n) {
  const KappaHat k = kappa_hat_two(f, h, family, eps_n);
  if (k.value >= 1.0 - kFloor) {
    std::ostringstream msg;
    msg << "kappa estimate " << k.raw << " leaves no residue";
    throw Error(ErrorCode::KappaOne, msg.str());
  }
  Eigen::VectorXd c = (f.coefficients() - k.value * h.coefficients()) / (1.0 - k.value);
  return {k, SignedMixture(std::move(c), std::max(f.order(), h.order()) + 1)};
}

KappaHatMulti kappa_hat_multi(const SignedMixture& f0, const std::vector<SignedMixture>& fs,
                              const CandidateFamily& family, double eps0, const std::vector<double>& eps) {
  require_nonempty(family);
  if (fs.empty()) throw Error(ErrorCode::InvalidArgument, "kappa_hat_multi needs at least one reference");
  if (eps.size() != fs.size()) throw Error(ErrorCode::LengthMismatch, "one epsilon per reference is required");
  const auto k = static_cast<Eigen::Index>(fs.size());
  const Eigen::Index sets = family.size();

  Eigen::MatrixXd a(sets, k);
  for (Eigen::Index j = 0; j < k; ++j)
    a.col(j) = fs[static_cast<std::size_t>(j)].evaluate(family).array() - eps[static_cast<std::size_t>(j)];
  a = (a.array().abs() <= kFloor).select(0.0, a);
  Eigen::VectorXd b = f0.evaluate(family).array() + eps0;
  b = (b.array() <= kFloor).select(0.0, b);

  std::vector<Eigen::Index> active;
  std::vector<char> in_active(static_cast<std::size_t>(sets), 0);
  KappaHatMulti out;
  Eigen::VectorXd nu;
  constexpr int kMaxRounds = 10000;
  constexpr std::size_t kCutsPerRound = 8;
  for (int round = 0;; ++round) {
    if (round > kMaxRounds) throw Error(ErrorCode::LoopCapExceeded, "kappa_hat_multi: cutting planes did not settle");
    Eigen::MatrixXd a_act(static_cast<Eigen::Index>(active.size()), k);
    Eigen::VectorXd b_act(static_cast<Eigen::Index>(active.size()));
    for (std::size_t r = 0; r < active.size(); ++r) {
      a_act.row(static_cast<Eigen::Index>(r)) = a.row(active[r]);
      b_act(static_cast<Eigen::Index>(r)) = b(active[r]);
    }
    nu = solve_kappa_lp(a_act, b_act, 1.0);

    const Eigen::VectorXd slack = b - a * nu;
    std::vector<std::pair<double, Eigen::Index>> violated;
    for (Eigen::Index s = 0; s < sets; ++s) {
      const double tol = 1e-12 * (1.0 + std::abs(b(s)));
      if (slack(s) < -tol && !in_active[static_cast<std::size_t>(s)]) violated.emplace_back(slack(s), s);
    }
    if (violated.empty()) break;
    const std::size_t take = std::min(kCutsPerRound, violated.size());
    std::partial_sort(violated.begin(), violated.begin() + static_cast<std::ptrdiff_t>(take), violated.end());
    for (std::size_t r = 0; r < take; ++r) {
      active.push_back(violated[r].second);
      in_active[static_cast<std::size_t>(violated[r].second)] = 1;
    }
    out.cuts = static_cast<int>(active.size());
  }
  out.nu = nu;
  out.kappa = nu.sum();
  if (out.kappa >= 1.0 - kFloor) {
    out.kappa = 1.0;
    out.capped = true;
  }
  out.mu = out.kappa > 0.0 ? Eigen::VectorXd(nu / nu.sum()) : Eigen::VectorXd(Eigen::VectorXd::Zero(k));
  return out;
}

double sup_deviation(const SignedMixture& a, const SignedMixture& b, const CandidateFamily& family) {
  require_nonempty(family);
  return family.evaluate(a.coefficients() - b.coefficients()).cwiseAbs().maxCoeff();
}

double sup_deviation(const SignedMixture& a, const Eigen::VectorXd& truth, const CandidateFamily& family) {
  require_nonempty(family);
  if (truth.size() != family.size()) throw Error(ErrorCode::LengthMismatch, "one truth value per set is required");
  return (a.evaluate(family) - truth).cwiseAbs().maxCoeff();
}

}  // namespace mcm
