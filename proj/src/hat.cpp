#include "mcm/hat.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mcm/error.hpp"

namespace mcm {

HatContext::HatContext(std::vector<SampleSet> samples, const VCClassSpec& vc, const HatConfig& config)
    : samples_(std::move(samples)), family_(CandidateFamily::build(samples_, vc)) {
  const int V = vc.vc_dimension();
  double total = 0.0;
  for (const auto& s : samples_) {
    const auto n = static_cast<std::size_t>(s.size());
    eps_i_.push_back(config.eps_scale * vc_epsilon(V, n, 1.0 / static_cast<double>(n)));
    total += eps_i_.back();
  }
  eps_n_ = total;
  if (config.eps_override) {
    const double target = *config.eps_override;
    if (target < 0.0) throw Error(ErrorCode::InvalidArgument, "eps override must be nonnegative");
    for (auto& e : eps_i_) e = total > 0.0 ? e * target / total : 0.0;
    eps_n_ = target;
  }
}

std::vector<SignedMixture> HatContext::sources() const {
  std::vector<SignedMixture> out;
  for (Eigen::Index i = 0; i < num_sources(); ++i) out.push_back(source(i));
  return out;
}

int order_bound(int num_classes) {
  const int k = num_classes - 1;
  return k * k * k;
}

namespace {

void finish_orders(HatResult& result) {
  result.diagnostics.orders.clear();
  for (const auto& e : result.estimates) {
    result.diagnostics.orders.push_back(e.order());
    result.diagnostics.max_order = std::max(result.diagnostics.max_order, e.order());
  }
}

}  // namespace

HatResult multiclass_hat(const HatContext& ctx) {
  const Eigen::Index L = ctx.num_sources();
  if (L < 2) throw Error(ErrorCode::InvalidArgument, "multiclass_hat needs at least two samples");
  HatResult result;
  result.diagnostics.eps_n = ctx.eps_n();
  for (Eigen::Index i = 0; i < L; ++i) {
    std::vector<SignedMixture> others;
    std::vector<double> eps;
    std::vector<Eigen::Index> index;
    for (Eigen::Index j = 0; j < L; ++j) {
      if (j == i) continue;
      others.push_back(ctx.source(j));
      eps.push_back(ctx.eps(j));
      index.push_back(j);
    }
    const auto k = kappa_hat_multi(ctx.source(i), others, ctx.family(), ctx.eps(i), eps);
    if (k.kappa >= 1.0 - 1e-9) {
      std::ostringstream msg;
      msg << "source " << i << " is fully explained by the others";
      throw Error(ErrorCode::KappaOne, msg.str());
    }
    Eigen::VectorXd c = Eigen::VectorXd::Zero(L);
    c(i) = 1.0;
    for (std::size_t r = 0; r < index.size(); ++r) c(index[r]) -= k.nu(static_cast<Eigen::Index>(r));
    c /= 1.0 - k.kappa;
    result.estimates.emplace_back(std::move(c), 0);
    result.diagnostics.kappa_hats.push_back(k.kappa);
  }
  result.permutation = Permutation::identity(static_cast<int>(L));
  finish_orders(result);
  return result;
}

bool face_test_hat(const std::vector<SignedMixture>& qhats, double epsilon, const HatContext& ctx) {
  if (epsilon <= 0.0 || epsilon >= 1.0) throw Error(ErrorCode::InvalidArgument, "face epsilon must lie in (0, 1)");
  for (std::size_t i = 0; i < qhats.size(); ++i)
    for (std::size_t j = 0; j < qhats.size(); ++j)
      if (i != j && kappa_hat_two(qhats[i], qhats[j], ctx.family(), ctx.eps_n()).value <= epsilon) return false;
  return true;
}

namespace {

std::vector<SignedMixture> demix_hat_rec(const std::vector<SignedMixture>& s, const HatContext& ctx,
                                         const HatConfig& config, Rng& rng, HatDiagnostics& diag) {
  const double eps = ctx.eps_n();
  const auto& fam = ctx.family();
  if (s.size() == 2) {
    auto a = residue_hat(s[0], s[1], fam, eps);
    auto b = residue_hat(s[1], s[0], fam, eps);
    diag.kappa_hats.push_back(a.kappa.value);
    diag.kappa_hats.push_back(b.kappa.value);
    return {a.residue, b.residue};
  }

  const std::vector<SignedMixture> tail(s.begin() + 1, s.end());
  const SignedMixture q = SignedMixture::combine(rng.flat_dirichlet(tail.size()), tail);

  std::vector<SignedMixture> face;
  std::vector<double> face_kappas;
  int n = 1;
  while (true) {
    ++n;
    if (n - 1 > config.max_face_iter) {
      std::ostringstream msg;
      msg << "face test did not pass within " << config.max_face_iter << " iterations";
      throw Error(ErrorCode::LoopCapExceeded, msg.str());
    }
    face.clear();
    face_kappas.clear();
    const double w = static_cast<double>(n - 1) / static_cast<double>(n);
    for (const auto& si : tail) {
      auto r = residue_hat(SignedMixture::combine({1.0 - w, w}, {si, q}), s[0], fam, eps);
      face_kappas.push_back(r.kappa.value);
      face.push_back(std::move(r.residue));
    }
    if (face_test_hat(face, config.face_epsilon, ctx)) break;
  }
  diag.face_iterations.push_back(n - 1);
  diag.kappa_hats.insert(diag.kappa_hats.end(), face_kappas.begin(), face_kappas.end());

  std::vector<SignedMixture> out = demix_hat_rec(face, ctx, config, rng, diag);
  const std::vector<double> avg(s.size(), 1.0 / static_cast<double>(s.size()));
  SignedMixture last = SignedMixture::combine(avg, s);
  for (const auto& v : out) {
    auto r = residue_hat(last, v, fam, eps);
    diag.kappa_hats.push_back(r.kappa.value);
    last = std::move(r.residue);
  }
  out.push_back(std::move(last));
  return out;
}

}  // namespace

HatResult demix_hat(const std::vector<SignedMixture>& inputs, int num_classes, const HatContext& ctx,
                    const HatConfig& config) {
  const int M = static_cast<int>(inputs.size());
  const int L = num_classes > 0 ? num_classes : M;
  if (L < 2) throw Error(ErrorCode::InvalidArgument, "demix_hat needs at least two classes");
  if (M < L) throw Error(ErrorCode::RankDeficient, "fewer sources than classes");
  HatResult result;
  result.diagnostics.eps_n = ctx.eps_n();
  Rng rng(config.seed);
  std::vector<SignedMixture> start = inputs;
  if (M > L) {
    start.clear();
    for (int i = 0; i < L; ++i) start.push_back(SignedMixture::combine(rng.flat_dirichlet(inputs.size()), inputs));
  }
  result.estimates = demix_hat_rec(start, ctx, config, rng, result.diagnostics);
  finish_orders(result);
  return result;
}

HatResult demix_hat(const HatContext& ctx, const HatConfig& config, int num_classes) {
  return demix_hat(ctx.sources(), num_classes, ctx, config);
}

VertexTestHatResult vertex_test_hat(const PartialLabelMatrix& s, const std::vector<SignedMixture>& contaminated,
                                    const std::vector<SignedMixture>& qhats, const HatContext& ctx) {
  if (!s.has_unique_columns()) throw Error(ErrorCode::DuplicateColumns, "partial label matrix has repeated columns");
  if (!s.satisfies_condition_d()) throw Error(ErrorCode::ConditionDViolated, "a source equals a single class");
  if (static_cast<Eigen::Index>(contaminated.size()) != s.rows() ||
      static_cast<Eigen::Index>(qhats.size()) != s.cols()) {
    throw Error(ErrorCode::CountMismatch, "vertex_test_hat inputs do not match the partial label matrix");
  }
  const Eigen::Index M = s.rows();
  const Eigen::Index L = s.cols();
  VertexTestHatResult out;
  out.kappa.resize(M, L);
  for (Eigen::Index i = 0; i < M; ++i)
    for (Eigen::Index j = 0; j < L; ++j)
      out.kappa(i, j) = kappa_hat_two(contaminated[static_cast<std::size_t>(i)], qhats[static_cast<std::size_t>(j)],
                                      ctx.family(), ctx.eps_n())
                            .value;

  std::vector<Eigen::Index> order(static_cast<std::size_t>(M * L));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return out.kappa(a / L, a % L) > out.kappa(b / L, b % L);
  });
  std::vector<std::vector<int>> z(static_cast<std::size_t>(M), std::vector<int>(static_cast<std::size_t>(L), 0));
  for (int k = 0; k < s.nonzeros(); ++k) {
    const Eigen::Index e = order[static_cast<std::size_t>(k)];
    z[static_cast<std::size_t>(e / L)][static_cast<std::size_t>(e % L)] = 1;
  }
  auto perm = match_columns(z, s);
  if (perm) out.test = {true, std::move(perm)};
  return out;
}

ConditionDReduction reduce_condition_d(const PartialLabelMatrix& s, const HatContext& ctx) {
  if (!s.has_unique_columns()) throw Error(ErrorCode::DuplicateColumns, "partial label matrix has repeated columns");
  if (s.rows() != ctx.num_sources()) throw Error(ErrorCode::CountMismatch, "one source per partial label row");
  const auto M = static_cast<std::size_t>(s.rows());
  const auto L = static_cast<std::size_t>(s.cols());
  auto pattern = s.entries();
  std::vector<SignedMixture> rows = ctx.sources();
  std::vector<char> active(M, 1);
  std::vector<char> pinned_class(L, 0);
  ConditionDReduction out;

  auto singleton = [&](std::size_t i) -> int {
    int found = -1;
    for (std::size_t j = 0; j < L; ++j) {
      if (!pattern[i][j]) continue;
      if (found >= 0) return -1;
      found = static_cast<int>(j);
    }
    return found;
  };

  while (true) {
    std::size_t peel = M;
    int cls = -1;
    for (std::size_t i = 0; i < M; ++i) {
      if (active[i] && (cls = singleton(i)) >= 0) {
        peel = i;
        break;
      }
    }
    if (peel == M) break;
    active[peel] = 0;
    const auto c = static_cast<std::size_t>(cls);
    if (!pinned_class[c]) {
      pinned_class[c] = 1;
      out.pinned.emplace_back(cls, rows[peel]);
    }
    for (std::size_t r = 0; r < M; ++r) {
      if (!active[r] || !pattern[r][c]) continue;
      if (singleton(r) == cls) {
        active[r] = 0;  // another copy of the same class
        continue;
      }
      rows[r] = residue_hat(rows[r], rows[peel], ctx.family(), ctx.eps_n()).residue;
      pattern[r][c] = 0;
    }
  }

  for (std::size_t j = 0; j < L; ++j)
    if (!pinned_class[j]) out.class_index.push_back(static_cast<int>(j));
  std::vector<std::vector<int>> reduced;
  for (std::size_t i = 0; i < M; ++i) {
    if (!active[i]) continue;
    out.row_index.push_back(static_cast<int>(i));
    out.rows.push_back(rows[i]);
    std::vector<int> row;
    for (int j : out.class_index) row.push_back(pattern[i][static_cast<std::size_t>(j)]);
    reduced.push_back(std::move(row));
  }
  if (!out.class_index.empty() && !reduced.empty()) out.reduced = PartialLabelMatrix(std::move(reduced));
  return out;
}

HatResult partial_label_hat(const PartialLabelMatrix& s, const HatContext& ctx, const HatConfig& config) {
  if (!s.has_unique_columns()) throw Error(ErrorCode::DuplicateColumns, "partial label matrix has repeated columns");
  if (s.rows() != ctx.num_sources()) throw Error(ErrorCode::CountMismatch, "one source per partial label row");
  const auto L = static_cast<std::size_t>(s.cols());

  ConditionDReduction red;
  if (s.satisfies_condition_d()) {
    red.reduced = s;
    red.rows = ctx.sources();
    for (Eigen::Index i = 0; i < s.rows(); ++i) red.row_index.push_back(static_cast<int>(i));
    for (std::size_t j = 0; j < L; ++j) red.class_index.push_back(static_cast<int>(j));
  } else {
    red = reduce_condition_d(s, ctx);
  }

  HatResult result;
  result.diagnostics.eps_n = ctx.eps_n();
  std::vector<SignedMixture> candidates;
  std::vector<int> class_to_candidate(L, -1);
  if (red.reduced) {
    const int sub_classes = static_cast<int>(red.reduced->cols());
    HatResult demixed = demix_hat(red.rows, sub_classes, ctx, config);
    result.diagnostics = demixed.diagnostics;
    auto vt = vertex_test_hat(*red.reduced, red.rows, demixed.estimates, ctx);
    result.diagnostics.vertex_kappa = vt.kappa;
    candidates = demixed.estimates;
    if (!vt.test.found) {
      result.estimates = std::move(candidates);
      for (const auto& [cls, est] : red.pinned) result.estimates.push_back(est);
      finish_orders(result);
      return result;
    }
    for (int j = 0; j < sub_classes; ++j)
      class_to_candidate[static_cast<std::size_t>(red.class_index[static_cast<std::size_t>(j)])] = (*vt.test.permutation)[j];
  }
  for (const auto& [cls, est] : red.pinned) {
    class_to_candidate[static_cast<std::size_t>(cls)] = static_cast<int>(candidates.size());
    candidates.push_back(est);
    result.diagnostics.pinned_classes.push_back(cls);
  }
  Permutation perm(class_to_candidate);
  result.estimates = perm.to_class_order(candidates);
  result.permutation = std::move(perm);
  finish_orders(result);
  return result;
}

}  // namespace mcm
