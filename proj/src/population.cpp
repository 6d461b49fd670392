#include "mcm/population.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "mcm/error.hpp"

namespace mcm {

Permutation::Permutation(std::vector<int> class_to_candidate) : map_(std::move(class_to_candidate)) {
  std::vector<int> sorted = map_;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i] != static_cast<int>(i)) throw Error(ErrorCode::InvalidArgument, "not a permutation");
  }
}

Permutation Permutation::identity(int size) {
  std::vector<int> map(static_cast<std::size_t>(size));
  std::iota(map.begin(), map.end(), 0);
  return Permutation(std::move(map));
}

Eigen::MatrixXi Permutation::matrix() const {
  Eigen::MatrixXi m = Eigen::MatrixXi::Zero(size(), size());
  for (int j = 0; j < size(); ++j) m(j, map_[static_cast<std::size_t>(j)]) = 1;
  return m;
}

std::optional<Permutation> match_columns(const std::vector<std::vector<int>>& z, const PartialLabelMatrix& s) {
  const auto rows = static_cast<std::size_t>(s.rows());
  const auto cols = static_cast<std::size_t>(s.cols());
  if (z.size() != rows) return std::nullopt;
  using Keyed = std::pair<std::vector<int>, int>;
  std::vector<Keyed> z_cols;
  std::vector<Keyed> s_cols;
  for (std::size_t j = 0; j < cols; ++j) {
    std::vector<int> zc(rows);
    for (std::size_t i = 0; i < rows; ++i) {
      if (z[i].size() != cols) return std::nullopt;
      zc[i] = z[i][j];
    }
    z_cols.emplace_back(std::move(zc), static_cast<int>(j));
    s_cols.emplace_back(s.column(static_cast<Eigen::Index>(j)), static_cast<int>(j));
  }
  std::sort(z_cols.begin(), z_cols.end());
  std::sort(s_cols.begin(), s_cols.end());
  std::vector<int> map(cols);
  for (std::size_t k = 0; k < cols; ++k) {
    if (z_cols[k].first != s_cols[k].first) return std::nullopt;
    map[static_cast<std::size_t>(s_cols[k].second)] = z_cols[k].second;
  }
  return Permutation(std::move(map));
}

MixtureProportion random_convex_combination(const std::vector<MixtureProportion>& generators, Rng& rng) {
  const auto weights = rng.flat_dirichlet(generators.size());
  Eigen::VectorXd point = Eigen::VectorXd::Zero(generators.front().size());
  for (std::size_t i = 0; i < generators.size(); ++i) point += weights[i] * generators[i].weights();
  return MixtureProportion(Eigen::VectorXd(point / point.sum()));
}

std::vector<MixtureProportion> multiclass_decontaminate(const std::vector<MixtureProportion>& contaminated,
                                                        const Tolerances& tol) {
  const MixingMatrix pi(contaminated);
  if (!check_b1(pi)) throw Error(ErrorCode::PreconditionB1, "mixing matrix does not satisfy (B1)");
  std::vector<MixtureProportion> out;
  for (std::size_t i = 0; i < contaminated.size(); ++i) {
    std::vector<MixtureProportion> others;
    for (std::size_t j = 0; j < contaminated.size(); ++j)
      if (j != i) others.push_back(contaminated[j]);
    auto solution = multi_sample_kappa(contaminated[i], others, tol);
    if (!solution.residue) throw Error(ErrorCode::PreconditionB1, "row is a combination of the other rows");
    out.push_back(*solution.residue);
  }
  return out;
}

bool face_test(const std::vector<MixtureProportion>& etas, const Tolerances& tol) {
  for (std::size_t i = 0; i < etas.size(); ++i)
    for (std::size_t j = 0; j < etas.size(); ++j)
      if (i != j && two_sample_kappa(etas[i], etas[j], tol) <= tol.support) return false;
  return true;
}

namespace {

void require_independent(const std::vector<MixtureProportion>& rows, const Tolerances& tol) {
  const Eigen::Index rank = numerical_rank(stack_rows(rows), tol.support);
  if (rank < static_cast<Eigen::Index>(rows.size())) {
    std::ostringstream msg;
    msg << rows.size() << " proportions span only rank " << rank;
    throw Error(ErrorCode::RankDeficient, msg.str());
  }
}

MixtureProportion mean_of(const std::vector<MixtureProportion>& rows) {
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(rows.front().size());
  for (const auto& r : rows) sum += r.weights();
  return MixtureProportion(Eigen::VectorXd(sum / static_cast<double>(rows.size())));
}

}  // namespace

DemixResult demix(const std::vector<MixtureProportion>& contaminated, std::uint64_t seed,
                  const DemixOptions& options) {
  Rng rng(seed);
  return demix(contaminated, rng, options);
}

DemixResult demix(const std::vector<MixtureProportion>& s, Rng& rng, const DemixOptions& options) {
  if (s.size() < 2) throw Error(ErrorCode::InvalidArgument, "demix needs at least two inputs");
  require_independent(s, options.tol);

  DemixResult result;
  if (s.size() == 2) {
    result.vertices.push_back(residue(s[0], s[1], options.tol).residue);
    result.vertices.push_back(residue(s[1], s[0], options.tol).residue);
    return result;
  }

  const std::vector<MixtureProportion> tail(s.begin() + 1, s.end());
  const MixtureProportion q = random_convex_combination(tail, rng);

  std::vector<MixtureProportion> face;
  int n = 1;
  while (true) {
    ++n;
    if (n - 1 > options.max_face_iter) {
      std::ostringstream msg;
      msg << "face test did not pass within " << options.max_face_iter << " iterations";
      throw Error(ErrorCode::LoopCapExceeded, msg.str());
    }
    face.clear();
    const double weight = static_cast<double>(n - 1) / static_cast<double>(n);
    for (const auto& si : tail) face.push_back(residue(blend(si, q, weight), s[0], options.tol).residue);
    if (face_test(face, options.tol)) break;
  }
  result.iterations_used.push_back(n - 1);

  DemixResult inner = demix(face, rng, options);
  result.iterations_used.insert(result.iterations_used.end(), inner.iterations_used.begin(),
                                inner.iterations_used.end());
  result.vertices = std::move(inner.vertices);

  const MixtureProportion center = mean_of(s);
  if (options.variant == DemixVariant::MultiSample) {
    auto solution = multi_sample_kappa(center, result.vertices, options.tol);
    if (!solution.residue) throw Error(ErrorCode::RankDeficient, "centroid lies in the recovered face");
    result.vertices.push_back(*solution.residue);
  } else {
    result.vertices.push_back(residue_chain(center, result.vertices, options.tol));
  }
  return result;
}

DemixResult nonsquare_demix(const std::vector<MixtureProportion>& contaminated, Eigen::Index num_classes,
                            std::uint64_t seed, const DemixOptions& options) {
  if (num_classes < 2 || static_cast<Eigen::Index>(contaminated.size()) < num_classes) {
    throw Error(ErrorCode::InvalidArgument, "nonsquare_demix needs M >= L >= 2");
  }
  const Eigen::Index rank = numerical_rank(stack_rows(contaminated), options.tol.support);
  if (rank < num_classes) {
    std::ostringstream msg;
    msg << "mixing matrix has rank " << rank << " < " << num_classes;
    throw Error(ErrorCode::RankDeficient, msg.str());
  }
  Rng rng(seed);
  std::vector<MixtureProportion> resampled;
  for (Eigen::Index i = 0; i < num_classes; ++i) resampled.push_back(random_convex_combination(contaminated, rng));
  return demix(resampled, rng, options);
}

VertexTestResult vertex_test(const PartialLabelMatrix& s, const std::vector<MixtureProportion>& contaminated,
                             const std::vector<MixtureProportion>& candidates, const Tolerances& tol) {
  if (!s.has_unique_columns()) throw Error(ErrorCode::DuplicateColumns, "partial label matrix has repeated columns");
  if (static_cast<Eigen::Index>(contaminated.size()) != s.rows() ||
      static_cast<Eigen::Index>(candidates.size()) != s.cols()) {
    throw Error(ErrorCode::CountMismatch, "vertex_test inputs do not match the partial label matrix");
  }
  for (std::size_t i = 0; i < candidates.size(); ++i)
    for (std::size_t j = 0; j < candidates.size(); ++j)
      if (i != j && two_sample_kappa(candidates[i], candidates[j], tol) > tol.support) return {};

  std::vector<std::vector<int>> z(contaminated.size(), std::vector<int>(candidates.size()));
  for (std::size_t i = 0; i < contaminated.size(); ++i)
    for (std::size_t j = 0; j < candidates.size(); ++j)
      z[i][j] = two_sample_kappa(contaminated[i], candidates[j], tol) > tol.support ? 1 : 0;

  auto perm = match_columns(z, s);
  if (!perm) return {};
  return {true, std::move(perm)};
}

PartialLabelResult partial_label_decontaminate(const PartialLabelMatrix& s,
                                               const std::vector<MixtureProportion>& contaminated,
                                               std::uint64_t seed, const PartialLabelOptions& options) {
  if (!s.has_unique_columns()) throw Error(ErrorCode::DuplicateColumns, "partial label matrix has repeated columns");
  if (static_cast<Eigen::Index>(contaminated.size()) != s.rows()) {
    throw Error(ErrorCode::CountMismatch, "one partial label row per contaminated distribution is required");
  }
  const auto L = static_cast<std::size_t>(s.cols());
  if (L < 2) throw Error(ErrorCode::InvalidArgument, "partial label decontamination needs L >= 2");

  Rng rng(seed);
  std::vector<MixtureProportion> q;
  for (std::size_t i = 0; i < L; ++i) q.push_back(random_convex_combination(contaminated, rng));
  std::vector<MixtureProportion> w = q;

  for (int k = 2; k <= options.max_k; ++k) {
    bool round_ok = true;
    for (std::size_t i = 0; i < L && round_ok; ++i) {
      std::vector<MixtureProportion> refs;
      Eigen::VectorXd avg = Eigen::VectorXd::Zero(q[i].size());
      for (std::size_t j = i + 1; j < L; ++j) {
        refs.push_back(q[j]);
        avg += q[j].weights();
      }
      for (std::size_t j = 0; j < i; ++j) {
        refs.push_back(w[j]);
        avg += w[j].weights();
      }
      avg /= static_cast<double>(L - 1);
      const double inv_k = 1.0 / static_cast<double>(k);
      const MixtureProportion target(Eigen::VectorXd(inv_k * q[i].weights() + (1.0 - inv_k) * avg));
      auto solution = multi_sample_kappa(target, refs, options.tol);
      if (!solution.residue) {
        round_ok = false;
        break;
      }
      w[i] = *solution.residue;
    }
    if (!round_ok) continue;
    auto test = vertex_test(s, contaminated, w, options.tol);
    if (test.found) {
      PartialLabelResult result;
      result.vertices = test.permutation->to_class_order(w);
      result.permutation = *test.permutation;
      result.k_used = k;
      return result;
    }
  }
  std::ostringstream msg;
  msg << "vertex test did not pass for k <= " << options.max_k;
  throw Error(ErrorCode::LoopCapExceeded, msg.str());
}

MixtureProportion residue_chain(const MixtureProportion& q, const std::vector<MixtureProportion>& anchors,
                                const Tolerances& tol) {
  MixtureProportion current = q;
  for (const auto& anchor : anchors) current = residue(current, anchor, tol).residue;
  return current;
}

}  // namespace mcm
