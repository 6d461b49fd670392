#include "mcm/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "mcm/error.hpp"
#include "mcm/lp.hpp"

namespace mcm {
namespace {

void require_same_length(const MixtureProportion& a, const MixtureProportion& b, const char* where) {
  if (a.size() != b.size()) {
    std::ostringstream msg;
    msg << where << ": lengths " << a.size() << " and " << b.size() << " differ";
    throw Error(ErrorCode::LengthMismatch, msg.str());
  }
}

// Drops round-off below `floor` (including small negatives) and restores unit sum.
Eigen::VectorXd tidy(Eigen::VectorXd v, double floor) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v(i) <= floor) v(i) = 0.0;
  }
  const double total = v.sum();
  if (total > 0.0) v /= total;
  return v;
}

}  // namespace

MixtureProportion::MixtureProportion(Eigen::VectorXd weights, const Tolerances& tol)
    : weights_(std::move(weights)) {
  if (weights_.size() == 0) throw Error(ErrorCode::InvalidProportion, "empty proportion vector");
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    const double w = weights_(i);
    if (!std::isfinite(w)) throw Error(ErrorCode::InvalidProportion, "non-finite entry");
    if (w < 0.0) {
      if (w < -tol.clamp) {
        std::ostringstream msg;
        msg << "entry " << i << " = " << w << " is negative";
        throw Error(ErrorCode::InvalidProportion, msg.str());
      }
      weights_(i) = 0.0;
    }
  }
  const double total = weights_.sum();
  if (std::abs(total - 1.0) > tol.sum) {
    std::ostringstream msg;
    msg << "entries sum to " << total;
    throw Error(ErrorCode::InvalidProportion, msg.str());
  }
}

MixtureProportion::MixtureProportion(std::initializer_list<double> weights)
    : MixtureProportion(Eigen::Map<const Eigen::VectorXd>(weights.begin(), static_cast<Eigen::Index>(weights.size()))) {}

MixtureProportion MixtureProportion::vertex(Eigen::Index size, Eigen::Index index) {
  if (index < 0 || index >= size) throw Error(ErrorCode::InvalidArgument, "vertex index out of range");
  Eigen::VectorXd v = Eigen::VectorXd::Zero(size);
  v(index) = 1.0;
  return MixtureProportion(std::move(v));
}

MixtureProportion MixtureProportion::uniform(Eigen::Index size) {
  return MixtureProportion(Eigen::VectorXd::Constant(size, 1.0 / static_cast<double>(size)));
}

DiscreteDistribution::DiscreteDistribution(std::vector<std::string> atoms, Eigen::VectorXd probs)
    : atoms_(std::move(atoms)), probs_(std::move(probs)) {
  if (static_cast<Eigen::Index>(atoms_.size()) != probs_.size()) {
    throw Error(ErrorCode::LengthMismatch, "atoms and probabilities differ in length");
  }
  std::set<std::string> seen(atoms_.begin(), atoms_.end());
  if (seen.size() != atoms_.size()) throw Error(ErrorCode::InvalidArgument, "atom identifiers must be unique");
  if ((probs_.array() < 0.0).any()) throw Error(ErrorCode::InvalidProportion, "negative probability");
  if (std::abs(probs_.sum() - 1.0) > kDefaultTolerances.sum) {
    throw Error(ErrorCode::InvalidProportion, "probabilities do not sum to 1");
  }
}

MixingMatrix::MixingMatrix(std::vector<MixtureProportion> rows) : rows_(std::move(rows)) {
  if (rows_.empty()) throw Error(ErrorCode::InvalidArgument, "mixing matrix needs at least one row");
  for (const auto& r : rows_) require_same_length(rows_.front(), r, "MixingMatrix");
}

MixingMatrix::MixingMatrix(const Eigen::MatrixXd& matrix) {
  if (matrix.rows() == 0) throw Error(ErrorCode::InvalidArgument, "mixing matrix needs at least one row");
  rows_.reserve(static_cast<std::size_t>(matrix.rows()));
  for (Eigen::Index i = 0; i < matrix.rows(); ++i) rows_.emplace_back(Eigen::VectorXd(matrix.row(i).transpose()));
}

MixingMatrix MixingMatrix::identity(Eigen::Index size) {
  return MixingMatrix(Eigen::MatrixXd::Identity(size, size));
}

Eigen::MatrixXd MixingMatrix::matrix() const { return stack_rows(rows_); }

PartialLabelMatrix::PartialLabelMatrix(std::vector<std::vector<int>> entries) : entries_(std::move(entries)) {
  if (entries_.empty() || entries_.front().empty()) {
    throw Error(ErrorCode::InvalidArgument, "partial label matrix must be nonempty");
  }
  for (const auto& row : entries_) {
    if (row.size() != entries_.front().size()) throw Error(ErrorCode::LengthMismatch, "ragged partial label matrix");
    bool any = false;
    for (int v : row) {
      if (v != 0 && v != 1) throw Error(ErrorCode::InvalidArgument, "partial label entries must be 0 or 1");
      any = any || v == 1;
    }
    if (!any) throw Error(ErrorCode::InvalidArgument, "partial label matrix has an all-zero row");
  }
}

PartialLabelMatrix PartialLabelMatrix::from_mixing(const MixingMatrix& mixing, double tol) {
  std::vector<std::vector<int>> entries;
  for (const auto& row : mixing.row_list()) {
    std::vector<int> r(static_cast<std::size_t>(row.size()));
    for (Eigen::Index j = 0; j < row.size(); ++j) r[static_cast<std::size_t>(j)] = row[j] > tol ? 1 : 0;
    entries.push_back(std::move(r));
  }
  return PartialLabelMatrix(std::move(entries));
}

std::vector<int> PartialLabelMatrix::column(Eigen::Index j) const {
  std::vector<int> col;
  col.reserve(entries_.size());
  for (const auto& row : entries_) col.push_back(row[static_cast<std::size_t>(j)]);
  return col;
}

int PartialLabelMatrix::nonzeros() const {
  int total = 0;
  for (const auto& row : entries_)
    for (int v : row) total += v;
  return total;
}

bool PartialLabelMatrix::has_unique_columns() const {
  std::set<std::vector<int>> seen;
  for (Eigen::Index j = 0; j < cols(); ++j) {
    if (!seen.insert(column(j)).second) return false;
  }
  return true;
}

bool PartialLabelMatrix::has_zero_column() const {
  for (Eigen::Index j = 0; j < cols(); ++j) {
    const auto col = column(j);
    if (std::all_of(col.begin(), col.end(), [](int v) { return v == 0; })) return true;
  }
  return false;
}

bool PartialLabelMatrix::consistent_with(const MixingMatrix& mixing, double tol) const {
  if (mixing.rows() != rows() || mixing.cols() != cols()) return false;
  for (Eigen::Index i = 0; i < rows(); ++i)
    for (Eigen::Index j = 0; j < cols(); ++j)
      if ((mixing.row(i)[j] > tol) != ((*this)(i, j) == 1)) return false;
  return true;
}

std::optional<Eigen::Index> PartialLabelMatrix::singleton_class(Eigen::Index i) const {
  const auto& row = entries_[static_cast<std::size_t>(i)];
  if (std::count(row.begin(), row.end(), 1) != 1) return std::nullopt;
  return static_cast<Eigen::Index>(std::find(row.begin(), row.end(), 1) - row.begin());
}

bool PartialLabelMatrix::satisfies_condition_d() const {
  for (Eigen::Index i = 0; i < rows(); ++i)
    if (singleton_class(i)) return false;
  return true;
}

double two_sample_kappa(const MixtureProportion& eta0, const MixtureProportion& eta1, const Tolerances& tol) {
  require_same_length(eta0, eta1, "two_sample_kappa");
  double kappa = 1.0;
  for (Eigen::Index i = 0; i < eta1.size(); ++i) {
    if (eta1[i] <= tol.support) continue;
    const double numerator = eta0[i] <= tol.support ? 0.0 : eta0[i];
    kappa = std::min(kappa, numerator / eta1[i]);
  }
  return std::clamp(kappa, 0.0, 1.0);
}

ResidueResult residue(const MixtureProportion& eta0, const MixtureProportion& eta1, const Tolerances& tol) {
  require_same_length(eta0, eta1, "residue");
  if ((eta0.weights() - eta1.weights()).cwiseAbs().maxCoeff() <= tol.clamp) {
    throw Error(ErrorCode::EqualInputs, "residue of a distribution with respect to itself is undefined");
  }
  const double kappa = two_sample_kappa(eta0, eta1, tol);
  if (kappa >= 1.0) {
    throw Error(ErrorCode::EqualInputs, "inputs agree on the support; kappa is 1");
  }
  Eigen::VectorXd res = (eta0.weights() - kappa * eta1.weights()) / (1.0 - kappa);
  // The minimising coordinate is zero in exact arithmetic.
  for (Eigen::Index i = 0; i < res.size(); ++i) {
    if (eta1[i] > tol.support) {
      const double numerator = eta0[i] <= tol.support ? 0.0 : eta0[i];
      if (numerator / eta1[i] <= kappa) res(i) = 0.0;
    }
  }
  return {kappa, MixtureProportion(tidy(std::move(res), tol.clamp), tol)};
}

KappaSolution multi_sample_kappa(const MixtureProportion& eta0, const std::vector<MixtureProportion>& etas,
                                 const Tolerances& tol) {
  if (etas.empty()) throw Error(ErrorCode::InvalidArgument, "multi_sample_kappa needs at least one reference");
  for (const auto& e : etas) require_same_length(eta0, e, "multi_sample_kappa");

  const Eigen::Index length = eta0.size();
  const auto k = static_cast<Eigen::Index>(etas.size());
  Eigen::MatrixXd A(length, k);
  for (Eigen::Index j = 0; j < k; ++j) A.col(j) = etas[static_cast<std::size_t>(j)].weights();
  Eigen::MatrixXd A_snapped = (A.array() <= tol.support).select(0.0, A);
  Eigen::VectorXd b = (eta0.weights().array() <= tol.support).select(0.0, eta0.weights());

  KappaSolution solution;
  solution.nu = solve_kappa_lp(A_snapped, b, 1.0);
  solution.kappa = solution.nu.sum();
  if (1.0 - solution.kappa <= tol.support) {
    solution.kappa = 1.0;
    return solution;
  }
  Eigen::VectorXd res = (eta0.weights() - A * solution.nu) / (1.0 - solution.kappa);
  solution.residue = MixtureProportion(tidy(std::move(res), tol.clamp), tol);
  return solution;
}

std::vector<Eigen::Index> support_set(const MixtureProportion& eta, double tol) {
  if (tol < 0.0) throw Error(ErrorCode::InvalidArgument, "support tolerance must be nonnegative");
  std::vector<Eigen::Index> out;
  for (Eigen::Index i = 0; i < eta.size(); ++i)
    if (eta[i] > tol) out.push_back(i);
  return out;
}

bool check_b1(const MixingMatrix& pi) {
  if (pi.rows() != pi.cols()) throw Error(ErrorCode::NonSquare, "check_b1 requires a square mixing matrix");
  const Eigen::MatrixXd m = pi.matrix();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const double smallest = sv(sv.size() - 1);
  if (smallest <= 0.0 || sv(0) / smallest >= 1e12) return false;
  const Eigen::MatrixXd inv = m.fullPivLu().inverse();
  for (Eigen::Index i = 0; i < inv.rows(); ++i) {
    for (Eigen::Index j = 0; j < inv.cols(); ++j) {
      if (i == j ? inv(i, j) <= 1e-9 : inv(i, j) >= 1e-9) return false;
    }
  }
  return true;
}

bool check_b2(const MixingMatrix& pi) { return numerical_rank(pi.matrix()) == pi.cols(); }

bool check_b3(const MixingMatrix& pi, const PartialLabelMatrix& s) {
  if (s.rows() != pi.rows() || s.cols() != pi.cols())
    throw Error(ErrorCode::LengthMismatch, "partial label matrix and mixing matrix differ in shape");
  return check_b2(pi) && s.has_unique_columns();
}

MixingMatrix common_background_noise(const MixtureProportion& c, const std::vector<double>& gammas) {
  if (static_cast<Eigen::Index>(gammas.size()) != c.size()) {
    throw Error(ErrorCode::LengthMismatch, "need one gamma per class");
  }
  std::vector<MixtureProportion> rows;
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    const double g = gammas[i];
    if (!(g >= 0.0 && g < 1.0)) throw Error(ErrorCode::InvalidArgument, "gamma must lie in [0, 1)");
    Eigen::VectorXd row = g * c.weights();
    row(static_cast<Eigen::Index>(i)) += 1.0 - g;
    rows.emplace_back(std::move(row));
  }
  return MixingMatrix(std::move(rows));
}

MixtureProportion blend(const MixtureProportion& x, const MixtureProportion& y, double nu) {
  require_same_length(x, y, "blend");
  if (!(nu >= 0.0 && nu <= 1.0)) throw Error(ErrorCode::InvalidArgument, "blend weight must lie in [0, 1]");
  if (nu == 0.0) return x;
  if (nu == 1.0) return y;
  return MixtureProportion(Eigen::VectorXd((1.0 - nu) * x.weights() + nu * y.weights()));
}

bool approx_equal(const MixtureProportion& a, const MixtureProportion& b, double tol) {
  return a.size() == b.size() && (a.weights() - b.weights()).cwiseAbs().maxCoeff() <= tol;
}

Eigen::MatrixXd stack_rows(const std::vector<MixtureProportion>& rows) {
  if (rows.empty()) return {};
  Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i].weights().transpose();
  return m;
}

Eigen::Index numerical_rank(const Eigen::MatrixXd& rows, double tol) {
  if (rows.size() == 0) return 0;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(rows);
  return (svd.singularValues().array() > tol).count();
}

}  // namespace mcm
