#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcm/tolerances.hpp"

namespace mcm {

/// A point of the probability simplex: the mixture weights of a distribution
/// over the L base distributions. All exact (population) algorithms run on
/// these vectors.
class MixtureProportion {
 public:
  /// Entries in [-clamp, 0) are set to 0; anything more negative, or a sum
  /// that is off by more than `tol.sum`, is rejected with InvalidProportion.
  explicit MixtureProportion(Eigen::VectorXd weights, const Tolerances& tol = kDefaultTolerances);
  MixtureProportion(std::initializer_list<double> weights);

  /// Standard basis vector e_index of length `size`.
  static MixtureProportion vertex(Eigen::Index size, Eigen::Index index);
  static MixtureProportion uniform(Eigen::Index size);

  Eigen::Index size() const { return weights_.size(); }
  double operator[](Eigen::Index i) const { return weights_(i); }
  const Eigen::VectorXd& weights() const { return weights_; }

  friend bool operator==(const MixtureProportion& a, const MixtureProportion& b) {
    return a.weights_ == b.weights_;
  }

 private:
  Eigen::VectorXd weights_;
};

/// Finite-sample-space distribution with named atoms.
class DiscreteDistribution {
 public:
  DiscreteDistribution(std::vector<std::string> atoms, Eigen::VectorXd probs);

  const std::vector<std::string>& atoms() const { return atoms_; }
  const Eigen::VectorXd& probs() const { return probs_; }
  Eigen::Index size() const { return probs_.size(); }

 private:
  std::vector<std::string> atoms_;
  Eigen::VectorXd probs_;
};

/// M x L row-stochastic matrix; row i holds the proportions of contaminated
/// distribution i.
class MixingMatrix {
 public:
  explicit MixingMatrix(std::vector<MixtureProportion> rows);
  explicit MixingMatrix(const Eigen::MatrixXd& matrix);

  static MixingMatrix identity(Eigen::Index size);

  Eigen::Index rows() const { return static_cast<Eigen::Index>(rows_.size()); }
  Eigen::Index cols() const { return rows_.empty() ? 0 : rows_.front().size(); }
  const MixtureProportion& row(Eigen::Index i) const { return rows_.at(static_cast<std::size_t>(i)); }
  const std::vector<MixtureProportion>& row_list() const { return rows_; }
  Eigen::MatrixXd matrix() const;

 private:
  std::vector<MixtureProportion> rows_;
};

/// Binary M x L matrix; entry (i, j) is 1 when class j may appear in
/// contaminated source i.
class PartialLabelMatrix {
 public:
  explicit PartialLabelMatrix(std::vector<std::vector<int>> entries);

  /// The pattern 1{pi_ij > 0} of a mixing matrix.
  static PartialLabelMatrix from_mixing(const MixingMatrix& mixing, double tol = kDefaultTolerances.support);

  Eigen::Index rows() const { return static_cast<Eigen::Index>(entries_.size()); }
  Eigen::Index cols() const { return entries_.empty() ? 0 : static_cast<Eigen::Index>(entries_.front().size()); }
  int operator()(Eigen::Index i, Eigen::Index j) const {
    return entries_[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  }
  const std::vector<std::vector<int>>& entries() const { return entries_; }
  std::vector<int> column(Eigen::Index j) const;
  int nonzeros() const;

  bool has_unique_columns() const;
  bool has_zero_column() const;
  bool consistent_with(const MixingMatrix& mixing, double tol = kDefaultTolerances.support) const;
  /// Condition (D): no row is a single class indicator e_j^T.
  bool satisfies_condition_d() const;
  /// Index of the single class in row i, if the row is an indicator.
  std::optional<Eigen::Index> singleton_class(Eigen::Index i) const;

  friend bool operator==(const PartialLabelMatrix& a, const PartialLabelMatrix& b) {
    return a.entries_ == b.entries_;
  }

 private:
  std::vector<std::vector<int>> entries_;
};

struct KappaSolution {
  double kappa = 0.0;
  Eigen::VectorXd nu;
  std::optional<MixtureProportion> residue;
};

/// kappa*(eta0 | eta1): the largest weight of eta1 that can be removed from
/// eta0, i.e. the smallest ratio eta0_i / eta1_i over the support of eta1.
double two_sample_kappa(const MixtureProportion& eta0, const MixtureProportion& eta1,
                        const Tolerances& tol = kDefaultTolerances);

struct ResidueResult {
  double kappa = 0.0;
  MixtureProportion residue;
};

/// eta0 = (1 - kappa) residue + kappa eta1 with kappa maximal.
/// Throws EqualInputs when eta0 and eta1 coincide.
ResidueResult residue(const MixtureProportion& eta0, const MixtureProportion& eta1,
                      const Tolerances& tol = kDefaultTolerances);

/// Multi-sample kappa via the linear program
///   max sum(nu)  s.t. nu >= 0, sum(nu) <= 1, eta0 - sum_k nu_k etas_k >= 0.
/// Optimal nu is the lexicographically smallest among all optima. The
/// residue is absent when kappa reaches 1.
KappaSolution multi_sample_kappa(const MixtureProportion& eta0, const std::vector<MixtureProportion>& etas,
                                 const Tolerances& tol = kDefaultTolerances);

std::vector<Eigen::Index> support_set(const MixtureProportion& eta, double tol = kDefaultTolerances.support);

/// Inverse has positive diagonal and nonpositive off-diagonal (low-noise
/// multiclass condition).
bool check_b1(const MixingMatrix& pi);
/// Full column rank (demixing condition).
bool check_b2(const MixingMatrix& pi);
/// Full column rank and unique pattern columns (partial-label condition).
bool check_b3(const MixingMatrix& pi, const PartialLabelMatrix& s);

/// Rows gamma_i c + (1 - gamma_i) e_i.
MixingMatrix common_background_noise(const MixtureProportion& c, const std::vector<double>& gammas);

/// (1 - nu) x + nu y.
MixtureProportion blend(const MixtureProportion& x, const MixtureProportion& y, double nu);

bool approx_equal(const MixtureProportion& a, const MixtureProportion& b, double tol = kDefaultTolerances.support);

/// Number of singular values above `tol` of the matrix whose rows are `rows`.
Eigen::Index numerical_rank(const Eigen::MatrixXd& rows, double tol = kDefaultTolerances.support);
Eigen::MatrixXd stack_rows(const std::vector<MixtureProportion>& rows);

}  // namespace mcm
