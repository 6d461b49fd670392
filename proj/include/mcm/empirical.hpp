#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace mcm {

using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Draws from one contaminated source. Weights are empty for an ordinary
/// sample (each point has mass 1/n); a weighted set is how an exact discrete
/// distribution is fed through the estimators.
struct SampleSet {
  PointMatrix points;
  int source_label = 0;
  Eigen::VectorXd weights;

  SampleSet() = default;
  SampleSet(PointMatrix pts, int label);
  static SampleSet weighted(PointMatrix pts, Eigen::VectorXd w, int label);

  Eigen::Index size() const { return points.rows(); }
  Eigen::Index dim() const { return points.cols(); }
  double weight(Eigen::Index i) const { return weights.size() ? weights(i) : 1.0 / static_cast<double>(size()); }
};

enum class SetFamily { Intervals, AxisRectangles, Balls };

std::string to_string(SetFamily family);
SetFamily parse_set_family(const std::string& name);

struct VCClassSpec {
  SetFamily family = SetFamily::Intervals;
  int dimension = 1;
  /// Upper bound on the number of candidate sets; 0 keeps every data-anchored set.
  std::size_t anchor_budget = 0;

  int vc_dimension() const;
};

/// Data-anchored candidate sets together with the mass every source puts on
/// each of them.
///
/// geometry row layout: rectangles/intervals (lo_1..lo_d, hi_1..hi_d), all
/// closed; balls (c_1..c_d, r), closed.
class CandidateFamily {
 public:
  static CandidateFamily build(const std::vector<SampleSet>& sources, const VCClassSpec& spec);

  const VCClassSpec& spec() const { return spec_; }
  Eigen::Index size() const { return masses_.rows(); }
  Eigen::Index num_sources() const { return masses_.cols(); }
  const Eigen::MatrixXd& masses() const { return masses_; }
  const Eigen::MatrixXd& geometry() const { return geometry_; }

  /// Values of sum_i c_i Phat_i on every set.
  Eigen::VectorXd evaluate(const Eigen::VectorXd& coefficients) const { return masses_ * coefficients; }

  using SetMeasure = std::function<double(SetFamily, const Eigen::Ref<const Eigen::RowVectorXd>&)>;
  /// Applies an external set function (e.g. a true distribution) to every set.
  Eigen::VectorXd measure(const SetMeasure& fn) const;

 private:
  VCClassSpec spec_;
  Eigen::MatrixXd masses_;
  Eigen::MatrixXd geometry_;
};

/// First m ranks of 0..u-1 in coarse-to-fine order: both ends, then
/// breadth-first bisection midpoints. Prefixes are nested.
std::vector<std::size_t> nested_ranks(std::size_t u, std::size_t m);

/// Affine combination of the empirical distributions of the sources. The
/// empirical distributions themselves have order -1, a first residue of two
/// of them order 0, and so on.
class SignedMixture {
 public:
  SignedMixture(Eigen::VectorXd coefficients, int order);
  static SignedMixture empirical(Eigen::Index num_sources, Eigen::Index source);
  /// sum_k w_k x_k for weights summing to 1.
  static SignedMixture combine(const std::vector<double>& weights, const std::vector<SignedMixture>& parts);

  const Eigen::VectorXd& coefficients() const { return coefficients_; }
  int order() const { return order_; }
  bool is_empirical() const { return order_ < 0; }
  Eigen::VectorXd evaluate(const CandidateFamily& family) const { return family.evaluate(coefficients_); }

 private:
  Eigen::VectorXd coefficients_;
  int order_;
};

/// 3 sqrt((V ln(n+1) - ln(delta/2)) / n).
double vc_epsilon(int vc_dimension, std::size_t n, double delta);

/// sum_i eps_i(1/n_i).
double epsilon_n(int vc_dimension, const std::vector<std::size_t>& sizes);

struct KappaHat {
  /// Infimum before clipping; +inf when no set has a positive denominator.
  double raw = 0.0;
  /// raw clipped to [0, 1].
  double value = 0.0;
  bool capped = false;
  Eigen::Index argmin = -1;
};

/// inf_S (F(S) + eps_num) / (H(S) - eps_den)_+ over the family.
KappaHat kappa_hat_two(const SignedMixture& f, const SignedMixture& h, const CandidateFamily& family,
                       double eps_num, double eps_den);
inline KappaHat kappa_hat_two(const SignedMixture& f, const SignedMixture& h, const CandidateFamily& family,
                              double eps_n) {
  return kappa_hat_two(f, h, family, eps_n, eps_n);
}

struct ResidueHatResult {
  KappaHat kappa;
  SignedMixture residue;
};

/// (F - kappa H) / (1 - kappa). Throws KappaOne when kappa >= 1 - 1e-9.
ResidueHatResult residue_hat(const SignedMixture& f, const SignedMixture& h, const CandidateFamily& family,
                             double eps_n);

struct KappaHatMulti {
  double kappa = 0.0;
  Eigen::VectorXd nu;
  Eigen::VectorXd mu;
  bool capped = false;
  int cuts = 0;
};

/// max over mu in the simplex of inf_S (F0(S) + eps0) / (sum_i mu_i (F_i(S) - eps_i))_+.
/// Solved exactly as the linear program
///   max sum(nu)  s.t.  sum_i nu_i (F_i(S) - eps_i) <= F0(S) + eps0  for all S,  nu >= 0,
/// by adding violated set constraints until none remain; sum(nu) is capped at 1.
KappaHatMulti kappa_hat_multi(const SignedMixture& f0, const std::vector<SignedMixture>& fs,
                              const CandidateFamily& family, double eps0, const std::vector<double>& eps);

/// max_S |a(S) - b(S)|.
double sup_deviation(const SignedMixture& a, const SignedMixture& b, const CandidateFamily& family);
/// max_S |a(S) - truth_S| for precomputed set probabilities.
double sup_deviation(const SignedMixture& a, const Eigen::VectorXd& truth, const CandidateFamily& family);

}  // namespace mcm
