#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mcm/empirical.hpp"
#include "mcm/population.hpp"
#include "mcm/rng.hpp"
#include "mcm/simplex.hpp"

namespace mcm {

struct HatConfig {
  /// FaceTestHat threshold.
  double face_epsilon = 0.2;
  /// Multiplier on the deviation bound eps_n (1 = the bound as stated).
  double eps_scale = 1.0;
  /// Replaces the total bound outright; per-source bounds keep their ratios.
  std::optional<double> eps_override;
  int max_face_iter = 10000;
  std::uint64_t seed = 0;
};

/// Samples of the contaminated sources, the candidate family anchored on
/// them, and the deviation bounds shared by every estimate of one run.
class HatContext {
 public:
  HatContext(std::vector<SampleSet> samples, const VCClassSpec& vc, const HatConfig& config = {});

  const std::vector<SampleSet>& samples() const { return samples_; }
  const CandidateFamily& family() const { return family_; }
  Eigen::Index num_sources() const { return static_cast<Eigen::Index>(samples_.size()); }
  SignedMixture source(Eigen::Index i) const { return SignedMixture::empirical(num_sources(), i); }
  std::vector<SignedMixture> sources() const;

  /// Total bound used by every two-sample estimate.
  double eps_n() const { return eps_n_; }
  /// Per-source bound used by the multi-sample estimate.
  double eps(Eigen::Index i) const { return eps_i_[static_cast<std::size_t>(i)]; }

 private:
  std::vector<SampleSet> samples_;
  CandidateFamily family_;
  double eps_n_ = 0.0;
  std::vector<double> eps_i_;
};

struct HatDiagnostics {
  double eps_n = 0.0;
  /// kappa estimates behind every accepted residue, in computation order.
  std::vector<double> kappa_hats;
  /// FaceTestHat loop count per recursion level, outermost first.
  std::vector<int> face_iterations;
  /// Order of each returned estimate.
  std::vector<int> orders;
  int max_order = -1;
  /// VertexTestHat matrix of kappa estimates, when that stage ran.
  std::optional<Eigen::MatrixXd> vertex_kappa;
  /// Classes fixed by the condition (D) reduction.
  std::vector<int> pinned_classes;
};

struct HatResult {
  std::vector<SignedMixture> estimates;
  std::optional<Permutation> permutation;
  HatDiagnostics diagnostics;
};

/// Largest order DemixHat can produce for L classes.
int order_bound(int num_classes);

HatResult multiclass_hat(const HatContext& ctx);

bool face_test_hat(const std::vector<SignedMixture>& qhats, double epsilon, const HatContext& ctx);

/// DemixHat on the context's sources. With more sources than `num_classes`
/// the sources are first replaced by random convex combinations.
HatResult demix_hat(const HatContext& ctx, const HatConfig& config, int num_classes = 0);
HatResult demix_hat(const std::vector<SignedMixture>& inputs, int num_classes, const HatContext& ctx,
                    const HatConfig& config);

struct VertexTestHatResult {
  VertexTestResult test;
  Eigen::MatrixXd kappa;
};

VertexTestHatResult vertex_test_hat(const PartialLabelMatrix& s, const std::vector<SignedMixture>& contaminated,
                                    const std::vector<SignedMixture>& qhats, const HatContext& ctx);

struct ConditionDReduction {
  /// Remaining pattern on remaining rows and classes; absent when every
  /// class was pinned.
  std::optional<PartialLabelMatrix> reduced;
  std::vector<SignedMixture> rows;
  /// Original index of each remaining row and class.
  std::vector<int> row_index;
  std::vector<int> class_index;
  /// Pinned class and the estimate standing for it.
  std::vector<std::pair<int, SignedMixture>> pinned;
};

/// Peels off sources that equal a single class: each remaining source that
/// shares that class is replaced by its residue with respect to the peeled
/// source, and the class is dropped from its row.
ConditionDReduction reduce_condition_d(const PartialLabelMatrix& s, const HatContext& ctx);

HatResult partial_label_hat(const PartialLabelMatrix& s, const HatContext& ctx, const HatConfig& config);

}  // namespace mcm
