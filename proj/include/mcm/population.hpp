#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "mcm/rng.hpp"
#include "mcm/simplex.hpp"

namespace mcm {

/// Assignment of candidates to classes: class j is candidate `(*this)[j]`.
class Permutation {
 public:
  explicit Permutation(std::vector<int> class_to_candidate);
  static Permutation identity(int size);

  int size() const { return static_cast<int>(map_.size()); }
  int operator[](int cls) const { return map_[static_cast<std::size_t>(cls)]; }
  const std::vector<int>& indices() const { return map_; }

  /// The 0/1 matrix C^T with (C^T Q)_j = Q_{map[j]}.
  Eigen::MatrixXi matrix() const;

  template <typename T>
  std::vector<T> to_class_order(const std::vector<T>& candidates) const {
    std::vector<T> out;
    out.reserve(map_.size());
    for (int k : map_) out.push_back(candidates.at(static_cast<std::size_t>(k)));
    return out;
  }

  friend bool operator==(const Permutation& a, const Permutation& b) { return a.map_ == b.map_; }

 private:
  std::vector<int> map_;
};

/// Finds C with Z C = S by sorting binary columns. Returns the class-to-column
/// map, or nothing when the column multisets differ.
std::optional<Permutation> match_columns(const std::vector<std::vector<int>>& z, const PartialLabelMatrix& s);

struct DemixResult {
  std::vector<MixtureProportion> vertices;
  /// FaceTest loop count of each recursion level, outermost first.
  std::vector<int> iterations_used;
};

struct VertexTestResult {
  bool found = false;
  std::optional<Permutation> permutation;
};

enum class DemixVariant { MultiSample, ResidueChain };

struct DemixOptions {
  DemixVariant variant = DemixVariant::MultiSample;
  int max_face_iter = 10000;
  Tolerances tol = kDefaultTolerances;
};

/// Row i of the result is the multi-sample residue of row i with respect to
/// the remaining rows. Requires the rows to pass check_b1.
std::vector<MixtureProportion> multiclass_decontaminate(const std::vector<MixtureProportion>& contaminated,
                                                        const Tolerances& tol = kDefaultTolerances);

/// True iff every pairwise two-sample kappa is positive, i.e. all points
/// share a support set.
bool face_test(const std::vector<MixtureProportion>& etas, const Tolerances& tol = kDefaultTolerances);

DemixResult demix(const std::vector<MixtureProportion>& contaminated, std::uint64_t seed,
                  const DemixOptions& options = {});
DemixResult demix(const std::vector<MixtureProportion>& contaminated, Rng& rng, const DemixOptions& options = {});

/// M > L inputs: draw L flat-Dirichlet combinations, then demix them.
DemixResult nonsquare_demix(const std::vector<MixtureProportion>& contaminated, Eigen::Index num_classes,
                            std::uint64_t seed, const DemixOptions& options = {});

VertexTestResult vertex_test(const PartialLabelMatrix& s, const std::vector<MixtureProportion>& contaminated,
                             const std::vector<MixtureProportion>& candidates,
                             const Tolerances& tol = kDefaultTolerances);

struct PartialLabelOptions {
  int max_k = 10000;
  Tolerances tol = kDefaultTolerances;
};

struct PartialLabelResult {
  /// Base proportions in class order.
  std::vector<MixtureProportion> vertices;
  Permutation permutation = Permutation::identity(0);
  /// Value of k at which the vertex test first succeeded.
  int k_used = 0;
};

PartialLabelResult partial_label_decontaminate(const PartialLabelMatrix& s,
                                               const std::vector<MixtureProportion>& contaminated,
                                               std::uint64_t seed, const PartialLabelOptions& options = {});

/// Successive two-sample residues of q with respect to each anchor in turn.
MixtureProportion residue_chain(const MixtureProportion& q, const std::vector<MixtureProportion>& anchors,
                                const Tolerances& tol = kDefaultTolerances);

/// Flat-Dirichlet convex combination of `generators`.
MixtureProportion random_convex_combination(const std::vector<MixtureProportion>& generators, Rng& rng);

}  // namespace mcm
