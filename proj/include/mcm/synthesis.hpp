#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcm/empirical.hpp"
#include "mcm/rng.hpp"
#include "mcm/simplex.hpp"

namespace mcm {

enum class BaseKind { DiscreteSeparable, Gaussian1d, GaussianBump };

std::string to_string(BaseKind kind);
BaseKind parse_base_kind(const std::string& name);

struct BaseSpec {
  BaseKind kind = BaseKind::GaussianBump;
  /// discrete-separable: number of atoms (>= L). Private atom j for base j,
  /// the rest shared.
  int atoms = 0;
  /// Gaussian kinds; empty means 0, spacing, 2 spacing, ...
  std::vector<double> means;
  double spacing = 6.0;
  double sigma = 1.0;
  /// gaussian-bump: mass of the uniform bump and optional explicit bump
  /// left ends (unit-length bumps).
  double beta = 0.05;
  std::vector<double> bump_starts;
};

/// A one-dimensional base distribution with exact set probabilities.
struct BaseDistribution {
  BaseKind kind = BaseKind::Gaussian1d;
  Eigen::VectorXd atom_positions;
  Eigen::VectorXd atom_probs;
  double mean = 0.0;
  double sigma = 1.0;
  double beta = 0.0;
  double bump_start = 0.0;

  double sample(Rng& rng) const;
  /// P([lo, hi]).
  double interval_probability(double lo, double hi) const;
  /// Probability of a candidate set of a one-dimensional family.
  double set_probability(SetFamily family, const Eigen::Ref<const Eigen::RowVectorXd>& geometry) const;
};

struct BaseSet {
  std::vector<BaseDistribution> bases;
  /// True when every base has mass outside the others' supports.
  bool separable = false;
};

BaseSet gen_bases(const BaseSpec& spec, int num_classes, std::uint64_t seed);

enum class MixingMode { B1Background, FullRank, PartialLabel };
enum class FillMode { Dirichlet, Uniform };

struct MixingOptions {
  MixingMode mode = MixingMode::FullRank;
  int num_classes = 3;
  int num_rows = 3;
  std::uint64_t seed = 0;
  /// b1-background: gamma (or its upper bound when random_gamma).
  double noise_level = 0.3;
  bool random_gamma = false;
  bool random_center = false;
  std::optional<PartialLabelMatrix> pattern;
  FillMode fill = FillMode::Dirichlet;
  double max_condition = 1e6;
  int max_attempts = 10000;
};

MixingMatrix gen_mixing(const MixingOptions& options);

/// Largest over smallest of the first L singular values; +inf below rank L.
double condition_number(const Eigen::MatrixXd& m);

struct ProblemInstance {
  std::string name;
  BaseSet bases;
  MixingMatrix mixing = MixingMatrix::identity(1);
  std::optional<PartialLabelMatrix> partial_labels;
  std::vector<SampleSet> samples;
  /// Base index behind every drawn point.
  std::vector<std::vector<int>> components;
  std::uint64_t seed = 0;

  int num_classes() const { return static_cast<int>(mixing.cols()); }
  int num_rows() const { return static_cast<int>(mixing.rows()); }
  /// Exact probability of every set of `family` under base j.
  Eigen::VectorXd base_probabilities(int j, const CandidateFamily& family) const;
};

ProblemInstance sample_instance(const ProblemInstance& templ, const std::vector<std::size_t>& n_per_row,
                                std::uint64_t seed);

/// Named templates: eq3, eq4, bg-gamma-0.3, dup-columns. Bases are
/// gaussian-bump with L = 3.
std::map<std::string, ProblemInstance> builtin_instances();
ProblemInstance builtin_instance(const std::string& name);

}  // namespace mcm
