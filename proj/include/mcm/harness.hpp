#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mcm/empirical.hpp"
#include "mcm/simplex.hpp"

namespace mcm {

enum class Task { Multiclass, Demix, Partial };
enum class RunMode { Exact, Hat };

std::string to_string(Task t);
std::string to_string(RunMode m);

struct ExperimentConfig {
  Task task = Task::Demix;
  RunMode mode = RunMode::Exact;
  /// Built-in template name or path to an instance directory.
  std::string instance = "eq3";
  std::vector<std::size_t> n_per_row;
  VCClassSpec vc;
  double epsilon = 0.2;
  double eps_scale = 1.0;
  std::optional<double> eps_override;
  int max_face_iter = 10000;
  int max_k = 10000;
  std::vector<std::uint64_t> seeds{0};
  /// Output prefix: <output>.json and <output>.csv.
  std::string output;
  /// Deviation at or below which a seed counts as recovered; defaults to
  /// 1e-7 exact and 0.25 hat.
  std::optional<double> success_threshold;
  bool record_timing = false;
  int jobs = 1;

  double threshold() const { return success_threshold.value_or(mode == RunMode::Exact ? 1e-7 : 0.25); }
};

/// key = value lines; '#' starts a comment. Throws Config listing every bad field.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);
/// "3", "1,4,9", "0..99", or a mix.
std::vector<std::uint64_t> parse_seed_list(const std::string& text);

struct Recovery {
  /// assignment[i] = class matched to estimate i.
  std::vector<int> assignment;
  /// Deviation of the estimate assigned to class j.
  std::vector<double> per_class_error;
  double max_error = 0.0;
};

/// Brute force over all L! assignments (L <= 10) minimizing the largest
/// entry error(i, assignment[i]); ties go to the lexicographically smallest.
Recovery evaluate_recovery(const Eigen::MatrixXd& error);
/// Exact mode: componentwise max distance to the basis vectors.
Recovery evaluate_recovery(const std::vector<MixtureProportion>& estimates, Eigen::Index num_classes);
/// Hat mode: sup deviation over the family against true set probabilities.
Recovery evaluate_recovery(const std::vector<SignedMixture>& estimates, const std::vector<Eigen::VectorXd>& truth,
                           const CandidateFamily& family);

struct SeedOutcome {
  std::uint64_t seed = 0;
  /// "ok" or the error code of the failure.
  std::string status = "ok";
  std::string message;
  bool success = false;
  bool class_order_correct = false;
  Recovery recovery;
  std::optional<std::vector<int>> permutation;
  /// Returned estimates: proportions in exact mode, signed-mixture
  /// coefficients over the sources in hat mode.
  std::vector<std::vector<double>> estimates;
  std::vector<int> orders;
  std::vector<double> kappa_hats;
  std::vector<int> face_iterations;
  int max_order = -1;
  double eps_n = 0.0;
  double wall_seconds = 0.0;
};

struct RecoveryReport {
  ExperimentConfig config;
  std::vector<SeedOutcome> seeds;
  double mean_deviation = 0.0;
  double max_deviation = 0.0;
  double success_rate = 0.0;
  int failed_runs = 0;
};

/// Runs every seed (on `config.jobs` threads); failures are recorded per
/// seed. Aggregates are computed from the per-seed rows.
RecoveryReport run_experiment(const ExperimentConfig& config);
SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed);

std::string report_json(const RecoveryReport& report);
std::string report_csv(const RecoveryReport& report);
/// Writes <output>.json and <output>.csv.
void write_report(const RecoveryReport& report, const std::string& output);

}  // namespace mcm
