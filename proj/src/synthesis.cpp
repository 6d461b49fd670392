#include "mcm/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mcm/error.hpp"

namespace mcm {

std::string to_string(BaseKind kind) {
  switch (kind) {
    case BaseKind::DiscreteSeparable: return "discrete-separable";
    case BaseKind::Gaussian1d: return "gaussian-1d";
    case BaseKind::GaussianBump: return "gaussian-bump";
  }
  return "?";
}

BaseKind parse_base_kind(const std::string& name) {
  if (name == "discrete-separable") return BaseKind::DiscreteSeparable;
  if (name == "gaussian-1d") return BaseKind::Gaussian1d;
  if (name == "gaussian-bump") return BaseKind::GaussianBump;
  throw Error(ErrorCode::Config, "unknown base kind '" + name + "'");
}

namespace {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

}  // namespace

double BaseDistribution::sample(Rng& rng) const {
  if (kind == BaseKind::DiscreteSeparable) {
    std::vector<double> w(atom_probs.data(), atom_probs.data() + atom_probs.size());
    return atom_positions(static_cast<Eigen::Index>(rng.categorical(w)));
  }
  if (kind == BaseKind::GaussianBump && rng.uniform() < beta) return bump_start + rng.uniform();
  return mean + sigma * rng.normal();
}

double BaseDistribution::interval_probability(double lo, double hi) const {
  if (hi < lo) return 0.0;
  if (kind == BaseKind::DiscreteSeparable) {
    double p = 0.0;
    for (Eigen::Index a = 0; a < atom_positions.size(); ++a)
      if (atom_positions(a) >= lo && atom_positions(a) <= hi) p += atom_probs(a);
    return p;
  }
  const double gauss = normal_cdf((hi - mean) / sigma) - normal_cdf((lo - mean) / sigma);
  if (kind == BaseKind::Gaussian1d) return gauss;
  const double overlap = std::max(0.0, std::min(hi, bump_start + 1.0) - std::max(lo, bump_start));
  return (1.0 - beta) * gauss + beta * overlap;
}

double BaseDistribution::set_probability(SetFamily family, const Eigen::Ref<const Eigen::RowVectorXd>& geometry) const {
  if (family == SetFamily::Balls) {
    if (geometry.size() != 2) throw Error(ErrorCode::InvalidArgument, "exact set probabilities are one-dimensional");
    return interval_probability(geometry(0) - geometry(1), geometry(0) + geometry(1));
  }
  if (geometry.size() != 2) throw Error(ErrorCode::InvalidArgument, "exact set probabilities are one-dimensional");
  return interval_probability(geometry(0), geometry(1));
}

BaseSet gen_bases(const BaseSpec& spec, int num_classes, std::uint64_t seed) {
  if (num_classes < 2) throw Error(ErrorCode::InvalidArgument, "need at least two base distributions");
  const auto L = static_cast<std::size_t>(num_classes);
  BaseSet out;
  Rng rng(seed);

  if (spec.kind == BaseKind::DiscreteSeparable) {
    const int atoms = spec.atoms > 0 ? spec.atoms : 2 * num_classes;
    if (atoms < num_classes) throw Error(ErrorCode::Infeasible, "discrete-separable needs at least L atoms");
    const int shared = atoms - num_classes;
    for (std::size_t j = 0; j < L; ++j) {
      BaseDistribution b;
      b.kind = BaseKind::DiscreteSeparable;
      b.atom_positions = Eigen::VectorXd::LinSpaced(atoms, 0.0, atoms - 1.0);
      b.atom_probs = Eigen::VectorXd::Zero(atoms);
      const auto w = rng.flat_dirichlet(static_cast<std::size_t>(shared) + 1);
      b.atom_probs(static_cast<Eigen::Index>(j)) = w[0];
      for (int s = 0; s < shared; ++s) b.atom_probs(num_classes + s) = w[static_cast<std::size_t>(s) + 1];
      out.bases.push_back(b);
    }
    out.separable = true;
    return out;
  }

  if (spec.sigma <= 0.0) throw Error(ErrorCode::Infeasible, "sigma must be positive");
  std::vector<double> means = spec.means;
  if (means.empty()) {
    for (std::size_t j = 0; j < L; ++j) means.push_back(spec.spacing * static_cast<double>(j));
  }
  if (means.size() != L) throw Error(ErrorCode::Infeasible, "one mean per class is required");

  std::vector<double> starts = spec.bump_starts;
  if (spec.kind == BaseKind::GaussianBump) {
    if (spec.beta <= 0.0 || spec.beta >= 1.0) throw Error(ErrorCode::Infeasible, "beta must lie in (0, 1)");
    const double hi = *std::max_element(means.begin(), means.end()) + 10.0 * spec.sigma;
    const double lo = *std::min_element(means.begin(), means.end()) - 10.0 * spec.sigma;
    if (starts.empty()) {
      for (std::size_t j = 0; j < L; ++j) starts.push_back(hi + 1.0 + 2.0 * static_cast<double>(j));
    }
    if (starts.size() != L) throw Error(ErrorCode::Infeasible, "one bump per class is required");
    std::vector<double> sorted = starts;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t j = 0; j < L; ++j) {
      if (sorted[j] < hi && sorted[j] + 1.0 > lo) throw Error(ErrorCode::Infeasible, "bump within 10 sigma of a mean");
      if (j > 0 && sorted[j] < sorted[j - 1] + 1.0) throw Error(ErrorCode::Infeasible, "bump intervals overlap");
    }
  }

  for (std::size_t j = 0; j < L; ++j) {
    BaseDistribution b;
    b.kind = spec.kind;
    b.mean = means[j];
    b.sigma = spec.sigma;
    if (spec.kind == BaseKind::GaussianBump) {
      b.beta = spec.beta;
      b.bump_start = starts[j];
    }
    out.bases.push_back(b);
  }
  out.separable = spec.kind == BaseKind::GaussianBump;
  return out;
}

double condition_number(const Eigen::MatrixXd& m) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
  const auto& sv = svd.singularValues();
  const Eigen::Index k = std::min(m.rows(), m.cols());
  if (k == 0 || sv(k - 1) <= 0.0) return std::numeric_limits<double>::infinity();
  return sv(0) / sv(k - 1);
}

namespace {

bool well_conditioned(const Eigen::MatrixXd& m, const MixingOptions& options) {
  return condition_number(m) < options.max_condition;
}

}  // namespace

MixingMatrix gen_mixing(const MixingOptions& options) {
  Rng rng(options.seed);
  const int L = options.num_classes;
  if (L < 1) throw Error(ErrorCode::InvalidArgument, "need at least one class");

  switch (options.mode) {
    case MixingMode::B1Background: {
      if (options.num_rows != L) throw Error(ErrorCode::NonSquare, "b1-background needs M = L");
      if (options.noise_level < 0.0 || options.noise_level >= 1.0) {
        throw Error(ErrorCode::InvalidArgument, "noise level must lie in [0, 1)");
      }
      MixtureProportion c = MixtureProportion::uniform(L);
      if (options.random_center) {
        const auto w = rng.flat_dirichlet(static_cast<std::size_t>(L));
        c = MixtureProportion(Eigen::Map<const Eigen::VectorXd>(w.data(), L));
      }
      std::vector<double> gammas(static_cast<std::size_t>(L), options.noise_level);
      if (options.random_gamma)
        for (auto& g : gammas) g = options.noise_level * rng.uniform();
      return common_background_noise(c, gammas);
    }
    case MixingMode::FullRank: {
      const int M = options.num_rows;
      if (M < L) throw Error(ErrorCode::Infeasible, "full-rank needs M >= L");
      for (int attempt = 0; attempt < options.max_attempts; ++attempt) {
        Eigen::MatrixXd m(M, L);
        for (int i = 0; i < M; ++i) {
          const auto w = rng.flat_dirichlet(static_cast<std::size_t>(L));
          for (int j = 0; j < L; ++j) m(i, j) = w[static_cast<std::size_t>(j)];
        }
        if (well_conditioned(m, options)) return MixingMatrix(m);
      }
      throw Error(ErrorCode::Infeasible, "no well-conditioned full-rank matrix found");
    }
    case MixingMode::PartialLabel: {
      if (!options.pattern) throw Error(ErrorCode::Infeasible, "partial-label mode needs a pattern");
      const auto& s = *options.pattern;
      if (!s.has_unique_columns()) throw Error(ErrorCode::Infeasible, "pattern has duplicate columns");
      if (s.has_zero_column()) throw Error(ErrorCode::Infeasible, "pattern has a zero column");
      const Eigen::Index M = s.rows();
      const Eigen::Index cols = s.cols();
      const int attempts = options.fill == FillMode::Uniform ? 1 : options.max_attempts;
      for (int attempt = 0; attempt < attempts; ++attempt) {
        Eigen::MatrixXd m = Eigen::MatrixXd::Zero(M, cols);
        for (Eigen::Index i = 0; i < M; ++i) {
          std::vector<Eigen::Index> ones;
          for (Eigen::Index j = 0; j < cols; ++j)
            if (s(i, j)) ones.push_back(j);
          if (options.fill == FillMode::Uniform) {
            for (auto j : ones) m(i, j) = 1.0 / static_cast<double>(ones.size());
          } else {
            const auto w = rng.flat_dirichlet(ones.size());
            for (std::size_t k = 0; k < ones.size(); ++k) m(i, ones[k]) = w[k];
          }
        }
        if (well_conditioned(m, options)) return MixingMatrix(m);
      }
      throw Error(ErrorCode::Infeasible, "pattern admits no well-conditioned full column rank fill");
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown mixing mode");
}

Eigen::VectorXd ProblemInstance::base_probabilities(int j, const CandidateFamily& family) const {
  const auto& base = bases.bases.at(static_cast<std::size_t>(j));
  return family.measure([&base](SetFamily f, const Eigen::Ref<const Eigen::RowVectorXd>& g) {
    return base.set_probability(f, g);
  });
}

ProblemInstance sample_instance(const ProblemInstance& templ, const std::vector<std::size_t>& n_per_row,
                                std::uint64_t seed) {
  if (static_cast<Eigen::Index>(n_per_row.size()) != templ.mixing.rows()) {
    throw Error(ErrorCode::CountMismatch, "one sample size per mixing row is required");
  }
  if (static_cast<Eigen::Index>(templ.bases.bases.size()) != templ.mixing.cols()) {
    throw Error(ErrorCode::CountMismatch, "one base distribution per class is required");
  }
  ProblemInstance out = templ;
  out.seed = seed;
  out.samples.clear();
  out.components.clear();
  for (Eigen::Index i = 0; i < templ.mixing.rows(); ++i) {
    const std::size_t n = n_per_row[static_cast<std::size_t>(i)];
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "sample sizes must be positive");
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(i)));
    const auto& w = templ.mixing.row(i).weights();
    const std::vector<double> weights(w.data(), w.data() + w.size());
    PointMatrix pts(static_cast<Eigen::Index>(n), 1);
    std::vector<int> comps(n);
    for (std::size_t k = 0; k < n; ++k) {
      const auto c = rng.categorical(weights);
      comps[k] = static_cast<int>(c);
      pts(static_cast<Eigen::Index>(k), 0) = templ.bases.bases[c].sample(rng);
    }
    out.samples.emplace_back(std::move(pts), static_cast<int>(i));
    out.components.push_back(std::move(comps));
  }
  return out;
}

std::map<std::string, ProblemInstance> builtin_instances() {
  const BaseSet bases = gen_bases(BaseSpec{}, 3, 0);
  auto make = [&](const std::string& name, const Eigen::MatrixXd& pi, bool with_labels) {
    ProblemInstance inst;
    inst.name = name;
    inst.bases = bases;
    inst.mixing = MixingMatrix(pi);
    if (with_labels) inst.partial_labels = PartialLabelMatrix::from_mixing(inst.mixing);
    return inst;
  };
  std::map<std::string, ProblemInstance> out;
  Eigen::MatrixXd eq3(3, 3);
  eq3 << 0.5, 0.5, 0, 0.5, 0, 0.5, 0, 0.5, 0.5;
  Eigen::MatrixXd eq4(3, 3);
  eq4 << 0.1, 0.9, 0, 0.9, 0, 0.1, 0, 0.1, 0.9;
  Eigen::MatrixXd dup(3, 3);
  dup << 0.5, 0.5, 0, 0.3, 0.7, 0, 0, 0, 1;
  out.emplace("eq3", make("eq3", eq3, true));
  out.emplace("eq4", make("eq4", eq4, true));
  out.emplace("bg-gamma-0.3",
              make("bg-gamma-0.3", common_background_noise(MixtureProportion::uniform(3), {0.3, 0.3, 0.3}).matrix(),
                   false));
  out.emplace("dup-columns", make("dup-columns", dup, true));
  return out;
}

ProblemInstance builtin_instance(const std::string& name) {
  auto all = builtin_instances();
  auto it = all.find(name);
  if (it == all.end()) throw Error(ErrorCode::Config, "unknown instance '" + name + "'");
  return it->second;
}

}  // namespace mcm
