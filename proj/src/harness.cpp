#include "mcm/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>
#include <thread>

#include "mcm/error.hpp"
#include "mcm/hat.hpp"
#include "mcm/io.hpp"
#include "mcm/population.hpp"
#include "mcm/synthesis.hpp"

namespace mcm {

std::string to_string(Task t) {
  switch (t) {
    case Task::Multiclass: return "multiclass";
    case Task::Demix: return "demix";
    case Task::Partial: return "partial";
  }
  return "?";
}

std::string to_string(RunMode m) { return m == RunMode::Exact ? "exact" : "hat"; }

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
bool parse_number(const std::string& s, T& out) {
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && p == end;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream in(s);
  while (std::getline(in, item, sep)) out.push_back(trim(item));
  return out;
}

bool parse_bool(const std::string& s, bool& out) {
  if (s == "true" || s == "1" || s == "yes") return out = true, true;
  if (s == "false" || s == "0" || s == "no") return out = false, true;
  return false;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  for (const auto& part : split(text, ',')) {
    if (part.empty()) continue;
    const auto dots = part.find("..");
    if (dots == std::string::npos) {
      std::uint64_t v = 0;
      if (!parse_number(part, v)) throw Error(ErrorCode::Config, "bad seed '" + part + "'");
      out.push_back(v);
      continue;
    }
    std::uint64_t lo = 0, hi = 0;
    if (!parse_number(trim(part.substr(0, dots)), lo) || !parse_number(trim(part.substr(dots + 2)), hi) || hi < lo)
      throw Error(ErrorCode::Config, "bad seed range '" + part + "'");
    for (std::uint64_t v = lo; v <= hi; ++v) out.push_back(v);
  }
  if (out.empty()) throw Error(ErrorCode::Config, "empty seed list");
  return out;
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::vector<std::string> problems;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  auto bad = [&](const std::string& key, const std::string& why) {
    problems.push_back("line " + std::to_string(lineno) + ": " + key + ": " + why);
  };
  while (std::getline(in, line)) {
    ++lineno;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      problems.push_back("line " + std::to_string(lineno) + ": expected key = value");
      continue;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "task") {
      if (val == "multiclass") c.task = Task::Multiclass;
      else if (val == "demix") c.task = Task::Demix;
      else if (val == "partial") c.task = Task::Partial;
      else bad(key, "expected multiclass, demix or partial");
    } else if (key == "mode") {
      if (val == "exact") c.mode = RunMode::Exact;
      else if (val == "hat") c.mode = RunMode::Hat;
      else bad(key, "expected exact or hat");
    } else if (key == "instance") {
      if (val.empty()) bad(key, "empty");
      c.instance = val;
    } else if (key == "n_per_row") {
      c.n_per_row.clear();
      for (const auto& part : split(val, ',')) {
        std::size_t n = 0;
        if (!parse_number(part, n) || n == 0) {
          bad(key, "expected positive integers");
          break;
        }
        c.n_per_row.push_back(n);
      }
    } else if (key == "family") {
      try {
        c.vc.family = parse_set_family(val);
      } catch (const Error&) {
        bad(key, "expected intervals, rectangles or balls");
      }
    } else if (key == "dimension") {
      if (!parse_number(val, c.vc.dimension) || c.vc.dimension < 1) bad(key, "expected a positive integer");
    } else if (key == "anchor_budget") {
      if (!parse_number(val, c.vc.anchor_budget)) bad(key, "expected a non-negative integer");
    } else if (key == "epsilon") {
      if (!parse_number(val, c.epsilon) || !(c.epsilon >= 0)) bad(key, "expected a non-negative number");
    } else if (key == "eps_scale") {
      if (!parse_number(val, c.eps_scale) || !(c.eps_scale >= 0)) bad(key, "expected a non-negative number");
    } else if (key == "eps_override") {
      double v = 0;
      if (!parse_number(val, v) || !(v >= 0)) bad(key, "expected a non-negative number");
      else c.eps_override = v;
    } else if (key == "max_face_iter") {
      if (!parse_number(val, c.max_face_iter) || c.max_face_iter < 1) bad(key, "expected a positive integer");
    } else if (key == "max_k") {
      if (!parse_number(val, c.max_k) || c.max_k < 1) bad(key, "expected a positive integer");
    } else if (key == "seeds" || key == "seed") {
      try {
        c.seeds = parse_seed_list(val);
      } catch (const Error& e) {
        bad(key, e.what());
      }
    } else if (key == "output") {
      c.output = val;
    } else if (key == "success_threshold") {
      double v = 0;
      if (!parse_number(val, v) || !(v >= 0)) bad(key, "expected a non-negative number");
      else c.success_threshold = v;
    } else if (key == "record_timing") {
      if (!parse_bool(val, c.record_timing)) bad(key, "expected true or false");
    } else if (key == "jobs") {
      if (!parse_number(val, c.jobs) || c.jobs < 1) bad(key, "expected a positive integer");
    } else {
      bad(key, "unknown key");
    }
  }
  if (!problems.empty()) {
    std::string msg = "invalid configuration";
    for (const auto& p : problems) msg += "\n  " + p;
    throw Error(ErrorCode::Config, msg);
  }
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Config, "cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

Recovery evaluate_recovery(const Eigen::MatrixXd& error) {
  const auto L = error.rows();
  if (error.cols() != L) throw Error(ErrorCode::CountMismatch, "need as many estimates as classes");
  if (L > 10) throw Error(ErrorCode::InvalidArgument, "permutation search is limited to 10 classes");
  std::vector<int> perm(static_cast<std::size_t>(L));
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<int> best = perm;
  double best_val = std::numeric_limits<double>::infinity();
  do {
    double v = 0.0;
    for (Eigen::Index i = 0; i < L && v < best_val; ++i) v = std::max(v, error(i, perm[static_cast<std::size_t>(i)]));
    if (v < best_val) {
      best_val = v;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  Recovery r;
  r.assignment = best;
  r.per_class_error.assign(static_cast<std::size_t>(L), 0.0);
  for (Eigen::Index i = 0; i < L; ++i)
    r.per_class_error[static_cast<std::size_t>(best[static_cast<std::size_t>(i)])] =
        error(i, best[static_cast<std::size_t>(i)]);
  r.max_error = L ? best_val : 0.0;
  return r;
}

Recovery evaluate_recovery(const std::vector<MixtureProportion>& estimates, Eigen::Index num_classes) {
  const auto L = static_cast<Eigen::Index>(estimates.size());
  Eigen::MatrixXd err(L, num_classes);
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = 0; j < num_classes; ++j) {
      Eigen::VectorXd d = estimates[static_cast<std::size_t>(i)].weights();
      d(j) -= 1.0;
      err(i, j) = d.cwiseAbs().maxCoeff();
    }
  return evaluate_recovery(err);
}

Recovery evaluate_recovery(const std::vector<SignedMixture>& estimates, const std::vector<Eigen::VectorXd>& truth,
                           const CandidateFamily& family) {
  const auto L = static_cast<Eigen::Index>(estimates.size());
  Eigen::MatrixXd err(L, static_cast<Eigen::Index>(truth.size()));
  for (Eigen::Index i = 0; i < L; ++i)
    for (Eigen::Index j = 0; j < err.cols(); ++j)
      err(i, j) = sup_deviation(estimates[static_cast<std::size_t>(i)], truth[static_cast<std::size_t>(j)], family);
  return evaluate_recovery(err);
}

namespace {

ProblemInstance resolve_instance(const std::string& name) {
  auto all = builtin_instances();
  if (auto it = all.find(name); it != all.end()) return it->second;
  if (std::filesystem::is_directory(name)) return load_instance(name);
  throw Error(ErrorCode::Config, "instance '" + name + "' is neither a built-in name nor a directory");
}

bool is_identity(const std::vector<int>& a) {
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] != static_cast<int>(i)) return false;
  return true;
}

ProblemInstance checked_instance(const ExperimentConfig& c) {
  ProblemInstance inst = resolve_instance(c.instance);
  if (c.task == Task::Partial && !inst.partial_labels)
    throw Error(ErrorCode::Config, "task: partial needs an instance with partial labels");
  if (c.mode == RunMode::Hat && c.n_per_row.empty() && inst.samples.empty())
    throw Error(ErrorCode::Config, "n_per_row: required when the instance has no stored samples");
  if (!c.n_per_row.empty() && static_cast<Eigen::Index>(c.n_per_row.size()) != inst.mixing.rows())
    throw Error(ErrorCode::Config, "n_per_row: needs one size per contaminated source");
  return inst;
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

void run_exact(const ExperimentConfig& c, const ProblemInstance& inst, std::uint64_t seed, SeedOutcome& out) {
  const auto& rows = inst.mixing.row_list();
  const auto L = inst.mixing.cols();
  std::vector<MixtureProportion> est;
  bool ordered = true;
  switch (c.task) {
    case Task::Multiclass:
      est = multiclass_decontaminate(rows);
      break;
    case Task::Demix: {
      DemixOptions opt;
      opt.max_face_iter = c.max_face_iter;
      auto r = inst.mixing.rows() > L ? nonsquare_demix(rows, L, seed, opt) : demix(rows, seed, opt);
      est = r.vertices;
      out.face_iterations = r.iterations_used;
      ordered = false;
      break;
    }
    case Task::Partial: {
      PartialLabelOptions opt;
      opt.max_k = c.max_k;
      auto r = partial_label_decontaminate(*inst.partial_labels, rows, seed, opt);
      est = r.vertices;
      out.permutation = r.permutation.indices();
      break;
    }
  }
  for (const auto& e : est) out.estimates.push_back(as_vector(e.weights()));
  out.recovery = evaluate_recovery(est, L);
  out.class_order_correct = !ordered || is_identity(out.recovery.assignment);
}

void run_hat(const ExperimentConfig& c, const ProblemInstance& templ, std::uint64_t seed, SeedOutcome& out) {
  const ProblemInstance inst = c.n_per_row.empty() ? templ : sample_instance(templ, c.n_per_row, seed);
  HatConfig hc;
  hc.face_epsilon = c.epsilon;
  hc.eps_scale = c.eps_scale;
  hc.eps_override = c.eps_override;
  hc.max_face_iter = c.max_face_iter;
  hc.seed = seed;
  HatContext ctx(inst.samples, c.vc, hc);
  out.eps_n = ctx.eps_n();
  HatResult r;
  bool ordered = true;
  switch (c.task) {
    case Task::Multiclass:
      r = multiclass_hat(ctx);
      break;
    case Task::Demix:
      r = demix_hat(ctx, hc, inst.num_classes());
      ordered = false;
      break;
    case Task::Partial:
      r = partial_label_hat(*inst.partial_labels, ctx, hc);
      break;
  }
  out.kappa_hats = r.diagnostics.kappa_hats;
  out.face_iterations = r.diagnostics.face_iterations;
  out.max_order = r.diagnostics.max_order;
  if (r.permutation) out.permutation = r.permutation->indices();
  for (const auto& e : r.estimates) {
    out.estimates.push_back(as_vector(e.coefficients()));
    out.orders.push_back(e.order());
  }
  std::vector<Eigen::VectorXd> truth;
  for (int j = 0; j < inst.num_classes(); ++j) truth.push_back(inst.base_probabilities(j, ctx.family()));
  out.recovery = evaluate_recovery(r.estimates, truth, ctx.family());
  if (c.task == Task::Partial && !r.permutation) {
    out.status = "NoPermutation";
    out.message = "vertex test found no matching permutation";
    return;
  }
  out.class_order_correct = !ordered || is_identity(out.recovery.assignment);
}

}  // namespace

SeedOutcome run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  SeedOutcome out;
  out.seed = seed;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const ProblemInstance inst = checked_instance(config);
    if (config.mode == RunMode::Exact) run_exact(config, inst, seed, out);
    else run_hat(config, inst, seed, out);
  } catch (const Error& e) {
    out.status = std::string(to_string(e.code()));
    out.message = e.what();
  } catch (const std::exception& e) {
    out.status = "Exception";
    out.message = e.what();
  }
  if (config.record_timing)
    out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  out.success = out.status == "ok" && out.class_order_correct && out.recovery.max_error <= config.threshold();
  return out;
}

RecoveryReport run_experiment(const ExperimentConfig& config) {
  checked_instance(config);
  RecoveryReport rep;
  rep.config = config;
  rep.seeds.resize(config.seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next++) < config.seeds.size();) rep.seeds[k] = run_seed(config, config.seeds[k]);
  };
  const int jobs = std::max(1, std::min<int>(config.jobs, static_cast<int>(config.seeds.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < jobs; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int ok = 0, succ = 0;
  double sum = 0.0;
  for (const auto& s : rep.seeds) {
    if (s.success) ++succ;
    if (s.status != "ok") {
      ++rep.failed_runs;
      continue;
    }
    ++ok;
    sum += s.recovery.max_error;
    rep.max_deviation = std::max(rep.max_deviation, s.recovery.max_error);
  }
  rep.mean_deviation = ok ? sum / ok : std::numeric_limits<double>::quiet_NaN();
  if (!ok) rep.max_deviation = std::numeric_limits<double>::quiet_NaN();
  rep.success_rate = rep.seeds.empty() ? 0.0 : static_cast<double>(succ) / static_cast<double>(rep.seeds.size());
  return rep;
}

namespace {

Json config_json(const ExperimentConfig& c) {
  Json j;
  j["task"] = to_string(c.task);
  j["mode"] = to_string(c.mode);
  j["instance"] = c.instance;
  j["n_per_row"] = c.n_per_row;
  j["family"] = to_string(c.vc.family);
  j["dimension"] = c.vc.dimension;
  j["anchor_budget"] = c.vc.anchor_budget;
  j["epsilon"] = c.epsilon;
  j["eps_scale"] = c.eps_scale;
  j["eps_override"] = c.eps_override ? Json(*c.eps_override) : Json(nullptr);
  j["max_face_iter"] = c.max_face_iter;
  j["max_k"] = c.max_k;
  j["seeds"] = c.seeds;
  j["success_threshold"] = c.threshold();
  return j;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

std::string report_json(const RecoveryReport& rep) {
  Json j;
  j["format_version"] = 1;
  j["config"] = config_json(rep.config);
  Json seeds = Json::array();
  for (const auto& s : rep.seeds) {
    Json e;
    e["seed"] = s.seed;
    e["status"] = s.status;
    if (!s.message.empty()) e["message"] = s.message;
    e["success"] = s.success;
    if (s.status == "ok" || !s.recovery.assignment.empty()) {
      e["assignment"] = s.recovery.assignment;
      e["per_class_error"] = s.recovery.per_class_error;
      e["max_error"] = s.recovery.max_error;
      e["class_order_correct"] = s.class_order_correct;
    }
    e["permutation"] = s.permutation ? Json(*s.permutation) : Json(nullptr);
    if (rep.config.mode == RunMode::Hat) {
      e["eps_n"] = s.eps_n;
      e["kappa_hats"] = s.kappa_hats;
      e["max_order"] = s.max_order;
    }
    e["face_iterations"] = s.face_iterations;
    e["estimates"] = s.estimates;
    if (!s.orders.empty()) e["orders"] = s.orders;
    if (rep.config.record_timing) e["wall_seconds"] = s.wall_seconds;
    seeds.push_back(std::move(e));
  }
  j["seeds"] = std::move(seeds);
  j["aggregate"] = {{"mean_deviation", number_or_null(rep.mean_deviation)},
                    {"max_deviation", number_or_null(rep.max_deviation)},
                    {"success_rate", rep.success_rate},
                    {"failed_runs", rep.failed_runs},
                    {"num_seeds", rep.seeds.size()}};
  return j.dump(2) + "\n";
}

std::string report_csv(const RecoveryReport& rep) {
  std::ostringstream out;
  out << "# mcm recovery report v1\n";
  out << "seed,class,status,estimate,deviation,success\n";
  out.precision(17);
  for (const auto& s : rep.seeds) {
    const auto& r = s.recovery;
    if (r.per_class_error.empty()) {
      out << s.seed << ",," << s.status << ",,," << 0 << "\n";
      continue;
    }
    std::vector<int> est_of(r.per_class_error.size(), -1);
    for (std::size_t i = 0; i < r.assignment.size(); ++i) est_of[static_cast<std::size_t>(r.assignment[i])] = static_cast<int>(i);
    for (std::size_t j = 0; j < r.per_class_error.size(); ++j)
      out << s.seed << "," << j << "," << s.status << "," << est_of[j] << "," << r.per_class_error[j] << ","
          << (s.success ? 1 : 0) << "\n";
  }
  return out.str();
}

void write_report(const RecoveryReport& report, const std::string& output) {
  auto put = [](const std::string& path, const std::string& body) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream f(p, std::ios::binary);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + path);
    f << body;
  };
  put(output + ".json", report_json(report));
  put(output + ".csv", report_csv(report));
}

}  // namespace mcm
