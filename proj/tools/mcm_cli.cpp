#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mcm/error.hpp"
#include "mcm/harness.hpp"
#include "mcm/io.hpp"
#include "mcm/synthesis.hpp"

using namespace mcm;

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 1;
constexpr int kAllSeedsFailed = 2;

std::vector<std::size_t> parse_sizes(const std::string& text) {
  std::vector<std::size_t> out;
  std::stringstream in(text);
  std::string part;
  while (std::getline(in, part, ',')) out.push_back(std::stoul(part));
  return out;
}

int list_instances() {
  for (const auto& [name, inst] : builtin_instances()) {
    std::cout << name << "  L=" << inst.num_classes() << " M=" << inst.num_rows()
              << (inst.partial_labels ? "  partial labels" : "") << "\n";
    const Eigen::MatrixXd pi = inst.mixing.matrix();
    for (Eigen::Index i = 0; i < pi.rows(); ++i) {
      std::cout << "   ";
      for (Eigen::Index j = 0; j < pi.cols(); ++j) std::cout << " " << pi(i, j);
      std::cout << "\n";
    }
  }
  return kOk;
}

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  return Json::parse(in);
}

// Accepts a run report seed entry, a HatResult, or {"vertices": [...]}.
int evaluate(const std::string& instance_path, const std::string& estimates_path, const VCClassSpec& vc,
             const std::string& out) {
  auto all = builtin_instances();
  ProblemInstance inst = all.count(instance_path) ? all.at(instance_path) : load_instance(instance_path);
  Json est = load_json(estimates_path);
  Recovery rec;
  if (est.contains("vertices")) {
    std::vector<MixtureProportion> v;
    for (const auto& row : est["vertices"]) {
      const auto w = row.get<std::vector<double>>();
      v.emplace_back(Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size())));
    }
    rec = evaluate_recovery(v, inst.num_classes());
  } else {
    std::vector<SignedMixture> v;
    if (est.contains("estimates") && est.contains("diagnostics")) {
      v = hat_result_from_json(est).estimates;
    } else {
      const auto rows = est.at("estimates").get<std::vector<std::vector<double>>>();
      const auto orders = est.at("orders").get<std::vector<int>>();
      for (std::size_t i = 0; i < rows.size(); ++i)
        v.emplace_back(Eigen::Map<const Eigen::VectorXd>(rows[i].data(), static_cast<Eigen::Index>(rows[i].size())),
                       orders.at(i));
    }
    if (inst.samples.empty()) throw Error(ErrorCode::Config, "hat estimates need an instance directory with samples");
    const auto family = CandidateFamily::build(inst.samples, vc);
    std::vector<Eigen::VectorXd> truth;
    for (int j = 0; j < inst.num_classes(); ++j) truth.push_back(inst.base_probabilities(j, family));
    rec = evaluate_recovery(v, truth, family);
  }
  Json j{{"assignment", rec.assignment}, {"per_class_error", rec.per_class_error}, {"max_error", rec.max_error}};
  if (out.empty()) {
    std::cout << j.dump(2) << "\n";
  } else {
    std::ofstream f(out);
    if (!f) throw Error(ErrorCode::Io, "cannot write " + out);
    f << j.dump(2) << "\n";
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mixture decontamination experiments"};
  app.require_subcommand(1);

  std::string config_path, out;
  std::optional<std::uint64_t> seed;
  int jobs = 0;

  auto* gen = app.add_subcommand("generate", "Sample an instance and write it to a directory");
  std::string gen_instance = "eq3", gen_sizes;
  bool gen_binary = false;
  gen->add_option("--config", config_path, "Config file (instance, n_per_row, first seed)");
  gen->add_option("--instance", gen_instance, "Built-in template");
  gen->add_option("--n", gen_sizes, "Comma-separated sample size per source");
  gen->add_option("--seed", seed, "Sampling seed");
  gen->add_option("--out", out, "Output directory")->required();
  gen->add_flag("--binary", gen_binary, "Write samples in the binary format");

  auto* run = app.add_subcommand("run", "Run an experiment over its seeds");
  run->add_option("--config", config_path, "Config file")->required();
  run->add_option("--seed", seed, "Run this single seed instead of the configured list");
  run->add_option("--out", out, "Output prefix; overrides the config");
  run->add_option("--jobs", jobs, "Worker threads; overrides the config");

  auto* ev = app.add_subcommand("evaluate", "Match estimates to the true bases");
  std::string ev_instance, ev_estimates, ev_family = "intervals";
  std::size_t ev_budget = 0;
  ev->add_option("--instance", ev_instance, "Built-in name or instance directory")->required();
  ev->add_option("--estimates", ev_estimates, "JSON with vertices, a hat result, or a report seed entry")->required();
  ev->add_option("--family", ev_family, "Candidate family for hat estimates");
  ev->add_option("--anchor-budget", ev_budget, "Candidate budget for hat estimates");
  ev->add_option("--out", out, "Write the result here instead of stdout");

  auto* list = app.add_subcommand("list-instances", "Print the built-in templates");

  CLI11_PARSE(app, argc, argv);

  try {
    if (list->parsed()) return list_instances();
    if (ev->parsed()) {
      VCClassSpec vc;
      vc.family = parse_set_family(ev_family);
      vc.anchor_budget = ev_budget;
      return evaluate(ev_instance, ev_estimates, vc, out);
    }
    if (gen->parsed()) {
      std::vector<std::size_t> sizes = gen_sizes.empty() ? std::vector<std::size_t>{} : parse_sizes(gen_sizes);
      std::uint64_t s = 0;
      if (!config_path.empty()) {
        const auto c = load_config(config_path);
        gen_instance = c.instance;
        if (sizes.empty()) sizes = c.n_per_row;
        s = c.seeds.front();
      }
      if (seed) s = *seed;
      const auto templ = builtin_instance(gen_instance);
      if (sizes.empty()) sizes.assign(static_cast<std::size_t>(templ.num_rows()), 1000);
      save_instance(out, sample_instance(templ, sizes, s), gen_binary);
      return kOk;
    }
    ExperimentConfig c = load_config(config_path);
    if (seed) c.seeds = {*seed};
    if (!out.empty()) c.output = out;
    if (jobs > 0) c.jobs = jobs;
    if (c.output.empty()) throw Error(ErrorCode::Config, "output: no output prefix given");
    const auto report = run_experiment(c);
    write_report(report, c.output);
    std::printf("%s %s on %s: success %.3f, mean deviation %.3g, max deviation %.3g, failed runs %d/%zu\n",
                to_string(c.task).c_str(), to_string(c.mode).c_str(), c.instance.c_str(), report.success_rate,
                report.mean_deviation, report.max_deviation, report.failed_runs, report.seeds.size());
    return report.failed_runs == static_cast<int>(report.seeds.size()) ? kAllSeedsFailed : kOk;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kConfigError;
  }
}
