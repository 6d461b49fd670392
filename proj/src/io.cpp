#include "mcm/io.hpp"

#include <array>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include "mcm/error.hpp"

namespace mcm {

namespace fs = std::filesystem;

namespace {

Json vector_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from(const Json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
  return v;
}

Json require(const Json& j, const char* key) {
  if (!j.contains(key)) throw Error(ErrorCode::Io, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace

Json to_json(const MixtureProportion& p) {
  return Json{{"L", p.size()}, {"rows", Json::array({vector_json(p.weights())})}};
}

Json to_json(const MixingMatrix& m) {
  Json rows = Json::array();
  for (const auto& r : m.row_list()) rows.push_back(vector_json(r.weights()));
  return Json{{"L", m.cols()}, {"rows", rows}};
}

MixtureProportion proportion_from_json(const Json& j) {
  const auto m = mixing_from_json(j);
  if (m.rows() != 1) throw Error(ErrorCode::Io, "expected a single row");
  return m.row(0);
}

MixingMatrix mixing_from_json(const Json& j) {
  const auto L = require(j, "L").get<Eigen::Index>();
  std::vector<MixtureProportion> rows;
  for (const auto& r : require(j, "rows")) {
    if (static_cast<Eigen::Index>(r.size()) != L) throw Error(ErrorCode::LengthMismatch, "row length differs from L");
    rows.emplace_back(vector_from(r));
  }
  return MixingMatrix(std::move(rows));
}

Json to_json(const PartialLabelMatrix& s) { return Json(s.entries()); }

PartialLabelMatrix partial_labels_from_json(const Json& j) {
  return PartialLabelMatrix(j.get<std::vector<std::vector<int>>>());
}

Json to_json(const DemixResult& r, const std::optional<Permutation>& permutation) {
  Json vertices = Json::array();
  for (const auto& v : r.vertices) vertices.push_back(vector_json(v.weights()));
  return Json{{"vertices", vertices},
              {"permutation", permutation ? Json(permutation->indices()) : Json(nullptr)},
              {"iterations", r.iterations_used}};
}

Json to_json(const SignedMixture& m) {
  return Json{{"coefficients", vector_json(m.coefficients())}, {"order", m.order()}};
}

SignedMixture signed_mixture_from_json(const Json& j) {
  return SignedMixture(vector_from(require(j, "coefficients")), require(j, "order").get<int>());
}

Json to_json(const HatResult& r) {
  Json estimates = Json::array();
  for (const auto& e : r.estimates) estimates.push_back(to_json(e));
  const auto& d = r.diagnostics;
  Json diag{{"eps_n", d.eps_n},
            {"kappa_hats", d.kappa_hats},
            {"face_iterations", d.face_iterations},
            {"orders", d.orders},
            {"max_order", d.max_order},
            {"pinned_classes", d.pinned_classes}};
  if (d.vertex_kappa) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < d.vertex_kappa->rows(); ++i) rows.push_back(vector_json(d.vertex_kappa->row(i)));
    diag["vertex_kappa"] = rows;
  } else {
    diag["vertex_kappa"] = nullptr;
  }
  return Json{{"estimates", estimates},
              {"permutation", r.permutation ? Json(r.permutation->indices()) : Json(nullptr)},
              {"diagnostics", diag}};
}

HatResult hat_result_from_json(const Json& j) {
  HatResult r;
  for (const auto& e : require(j, "estimates")) r.estimates.push_back(signed_mixture_from_json(e));
  const auto& perm = require(j, "permutation");
  if (!perm.is_null()) r.permutation = Permutation(perm.get<std::vector<int>>());
  const auto d = require(j, "diagnostics");
  r.diagnostics.eps_n = d.at("eps_n").get<double>();
  r.diagnostics.kappa_hats = d.at("kappa_hats").get<std::vector<double>>();
  r.diagnostics.face_iterations = d.at("face_iterations").get<std::vector<int>>();
  r.diagnostics.orders = d.at("orders").get<std::vector<int>>();
  r.diagnostics.max_order = d.at("max_order").get<int>();
  r.diagnostics.pinned_classes = d.at("pinned_classes").get<std::vector<int>>();
  if (!d.at("vertex_kappa").is_null()) {
    const auto& rows = d.at("vertex_kappa");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), rows.empty() ? 0 : static_cast<Eigen::Index>(rows[0].size()));
    for (std::size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = vector_from(rows[i]).transpose();
    r.diagnostics.vertex_kappa = m;
  }
  return r;
}

Json to_json(const BaseDistribution& b) {
  Json j{{"kind", to_string(b.kind)}};
  if (b.kind == BaseKind::DiscreteSeparable) {
    j["atoms"] = vector_json(b.atom_positions);
    j["probs"] = vector_json(b.atom_probs);
  } else {
    j["mean"] = b.mean;
    j["sigma"] = b.sigma;
    if (b.kind == BaseKind::GaussianBump) {
      j["beta"] = b.beta;
      j["bump_start"] = b.bump_start;
    }
  }
  return j;
}

BaseDistribution base_from_json(const Json& j) {
  BaseDistribution b;
  b.kind = parse_base_kind(require(j, "kind").get<std::string>());
  if (b.kind == BaseKind::DiscreteSeparable) {
    b.atom_positions = vector_from(require(j, "atoms"));
    b.atom_probs = vector_from(require(j, "probs"));
  } else {
    b.mean = require(j, "mean").get<double>();
    b.sigma = require(j, "sigma").get<double>();
    if (b.kind == BaseKind::GaussianBump) {
      b.beta = require(j, "beta").get<double>();
      b.bump_start = require(j, "bump_start").get<double>();
    }
  }
  return b;
}

namespace {

bool parse_row(const std::string& line, std::vector<double>& out) {
  out.clear();
  std::size_t pos = 0;
  while (pos <= line.size()) {
    std::size_t end = line.find(',', pos);
    if (end == std::string::npos) end = line.size();
    std::size_t a = pos, b = end;
    while (a < b && (line[a] == ' ' || line[a] == '\t')) ++a;
    while (b > a && (line[b - 1] == ' ' || line[b - 1] == '\t' || line[b - 1] == '\r')) --b;
    double v = 0.0;
    const auto res = std::from_chars(line.data() + a, line.data() + b, v);
    if (a == b || res.ec != std::errc() || res.ptr != line.data() + b) return false;
    out.push_back(v);
    pos = end + 1;
  }
  return !out.empty();
}

std::string format_double(double v) {
  std::array<char, 32> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

}  // namespace

SampleSet read_sample_csv(const fs::path& path, int source_label) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  std::vector<double> vals;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r" || line[0] == '#') continue;
    if (!parse_row(line, vals)) {
      if (rows.empty() && line_no == 1) continue;  // header
      throw Error(ErrorCode::Io, path.string() + ":" + std::to_string(line_no) + ": not a numeric row");
    }
    if (!rows.empty() && vals.size() != rows.front().size()) {
      throw Error(ErrorCode::LengthMismatch, path.string() + ":" + std::to_string(line_no) + ": column count changed");
    }
    rows.push_back(vals);
  }
  if (rows.empty()) throw Error(ErrorCode::Io, path.string() + ": no data rows");
  PointMatrix p(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t k = 0; k < rows[i].size(); ++k) p(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
  return SampleSet(std::move(p), source_label);
}

void write_sample_csv(const fs::path& path, const SampleSet& s) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  for (Eigen::Index k = 0; k < s.dim(); ++k) out << (k ? "," : "") << "x" << k;
  out << '\n';
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    for (Eigen::Index k = 0; k < s.dim(); ++k) out << (k ? "," : "") << format_double(s.points(i, k));
    out << '\n';
  }
}

namespace {

void put_u32(std::ostream& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xFF));
}

void put_f64(std::ostream& out, double d) {
  std::uint64_t v = 0;
  std::memcpy(&v, &d, sizeof v);
  for (int b = 0; b < 8; ++b) out.put(static_cast<char>((v >> (8 * b)) & 0xFF));
}

std::uint64_t get_le(std::istream& in, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) {
    const int c = in.get();
    if (c == EOF) throw Error(ErrorCode::Io, "truncated binary sample file");
    v |= static_cast<std::uint64_t>(static_cast<unsigned char>(c)) << (8 * b);
  }
  return v;
}

}  // namespace

SampleSet read_sample_binary(const fs::path& path, int source_label) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, "MCMS", 4) != 0) throw Error(ErrorCode::Io, path.string() + ": bad magic");
  const auto n = static_cast<Eigen::Index>(get_le(in, 4));
  const auto d = static_cast<Eigen::Index>(get_le(in, 4));
  PointMatrix p(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index k = 0; k < d; ++k) {
      const std::uint64_t bits = get_le(in, 8);
      double v = 0.0;
      std::memcpy(&v, &bits, sizeof v);
      p(i, k) = v;
    }
  }
  return SampleSet(std::move(p), source_label);
}

void write_sample_binary(const fs::path& path, const SampleSet& s) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
  out.write("MCMS", 4);
  put_u32(out, static_cast<std::uint32_t>(s.size()));
  put_u32(out, static_cast<std::uint32_t>(s.dim()));
  for (Eigen::Index i = 0; i < s.size(); ++i)
    for (Eigen::Index k = 0; k < s.dim(); ++k) put_f64(out, s.points(i, k));
}

Json instance_to_json(const ProblemInstance& inst) {
  Json bases = Json::array();
  for (const auto& b : inst.bases.bases) bases.push_back(to_json(b));
  Json j{{"name", inst.name},
         {"seed", inst.seed},
         {"bases", bases},
         {"separable", inst.bases.separable},
         {"mixing", to_json(inst.mixing)},
         {"partial_labels", inst.partial_labels ? to_json(*inst.partial_labels) : Json(nullptr)}};
  Json sizes = Json::array();
  for (const auto& s : inst.samples) sizes.push_back(s.size());
  j["sample_sizes"] = sizes;
  return j;
}

ProblemInstance instance_from_json(const Json& j) {
  ProblemInstance inst;
  inst.name = j.value("name", std::string{});
  inst.seed = j.value("seed", std::uint64_t{0});
  for (const auto& b : require(j, "bases")) inst.bases.bases.push_back(base_from_json(b));
  inst.bases.separable = j.value("separable", false);
  inst.mixing = mixing_from_json(require(j, "mixing"));
  if (j.contains("partial_labels") && !j.at("partial_labels").is_null()) {
    inst.partial_labels = partial_labels_from_json(j.at("partial_labels"));
    if (!inst.partial_labels->consistent_with(inst.mixing)) {
      throw Error(ErrorCode::Io, "partial labels disagree with the mixing matrix");
    }
  }
  return inst;
}

void save_instance(const fs::path& dir, const ProblemInstance& inst, bool binary_samples) {
  fs::create_directories(dir / "samples");
  Json j = instance_to_json(inst);
  j["sample_format"] = binary_samples ? "binary" : "csv";
  {
    std::ofstream out(dir / "instance.json");
    if (!out) throw Error(ErrorCode::Io, "cannot write " + (dir / "instance.json").string());
    out << j.dump(2) << '\n';
  }
  for (std::size_t i = 0; i < inst.samples.size(); ++i) {
    const auto stem = dir / "samples" / ("row_" + std::to_string(i));
    if (binary_samples) {
      write_sample_binary(stem.string() + ".bin", inst.samples[i]);
    } else {
      write_sample_csv(stem.string() + ".csv", inst.samples[i]);
    }
  }
}

ProblemInstance load_instance(const fs::path& dir) {
  std::ifstream in(dir / "instance.json");
  if (!in) throw Error(ErrorCode::Io, "cannot open " + (dir / "instance.json").string());
  Json j;
  try {
    in >> j;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Io, std::string("instance.json: ") + e.what());
  }
  ProblemInstance inst = instance_from_json(j);
  const bool binary = j.value("sample_format", std::string("csv")) == "binary";
  const auto sizes = j.value("sample_sizes", std::vector<std::size_t>{});
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const auto stem = dir / "samples" / ("row_" + std::to_string(i));
    inst.samples.push_back(binary ? read_sample_binary(stem.string() + ".bin", static_cast<int>(i))
                                  : read_sample_csv(stem.string() + ".csv", static_cast<int>(i)));
  }
  return inst;
}

}  // namespace mcm
