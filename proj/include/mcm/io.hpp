#pragma once

#include <filesystem>
#include <string>

#include "json.hpp"

#include "mcm/hat.hpp"
#include "mcm/population.hpp"
#include "mcm/simplex.hpp"
#include "mcm/synthesis.hpp"

namespace mcm {

using Json = nlohmann::json;

// {"L": int, "rows": [[...], ...]}; a single proportion is a one-row matrix.
Json to_json(const MixtureProportion& p);
Json to_json(const MixingMatrix& m);
MixtureProportion proportion_from_json(const Json& j);
MixingMatrix mixing_from_json(const Json& j);

Json to_json(const PartialLabelMatrix& s);
PartialLabelMatrix partial_labels_from_json(const Json& j);

// {"vertices": [[...]], "permutation": [ints] | null, "iterations": [...]}
Json to_json(const DemixResult& r, const std::optional<Permutation>& permutation = std::nullopt);

Json to_json(const SignedMixture& m);
SignedMixture signed_mixture_from_json(const Json& j);
Json to_json(const HatResult& r);
HatResult hat_result_from_json(const Json& j);

Json to_json(const BaseDistribution& b);
BaseDistribution base_from_json(const Json& j);

/// CSV with one point per row; a first line that does not parse as numbers
/// is taken as a header.
SampleSet read_sample_csv(const std::filesystem::path& path, int source_label);
void write_sample_csv(const std::filesystem::path& path, const SampleSet& s);

/// "MCMS", u32 n, u32 d, then n*d little-endian f64, row-major.
SampleSet read_sample_binary(const std::filesystem::path& path, int source_label);
void write_sample_binary(const std::filesystem::path& path, const SampleSet& s);

/// instance.json plus samples/row_<i>.csv (or .bin).
void save_instance(const std::filesystem::path& dir, const ProblemInstance& inst, bool binary_samples = false);
ProblemInstance load_instance(const std::filesystem::path& dir);

Json instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const Json& j);

}  // namespace mcm
