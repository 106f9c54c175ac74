#pragma once
// Core value types shared across the pipeline: utterance metadata, raw
// countermeasure embeddings, and probabilistic attribute embeddings built by
// concatenating one probability simplex per attribute set.

#include <cmath>
#include <string>
#include <string_view>
#include <vector>

#include "attribkit/common.hpp"
#include "attribkit/taxonomy.hpp"

namespace attribkit {

enum class Split { kTrain, kDev, kEval };

inline std::string to_string(Split s) {
  switch (s) {
    case Split::kTrain: return "train";
    case Split::kDev: return "dev";
    case Split::kEval: return "eval";
  }
  throw ValidationError("invalid split value");
}

inline Split parse_split(std::string_view s) {
  if (s == "train") return Split::kTrain;
  if (s == "dev") return Split::kDev;
  if (s == "eval") return Split::kEval;
  throw ValidationError("unknown split '" + std::string(s) +
                        "' (expected train, dev, or eval)");
}

// Class label: bonafide or a specific spoofing attack.
struct Label {
  bool bonafide = false;
  std::string attack_id;  // empty iff bonafide

  static Label make_bonafide() { return {true, {}}; }
  static Label make_attack(std::string id) { return {false, std::move(id)}; }

  std::string name() const { return bonafide ? "bonafide" : attack_id; }
  bool operator==(const Label&) const = default;
};

struct UtteranceRecord {
  std::string utt_id;
  Split split = Split::kTrain;
  Label label;
};

// Raw countermeasure embedding. Values are single precision because that is
// what the file format stores; loading then re-saving is byte-identical.
struct CmEmbedding {
  std::string utt_id;
  std::vector<float> values;

  int dim() const { return static_cast<int>(values.size()); }
};

// Probabilistic attribute embedding: per-set posterior slices laid out per the
// taxonomy. Kept in double precision; converted to f32 only at file writes.
struct ProbAttributeEmbedding {
  std::string utt_id;
  std::vector<double> values;  // length = taxonomy total_dim

  int dim() const { return static_cast<int>(values.size()); }
};

inline constexpr double kSimplexTolerance = 1e-6;

// Concatenates one posterior vector per set into a flat embedding, validating
// layout and that each slice is a probability simplex (entries in [0,1], sum
// within kSimplexTolerance of 1).
inline ProbAttributeEmbedding concat_embedding(
    std::string utt_id, const std::vector<std::vector<double>>& per_set,
    const AttributeTaxonomy& tax) {
  if (static_cast<int>(per_set.size()) != tax.num_sets())
    throw ValidationError("concat_embedding: got " +
                          std::to_string(per_set.size()) +
                          " posterior vectors, taxonomy has " +
                          std::to_string(tax.num_sets()) + " sets");
  ProbAttributeEmbedding out;
  out.utt_id = std::move(utt_id);
  out.values.reserve(static_cast<std::size_t>(tax.total_dim()));
  for (int i = 0; i < tax.num_sets(); ++i) {
    const auto& p = per_set[static_cast<std::size_t>(i)];
    const std::string& set_name = tax.sets()[static_cast<std::size_t>(i)].name;
    if (static_cast<int>(p.size()) != tax.set_size(i))
      throw ValidationError("concat_embedding: set '" + set_name + "' expects " +
                            std::to_string(tax.set_size(i)) + " values, got " +
                            std::to_string(p.size()));
    double sum = 0.0;
    for (double v : p) {
      if (!(v >= 0.0 && v <= 1.0) || !std::isfinite(v))
        throw ValidationError("concat_embedding: set '" + set_name +
                              "' has probability outside [0, 1]");
      sum += v;
    }
    if (std::abs(sum - 1.0) > kSimplexTolerance)
      throw ValidationError("concat_embedding: set '" + set_name +
                            "' probabilities sum to " + detail::format_g9(sum) +
                            ", expected 1 within " +
                            detail::format_g9(kSimplexTolerance));
    out.values.insert(out.values.end(), p.begin(), p.end());
  }
  return out;
}

// Inverse of concat_embedding: recovers the per-set slices.
inline std::vector<std::vector<double>> split_embedding(
    const ProbAttributeEmbedding& emb, const AttributeTaxonomy& tax) {
  if (emb.dim() != tax.total_dim())
    throw ValidationError("split_embedding: embedding has dim " +
                          std::to_string(emb.dim()) + ", taxonomy expects " +
                          std::to_string(tax.total_dim()));
  std::vector<std::vector<double>> out;
  out.reserve(static_cast<std::size_t>(tax.num_sets()));
  for (int i = 0; i < tax.num_sets(); ++i) {
    const auto begin = emb.values.begin() + tax.set_offset(i);
    out.emplace_back(begin, begin + tax.set_size(i));
  }
  return out;
}

}  // namespace attribkit
