#pragma once
// Synthetic countermeasure-embedding generator.
//
// The embedding space is split into one block per attribute set plus a final
// class-identity block (the final block also absorbs any remainder of
// dim / (L+1)). Every attribute value owns a fixed direction vector in its
// set's block, drawn from a seed derived from the set and attribute names, so
// two attacks sharing an attribute share that block of their class mean.
// Each attack additionally gets its own identity-block direction. Bonafide
// audio carries no synthesis artifacts, so its centroid is the origin: the
// absence of any directional push, far from every attack centroid and mapped
// to diffuse rather than saturated attribute posteriors. Samples are the
// class mean plus isotropic Gaussian noise.
//
// Attacks labeled unknown appear only in the eval split; they reuse the
// attribute directions of their rows (which may coincide with a known
// attack's row) but have their own identity block.

#include <cstdio>
#include <string>
#include <vector>

#include "attribkit/core.hpp"
#include "attribkit/io.hpp"

namespace attribkit {

struct SampleCounts {
  int train = 200;
  int dev = 50;
  int eval = 50;
};

struct SyntheticSpec {
  int dim = 160;
  double separation = 10.0;  // scale of class-mean directions
  double noise = 1.0;        // per-dimension sample noise
  std::uint64_t seed = 7;
  SampleCounts per_attack;
  SampleCounts bonafide;
  // Empty known_attacks means "every taxonomy attack not listed as unknown",
  // in taxonomy order. The defaults match the shipped taxonomy, where A16
  // and A19 replay known attribute rows under new identities.
  std::vector<std::string> known_attacks;
  std::vector<std::string> unknown_attacks = {"A16", "A19"};
};

struct SyntheticData {
  std::vector<UtteranceRecord> records;
  std::vector<CmEmbedding> embeddings;  // parallel to records
};

namespace detail {

inline bool contains(const std::vector<std::string>& v, const std::string& s) {
  for (const auto& x : v)
    if (x == s) return true;
  return false;
}

}  // namespace detail

// Known attacks after resolving the empty-means-all default.
inline std::vector<std::string> resolve_known_attacks(
    const SyntheticSpec& spec, const AttributeTaxonomy& tax) {
  for (const auto& id : spec.unknown_attacks)
    if (!tax.has_attack(id))
      throw ValidationError("synthetic: unknown_attacks names '" + id +
                            "', which is not in the taxonomy");
  std::vector<std::string> known;
  if (spec.known_attacks.empty()) {
    for (const auto& id : tax.attack_ids())
      if (!detail::contains(spec.unknown_attacks, id)) known.push_back(id);
  } else {
    for (const auto& id : spec.known_attacks) {
      if (!tax.has_attack(id))
        throw ValidationError("synthetic: known_attacks names '" + id +
                              "', which is not in the taxonomy");
      if (detail::contains(spec.unknown_attacks, id))
        throw ValidationError("synthetic: attack '" + id +
                              "' is listed as both known and unknown");
      if (detail::contains(known, id))
        throw ValidationError("synthetic: attack '" + id +
                              "' is listed twice in known_attacks");
      known.push_back(id);
    }
  }
  if (known.empty())
    throw ValidationError("synthetic: no known attacks after resolution");
  return known;
}

inline SyntheticData generate_synthetic(const SyntheticSpec& spec,
                                        const AttributeTaxonomy& tax) {
  const int L = tax.num_sets();
  if (spec.dim < L + 1)
    throw ValidationError("synthetic: dim " + std::to_string(spec.dim) +
                          " is smaller than the " + std::to_string(L + 1) +
                          " blocks it must hold");
  if (spec.separation < 0.0 || spec.noise < 0.0)
    throw ValidationError("synthetic: separation and noise must be >= 0");
  for (int c : {spec.per_attack.train, spec.per_attack.dev, spec.per_attack.eval,
                spec.bonafide.train, spec.bonafide.dev, spec.bonafide.eval})
    if (c < 0) throw ValidationError("synthetic: negative sample count");

  const auto known = resolve_known_attacks(spec, tax);
  const int block = spec.dim / (L + 1);
  const int identity_block = block + (spec.dim - block * (L + 1));

  const auto draw_block = [&](std::uint64_t seed, int n,
                              std::vector<double>& dst) {
    detail::Rng rng(seed);
    for (int d = 0; d < n; ++d) dst.push_back(spec.separation * rng.normal());
  };

  const auto attack_mean = [&](const std::string& id) {
    std::vector<double> mean;
    mean.reserve(static_cast<std::size_t>(spec.dim));
    const auto& row = tax.attack_row(id);
    for (int i = 0; i < L; ++i) {
      const auto& set = tax.sets()[static_cast<std::size_t>(i)];
      const auto& attr = set.attributes[static_cast<std::size_t>(row[static_cast<std::size_t>(i)])];
      draw_block(detail::mix_seed(spec.seed, {"attr", set.name, attr}), block,
                 mean);
    }
    draw_block(detail::mix_seed(spec.seed, {"attack", id}), identity_block,
               mean);
    return mean;
  };

  const std::vector<double> bonafide_mean(
      static_cast<std::size_t>(spec.dim), 0.0);

  SyntheticData data;
  detail::Rng noise_rng(detail::mix_seed(spec.seed, {"noise"}));

  const auto emit = [&](Split split, const Label& label,
                        const std::vector<double>& mean, int count) {
    for (int k = 0; k < count; ++k) {
      char id_buf[128];
      std::snprintf(id_buf, sizeof id_buf, "%s_%s_%04d",
                    to_string(split).c_str(), label.name().c_str(), k);
      data.records.push_back({id_buf, split, label});
      CmEmbedding e;
      e.utt_id = id_buf;
      e.values.reserve(static_cast<std::size_t>(spec.dim));
      for (double m : mean)
        e.values.push_back(
            static_cast<float>(m + spec.noise * noise_rng.normal()));
      data.embeddings.push_back(std::move(e));
    }
  };

  for (const Split split : {Split::kTrain, Split::kDev, Split::kEval}) {
    const auto of = [&](const SampleCounts& c) {
      switch (split) {
        case Split::kTrain: return c.train;
        case Split::kDev: return c.dev;
        case Split::kEval: return c.eval;
      }
      return 0;
    };
    emit(split, Label::make_bonafide(), bonafide_mean, of(spec.bonafide));
    for (const auto& id : known)
      emit(split, Label::make_attack(id), attack_mean(id), of(spec.per_attack));
    if (split == Split::kEval)
      for (const auto& id : spec.unknown_attacks)
        emit(split, Label::make_attack(id), attack_mean(id),
             spec.per_attack.eval);
  }
  return data;
}

}  // namespace attribkit
