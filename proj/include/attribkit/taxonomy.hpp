#pragma once
// Attribute taxonomy: the ordered list of speech-generation modules (attribute
// sets), the candidate methods inside each (attributes), and the table mapping
// every attack id to one attribute per set.
//
// The taxonomy fixes the layout of probabilistic attribute embeddings: set i
// owns a contiguous slice of M_i entries, total dimension T = sum(M_i).
//
// Config format (UTF-8, LF, '#' comments):
//   set <Name>: <attr> <attr> ...
//   attack <Id>: <attr-of-set-1> ... <attr-of-set-L>
// Set lines come first and are ordered; attack rows list one attribute per
// set in set order. Names are restricted to [A-Za-z0-9._+-] so they can be
// used in filenames and whitespace-tokenized files.

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "attribkit/common.hpp"

namespace attribkit {

struct AttributeSetDef {
  std::string name;
  std::vector<std::string> attributes;  // ordering = embedding slice layout

  bool operator==(const AttributeSetDef&) const = default;
};

namespace detail {
inline bool valid_name(std::string_view s) {
  if (s.empty()) return false;
  for (char c : s) {
    const bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                    (c >= '0' && c <= '9') || c == '.' || c == '_' ||
                    c == '+' || c == '-';
    if (!ok) return false;
  }
  return true;
}
}  // namespace detail

class AttributeTaxonomy {
 public:
  AttributeTaxonomy() = default;

  // Builds and validates. Throws ValidationError on broken invariants.
  AttributeTaxonomy(std::vector<AttributeSetDef> sets,
                    std::vector<std::pair<std::string, std::vector<std::string>>>
                        attack_rows) {
    if (sets.empty()) throw ValidationError("taxonomy: needs at least one set");
    sets_ = std::move(sets);
    offsets_.reserve(sets_.size());
    int offset = 0;
    for (const auto& s : sets_) {
      if (!detail::valid_name(s.name))
        throw ValidationError("taxonomy: bad set name '" + s.name + "'");
      for (const auto& other : sets_)
        if (&other != &s && other.name == s.name)
          throw ValidationError("taxonomy: duplicate set name '" + s.name + "'");
      if (s.attributes.size() < 2)
        throw ValidationError("taxonomy: set '" + s.name +
                              "' needs at least 2 attributes");
      for (std::size_t i = 0; i < s.attributes.size(); ++i) {
        if (!detail::valid_name(s.attributes[i]))
          throw ValidationError("taxonomy: bad attribute name '" +
                                s.attributes[i] + "' in set '" + s.name + "'");
        for (std::size_t j = i + 1; j < s.attributes.size(); ++j)
          if (s.attributes[i] == s.attributes[j])
            throw ValidationError("taxonomy: duplicate attribute '" +
                                  s.attributes[i] + "' in set '" + s.name + "'");
      }
      offsets_.push_back(offset);
      offset += static_cast<int>(s.attributes.size());
    }
    total_dim_ = offset;

    for (auto& [id, values] : attack_rows) {
      if (!detail::valid_name(id))
        throw ValidationError("taxonomy: bad attack id '" + id + "'");
      if (attack_index_.count(id))
        throw ValidationError("taxonomy: duplicate attack id '" + id + "'");
      if (values.size() != sets_.size())
        throw ValidationError("taxonomy: attack '" + id + "' has " +
                              std::to_string(values.size()) +
                              " attributes, expected " +
                              std::to_string(sets_.size()));
      std::vector<int> row(sets_.size());
      for (std::size_t i = 0; i < values.size(); ++i) {
        const int k = attribute_index(static_cast<int>(i), values[i]);
        if (k < 0)
          throw ValidationError("taxonomy: attack '" + id + "' names unknown attribute '" +
                                values[i] + "' in set '" + sets_[i].name + "'");
        row[i] = k;
      }
      attack_index_.emplace(id, attack_ids_.size());
      attack_ids_.push_back(id);
      attack_rows_.push_back(std::move(row));
    }
  }

  static AttributeTaxonomy parse(std::string_view text) {
    std::vector<AttributeSetDef> sets;
    std::vector<std::pair<std::string, std::vector<std::string>>> attacks;
    std::istringstream in{std::string(text)};
    std::string line;
    int lineno = 0;
    bool seen_attack = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (const auto hash = line.find('#'); hash != std::string::npos)
        line.erase(hash);
      std::istringstream ls(line);
      std::string kw;
      if (!(ls >> kw)) continue;  // blank
      std::string name;
      if (!(ls >> name) || name.size() < 2 || name.back() != ':')
        throw FormatError("taxonomy line " + std::to_string(lineno) +
                          ": expected '" + kw + " <name>: ...'");
      name.pop_back();
      std::vector<std::string> values;
      for (std::string tok; ls >> tok;) values.push_back(std::move(tok));
      if (kw == "set") {
        if (seen_attack)
          throw FormatError("taxonomy line " + std::to_string(lineno) +
                            ": set lines must precede attack lines");
        sets.push_back({std::move(name), std::move(values)});
      } else if (kw == "attack") {
        seen_attack = true;
        attacks.emplace_back(std::move(name), std::move(values));
      } else {
        throw FormatError("taxonomy line " + std::to_string(lineno) +
                          ": unknown keyword '" + kw + "'");
      }
    }
    return AttributeTaxonomy(std::move(sets), std::move(attacks));
  }

  static AttributeTaxonomy load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open taxonomy file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
  }

  // Canonical form; parse(serialize()) reproduces the taxonomy exactly.
  std::string serialize() const {
    std::ostringstream out;
    for (const auto& s : sets_) {
      out << "set " << s.name << ":";
      for (const auto& a : s.attributes) out << " " << a;
      out << "\n";
    }
    for (std::size_t r = 0; r < attack_ids_.size(); ++r) {
      out << "attack " << attack_ids_[r] << ":";
      for (std::size_t i = 0; i < sets_.size(); ++i)
        out << " " << sets_[i].attributes[static_cast<std::size_t>(attack_rows_[r][i])];
      out << "\n";
    }
    return out.str();
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write taxonomy file: " + path);
    out << serialize();
  }

  const std::vector<AttributeSetDef>& sets() const { return sets_; }
  int num_sets() const { return static_cast<int>(sets_.size()); }  // L
  int total_dim() const { return total_dim_; }                     // T
  int set_size(int i) const { return static_cast<int>(sets_[static_cast<std::size_t>(i)].attributes.size()); }
  int set_offset(int i) const { return offsets_[static_cast<std::size_t>(i)]; }

  // Index of an attribute within its set; -1 if absent.
  int attribute_index(int set, std::string_view attr) const {
    const auto& attrs = sets_[static_cast<std::size_t>(set)].attributes;
    for (std::size_t j = 0; j < attrs.size(); ++j)
      if (attrs[j] == attr) return static_cast<int>(j);
    return -1;
  }

  // Set owning flat feature k plus the index within that set.
  std::pair<int, int> locate(int k) const {
    for (int i = num_sets() - 1; i >= 0; --i)
      if (k >= set_offset(i)) return {i, k - set_offset(i)};
    throw ValidationError("taxonomy: feature index out of range");
  }

  // Display label for flat feature k, e.g. "WaveNet(Waveform)".
  std::string attribute_label(int k) const {
    const auto [set, j] = locate(k);
    return sets_[static_cast<std::size_t>(set)].attributes[static_cast<std::size_t>(j)] +
           "(" + sets_[static_cast<std::size_t>(set)].name + ")";
  }

  const std::vector<std::string>& attack_ids() const { return attack_ids_; }
  bool has_attack(std::string_view id) const {
    return attack_index_.count(std::string(id)) > 0;
  }

  // Per-set attribute indices for an attack. Throws on unknown id.
  const std::vector<int>& attack_row(std::string_view id) const {
    const auto it = attack_index_.find(std::string(id));
    if (it == attack_index_.end())
      throw ValidationError("unknown attack id '" + std::string(id) + "'");
    return attack_rows_[it->second];
  }

  bool operator==(const AttributeTaxonomy& other) const {
    return sets_ == other.sets_ && attack_ids_ == other.attack_ids_ &&
           attack_rows_ == other.attack_rows_;
  }

 private:
  std::vector<AttributeSetDef> sets_;
  std::vector<int> offsets_;
  int total_dim_ = 0;
  std::vector<std::string> attack_ids_;          // table order
  std::vector<std::vector<int>> attack_rows_;    // parallel to attack_ids_
  std::map<std::string, std::size_t> attack_index_;
};

// Per-set one-hot ground truth for a spoofing attack.
struct GroundTruthAttributes {
  std::vector<std::vector<double>> one_hot;  // one vector per set, length M_i
  std::vector<int> indices;                  // position of the 1 per set

  // All slices concatenated in taxonomy order (length T).
  std::vector<double> flat() const {
    std::vector<double> out;
    for (const auto& v : one_hot) out.insert(out.end(), v.begin(), v.end());
    return out;
  }
};

inline GroundTruthAttributes ground_truth_for(std::string_view attack_id,
                                              const AttributeTaxonomy& tax) {
  const auto& row = tax.attack_row(attack_id);
  GroundTruthAttributes gt;
  gt.indices = row;
  gt.one_hot.reserve(row.size());
  for (int i = 0; i < tax.num_sets(); ++i) {
    std::vector<double> v(static_cast<std::size_t>(tax.set_size(i)), 0.0);
    v[static_cast<std::size_t>(row[static_cast<std::size_t>(i)])] = 1.0;
    gt.one_hot.push_back(std::move(v));
  }
  return gt;
}

}  // namespace attribkit
