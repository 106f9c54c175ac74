#pragma once
// Embedding and metadata files.
//
// Binary embedding format (little-endian):
//   magic "PAEB" | version u32 = 1 | dim u32 | count u32 |
//   count records of: id_len u16 | id bytes | dim * f32
// The same container stores raw countermeasure embeddings and probabilistic
// attribute embeddings; values are f32 on disk either way.
//
// CSV alternative (chosen by a .csv path suffix): header
// "utt_id,dim_0,...,dim_{D-1}", one row per utterance, values printed with 9
// significant digits, which round-trips f32 exactly.
//
// Metadata CSV: header "utt_id,split,label"; split is train/dev/eval; label
// is "bonafide" or an attack id.

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "attribkit/core.hpp"

namespace attribkit {

inline constexpr std::uint32_t kEmbeddingFormatVersion = 1;

namespace detail {

inline bool path_is_csv(std::string_view path) {
  return path.size() >= 4 && path.substr(path.size() - 4) == ".csv";
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write file: " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open file: " + path);
  return in;
}

inline void check_record_ids(const std::vector<CmEmbedding>& embs,
                             const std::string& context) {
  std::set<std::string> seen;
  for (const auto& e : embs) {
    if (!valid_name(e.utt_id))
      throw ValidationError(context + ": bad utterance id '" + e.utt_id + "'");
    if (!seen.insert(e.utt_id).second)
      throw ValidationError(context + ": duplicate utterance id '" + e.utt_id +
                            "'");
    if (e.values.size() != embs.front().values.size())
      throw ValidationError(context + ": utterance '" + e.utt_id + "' has " +
                            std::to_string(e.values.size()) +
                            " values, expected " +
                            std::to_string(embs.front().values.size()));
  }
}

// Fields of one CSV line; no quoting, the formats here never need it.
inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

inline std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Raw embeddings (f32 values)
// ---------------------------------------------------------------------------

inline void write_embeddings(const std::string& path,
                             const std::vector<CmEmbedding>& embs) {
  if (embs.empty())
    throw ValidationError("write_embeddings: no records for " + path);
  detail::check_record_ids(embs, "write_embeddings");
  const auto dim = static_cast<std::uint32_t>(embs.front().values.size());

  if (detail::path_is_csv(path)) {
    auto out = detail::open_out(path);
    out << "utt_id";
    for (std::uint32_t d = 0; d < dim; ++d) out << ",dim_" << d;
    out << "\n";
    for (const auto& e : embs) {
      out << e.utt_id;
      for (float v : e.values)
        out << "," << detail::format_g9(static_cast<double>(v));
      out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
    return;
  }

  auto out = detail::open_out(path);
  detail::ByteWriter w(out);
  w.bytes("PAEB", 4);
  w.u32(kEmbeddingFormatVersion);
  w.u32(dim);
  w.u32(static_cast<std::uint32_t>(embs.size()));
  for (const auto& e : embs) {
    w.str16(e.utt_id);
    for (float v : e.values) w.f32(v);
  }
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<CmEmbedding> read_embeddings(const std::string& path) {
  auto in = detail::open_in(path);

  if (detail::path_is_csv(path)) {
    std::string line;
    if (!std::getline(in, line))
      throw FormatError(path + ": missing header line");
    const auto header = detail::split_csv_line(detail::strip_cr(line));
    if (header.empty() || header[0] != "utt_id")
      throw FormatError(path + ": header must start with utt_id");
    for (std::size_t d = 1; d < header.size(); ++d)
      if (header[d] != "dim_" + std::to_string(d - 1))
        throw FormatError(path + ": unexpected header column '" + header[d] +
                          "'");
    const std::size_t dim = header.size() - 1;
    std::vector<CmEmbedding> out;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      line = detail::strip_cr(line);
      if (line.empty()) continue;
      const auto fields = detail::split_csv_line(line);
      if (fields.size() != dim + 1)
        throw FormatError(path + " line " + std::to_string(lineno) + ": got " +
                          std::to_string(fields.size()) + " fields, expected " +
                          std::to_string(dim + 1));
      CmEmbedding e;
      e.utt_id = fields[0];
      e.values.reserve(dim);
      for (std::size_t d = 1; d < fields.size(); ++d) {
        const std::string& f = fields[d];
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
        if (ec != std::errc{} || ptr != f.data() + f.size())
          throw FormatError(path + " line " + std::to_string(lineno) +
                            ": bad number '" + f + "'");
        e.values.push_back(static_cast<float>(v));
      }
      out.push_back(std::move(e));
    }
    if (out.empty()) throw FormatError(path + ": no data rows");
    detail::check_record_ids(out, path);
    return out;
  }

  detail::ByteReader r(in, path);
  char magic[4];
  r.bytes(magic, 4);
  if (std::string_view(magic, 4) != "PAEB")
    throw FormatError(path + ": not an embedding file (bad magic)");
  const auto version = r.u32();
  if (version != kEmbeddingFormatVersion)
    throw FormatError(path + ": unsupported format version " +
                      std::to_string(version));
  const auto dim = r.u32();
  const auto count = r.u32();
  std::vector<CmEmbedding> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    CmEmbedding e;
    e.utt_id = r.str16();
    e.values.resize(dim);
    for (auto& v : e.values) v = r.f32();
    out.push_back(std::move(e));
  }
  if (!r.at_eof())
    throw FormatError(path + ": trailing bytes after " +
                      std::to_string(count) + " records");
  if (out.empty()) throw FormatError(path + ": no records");
  detail::check_record_ids(out, path);
  return out;
}

// ---------------------------------------------------------------------------
// Probabilistic attribute embeddings (double in memory, f32 on disk)
// ---------------------------------------------------------------------------

inline void write_prob_embeddings(
    const std::string& path, const std::vector<ProbAttributeEmbedding>& embs) {
  std::vector<CmEmbedding> narrow;
  narrow.reserve(embs.size());
  for (const auto& e : embs) {
    CmEmbedding c;
    c.utt_id = e.utt_id;
    c.values.reserve(e.values.size());
    for (double v : e.values) c.values.push_back(static_cast<float>(v));
    narrow.push_back(std::move(c));
  }
  write_embeddings(path, narrow);
}

inline std::vector<ProbAttributeEmbedding> read_prob_embeddings(
    const std::string& path) {
  const auto narrow = read_embeddings(path);
  std::vector<ProbAttributeEmbedding> out;
  out.reserve(narrow.size());
  for (const auto& c : narrow) {
    ProbAttributeEmbedding e;
    e.utt_id = c.utt_id;
    e.values.assign(c.values.begin(), c.values.end());
    out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Utterance metadata
// ---------------------------------------------------------------------------

inline void write_metadata(const std::string& path,
                           const std::vector<UtteranceRecord>& records) {
  if (records.empty())
    throw ValidationError("write_metadata: no records for " + path);
  auto out = detail::open_out(path);
  out << "utt_id,split,label\n";
  for (const auto& r : records)
    out << r.utt_id << "," << to_string(r.split) << "," << r.label.name()
        << "\n";
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<UtteranceRecord> read_metadata(const std::string& path) {
  auto in = detail::open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw FormatError(path + ": missing header line");
  if (detail::strip_cr(line) != "utt_id,split,label")
    throw FormatError(path + ": header must be utt_id,split,label");
  std::vector<UtteranceRecord> out;
  std::set<std::string> seen;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    line = detail::strip_cr(line);
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 3)
      throw FormatError(path + " line " + std::to_string(lineno) + ": got " +
                        std::to_string(fields.size()) + " fields, expected 3");
    UtteranceRecord r;
    r.utt_id = fields[0];
    if (!detail::valid_name(r.utt_id))
      throw ValidationError(path + " line " + std::to_string(lineno) +
                            ": bad utterance id '" + r.utt_id + "'");
    if (!seen.insert(r.utt_id).second)
      throw ValidationError(path + " line " + std::to_string(lineno) +
                            ": duplicate utterance id '" + r.utt_id + "'");
    try {
      r.split = parse_split(fields[1]);
    } catch (const ValidationError& e) {
      throw ValidationError(path + " line " + std::to_string(lineno) + ": " +
                            e.what());
    }
    const std::string& label = fields[2];
    if (label == "bonafide") {
      r.label = Label::make_bonafide();
    } else {
      if (!detail::valid_name(label))
        throw ValidationError(path + " line " + std::to_string(lineno) +
                              ": bad label '" + label + "'");
      r.label = Label::make_attack(label);
    }
    out.push_back(std::move(r));
  }
  if (out.empty()) throw FormatError(path + ": no data rows");
  return out;
}

}  // namespace attribkit
