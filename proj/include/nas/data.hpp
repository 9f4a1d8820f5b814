#pragma once

// Attributed-sequence data model: item vocabulary, attribute schema and
// encoding, JSONL ingestion/serialization, and synthetic generators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "json.hpp"
#include "nas/error.hpp"
#include "nas/numeric.hpp"

namespace nas {

using Json = nlohmann::json;

// ---------------------------------------------------------------------------
// Vocabulary
// ---------------------------------------------------------------------------

/// The r distinct item tokens. Index r is reserved for the start symbol fed
/// to the sequence network at the first step; it never appears in data.
class ItemVocabulary {
 public:
  ItemVocabulary() = default;
  explicit ItemVocabulary(const std::vector<std::string>& tokens) {
    for (const auto& t : tokens) {
      if (index_.count(t)) throw DataError("duplicate item token '" + t + "'");
      add(t);
    }
  }

  std::size_t size() const { return tokens_.size(); }
  std::size_t start_index() const { return tokens_.size(); }

  std::optional<std::size_t> find(const std::string& token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  const std::string& token(std::size_t index) const {
    if (index >= tokens_.size()) throw InputDomainError("item index " + std::to_string(index) + " out of range");
    return tokens_[index];
  }

  /// Returns the index of `token`, appending it when new.
  std::size_t add(const std::string& token) {
    auto [it, inserted] = index_.emplace(token, tokens_.size());
    if (inserted) tokens_.push_back(token);
    return it->second;
  }

  const std::vector<std::string>& tokens() const { return tokens_; }

  bool operator==(const ItemVocabulary& other) const { return tokens_ == other.tokens_; }

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// One-hot vector of `width` with a 1 at `index`.
inline Vector one_hot(std::size_t index, std::size_t width) {
  if (index >= width)
    throw InputDomainError("one_hot: index " + std::to_string(index) + " >= width " + std::to_string(width));
  Vector v = Vector::Zero(static_cast<Eigen::Index>(width));
  v(static_cast<Eigen::Index>(index)) = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// Attribute schema
// ---------------------------------------------------------------------------

using AttributeValue = std::variant<std::string, double>;
/// Raw attribute record keyed by column name.
using RawRecord = std::map<std::string, AttributeValue>;

enum class ColumnKind { Categorical, Numerical };

struct AttributeColumn {
  std::string name;
  ColumnKind kind = ColumnKind::Numerical;
  std::vector<std::string> levels;  // categorical only, sorted
  double min = 0.0;                 // numerical only
  double max = 0.0;

  std::size_t width() const { return kind == ColumnKind::Categorical ? levels.size() : 1; }

  bool operator==(const AttributeColumn&) const = default;
};

enum class UnknownLevelPolicy { Reject, ZeroBlock };

class AttributeSchema {
 public:
  AttributeSchema() = default;
  explicit AttributeSchema(std::vector<AttributeColumn> columns) : columns_(std::move(columns)) {
    for (auto& c : columns_) {
      if (c.kind == ColumnKind::Categorical) {
        std::sort(c.levels.begin(), c.levels.end());
        if (std::adjacent_find(c.levels.begin(), c.levels.end()) != c.levels.end())
          throw DataError("column '" + c.name + "' has duplicate levels");
      }
    }
  }

  /// Builds a schema covering every record: categorical levels are the
  /// sorted distinct strings, numerical ranges the observed min/max.
  static AttributeSchema infer(const std::vector<RawRecord>& records) {
    std::map<std::string, AttributeColumn> cols;
    bool first = true;
    for (std::size_t r = 0; r < records.size(); ++r) {
      const auto& rec = records[r];
      if (!first && rec.size() != cols.size()) {
        for (const auto& [name, _] : cols)
          if (!rec.count(name)) throw DataError("record " + std::to_string(r + 1) + ": missing column '" + name + "'");
        for (const auto& [name, _] : rec)
          if (!cols.count(name)) throw DataError("record " + std::to_string(r + 1) + ": unexpected column '" + name + "'");
      }
      for (const auto& [name, value] : rec) {
        auto it = cols.find(name);
        const bool is_cat = std::holds_alternative<std::string>(value);
        if (it == cols.end()) {
          if (!first) throw DataError("record " + std::to_string(r + 1) + ": unexpected column '" + name + "'");
          AttributeColumn c;
          c.name = name;
          c.kind = is_cat ? ColumnKind::Categorical : ColumnKind::Numerical;
          if (is_cat) {
            c.levels.push_back(std::get<std::string>(value));
          } else {
            c.min = c.max = std::get<double>(value);
          }
          cols.emplace(name, std::move(c));
          continue;
        }
        auto& c = it->second;
        if (is_cat != (c.kind == ColumnKind::Categorical))
          throw DataError("column '" + name + "' mixes string and numeric values");
        if (is_cat) {
          c.levels.push_back(std::get<std::string>(value));
        } else {
          const double v = std::get<double>(value);
          c.min = std::min(c.min, v);
          c.max = std::max(c.max, v);
        }
      }
      first = false;
    }
    std::vector<AttributeColumn> out;
    for (auto& [_, c] : cols) {
      if (c.kind == ColumnKind::Categorical) {
        std::sort(c.levels.begin(), c.levels.end());
        c.levels.erase(std::unique(c.levels.begin(), c.levels.end()), c.levels.end());
      }
      out.push_back(std::move(c));
    }
    return AttributeSchema(std::move(out));
  }

  const std::vector<AttributeColumn>& columns() const { return columns_; }

  /// Encoded width u: one slot per categorical level plus one per numerical column.
  std::size_t width() const {
    std::size_t u = 0;
    for (const auto& c : columns_) u += c.width();
    return u;
  }

  bool operator==(const AttributeSchema&) const = default;

 private:
  std::vector<AttributeColumn> columns_;
};

/// Categorical columns are one-hot expanded, numerical columns min-max
/// scaled into [0, 1] (values outside the fitted range are clamped).
inline Vector encode_attributes(const RawRecord& record, const AttributeSchema& schema,
                                UnknownLevelPolicy policy = UnknownLevelPolicy::ZeroBlock) {
  Vector x = Vector::Zero(static_cast<Eigen::Index>(schema.width()));
  Eigen::Index offset = 0;
  for (const auto& col : schema.columns()) {
    auto it = record.find(col.name);
    if (it == record.end()) throw InputDomainError("missing attribute column '" + col.name + "'");
    if (col.kind == ColumnKind::Categorical) {
      const auto* level = std::get_if<std::string>(&it->second);
      if (!level) throw DataError("column '" + col.name + "' expects a string value");
      auto pos = std::lower_bound(col.levels.begin(), col.levels.end(), *level);
      if (pos != col.levels.end() && *pos == *level) {
        x(offset + (pos - col.levels.begin())) = 1.0;
      } else if (policy == UnknownLevelPolicy::Reject) {
        throw DataError("column '" + col.name + "': unseen level '" + *level + "'");
      }
    } else {
      const auto* value = std::get_if<double>(&it->second);
      if (!value) throw DataError("column '" + col.name + "' expects a numeric value");
      if (!std::isfinite(*value)) throw DataError("column '" + col.name + "': non-finite value");
      double scaled = 0.0;
      if (col.max > col.min) scaled = std::clamp((*value - col.min) / (col.max - col.min), 0.0, 1.0);
      x(offset) = scaled;
    }
    offset += static_cast<Eigen::Index>(col.width());
  }
  return x;
}

// ---------------------------------------------------------------------------
// Instances and datasets
// ---------------------------------------------------------------------------

enum class Label { Inlier, Outlier };

inline const char* label_name(Label l) { return l == Label::Outlier ? "outlier" : "inlier"; }

/// One attributed sequence. `label` is carried for evaluation only; no
/// fitting path reads it.
struct AttributedSequence {
  std::string id;
  RawRecord raw;
  Vector attributes;
  std::vector<std::size_t> items;
  std::optional<Label> label;
};

struct Dataset {
  ItemVocabulary vocabulary;
  AttributeSchema schema;
  std::vector<AttributedSequence> instances;

  std::size_t size() const { return instances.size(); }
  std::size_t attribute_width() const { return schema.width(); }
  std::size_t item_count() const { return vocabulary.size(); }
};

/// Structural equality: same vocabulary, schema, and per-instance content.
inline bool operator==(const Dataset& a, const Dataset& b) {
  if (!(a.vocabulary == b.vocabulary) || !(a.schema == b.schema) || a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const auto& x = a.instances[i];
    const auto& y = b.instances[i];
    if (x.id != y.id || x.raw != y.raw || x.items != y.items || x.label != y.label) return false;
    if (x.attributes.size() != y.attributes.size() || x.attributes != y.attributes) return false;
  }
  return true;
}

/// Re-encodes every instance's attributes against `schema`.
inline void reencode(Dataset& ds, const AttributeSchema& schema, UnknownLevelPolicy policy) {
  for (auto& inst : ds.instances) inst.attributes = encode_attributes(inst.raw, schema, policy);
  ds.schema = schema;
}

// ---------------------------------------------------------------------------
// JSON helpers
// ---------------------------------------------------------------------------

inline Json to_json(const ItemVocabulary& v) { return Json(v.tokens()); }

inline ItemVocabulary vocabulary_from_json(const Json& j) {
  if (!j.is_array()) throw CorruptFileError("vocabulary must be an array");
  return ItemVocabulary(j.get<std::vector<std::string>>());
}

inline Json to_json(const AttributeSchema& s) {
  Json cols = Json::array();
  for (const auto& c : s.columns()) {
    Json jc{{"name", c.name}};
    if (c.kind == ColumnKind::Categorical) {
      jc["kind"] = "categorical";
      jc["levels"] = c.levels;
    } else {
      jc["kind"] = "numerical";
      jc["min"] = c.min;
      jc["max"] = c.max;
    }
    cols.push_back(std::move(jc));
  }
  return cols;
}

inline AttributeSchema schema_from_json(const Json& j) {
  if (!j.is_array()) throw CorruptFileError("schema must be an array of columns");
  std::vector<AttributeColumn> cols;
  for (const auto& jc : j) {
    AttributeColumn c;
    c.name = jc.at("name").get<std::string>();
    const auto kind = jc.at("kind").get<std::string>();
    if (kind == "categorical") {
      c.kind = ColumnKind::Categorical;
      c.levels = jc.at("levels").get<std::vector<std::string>>();
    } else if (kind == "numerical") {
      c.kind = ColumnKind::Numerical;
      c.min = jc.at("min").get<double>();
      c.max = jc.at("max").get<double>();
    } else {
      throw CorruptFileError("unknown column kind '" + kind + "'");
    }
    cols.push_back(std::move(c));
  }
  return AttributeSchema(std::move(cols));
}

inline constexpr int kSchemaFormatVersion = 1;

/// Writes the vocabulary/schema sidecar document.
inline void save_schema(const std::string& path, const ItemVocabulary& vocab, const AttributeSchema& schema) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  Json doc{{"format", "nas-schema"}, {"version", kSchemaFormatVersion},
           {"vocabulary", to_json(vocab)}, {"schema", to_json(schema)}};
  out << doc.dump(2) << '\n';
}

inline std::pair<ItemVocabulary, AttributeSchema> load_schema(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::exception& e) {
    throw CorruptFileError("'" + path + "': " + e.what());
  }
  if (doc.value("format", "") != "nas-schema") throw CorruptFileError("'" + path + "' is not a schema document");
  if (doc.value("version", 0) != kSchemaFormatVersion)
    throw VersionError("'" + path + "': unsupported schema version " + doc.value("version", Json()).dump());
  return {vocabulary_from_json(doc.at("vocabulary")), schema_from_json(doc.at("schema"))};
}

// ---------------------------------------------------------------------------
// JSONL ingestion
// ---------------------------------------------------------------------------

struct LoadOptions {
  /// Keep at most this many leading items per sequence; 0 keeps all.
  std::size_t max_length = 0;
  UnknownLevelPolicy unknown_levels = UnknownLevelPolicy::ZeroBlock;
};

namespace detail {

struct ParsedLine {
  std::string id;
  RawRecord raw;
  std::vector<std::string> tokens;
  std::optional<Label> label;
};

inline ParsedLine parse_record(const std::string& line, std::size_t line_no) {
  auto fail = [&](const std::string& why) -> DataError {
    return DataError("line " + std::to_string(line_no) + ": " + why);
  };
  Json j;
  try {
    j = Json::parse(line);
  } catch (const Json::exception& e) {
    throw fail(std::string("malformed JSON (") + e.what() + ")");
  }
  if (!j.is_object()) throw fail("record must be a JSON object");
  ParsedLine p;
  if (!j.contains("id") || !j["id"].is_string()) throw fail("missing string field 'id'");
  p.id = j["id"].get<std::string>();
  if (!j.contains("attributes") || !j["attributes"].is_object()) throw fail("missing object field 'attributes'");
  for (const auto& [name, v] : j["attributes"].items()) {
    if (v.is_string()) {
      p.raw.emplace(name, v.get<std::string>());
    } else if (v.is_number()) {
      p.raw.emplace(name, v.get<double>());
    } else {
      throw fail("attribute '" + name + "' must be a string or number");
    }
  }
  if (!j.contains("sequence") || !j["sequence"].is_array()) throw fail("missing array field 'sequence'");
  for (const auto& t : j["sequence"]) {
    if (!t.is_string()) throw fail("sequence items must be strings");
    p.tokens.push_back(t.get<std::string>());
  }
  if (p.tokens.empty()) throw fail("instance '" + p.id + "' has an empty sequence");
  if (j.contains("label") && !j["label"].is_null()) {
    const auto l = j["label"].is_string() ? j["label"].get<std::string>() : std::string();
    if (l == "inlier") {
      p.label = Label::Inlier;
    } else if (l == "outlier") {
      p.label = Label::Outlier;
    } else {
      throw fail("label must be \"inlier\" or \"outlier\"");
    }
  }
  return p;
}

inline std::vector<std::pair<std::size_t, ParsedLine>> read_lines(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::vector<std::pair<std::size_t, ParsedLine>> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    out.emplace_back(line_no, parse_record(line, line_no));
  }
  return out;
}

}  // namespace detail

/// Loads a JSONL dataset, inferring vocabulary (first-appearance order) and
/// schema from the whole file.
inline Dataset load_jsonl(const std::string& path, const LoadOptions& opts = {}) {
  auto lines = detail::read_lines(path);
  if (lines.empty()) throw DataError("'" + path + "' contains no records");
  Dataset ds;
  std::vector<RawRecord> raws;
  raws.reserve(lines.size());
  for (const auto& [_, p] : lines) raws.push_back(p.raw);
  ds.schema = AttributeSchema::infer(raws);
  for (auto& [line_no, p] : lines) {
    AttributedSequence inst;
    inst.id = std::move(p.id);
    std::size_t keep = opts.max_length ? std::min(opts.max_length, p.tokens.size()) : p.tokens.size();
    for (std::size_t t = 0; t < keep; ++t) inst.items.push_back(ds.vocabulary.add(p.tokens[t]));
    inst.attributes = encode_attributes(p.raw, ds.schema, UnknownLevelPolicy::Reject);
    inst.raw = std::move(p.raw);
    inst.label = p.label;
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

/// Loads a JSONL dataset against a fixed vocabulary and schema (e.g. those
/// of a trained model). Unknown item tokens are rejected with the line number.
inline Dataset load_jsonl(const std::string& path, const ItemVocabulary& vocab, const AttributeSchema& schema,
                          const LoadOptions& opts = {}) {
  auto lines = detail::read_lines(path);
  if (lines.empty()) throw DataError("'" + path + "' contains no records");
  Dataset ds;
  ds.vocabulary = vocab;
  ds.schema = schema;
  for (auto& [line_no, p] : lines) {
    AttributedSequence inst;
    inst.id = std::move(p.id);
    std::size_t keep = opts.max_length ? std::min(opts.max_length, p.tokens.size()) : p.tokens.size();
    for (std::size_t t = 0; t < keep; ++t) {
      auto idx = vocab.find(p.tokens[t]);
      if (!idx) throw DataError("line " + std::to_string(line_no) + ": unknown item token '" + p.tokens[t] + "'");
      inst.items.push_back(*idx);
    }
    try {
      inst.attributes = encode_attributes(p.raw, schema, opts.unknown_levels);
    } catch (const Error& e) {
      throw DataError("line " + std::to_string(line_no) + ": " + e.what());
    }
    inst.raw = std::move(p.raw);
    inst.label = p.label;
    ds.instances.push_back(std::move(inst));
  }
  return ds;
}

inline Json record_to_json(const AttributedSequence& inst, const ItemVocabulary& vocab) {
  Json attrs = Json::object();
  for (const auto& [name, v] : inst.raw) {
    if (const auto* s = std::get_if<std::string>(&v)) {
      attrs[name] = *s;
    } else {
      attrs[name] = std::get<double>(v);
    }
  }
  Json seq = Json::array();
  for (auto i : inst.items) seq.push_back(vocab.token(i));
  Json j{{"id", inst.id}, {"attributes", std::move(attrs)}, {"sequence", std::move(seq)}};
  if (inst.label) j["label"] = label_name(*inst.label);
  return j;
}

inline void save_jsonl(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  for (const auto& inst : ds.instances) out << record_to_json(inst, ds.vocabulary).dump() << '\n';
  if (!out) throw DataError("failed writing '" + path + "'");
}

// ---------------------------------------------------------------------------
// Synthetic generators
// ---------------------------------------------------------------------------

/// Crossed-regime generator. Each attribute regime g owns a transition
/// grammar P_g = s * Perm_g + (1 - s) / r. Inliers pair regime g with
/// grammar g; outliers draw attributes from regime 0 and sequences from
/// grammar 1, so each modality on its own looks normal.
struct SyntheticConfig {
  std::size_t inliers = 1000;
  std::size_t outliers = 20;
  std::size_t regimes = 2;
  std::size_t items = 8;
  std::size_t min_length = 4;
  std::size_t max_length = 12;
  double dependency = 0.8;  // s: weight of the deterministic successor
  std::size_t noise_categorical = 2;
  std::size_t noise_levels = 4;
  std::size_t noise_numerical = 2;
  std::size_t regime_numerical = 0;  // numeric columns whose mean tracks the regime
  double regime_spread = 0.1;
  std::uint64_t seed = 1;

  void validate() const {
    if (regimes < 2) throw ConfigError("synthetic: at least 2 regimes/grammars required");
    if (items < 2) throw ConfigError("synthetic: at least 2 items required");
    if (min_length < 1 || max_length < min_length) throw ConfigError("synthetic: invalid length range");
    if (!(dependency >= 0.0 && dependency <= 1.0)) throw ConfigError("synthetic: dependency must be in [0,1]");
    if (noise_categorical > 0 && noise_levels < 2) throw ConfigError("synthetic: noise_levels must be >= 2");
    const double total = static_cast<double>(inliers + outliers);
    const double frac = total > 0 ? static_cast<double>(outliers) / total : 0.0;
    if (!(frac > 0.0 && frac < 0.5)) throw ConfigError("synthetic: outlier fraction must lie in (0, 0.5)");
  }
};

inline Json to_json(const SyntheticConfig& c) {
  return Json{{"inliers", c.inliers},
              {"outliers", c.outliers},
              {"regimes", c.regimes},
              {"items", c.items},
              {"min_length", c.min_length},
              {"max_length", c.max_length},
              {"dependency", c.dependency},
              {"noise_categorical", c.noise_categorical},
              {"noise_levels", c.noise_levels},
              {"noise_numerical", c.noise_numerical},
              {"regime_numerical", c.regime_numerical},
              {"regime_spread", c.regime_spread},
              {"seed", c.seed}};
}

struct SyntheticDataset {
  Dataset dataset;
  std::vector<Matrix> grammars;      // row-stochastic r x r transition matrices
  std::vector<Vector> regime_means;  // per-regime means of the regime-tracking numeric columns
};

inline SyntheticDataset generate_synthetic(const SyntheticConfig& cfg) {
  cfg.validate();
  RandomSource rng(cfg.seed);
  const std::size_t r = cfg.items;

  // Successor permutations that disagree with every other regime's at each item.
  std::vector<std::vector<std::size_t>> succ;
  while (succ.size() < cfg.regimes) {
    std::vector<std::size_t> perm(r);
    for (std::size_t i = 0; i < r; ++i) perm[i] = i;
    bool ok = false;
    for (int attempt = 0; attempt < 10000 && !ok; ++attempt) {
      rng.shuffle(perm);
      ok = true;
      for (const auto& other : succ)
        for (std::size_t a = 0; a < r && ok; ++a) ok = perm[a] != other[a];
    }
    if (!ok) throw ConfigError("synthetic: cannot build disagreeing grammars; use more items than regimes");
    succ.push_back(perm);
  }

  SyntheticDataset out;
  for (const auto& perm : succ) {
    Matrix p = Matrix::Constant(r, r, (1.0 - cfg.dependency) / static_cast<double>(r));
    for (std::size_t a = 0; a < r; ++a) p(a, perm[a]) += cfg.dependency;
    out.grammars.push_back(std::move(p));
  }
  for (std::size_t g = 0; g < cfg.regimes; ++g) {
    Vector means(cfg.regime_numerical);
    for (std::size_t c = 0; c < cfg.regime_numerical; ++c) means(c) = rng.uniform(0.2, 0.8);
    out.regime_means.push_back(std::move(means));
  }

  auto& ds = out.dataset;
  for (std::size_t i = 0; i < r; ++i) ds.vocabulary.add("e" + std::to_string(i));

  std::vector<bool> is_outlier(cfg.inliers + cfg.outliers, false);
  for (std::size_t i = 0; i < cfg.outliers; ++i) is_outlier[i] = true;
  rng.shuffle(is_outlier);

  const int id_width = static_cast<int>(std::to_string(is_outlier.size()).size());
  std::vector<RawRecord> raws;
  for (std::size_t n = 0; n < is_outlier.size(); ++n) {
    const bool outlier = is_outlier[n];
    const std::size_t regime = outlier ? 0 : rng.below(cfg.regimes);
    const std::size_t grammar = outlier ? 1 : regime;

    RawRecord raw;
    raw["regime"] = "R" + std::to_string(regime);
    for (std::size_t c = 0; c < cfg.regime_numerical; ++c) {
      const double v = out.regime_means[regime](c) + cfg.regime_spread * rng.normal();
      raw["signal" + std::to_string(c)] = std::clamp(v, 0.0, 1.0);
    }
    for (std::size_t c = 0; c < cfg.noise_categorical; ++c)
      raw["cat" + std::to_string(c)] = "L" + std::to_string(rng.below(cfg.noise_levels));
    for (std::size_t c = 0; c < cfg.noise_numerical; ++c) raw["num" + std::to_string(c)] = rng.uniform();

    AttributedSequence inst;
    std::string id = std::to_string(n);
    inst.id = "s" + std::string(static_cast<std::size_t>(id_width) - id.size(), '0') + id;
    const std::size_t len = cfg.min_length + rng.below(cfg.max_length - cfg.min_length + 1);
    inst.items.push_back(rng.below(r));
    const Matrix& p = out.grammars[grammar];
    while (inst.items.size() < len) {
      const auto row = p.row(static_cast<Eigen::Index>(inst.items.back()));
      std::vector<double> w(row.data(), row.data() + r);
      inst.items.push_back(rng.categorical(w));
    }
    inst.label = outlier ? Label::Outlier : Label::Inlier;
    inst.raw = raw;
    raws.push_back(std::move(raw));
    ds.instances.push_back(std::move(inst));
  }
  ds.schema = AttributeSchema::infer(raws);
  for (auto& inst : ds.instances) inst.attributes = encode_attributes(inst.raw, ds.schema, UnknownLevelPolicy::Reject);
  return out;
}

/// Branching generator: the regime is a vector of `depth` branch choices
/// stored as categorical attributes `branch0..`. The item at step t is
/// token "s<t>_<b_t>", so the next item is a deterministic function of the
/// regime and the previous item, while the prefix says nothing about the
/// next branch. Unlabeled.
struct BranchingConfig {
  std::size_t instances = 20000;
  std::size_t depth = 3;
  std::size_t branches = 2;
  std::size_t min_length = 2;
  std::uint64_t seed = 1;

  void validate() const {
    if (instances == 0) throw ConfigError("branching: instances must be >= 1");
    if (depth < 1 || branches < 2) throw ConfigError("branching: depth >= 1 and branches >= 2 required");
    if (min_length < 1 || min_length > depth) throw ConfigError("branching: min_length must be in [1, depth]");
  }
};

inline Dataset generate_branching(const BranchingConfig& cfg) {
  cfg.validate();
  RandomSource rng(cfg.seed);
  Dataset ds;
  for (std::size_t t = 0; t < cfg.depth; ++t)
    for (std::size_t b = 0; b < cfg.branches; ++b) ds.vocabulary.add("s" + std::to_string(t) + "_" + std::to_string(b));
  std::vector<RawRecord> raws;
  for (std::size_t n = 0; n < cfg.instances; ++n) {
    AttributedSequence inst;
    inst.id = "b" + std::to_string(n);
    const std::size_t len = cfg.min_length + rng.below(cfg.depth - cfg.min_length + 1);
    for (std::size_t t = 0; t < cfg.depth; ++t) {
      const std::size_t b = rng.below(cfg.branches);
      inst.raw["branch" + std::to_string(t)] = std::to_string(b);
      if (t < len) inst.items.push_back(t * cfg.branches + b);
    }
    raws.push_back(inst.raw);
    ds.instances.push_back(std::move(inst));
  }
  ds.schema = AttributeSchema::infer(raws);
  for (auto& inst : ds.instances) inst.attributes = encode_attributes(inst.raw, ds.schema, UnknownLevelPolicy::Reject);
  return ds;
}

}  // namespace nas
