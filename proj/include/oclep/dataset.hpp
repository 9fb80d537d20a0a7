#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "oclep/itemset.hpp"

namespace oclep {

enum class Label { kNormal, kAnomaly };

// The literal label "normal" (case-insensitive, surrounding blanks ignored)
// is the normal class; anything else is an anomaly.
Label parse_label(std::string_view text);

enum class AttributeKind { kCategorical, kNumerical };

struct Attribute {
  std::string name;
  AttributeKind kind = AttributeKind::kCategorical;

  // Categorical: dictionary in observation order. Item ids are
  // first_item + value index, plus one reserved id for unseen values.
  std::vector<std::string> values;

  // Numerical: observed range and, once fitted, bin_count+1 edges. The last
  // bin is closed at the fitted maximum; out-of-range values clamp to the
  // edge bins.
  double min_value = 0.0;
  double max_value = 0.0;
  std::vector<double> bin_edges;

  ItemId first_item = 0;
  std::uint32_t item_count = 0;

  std::uint32_t bin_count() const {
    return bin_edges.empty() ? 0 : static_cast<std::uint32_t>(bin_edges.size() - 1);
  }
};

// One raw data row: feature cells as text, plus the parsed class label when
// the source file carries one. `row` is the 1-based source line.
struct Instance {
  std::vector<std::string> values;
  std::optional<Label> label;
  std::size_t row = 0;
};

class AttributeSchema {
 public:
  std::size_t attribute_count() const { return attributes_.size(); }
  const std::vector<Attribute>& attributes() const { return attributes_; }
  const Attribute& attribute(std::size_t i) const { return attributes_[i]; }

  bool fitted() const { return fitted_; }
  std::uint32_t item_universe_size() const { return universe_size_; }

  // Attribute owning the given item id.
  std::size_t attribute_of_item(ItemId id) const;

  // Human-readable single-attribute condition, e.g. "service=http" or
  // "5 <= bytes < 10".
  std::string describe_item(ItemId id) const;

  ItemId unknown_item(std::size_t attribute_index) const;

  // Building blocks; used by build_schema / fit_discretizer.
  std::vector<Attribute>& mutable_attributes() { return attributes_; }
  void finalize_items();  // assigns dense ids; requires numerical bins fitted

  std::uint32_t value_index(std::size_t attribute_index, std::string_view value,
                            bool& known) const;
  std::uint32_t bin_index(std::size_t attribute_index, double value) const;

 private:
  std::vector<Attribute> attributes_;
  std::vector<std::unordered_map<std::string, std::uint32_t>> value_lookup_;
  std::uint32_t universe_size_ = 0;
  bool fitted_ = false;
};

struct RawTable {
  std::vector<std::vector<std::string>> rows;  // cells split on commas
};

// Headerless comma-separated text, one instance per line; trailing CR and
// blank lines ignored.
RawTable read_csv(const std::string& path);

enum class ColumnRole { kCategorical, kNumerical, kLabel, kDropped };

struct KindHints {
  std::vector<ColumnRole> roles;  // one per column
};

// Column roles by inspection: a column is numerical when every cell parses as
// a number. With a label column, the last column is the label, except that
// 43-column files follow the NSL-KDD layout (41 features, label, difficulty)
// and drop the trailing difficulty column.
KindHints infer_kinds(const RawTable& table, bool has_label);

// Registers every categorical value and the numeric min/max of each feature
// column. The label column is excluded from the item universe. Ragged rows
// and unparseable numeric cells are data errors naming the row and column.
AttributeSchema build_schema(const RawTable& table, const KindHints& hints);

// Splits rows into feature cells + parsed label per the hints.
std::vector<Instance> extract_instances(const RawTable& table, const KindHints& hints);

// Fits `bins` equal-width intervals per numerical attribute over the observed
// [min, max] of `data`; a constant attribute gets a single bin. Assigns the
// dense item universe.
void fit_discretizer(AttributeSchema& schema, std::span<const Instance> data,
                     std::uint32_t bins);

// Exactly one item per attribute: the categorical value's item (the reserved
// unknown item for unseen values) or the containing bin's item (clamped to the
// edge bins outside the fitted range).
ItemSet itemize(const Instance& x, const AttributeSchema& schema);

// true iff every condition of P holds in x.
inline bool matches(const ItemSet& x, const Pattern& p) { return p.is_subset_of(x); }

// Fraction of instances in D matching P.
double support(const Pattern& p, std::span<const ItemSet> dataset);

// supp(P, home) / supp(P, opposing); 0 when both are zero, +infinity when only
// the opposing support is zero.
double growth_rate(const Pattern& p, std::span<const ItemSet> home,
                   std::span<const ItemSet> opposing);

// Schema sidecar (structured text); write-then-read is byte-identical on
// re-write and reproduces itemization bit-for-bit.
std::string schema_to_json(const AttributeSchema& schema);
AttributeSchema schema_from_json(const std::string& text);
void save_schema(const AttributeSchema& schema, const std::string& path);
AttributeSchema load_schema(const std::string& path);

// Convenience loader for NSL-KDD-style files: read_csv + infer_kinds +
// extract_instances. With `unlabeled`, every column is a feature and every
// instance is left label-less.
struct LoadedTable {
  RawTable raw;
  KindHints hints;
  std::vector<Instance> instances;
  bool difficulty_dropped = false;
};
LoadedTable load_table(const std::string& path, bool unlabeled);

// The canonical 41 NSL-KDD feature names, applied by the CLI when a labeled
// file has exactly 41 feature columns.
std::span<const char* const> nsl_kdd_feature_names();

}  // namespace oclep
