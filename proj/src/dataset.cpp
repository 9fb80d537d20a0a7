#include "oclep/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "oclep/errors.hpp"
#include "schema_json.hpp"

namespace oclep {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view cell, double& out) {
  cell = trim(cell);
  if (cell.empty()) return false;
  const char* first = cell.data();
  const char* last = first + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

std::size_t checked_column_count(const RawTable& table) {
  if (table.rows.empty()) throw DataError("empty table");
  const std::size_t n = table.rows.front().size();
  for (std::size_t i = 1; i < table.rows.size(); ++i) {
    if (table.rows[i].size() != n) {
      throw DataError("line " + std::to_string(i + 1) + ": expected " + std::to_string(n) +
                      " columns, found " + std::to_string(table.rows[i].size()));
    }
  }
  return n;
}

}  // namespace

Label parse_label(std::string_view text) {
  const std::string_view t = trim(text);
  if (t.size() == 6) {
    static constexpr std::string_view kNormal = "normal";
    bool same = true;
    for (std::size_t i = 0; i < 6; ++i) {
      if (std::tolower(static_cast<unsigned char>(t[i])) != kNormal[i]) {
        same = false;
        break;
      }
    }
    if (same) return Label::kNormal;
  }
  return Label::kAnomaly;
}

RawTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read file: " + path);
  RawTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (comma == std::string::npos) {
        cells.emplace_back(line, start);
        break;
      }
      cells.emplace_back(line, start, comma - start);
      start = comma + 1;
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

KindHints infer_kinds(const RawTable& table, bool has_label) {
  const std::size_t n = checked_column_count(table);
  KindHints hints;
  hints.roles.assign(n, ColumnRole::kCategorical);
  std::size_t feature_end = n;
  if (has_label) {
    if (n == 43) {  // NSL-KDD layout: 41 features, label, difficulty
      hints.roles[41] = ColumnRole::kLabel;
      hints.roles[42] = ColumnRole::kDropped;
      feature_end = 41;
    } else if (n >= 2) {
      hints.roles[n - 1] = ColumnRole::kLabel;
      feature_end = n - 1;
    } else {
      throw DataError("labeled table needs at least one feature column");
    }
  }
  for (std::size_t c = 0; c < feature_end; ++c) {
    bool numeric = true;
    for (const auto& row : table.rows) {
      double v;
      if (!parse_double(row[c], v)) {
        numeric = false;
        break;
      }
    }
    if (numeric) hints.roles[c] = ColumnRole::kNumerical;
  }
  return hints;
}

AttributeSchema build_schema(const RawTable& table, const KindHints& hints) {
  const std::size_t n = checked_column_count(table);
  if (hints.roles.size() != n) {
    throw UsageError("kind hints cover " + std::to_string(hints.roles.size()) +
                     " columns but the table has " + std::to_string(n));
  }
  std::size_t label_count = 0;
  for (const auto role : hints.roles) {
    if (role == ColumnRole::kLabel) ++label_count;
  }
  if (label_count > 1) throw UsageError("more than one column designated as label");

  AttributeSchema schema;
  auto& attrs = schema.mutable_attributes();
  std::vector<std::size_t> columns;
  for (std::size_t c = 0; c < n; ++c) {
    if (hints.roles[c] != ColumnRole::kCategorical && hints.roles[c] != ColumnRole::kNumerical)
      continue;
    Attribute a;
    a.name = "c" + std::to_string(c);
    a.kind = hints.roles[c] == ColumnRole::kCategorical ? AttributeKind::kCategorical
                                                        : AttributeKind::kNumerical;
    a.min_value = std::numeric_limits<double>::infinity();
    a.max_value = -std::numeric_limits<double>::infinity();
    attrs.push_back(std::move(a));
    columns.push_back(c);
  }

  std::vector<std::unordered_map<std::string, std::uint32_t>> seen(attrs.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    for (std::size_t i = 0; i < attrs.size(); ++i) {
      const std::string& cell = row[columns[i]];
      Attribute& a = attrs[i];
      if (a.kind == AttributeKind::kCategorical) {
        auto [it, inserted] = seen[i].emplace(cell, static_cast<std::uint32_t>(a.values.size()));
        if (inserted) a.values.push_back(cell);
      } else {
        double v;
        if (!parse_double(cell, v)) {
          throw DataError("line " + std::to_string(r + 1) + ", column '" + a.name +
                          "': not a number: '" + cell + "'");
        }
        a.min_value = std::min(a.min_value, v);
        a.max_value = std::max(a.max_value, v);
      }
    }
  }
  return schema;
}

std::vector<Instance> extract_instances(const RawTable& table, const KindHints& hints) {
  const std::size_t n = checked_column_count(table);
  if (hints.roles.size() != n) throw UsageError("kind hints do not match the table arity");
  std::vector<Instance> out;
  out.reserve(table.rows.size());
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    Instance inst;
    inst.row = r + 1;
    for (std::size_t c = 0; c < n; ++c) {
      switch (hints.roles[c]) {
        case ColumnRole::kCategorical:
        case ColumnRole::kNumerical:
          inst.values.push_back(row[c]);
          break;
        case ColumnRole::kLabel:
          inst.label = parse_label(row[c]);
          break;
        case ColumnRole::kDropped:
          break;
      }
    }
    out.push_back(std::move(inst));
  }
  return out;
}

void fit_discretizer(AttributeSchema& schema, std::span<const Instance> data,
                     std::uint32_t bins) {
  if (bins < 1) throw UsageError("bin count must be at least 1");
  if (data.empty()) throw DataError("cannot fit discretizer on empty data");
  auto& attrs = schema.mutable_attributes();
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    Attribute& a = attrs[i];
    if (a.kind != AttributeKind::kNumerical) continue;
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    for (const auto& inst : data) {
      if (inst.values.size() != attrs.size()) {
        throw DataError("line " + std::to_string(inst.row) + ": expected " +
                        std::to_string(attrs.size()) + " feature cells, found " +
                        std::to_string(inst.values.size()));
      }
      double v;
      if (!parse_double(inst.values[i], v)) {
        throw DataError("line " + std::to_string(inst.row) + ", column '" + a.name +
                        "': not a number: '" + inst.values[i] + "'");
      }
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    a.min_value = lo;
    a.max_value = hi;
    a.bin_edges.clear();
    if (lo == hi) {
      a.bin_edges = {lo, hi};
    } else {
      a.bin_edges.reserve(bins + 1);
      for (std::uint32_t b = 0; b <= bins; ++b) {
        a.bin_edges.push_back(lo + (hi - lo) * static_cast<double>(b) /
                                       static_cast<double>(bins));
      }
      a.bin_edges.front() = lo;
      a.bin_edges.back() = hi;
    }
  }
  schema.finalize_items();
}

void AttributeSchema::finalize_items() {
  ItemId next = 0;
  value_lookup_.assign(attributes_.size(), {});
  for (std::size_t i = 0; i < attributes_.size(); ++i) {
    Attribute& a = attributes_[i];
    a.first_item = next;
    if (a.kind == AttributeKind::kCategorical) {
      a.item_count = static_cast<std::uint32_t>(a.values.size()) + 1;  // + unseen
      for (std::uint32_t v = 0; v < a.values.size(); ++v) value_lookup_[i][a.values[v]] = v;
    } else {
      if (a.bin_edges.empty()) {
        throw UsageError("numerical attribute '" + a.name + "' has no fitted bins");
      }
      a.item_count = a.bin_count();
    }
    next += a.item_count;
  }
  universe_size_ = next;
  fitted_ = true;
}

std::size_t AttributeSchema::attribute_of_item(ItemId id) const {
  if (!fitted_ || id >= universe_size_) throw UsageError("item id out of range");
  std::size_t lo = 0, hi = attributes_.size();
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (attributes_[mid].first_item <= id) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return lo;
}

ItemId AttributeSchema::unknown_item(std::size_t attribute_index) const {
  const Attribute& a = attributes_[attribute_index];
  if (a.kind != AttributeKind::kCategorical) {
    throw UsageError("attribute '" + a.name + "' has no unknown item");
  }
  return a.first_item + static_cast<ItemId>(a.values.size());
}

std::uint32_t AttributeSchema::value_index(std::size_t attribute_index,
                                           std::string_view value, bool& known) const {
  const auto& lookup = value_lookup_[attribute_index];
  const auto it = lookup.find(std::string(value));
  if (it == lookup.end()) {
    known = false;
    return static_cast<std::uint32_t>(attributes_[attribute_index].values.size());
  }
  known = true;
  return it->second;
}

std::uint32_t AttributeSchema::bin_index(std::size_t attribute_index, double value) const {
  const Attribute& a = attributes_[attribute_index];
  const std::uint32_t bins = a.bin_count();
  if (bins <= 1) return 0;
  const auto& e = a.bin_edges;
  const auto it = std::upper_bound(e.begin(), e.end(), value);
  const auto idx = static_cast<std::ptrdiff_t>(it - e.begin()) - 1;
  if (idx < 0) return 0;
  if (idx >= static_cast<std::ptrdiff_t>(bins)) return bins - 1;
  return static_cast<std::uint32_t>(idx);
}

std::string AttributeSchema::describe_item(ItemId id) const {
  const std::size_t ai = attribute_of_item(id);
  const Attribute& a = attributes_[ai];
  const std::uint32_t offset = id - a.first_item;
  if (a.kind == AttributeKind::kCategorical) {
    if (offset < a.values.size()) return a.name + "=" + a.values[offset];
    return a.name + "=<unseen>";
  }
  const std::uint32_t bins = a.bin_count();
  if (bins == 1) {
    if (a.min_value == a.max_value) return a.name + "=" + format_number(a.min_value);
    return format_number(a.min_value) + " <= " + a.name + " <= " + format_number(a.max_value);
  }
  if (offset == 0) return a.name + " < " + format_number(a.bin_edges[1]);
  if (offset == bins - 1) return a.name + " >= " + format_number(a.bin_edges[bins - 1]);
  return format_number(a.bin_edges[offset]) + " <= " + a.name + " < " +
         format_number(a.bin_edges[offset + 1]);
}

ItemSet itemize(const Instance& x, const AttributeSchema& schema) {
  if (!schema.fitted()) throw UsageError("schema discretizer is not fitted");
  const auto& attrs = schema.attributes();
  if (x.values.size() != attrs.size()) {
    throw DataError("line " + std::to_string(x.row) + ": expected " +
                    std::to_string(attrs.size()) + " feature cells, found " +
                    std::to_string(x.values.size()));
  }
  std::vector<ItemId> ids;
  ids.reserve(attrs.size());
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    const Attribute& a = attrs[i];
    if (a.kind == AttributeKind::kCategorical) {
      bool known;
      ids.push_back(a.first_item + schema.value_index(i, x.values[i], known));
    } else {
      double v;
      if (!parse_double(x.values[i], v)) {
        throw DataError("line " + std::to_string(x.row) + ", column '" + a.name +
                        "': not a number: '" + x.values[i] + "'");
      }
      ids.push_back(a.first_item + schema.bin_index(i, v));
    }
  }
  return ItemSet::from_sorted(std::move(ids));
}

double support(const Pattern& p, std::span<const ItemSet> dataset) {
  if (dataset.empty()) throw UsageError("support: dataset is empty");
  std::size_t count = 0;
  for (const auto& x : dataset) {
    if (matches(x, p)) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(dataset.size());
}

double growth_rate(const Pattern& p, std::span<const ItemSet> home,
                   std::span<const ItemSet> opposing) {
  const double home_support = support(p, home);
  const double opposing_support = support(p, opposing);
  if (opposing_support == 0.0) {
    if (home_support == 0.0) return 0.0;
    return std::numeric_limits<double>::infinity();
  }
  return home_support / opposing_support;
}

nlohmann::json detail::schema_to_json_value(const AttributeSchema& schema) {
  nlohmann::json attrs = nlohmann::json::array();
  for (const auto& a : schema.attributes()) {
    nlohmann::json ja;
    ja["name"] = a.name;
    if (a.kind == AttributeKind::kCategorical) {
      ja["kind"] = "categorical";
      ja["values"] = a.values;
    } else {
      ja["kind"] = "numerical";
      ja["min"] = a.min_value;
      ja["max"] = a.max_value;
      ja["edges"] = a.bin_edges;
    }
    attrs.push_back(std::move(ja));
  }
  nlohmann::json j;
  j["version"] = 1;
  j["attributes"] = std::move(attrs);
  return j;
}

AttributeSchema detail::schema_from_json_value(const nlohmann::json& j) {
  if (!j.contains("attributes") || !j["attributes"].is_array()) {
    throw DataError("schema has no attribute list");
  }
  AttributeSchema schema;
  auto& attrs = schema.mutable_attributes();
  bool all_fitted = true;
  for (const auto& ja : j["attributes"]) {
    Attribute a;
    a.name = ja.at("name").get<std::string>();
    const auto kind = ja.at("kind").get<std::string>();
    if (kind == "categorical") {
      a.kind = AttributeKind::kCategorical;
      a.values = ja.at("values").get<std::vector<std::string>>();
    } else if (kind == "numerical") {
      a.kind = AttributeKind::kNumerical;
      a.min_value = ja.at("min").get<double>();
      a.max_value = ja.at("max").get<double>();
      a.bin_edges = ja.at("edges").get<std::vector<double>>();
      if (a.bin_edges.empty()) all_fitted = false;
    } else {
      throw DataError("schema attribute '" + a.name + "' has unknown kind '" + kind + "'");
    }
    attrs.push_back(std::move(a));
  }
  if (all_fitted) schema.finalize_items();
  return schema;
}

std::string schema_to_json(const AttributeSchema& schema) {
  return detail::schema_to_json_value(schema).dump(2) + "\n";
}

AttributeSchema schema_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("schema file is not valid JSON: ") + e.what());
  }
  return detail::schema_from_json_value(j);
}

void save_schema(const AttributeSchema& schema, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write file: " + path);
  out << schema_to_json(schema);
  if (!out) throw DataError("failed writing file: " + path);
}

AttributeSchema load_schema(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return schema_from_json(buf.str());
}

LoadedTable load_table(const std::string& path, bool unlabeled) {
  LoadedTable t;
  t.raw = read_csv(path);
  t.hints = infer_kinds(t.raw, !unlabeled);
  t.instances = extract_instances(t.raw, t.hints);
  for (const auto role : t.hints.roles) {
    if (role == ColumnRole::kDropped) t.difficulty_dropped = true;
  }
  return t;
}

std::span<const char* const> nsl_kdd_feature_names() {
  static constexpr const char* kNames[] = {
      "duration", "protocol_type", "service", "flag", "src_bytes", "dst_bytes", "land",
      "wrong_fragment", "urgent", "hot", "num_failed_logins", "logged_in",
      "num_compromised", "root_shell", "su_attempted", "num_root", "num_file_creations",
      "num_shells", "num_access_files", "num_outbound_cmds", "is_host_login",
      "is_guest_login", "count", "srv_count", "serror_rate", "srv_serror_rate",
      "rerror_rate", "srv_rerror_rate", "same_srv_rate", "diff_srv_rate",
      "srv_diff_host_rate", "dst_host_count", "dst_host_srv_count",
      "dst_host_same_srv_rate", "dst_host_diff_srv_rate", "dst_host_same_src_port_rate",
      "dst_host_srv_diff_host_rate", "dst_host_serror_rate", "dst_host_srv_serror_rate",
      "dst_host_rerror_rate", "dst_host_srv_rerror_rate"};
  return {kNames, std::size(kNames)};
}

}  // namespace oclep
