// Canonical tree document:
//
// {
//   "config":    {"max_depth": int|null, "min_score": real|null, "min_size": int, "mode": "constrained"|"reject"},
//   "format":    "detect-tree/1",
//   "objective": {"name": "f1"|"f2"|<custom>, "x": int|null},
//   "root":      <node>,
//   "schema":    [{"allow_missing": bool, "kind": "numeric"|"categorical", "name": str}, ...],
//   "times":     [int, ...]
// }
//
// <node> = {"count_series": [int, ...], "label": str, "size": int, "split": <split>}   ("split" absent on leaves)
// <split> = {"child_a": <node>, "child_b": <node>, "rule": <rule>, "score": real}
// <rule> = {"feature": str, "kind": "numeric", "missing_side": "A"|"B", "threshold": real}
//        | {"feature": str, "kind": "categorical", "category": str|null}      (null = the missing category)

#include <json.hpp>

#include "detect/tree.hpp"

namespace detect {

namespace {

using nlohmann::json;

constexpr const char* kFormat = "detect-tree/1";

json rule_to_json(const SplitRule& rule) {
  json out;
  out["feature"] = rule.feature;
  if (const auto* le = std::get_if<NumericLe>(&rule.test)) {
    out["kind"] = "numeric";
    out["threshold"] = le->threshold;
    out["missing_side"] = to_string(le->missing_side);
  } else {
    const auto& eq = std::get<CategoryEq>(rule.test);
    out["kind"] = "categorical";
    out["category"] = eq.missing ? json(nullptr) : json(eq.category);
  }
  return out;
}

json node_to_json(const ClusterTree& tree, std::size_t index) {
  const TreeNode& node = tree.nodes[index];
  json out;
  out["label"] = node.label;
  out["size"] = node.size;
  out["count_series"] = node.counts.values();
  if (!node.is_leaf()) {
    json split;
    split["rule"] = rule_to_json(*node.rule);
    split["score"] = node.score;
    split["child_a"] = node_to_json(tree, node.child_a);
    split["child_b"] = node_to_json(tree, node.child_b);
    out["split"] = std::move(split);
  }
  return out;
}

template <typename T>
T required(const json& obj, const char* key) {
  if (!obj.is_object() || !obj.contains(key)) throw DataError(std::string("tree file: missing key '") + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw DataError(std::string("tree file: bad value for '") + key + "': " + e.what());
  }
}

SplitRule rule_from_json(const json& j, const Schema& schema) {
  SplitRule rule;
  rule.feature = required<std::string>(j, "feature");
  auto idx = schema.index_of(rule.feature);
  if (!idx) throw DataError("tree file: rule references unknown feature '" + rule.feature + "'");
  rule.feature_index = *idx;
  const auto kind = required<std::string>(j, "kind");
  if (kind == "numeric") {
    const auto side = required<std::string>(j, "missing_side");
    if (side != "A" && side != "B") throw DataError("tree file: missing_side must be A or B");
    rule.test = NumericLe{required<double>(j, "threshold"), side == "A" ? Side::A : Side::B};
  } else if (kind == "categorical") {
    if (!j.contains("category")) throw DataError("tree file: missing key 'category'");
    const json& c = j.at("category");
    rule.test = c.is_null() ? CategoryEq{{}, true} : CategoryEq{required<std::string>(j, "category"), false};
  } else {
    throw DataError("tree file: unknown rule kind '" + kind + "'");
  }
  return rule;
}

void node_from_json(const json& j, ClusterTree& tree, std::size_t depth) {
  const std::size_t index = tree.nodes.size();
  TreeNode node;
  node.label = required<std::string>(j, "label");
  node.depth = depth;
  node.size = required<std::size_t>(j, "size");
  node.counts = CountSeries(required<std::vector<std::int64_t>>(j, "count_series"));
  tree.nodes.push_back(node);
  if (!j.contains("split")) return;

  const json& split = j.at("split");
  tree.nodes[index].rule = rule_from_json(split.at("rule"), tree.schema);
  tree.nodes[index].score = required<double>(split, "score");
  tree.nodes[index].child_a = tree.nodes.size();
  node_from_json(split.at("child_a"), tree, depth + 1);
  tree.nodes[index].child_b = tree.nodes.size();
  node_from_json(split.at("child_b"), tree, depth + 1);
}

ClusterTree tree_from_json(const json& doc);

}  // namespace

std::string serialize_tree(const ClusterTree& tree) {
  if (tree.nodes.empty()) throw InvalidArgument("tree has no nodes");
  json doc;
  doc["format"] = kFormat;
  doc["times"] = tree.times;
  json schema = json::array();
  for (const auto& f : tree.schema.features) {
    schema.push_back({{"name", f.name}, {"kind", to_string(f.kind)}, {"allow_missing", f.allow_missing}});
  }
  doc["schema"] = std::move(schema);
  doc["objective"] = {{"name", tree.objective}, {"x", tree.x > 0 ? json(tree.x) : json(nullptr)}};
  doc["config"] = {{"min_size", tree.config.min_size},
                   {"mode", to_string(tree.config.mode)},
                   {"min_score", tree.config.min_score ? json(*tree.config.min_score) : json(nullptr)},
                   {"max_depth", tree.config.max_depth ? json(*tree.config.max_depth) : json(nullptr)}};
  doc["root"] = node_to_json(tree, 0);
  return doc.dump(2) + "\n";
}

ClusterTree parse_tree(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("tree file is not valid JSON: ") + e.what());
  }
  try {
    return tree_from_json(doc);
  } catch (const json::exception& e) {
    throw DataError(std::string("tree file: ") + e.what());
  }
}

namespace {

ClusterTree tree_from_json(const json& doc) {
  if (required<std::string>(doc, "format") != kFormat) throw DataError("tree file: unsupported format");

  ClusterTree tree;
  tree.times = required<std::vector<std::int64_t>>(doc, "times");
  for (const json& f : doc.at("schema")) {
    const auto kind = required<std::string>(f, "kind");
    if (kind != "numeric" && kind != "categorical") throw DataError("tree file: unknown feature kind '" + kind + "'");
    tree.schema.features.push_back({required<std::string>(f, "name"),
                                    kind == "numeric" ? FeatureKind::Numeric : FeatureKind::Categorical,
                                    required<bool>(f, "allow_missing")});
  }
  const json& objective = doc.at("objective");
  tree.objective = required<std::string>(objective, "name");
  tree.x = objective.contains("x") && !objective.at("x").is_null() ? required<std::size_t>(objective, "x") : 0;

  const json& config = doc.at("config");
  tree.config.min_size = required<std::size_t>(config, "min_size");
  try {
    tree.config.mode = parse_search_mode(required<std::string>(config, "mode"));
  } catch (const InvalidArgument& e) {
    throw DataError(std::string("tree file: ") + e.what());
  }
  if (config.contains("min_score") && !config.at("min_score").is_null()) {
    tree.config.min_score = required<double>(config, "min_score");
  }
  if (config.contains("max_depth") && !config.at("max_depth").is_null()) {
    tree.config.max_depth = required<std::size_t>(config, "max_depth");
  }
  node_from_json(doc.at("root"), tree, 0);
  return tree;
}

}  // namespace

}  // namespace detect
