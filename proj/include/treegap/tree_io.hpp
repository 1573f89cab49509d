#pragma once

#include <nlohmann/json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "treegap/error.hpp"
#include "treegap/generic.hpp"
#include "treegap/metric.hpp"
#include "treegap/negtype.hpp"
#include "treegap/tree.hpp"

namespace treegap {

using Json = nlohmann::ordered_json;

namespace detail {

inline std::optional<double> parse_double(std::string_view text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) return std::nullopt;
  return value;
}

inline std::string format_number(double x, int digits) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

/// Splits on tabs; a line without tabs falls back to runs of whitespace.
inline std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> fields;
  if (line.find('\t') != std::string_view::npos) {
    std::size_t start = 0;
    for (;;) {
      const std::size_t tab = line.find('\t', start);
      fields.emplace_back(trim(line.substr(start, tab == std::string_view::npos ? tab : tab - start)));
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }
  } else {
    std::istringstream in{std::string(line)};
    for (std::string tok; in >> tok;) fields.push_back(tok);
  }
  return fields;
}

/// Calls `visit(line_number, line)` for each non-blank, non-comment line.
/// Comment lines are passed to `comment` (without the leading '#').
template <class Visit, class Comment>
void for_each_data_line(std::string_view text, Visit&& visit, Comment&& comment) {
  std::size_t line_no = 0, start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    ++line_no;
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    const std::string_view body = trim(line);
    if (!body.empty()) {
      if (body.front() == '#') {
        comment(line_no, trim(body.substr(1)));
      } else {
        visit(line_no, line);
      }
    }
    if (end == text.size()) break;
    start = end + 1;
  }
}

[[noreturn]] inline void line_error(std::size_t line_no, const std::string& what) {
  throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": " + what, line_no);
}

class NewickParser {
 public:
  explicit NewickParser(std::string_view text) : text_(text) {}

  MetricTree parse() {
    skip_space();
    if (pos_ == text_.size() || text_[pos_] == ';') throw Error(ErrorCode::EmptyTree, "empty Newick input");
    const std::size_t top = subtree();
    skip_space();
    expect(';');
    skip_space();
    if (pos_ != text_.size()) fail("unexpected text after ';'");

    std::set<std::string> used;
    for (const auto& n : nodes_) {
      if (n.label) used.insert(*n.label);
    }
    std::vector<VertexId> ids;
    int counter = 0;
    for (auto& n : nodes_) {  // nodes_ is already in preorder
      if (!n.label) {
        std::string synthetic;
        do synthetic = "_" + std::to_string(++counter);
        while (used.count(synthetic) != 0);
        n.label = synthetic;
      }
      ids.push_back(*n.label);
    }
    std::vector<WeightedEdge> edges;
    for (const auto& n : nodes_) {
      if (n.parent != npos) edges.push_back({*n.label, *nodes_[n.parent].label, n.length});
    }
    std::optional<VertexId> root;
    if (nodes_[top].children == 1) root = *nodes_[top].label;
    return build_tree(std::move(ids), edges, root);
  }

 private:
  struct Node {
    std::optional<std::string> label;
    double length = 1.0;
    std::size_t parent = npos;
    std::size_t children = 0;
  };

  [[noreturn]] void fail(const std::string& what) const {
    throw Error(ErrorCode::SyntaxError, "Newick syntax error at position " + std::to_string(pos_) + ": " + what,
                pos_);
  }

  void skip_space() {
    for (;;) {
      while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '[') {
        const std::size_t close = text_.find(']', pos_);
        if (close == std::string_view::npos) fail("unterminated comment");
        pos_ = close + 1;
        continue;
      }
      return;
    }
  }

  void expect(char c) {
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  static bool label_char(char c) {
    return !std::isspace(static_cast<unsigned char>(c)) && std::string_view("()[]':;,").find(c) == std::string_view::npos;
  }

  std::optional<std::string> label() {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == '\'') {
      std::string out;
      ++pos_;
      for (;;) {
        if (pos_ >= text_.size()) fail("unterminated quoted label");
        if (text_[pos_] == '\'') {
          if (pos_ + 1 < text_.size() && text_[pos_ + 1] == '\'') {
            out += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          return out;
        }
        out += text_[pos_++];
      }
    }
    const std::size_t start = pos_;
    while (pos_ < text_.size() && label_char(text_[pos_])) ++pos_;
    if (pos_ == start) return std::nullopt;
    return std::string(text_.substr(start, pos_ - start));
  }

  std::optional<double> length() {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != ':') return std::nullopt;
    ++pos_;
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) ||
                                   text_[pos_] == '.' || text_[pos_] == '-' || text_[pos_] == '+')) {
      ++pos_;
    }
    const auto value = parse_double(text_.substr(start, pos_ - start));
    if (!value || !std::isfinite(*value)) {
      pos_ = start;
      fail("expected a branch length");
    }
    if (*value <= 0.0) {
      throw Error(ErrorCode::NonPositiveBranchLength,
                  "branch length " + format_number(*value, 17) + " at position " + std::to_string(start) +
                      " is not positive",
                  start);
    }
    return value;
  }

  std::size_t subtree() {
    skip_space();
    const std::size_t id = nodes_.size();
    nodes_.emplace_back();
    if (pos_ < text_.size() && text_[pos_] == '(') {
      ++pos_;
      for (;;) {
        const std::size_t child = subtree();
        nodes_[child].parent = id;
        ++nodes_[id].children;
        skip_space();
        if (pos_ < text_.size() && text_[pos_] == ',') {
          ++pos_;
          continue;
        }
        expect(')');
        break;
      }
    }
    auto name = label();
    nodes_[id].label = std::move(name);
    if (nodes_[id].children == 0 && !nodes_[id].label && pos_ < text_.size() && text_[pos_] != ':' &&
        text_[pos_] != ',' && text_[pos_] != ')' && text_[pos_] != ';') {
      fail("unexpected character");
    }
    if (auto len = length()) nodes_[id].length = *len;
    return id;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

inline std::string quote_label(const std::string& label) {
  bool plain = !label.empty();
  for (char c : label) {
    plain = plain && !std::isspace(static_cast<unsigned char>(c)) &&
            std::string_view("()[]':;,").find(c) == std::string_view::npos;
  }
  if (plain) return label;
  std::string out = "'";
  for (char c : label) {
    if (c == '\'') out += '\'';
    out += c;
  }
  return out + "'";
}

}  // namespace detail

/// Parses one Newick statement. Missing branch lengths default to 1; unlabeled
/// nodes are named "_1", "_2", ... in preorder. A Newick root of degree one is
/// kept as the tree root; otherwise the smallest leaf becomes the root.
inline MetricTree parse_newick(std::string_view text) { return detail::NewickParser(text).parse(); }

/// Newick text for the tree, hung from the root's neighbour so that the
/// outermost group has at least two members whenever the tree has three or
/// more vertices. Lengths are written with 17 significant digits.
inline std::string emit_newick(const MetricTree& tree) {
  if (tree.size() == 0) throw Error(ErrorCode::EmptyTree, "tree is empty");
  const std::size_t top = tree.size() == 1 ? tree.root() : tree.children(tree.root()).front();
  std::vector<std::vector<std::pair<std::size_t, double>>> adj(tree.size());
  for (std::size_t v = 0; v < tree.size(); ++v) {
    if (v == tree.root()) continue;
    adj[v].push_back({tree.parent(v), tree.parent_weight(v)});
    adj[tree.parent(v)].push_back({v, tree.parent_weight(v)});
  }
  std::string out;
  auto write = [&](auto&& self, std::size_t v, std::size_t from, double len) -> void {
    std::vector<std::pair<std::size_t, double>> kids;
    for (const auto& nb : adj[v])
      if (nb.first != from) kids.push_back(nb);
    if (!kids.empty()) {
      out += '(';
      for (std::size_t k = 0; k < kids.size(); ++k) {
        if (k) out += ',';
        self(self, kids[k].first, v, kids[k].second);
      }
      out += ')';
    }
    out += detail::quote_label(tree.label(v));
    if (from != npos) out += ":" + detail::format_number(len, 17);
  };
  write(write, top, npos, 0.0);
  return out + ";";
}

/// Edge list: "left<TAB>right<TAB>weight" per line, "#" comments, and an
/// optional "# root <id>" header naming the root leaf.
inline MetricTree parse_edge_list(std::string_view text) {
  std::vector<VertexId> ids;
  std::set<VertexId> seen;
  std::vector<WeightedEdge> edges;
  std::optional<VertexId> root;
  detail::for_each_data_line(
      text,
      [&](std::size_t line_no, std::string_view line) {
        const auto fields = detail::split_fields(line);
        if (fields.size() != 3) detail::line_error(line_no, "expected 'left<TAB>right<TAB>weight'");
        if (fields[0].empty() || fields[1].empty()) detail::line_error(line_no, "empty vertex id");
        const auto weight = detail::parse_double(fields[2]);
        if (!weight || !std::isfinite(*weight)) detail::line_error(line_no, "bad weight '" + fields[2] + "'");
        for (int k = 0; k < 2; ++k)
          if (seen.insert(fields[k]).second) ids.push_back(fields[k]);
        edges.push_back({fields[0], fields[1], *weight});
      },
      [&](std::size_t line_no, std::string_view comment) {
        if (comment.substr(0, 5) == "root " || comment == "root") {
          const auto id = detail::trim(comment.substr(4));
          if (id.empty()) detail::line_error(line_no, "root header without a vertex id");
          root = std::string(id);
        }
      });
  if (edges.empty()) throw Error(ErrorCode::EmptyTree, "edge list has no edges");
  if (root && seen.count(*root) == 0) throw Error(ErrorCode::UnknownVertex, "root '" + *root + "' not in edge list");
  return build_tree(std::move(ids), edges, root);
}

inline std::string emit_edge_list(const MetricTree& tree) {
  std::string out = "# root " + tree.root_label() + "\n";
  for (const auto& e : tree.edges()) out += e.left + "\t" + e.right + "\t" + detail::format_number(e.weight, 17) + "\n";
  return out;
}

/// "vertex<TAB>weight" lines with "#" comments.
inline EtaVector parse_eta(std::string_view text) {
  EtaVector out;
  detail::for_each_data_line(
      text,
      [&](std::size_t line_no, std::string_view line) {
        const auto fields = detail::split_fields(line);
        if (fields.size() != 2) detail::line_error(line_no, "expected 'vertex<TAB>weight'");
        const auto value = detail::parse_double(fields[1]);
        if (!value || !std::isfinite(*value)) detail::line_error(line_no, "bad weight '" + fields[1] + "'");
        out.points.push_back(fields[0]);
        out.eta.push_back(*value);
      },
      [](std::size_t, std::string_view) {});
  if (out.points.empty()) throw Error(ErrorCode::ParseError, "eta file has no entries", 0);
  return out;
}

/// Distance matrix: a header line of point labels, then one row per point
/// (optionally prefixed by its label).
inline FiniteMetric parse_distance_matrix(std::string_view text) {
  std::vector<VertexId> labels;
  std::vector<std::vector<double>> rows;
  detail::for_each_data_line(
      text,
      [&](std::size_t line_no, std::string_view line) {
        auto fields = detail::split_fields(line);
        if (labels.empty()) {
          labels = std::move(fields);
          return;
        }
        const std::size_t n = labels.size();
        if (rows.size() == n) detail::line_error(line_no, "more rows than labels");
        if (fields.size() == n + 1) {
          if (fields.front() != labels[rows.size()]) detail::line_error(line_no, "row label does not match header");
          fields.erase(fields.begin());
        }
        if (fields.size() != n) detail::line_error(line_no, "expected " + std::to_string(n) + " distances");
        std::vector<double> row;
        for (const auto& f : fields) {
          const auto v = detail::parse_double(f);
          if (!v) detail::line_error(line_no, "bad distance '" + f + "'");
          row.push_back(*v);
        }
        rows.push_back(std::move(row));
      },
      [](std::size_t, std::string_view) {});
  if (labels.empty()) throw Error(ErrorCode::EmptyTree, "distance matrix is empty");
  if (rows.size() != labels.size()) throw Error(ErrorCode::ParseError, "distance matrix has too few rows", 0);
  const auto n = static_cast<Eigen::Index>(labels.size());
  Eigen::MatrixXd d(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) d(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
  return FiniteMetric(std::move(labels), d);
}

enum class InputFormat { Newick, EdgeList, Auto };

/// Auto-detection picks Newick when the first non-comment character is '('.
/// Leading "#" lines are skipped before Newick text is parsed.
inline MetricTree parse_tree(std::string_view text, InputFormat format = InputFormat::Auto) {
  std::size_t i = 0;
  while (i < text.size()) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
    } else if (c == '#') {
      i = text.find('\n', i);
      if (i == std::string_view::npos) i = text.size();
    } else {
      break;
    }
  }
  if (format == InputFormat::Auto) format = i < text.size() && text[i] == '(' ? InputFormat::Newick : InputFormat::EdgeList;
  return format == InputFormat::Newick ? parse_newick(text.substr(i)) : parse_edge_list(text);
}

// ---------------------------------------------------------------------------
// Reports

struct ReportCheck {
  std::string name;
  bool passed = false;
  std::optional<double> value;
  std::optional<double> expected;
  std::string detail;
};

struct ReportData {
  Json tree_summary;  // null when the input was not a tree
  std::optional<GapReport> gap;
  std::optional<MaxPEstimate> max_p;
  /// Command-specific fields, written after max_p and before checks.
  Json extra = Json::object();
  std::vector<ReportCheck> checks;
};

inline Json tree_summary(const MetricTree& tree) {
  double total = 0.0;
  for (const auto& e : tree.edges()) total += e.weight;
  Json j;
  j["vertices"] = tree.size();
  j["edges"] = tree.edge_count();
  j["leaves"] = tree.leaves().size();
  j["root"] = tree.root_label();
  j["unweighted"] = tree.unweighted();
  j["total_length"] = total;
  return j;
}

inline Json verdict_json(const NegTypeVerdict& v, const std::vector<VertexId>& labels) {
  Json j;
  j["status"] = to_string(v.status);
  j["lambda_max"] = v.lambda_max;
  j["scale"] = v.scale;
  if (v.certificate) {
    Json cert = Json::object();
    for (std::size_t i = 0; i < labels.size(); ++i) cert[labels[i]] = (*v.certificate)[i];
    j["certificate"] = std::move(cert);
  } else {
    j["certificate"] = nullptr;
  }
  return j;
}

inline Json report_json(const ReportData& r) {
  Json j;
  j["tree_summary"] = r.tree_summary;
  if (r.gap) {
    j["gamma"] = r.gap->gamma;
    j["delta_star"] = r.gap->delta_star;
    Json weights = Json::object();
    const Simplex& s = r.gap->generic_simplex;
    for (std::size_t slot = 0; slot < s.size(); ++slot) {
      weights[s.vertex(slot)] = s.is_a(slot) ? r.gap->generic_weights.m()[slot]
                                             : r.gap->generic_weights.n()[slot - s.q()];
    }
    j["generic_weights"] = std::move(weights);
  } else {
    j["gamma"] = nullptr;
    j["delta_star"] = nullptr;
    j["generic_weights"] = nullptr;
  }
  if (r.max_p) {
    Json m;
    m["p_star"] = r.max_p->p_star;
    m["lower"] = r.max_p->lower;
    m["upper"] = r.max_p->upper;
    m["bracket_width"] = r.max_p->bracket_width;
    m["cap_reached"] = r.max_p->cap_reached;
    m["status_at_p_star"] = to_string(r.max_p->verdict_at_p_star.status);
    j["max_p"] = std::move(m);
  } else {
    j["max_p"] = nullptr;
  }
  for (const auto& [key, value] : r.extra.items()) j[key] = value;
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    Json cj;
    cj["name"] = c.name;
    cj["passed"] = c.passed;
    cj["value"] = c.value ? Json(*c.value) : Json(nullptr);
    cj["expected"] = c.expected ? Json(*c.expected) : Json(nullptr);
    cj["detail"] = c.detail;
    checks.push_back(std::move(cj));
  }
  j["checks"] = std::move(checks);
  return j;
}

namespace detail {

inline void write_json(std::string& out, const Json& j, int indent, int depth) {
  const auto pad = [&](int d) { out.append(static_cast<std::size_t>(d * indent), ' '); };
  switch (j.type()) {
    case Json::value_t::object:
    case Json::value_t::array: {
      const bool obj = j.is_object();
      if (j.empty()) {
        out += obj ? "{}" : "[]";
        return;
      }
      out += obj ? '{' : '[';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += '\n';
        pad(depth + 1);
        if (obj) out += Json(it.key()).dump() + ": ";
        write_json(out, *it, indent, depth + 1);
      }
      out += '\n';
      pad(depth);
      out += obj ? '}' : ']';
      return;
    }
    case Json::value_t::number_float: {
      const double x = j.get<double>();
      out += std::isfinite(x) ? format_number(x, 17) : "null";
      return;
    }
    default:
      out += j.dump();
  }
}

inline void write_text(std::string& out, const Json& j, int depth) {
  const std::string pad(static_cast<std::size_t>(2 * depth), ' ');
  auto scalar = [](const Json& v) -> std::string {
    if (v.is_number_float()) return format_number(v.get<double>(), 6);
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
  };
  auto nested = [](const Json& v) { return (v.is_object() || v.is_array()) && !v.empty(); };
  if (j.is_object()) {
    for (const auto& [key, value] : j.items()) {
      if (nested(value)) {
        out += pad + key + ":\n";
        write_text(out, value, depth + 1);
      } else {
        out += pad + key + ": " + scalar(value) + "\n";
      }
    }
  } else if (j.is_array()) {
    bool all_scalar = true;
    for (const auto& v : j) all_scalar = all_scalar && !nested(v);
    if (all_scalar) {
      out += pad;
      for (std::size_t k = 0; k < j.size(); ++k) out += (k ? ", " : "") + scalar(j[k]);
      out += "\n";
      return;
    }
    for (std::size_t k = 0; k < j.size(); ++k) {
      out += pad + "- [" + std::to_string(k) + "]\n";
      write_text(out, j[k], depth + 1);
    }
  } else {
    out += pad + scalar(j) + "\n";
  }
}

}  // namespace detail

/// JSON with keys in insertion order and every double at 17 significant
/// digits (non-finite values become null).
inline std::string dump_json(const Json& j, int indent = 2) {
  std::string out;
  detail::write_json(out, j, indent, 0);
  return out + "\n";
}

/// Indented "key: value" rendering with doubles at 6 significant digits.
inline std::string dump_text(const Json& j) {
  std::string out;
  detail::write_text(out, j, 0);
  return out;
}

inline std::string emit_report(const ReportData& r) { return dump_json(report_json(r)); }

}  // namespace treegap
