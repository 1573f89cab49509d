// treegap: negative-type analysis of finite metric trees from the command line.
//
// Exit codes: 0 success, 2 unparseable input, 3 invalid input, 4 internal
// failure (including a failed oracle cross-check).

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <string>

#include "treegap/treegap.hpp"

namespace {

using namespace treegap;

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitInvalid = 3;
constexpr int kExitInternal = 4;

struct CliConfig {
  std::string input_path;
  std::string eta_path;
  std::string format = "auto";
  std::string output = "json";
  double tol = 1e-6;
  std::uint64_t seed = 1;
  double p = 1.0;
  int n = 0;
};

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin), std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidArgument, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

InputFormat tree_format(const std::string& name) {
  if (name == "newick") return InputFormat::Newick;
  if (name == "edgelist") return InputFormat::EdgeList;
  return InputFormat::Auto;
}

TreeHost load_tree(const CliConfig& cfg) {
  if (cfg.format == "matrix") throw Error(ErrorCode::InvalidArgument, "this command needs a tree, not a matrix");
  return share(parse_tree(read_input(cfg.input_path), tree_format(cfg.format)));
}

bool relative_match(double value, double expected, double rel) {
  return std::abs(value - expected) <= rel * std::max(1.0, std::abs(expected));
}

ReportCheck make_check(std::string name, bool passed, std::optional<double> value, std::optional<double> expected,
                       std::string detail = {}) {
  return {std::move(name), passed, value, expected, std::move(detail)};
}

void add_gap(ReportData& r, const TreeHost& tree) {
  r.gap = gamma_T(tree);
  r.extra["witness_gap"] = r.gap->witness_gap;
  r.checks.push_back(make_check("witness_gap_equals_gamma", relative_match(r.gap->witness_gap, r.gap->gamma, 1e-10),
                                r.gap->witness_gap, r.gap->gamma));
}

void add_brute_force(ReportData& r, const TreeHost& tree) {
  if (tree->size() > 9) {
    r.checks.push_back(make_check("brute_force_gamma", true, std::nullopt, r.gap->gamma, "skipped: more than 9 vertices"));
    return;
  }
  const auto bf = brute_force_gamma(tree);
  r.checks.push_back(make_check("brute_force_gamma", relative_match(bf.gamma, r.gap->gamma, 1e-7), bf.gamma,
                                r.gap->gamma, std::to_string(bf.labelings) + " labelings"));
}

void add_maxp(ReportData& r, const FiniteMetric& metric, const TreeHost& tree, const CliConfig& cfg) {
  r.max_p = max_negative_type(metric, cfg.tol);
  if (tree == nullptr) return;
  const std::size_t n = tree->size();
  r.checks.push_back(make_check("tree_has_one_negative_type", r.max_p->upper >= 1.0, r.max_p->p_star, 1.0));
  if (tree->unweighted() && n >= 3) {
    const double bound = tree_maxp_lower_bound(static_cast<int>(n));
    r.extra["tree_maxp_lower_bound"] = bound;
    r.checks.push_back(make_check("p_star_above_tree_bound", r.max_p->upper >= bound, r.max_p->p_star, bound));
  }
  const auto [s, w] = metric.distance_range();
  if (n >= 3 && s < w) {
    const double zeta = zeta_lower_bound(metric, gamma_T(tree).gamma);
    r.extra["zeta"] = zeta;
    r.extra["zeta_interval"] = Json::array({1.0 - zeta, 1.0 + zeta});
    r.checks.push_back(make_check("p_star_above_zeta_interval", r.max_p->upper >= 1.0 + zeta, r.max_p->p_star,
                                  1.0 + zeta));
  }
}

bool all_passed(const ReportData& r) {
  for (const auto& c : r.checks)
    if (!c.passed) return false;
  return true;
}

void print(const Json& j, const CliConfig& cfg, const std::string& preamble = {}) {
  if (cfg.output == "text") {
    std::cout << preamble << dump_text(j);
  } else {
    std::cout << dump_json(j);
  }
}

int finish(const ReportData& r, const CliConfig& cfg, const std::string& preamble = {}) {
  print(report_json(r), cfg, preamble);
  return all_passed(r) ? kExitOk : kExitInternal;
}

int cmd_gap(const CliConfig& cfg) {
  const TreeHost tree = load_tree(cfg);
  ReportData r;
  r.tree_summary = tree_summary(*tree);
  add_gap(r, tree);
  add_brute_force(r, tree);
  return finish(r, cfg);
}

int cmd_maxp(const CliConfig& cfg) {
  ReportData r;
  if (cfg.format == "matrix") {
    const FiniteMetric metric = parse_distance_matrix(read_input(cfg.input_path));
    r.tree_summary = nullptr;
    r.extra["points"] = metric.size();
    add_maxp(r, metric, nullptr, cfg);
  } else {
    const TreeHost tree = load_tree(cfg);
    r.tree_summary = tree_summary(*tree);
    add_maxp(r, metric_from_tree(*tree), tree, cfg);
  }
  return finish(r, cfg);
}

int cmd_check(const CliConfig& cfg) {
  FiniteMetric metric = cfg.format == "matrix" ? parse_distance_matrix(read_input(cfg.input_path))
                                               : metric_from_tree(*load_tree(cfg));
  const NegTypeVerdict v = has_p_negative_type(metric, cfg.p);
  Json j;
  j["p"] = cfg.p;
  const Json verdict = verdict_json(v, metric.labels());
  for (const auto& [key, value] : verdict.items()) j[key] = value;
  print(j, cfg);
  return kExitOk;
}

int report_generated(const MetricTree& built, const CliConfig& cfg, std::optional<double> expected_p,
                     const std::string& label) {
  const TreeHost tree = share(built);
  ReportData r;
  r.tree_summary = tree_summary(*tree);
  add_gap(r, tree);
  const double harmonic = 1.0 / static_cast<double>(tree->edge_count());
  r.checks.push_back(make_check("gamma_equals_inverse_edge_count", relative_match(r.gap->gamma, harmonic, 1e-12),
                                r.gap->gamma, harmonic));
  add_maxp(r, metric_from_tree(*tree), tree, cfg);
  if (expected_p) {
    r.extra[label] = *expected_p;
    const bool ok = label == "star_max_p" ? std::abs(r.max_p->p_star - *expected_p) <= std::max(cfg.tol, 1e-4)
                                          : r.max_p->p_star <= *expected_p + std::max(cfg.tol, 1e-4);
    r.checks.push_back(make_check(label == "star_max_p" ? "p_star_matches_star_formula" : "p_star_below_star_formula",
                                  ok, r.max_p->p_star, *expected_p));
  }
  const std::string edges = emit_edge_list(*tree);
  r.extra["edge_list"] = edges;
  if (cfg.output == "text") {
    Json j = report_json(r);
    j.erase("edge_list");
    print(j, cfg, edges + "\n");
    return all_passed(r) ? kExitOk : kExitInternal;
  }
  return finish(r, cfg);
}

int cmd_star(const CliConfig& cfg) { return report_generated(build_star(cfg.n), cfg, star_max_p(cfg.n), "star_max_p"); }

int cmd_necklace(const CliConfig& cfg) {
  return report_generated(build_necklace(cfg.n), cfg, star_max_p(cfg.n), "star_max_p_of_largest_bead");
}

int cmd_verify(const CliConfig& cfg) {
  const TreeHost tree = load_tree(cfg);
  const EtaVector eta = parse_eta(read_input(cfg.eta_path));
  const EnhancedCheck check = verify_enhanced_inequality(tree, eta.points, eta.eta);
  ReportData r;
  r.tree_summary = tree_summary(*tree);
  r.gap = gamma_T(tree);
  r.extra["margin"] = check.margin;
  r.extra["scale"] = check.scale;
  r.extra["equality"] = check.equality;
  r.checks.push_back(make_check("margin_nonnegative", check.margin >= -1e-10 * check.scale, check.margin, 0.0));
  return finish(r, cfg);
}

int cmd_oracle(const CliConfig& cfg) {
  const TreeHost tree = load_tree(cfg);
  ReportData r;
  r.tree_summary = tree_summary(*tree);
  add_gap(r, tree);
  add_brute_force(r, tree);

  const GapReport& g = *r.gap;
  const double direct = gap_direct(g.generic_simplex, g.generic_weights);
  r.checks.push_back(make_check("edge_formula_matches_direct", relative_match(direct, g.witness_gap, 1e-10), direct,
                                g.witness_gap));

  const auto kkt = kkt_check_generic(tree);
  r.checks.push_back(make_check("kkt_stationarity", kkt.ok, (kkt.lambda1 + kkt.lambda2) / 2.0, g.gamma,
                                "spread " + detail::format_number(std::max(kkt.spread_m, kkt.spread_n), 3)));

  const auto min = minimize_gap_over_loads(g.generic_simplex);
  double worst = 0.0;
  for (std::size_t k = 0; k < min.argmin.m.size(); ++k)
    worst = std::max(worst, std::abs(min.argmin.m[k] - g.generic_weights.m()[k]));
  for (std::size_t k = 0; k < min.argmin.n.size(); ++k)
    worst = std::max(worst, std::abs(min.argmin.n[k] - g.generic_weights.n()[k]));
  r.checks.push_back(make_check("minimizer_is_generic_weighting", min.converged && worst <= 1e-6, worst, 0.0));

  const FiniteMetric metric = metric_from_tree(*tree);
  const NegTypeVerdict v = has_p_negative_type(metric, 1.0);
  r.checks.push_back(make_check("strict_one_negative_type", v.status == NegTypeStatus::Strict, v.lambda_max, 0.0));
  r.checks.push_back(make_check("eigenvalue_below_half_gamma", v.lambda_max <= -g.gamma / 2.0 + 1e-9, v.lambda_max,
                                -g.gamma / 2.0));
  const auto round = generalized_roundness_check(metric, 1.0, 1000, cfg.seed);
  r.checks.push_back(make_check("generalized_roundness_one", round.holds, round.worst_margin, 0.0));
  if (tree->size() <= 6) {
    const double est = gamma_p_estimate(metric, 1.0, 8, 2, cfg.seed);
    r.checks.push_back(make_check("gamma_p_estimate_at_one", std::abs(est - g.gamma) <= 1e-6, est, g.gamma));
  }
  return finish(r, cfg);
}

}  // namespace

int main(int argc, char** argv) {
  CliConfig cfg;
  CLI::App app{"Negative-type gap analysis for finite metric trees"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.add_option("--format", cfg.format, "Input format")
      ->check(CLI::IsMember({"newick", "edgelist", "auto", "matrix"}));
  app.add_option("--output", cfg.output, "Report format")->check(CLI::IsMember({"json", "text"}));
  app.add_option("--tol", cfg.tol, "Bisection tolerance for maximal p")->check(CLI::PositiveNumber);
  app.add_option("--seed", cfg.seed, "Seed for randomized checks");
  app.add_option("--p", cfg.p, "Exponent for 'check'")->check(CLI::NonNegativeNumber);
  app.add_option("--n", cfg.n, "Size for 'star' and 'necklace'");

  auto with_input = [&](CLI::App* sub) {
    sub->add_option("input", cfg.input_path, "Tree file (Newick or edge list), '-' for stdin")->required();
    return sub;
  };
  auto* gap = with_input(app.add_subcommand("gap", "1-negative type gap, generic weights, oracle cross-check"));
  auto* maxp = with_input(app.add_subcommand("maxp", "Maximal p-negative type by bisection"));
  auto* check = with_input(app.add_subcommand("check", "p-negative type verdict at --p"));
  auto* star = app.add_subcommand("star", "Emit and analyse the star with --n leaves");
  auto* necklace = app.add_subcommand("necklace", "Emit and analyse the necklace truncated at --n");
  auto* verify = with_input(app.add_subcommand("verify", "Enhanced inequality margin for an eta file"));
  verify->add_option("eta", cfg.eta_path, "File of 'vertex<TAB>weight' lines")->required();
  auto* oracle = with_input(app.add_subcommand("oracle", "Run the cross-check suite"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (gap->parsed()) return cmd_gap(cfg);
    if (maxp->parsed()) return cmd_maxp(cfg);
    if (check->parsed()) return cmd_check(cfg);
    if (star->parsed()) return cmd_star(cfg);
    if (necklace->parsed()) return cmd_necklace(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (oracle->parsed()) return cmd_oracle(cfg);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return is_parse_error(e.code()) ? kExitParse : kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitInternal;
}
