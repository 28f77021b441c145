#include "cli.hpp"

#include "coarse/error.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>

namespace coarse::cli {

namespace {

constexpr std::size_t kFourPointSamples = 10000;

Json config_json(const RunConfig& c) {
  Json j;
  j["command"] = c.command;
  j["input"] = c.input.string();
  j["metric"] = to_string(c.metric);
  j["dim"] = c.dim;
  j["extent"] = c.extent ? Json(*c.extent) : Json(nullptr);
  j["rank"] = c.rank ? Json(*c.rank) : Json(nullptr);
  j["radius"] = c.radius ? Json(*c.radius) : Json(nullptr);
  j["colors"] = c.colors ? Json(*c.colors) : Json(nullptr);
  j["levels"] = c.levels;
  j["d0"] = to_string(c.d0);
  j["block"] = to_string(c.block);
  j["seed"] = c.seed;
  j["max_points"] = c.max_points;
  return j;
}

class Session {
public:
  Session(const RunConfig& config, std::ostream& out, std::ostream& err) : config_(config), out_(out), err_(err) {
    summary_["config"] = config_json(config);
    summary_["warnings"] = Json::array();
  }

  const RunConfig& config() const { return config_; }
  std::ostream& out() { return out_; }
  Json& summary() { return summary_; }

  void fail(int code) { exit_ = std::max(exit_, code); }
  int exit_code() const { return exit_; }

  void warn(const std::string& text) {
    err_ << "warning: " << text << "\n";
    summary_["warnings"].push_back(text);
  }

  void write(const std::string& name, const std::string& text) {
    std::filesystem::create_directories(config_.output_dir);
    write_text(config_.output_dir / name, text);
    summary_["artifacts"].push_back(name);
  }

  void write(const std::string& name, const Json& doc) { write(name, dump(doc)); }

  void append_summary() {
    summary_["exit"] = exit_;
    if (!std::filesystem::is_directory(config_.output_dir)) return;
    std::ofstream log(config_.output_dir / "summary.jsonl", std::ios::app);
    log << summary_.dump() << "\n";
  }

private:
  const RunConfig& config_;
  std::ostream& out_;
  std::ostream& err_;
  Json summary_;
  int exit_ = kOk;
};

SpacePtr make_space(const RunConfig& c) {
  if (c.extent) return gen_grid(c.dim, *c.extent, c.metric, c.max_points);
  if (c.rank && c.radius) return gen_free_group_ball(*c.rank, *c.radius, c.max_points);
  throw Error(ErrorCode::InvalidArgument, "gen needs --extent (grid) or --rank and --radius (free group)");
}

ColoredCover make_seed(const SpacePtr& space, const RunConfig& c) {
  return inflated_colored_cover(space, c.d0, c.block, c.d0);
}

// ---- per-stage summaries ---------------------------------------------------

void note_space(Session& s, const FiniteMetricSpace& space) {
  s.summary()["counts"]["points"] = space.size();
  s.out() << "space: " << space.size() << " points, diameter " << to_string(space.diameter()) << "\n";
}

void check_cover(Session& s, const ColoredCover& cover) {
  auto report = verify_colored_cover(cover);
  s.summary()["counts"]["cover_elements"] = cover.element_count();
  s.summary()["counts"]["cover_colors"] = cover.colors();
  s.summary()["checks"]["cover"] = report.ok();
  s.out() << "cover: " << cover.element_count() << " elements in " << cover.colors() << " colors, d=" << to_string(cover.d)
          << ", mesh " << to_string(report.mesh) << ", Lebesgue " << to_string(report.lebesgue) << "\n";
  if (!report.ok()) {
    if (report.witness) {
      const auto& w = *report.witness;
      s.out() << "cover violation (" << w.check << "): family " << w.family << " element " << w.element << " vs " << w.other
              << ", points " << cover.space->label(w.first) << " " << cover.space->label(w.second) << ", value "
              << to_string(w.value) << "\n";
    }
    s.fail(kViolation);
  }
}

void check_tower(Session& s, const CoverTower& tower) {
  Json scales = Json::array();
  for (const auto& l : tower.levels)
    scales.push_back({{"d", to_string(l.d)}, {"m", to_string(l.m)}, {"saturated", l.saturated}});
  s.summary()["scales"] = scales;
  for (std::size_t k = 0; k < tower.levels.size(); ++k)
    s.out() << "level " << k << ": d=" << to_string(tower.levels[k].d) << " m=" << to_string(tower.levels[k].m)
            << (tower.levels[k].saturated ? " (whole window)" : "") << "\n";
  if (tower.window_exhausted) s.warn("window exhausted: the tower reaches a level covering the whole window");
  if (tower.truncated())
    s.warn("tower truncated at " + std::to_string(tower.levels.size()) + " of " + std::to_string(tower.requested_levels) + " levels");

  auto report = verify_tower(tower);
  const auto interior = report.interior_violations();
  s.summary()["counts"]["tower_violations"] = report.violations.size();
  s.summary()["counts"]["tower_interior_violations"] = interior;
  s.summary()["checks"]["tower"] = interior == 0;
  for (const auto& v : report.violations) {
    s.out() << (v.frontier ? "frontier " : "") << "tower violation (" << v.condition << ") level " << v.level
            << " color " << v.color << ": " << v.detail << "\n";
  }
  if (interior > 0) s.fail(kViolation);
  else if (!report.violations.empty()) s.warn(std::to_string(report.violations.size()) + " frontier tower violations");
}

void check_trees(Session& s, const std::vector<ScaleTree>& trees) {
  Json list = Json::array();
  bool ok = true;
  for (const auto& t : trees) {
    auto fp = four_point_check(t, kFourPointSamples, s.config().seed + t.color());
    list.push_back({{"color", t.color()},
                    {"nodes", t.nodes().size()},
                    {"virtual_root", t.has_virtual_root()},
                    {"zero_chains", t.zero_chains().size()},
                    {"four_point_failures", fp.failures}});
    if (fp.failures > 0 || !t.is_connected_acyclic()) ok = false;
    if (!t.zero_chains().empty())
      s.warn("color " + std::to_string(t.color()) + ": " + std::to_string(t.zero_chains().size()) + " zero-attachment chains");
  }
  s.summary()["trees"] = list;
  s.summary()["checks"]["trees"] = ok;
  s.out() << "trees: " << trees.size() << " colors, four-point " << (ok ? "ok" : "FAILED") << "\n";
  if (!ok) s.fail(kViolation);
}

void check_report(Session& s, const DistortionReport& r, const CoverTower& tower) {
  auto& c = s.summary()["counts"];
  c["pairs"] = r.all.pairs;
  c["interior_pairs"] = r.interior.pairs;
  c["frontier_pairs"] = r.frontier_pairs();
  c["shortness_violations"] = r.all.shortness_violations();
  c["interior_shortness_violations"] = r.interior.shortness_violations();
  c["lipschitz_violations"] = r.all.lipschitz_violations;
  c["deep_pair_failures"] = r.all.deep_failures();
  c["deep_point_failures"] = r.deep_points.failures.size();
  c["anchor_shortness"] = r.anchor_shortness;
  std::size_t interior_deep_points = 0;
  for (const auto& f : r.deep_points.failures) interior_deep_points += f.interior ? 1 : 0;
  const bool short_ok = r.interior.shortness_violations() == 0;
  const bool lip_ok = r.interior.lipschitz_violations == 0;
  const bool deep_ok = r.interior.deep_failures() == 0;
  const bool exact_ok = interior_deep_points == 0;
  auto& checks = s.summary()["checks"];
  checks["shortness"] = short_ok;
  checks["lipschitz"] = lip_ok;
  checks["deep_pairs"] = deep_ok;
  checks["deep_points"] = exact_ok;

  s.out() << "pairs: " << r.all.pairs << " (" << r.interior.pairs << " interior)\n";
  s.out() << "shortness violations: " << r.all.shortness_violations() << " (" << r.interior.shortness_violations()
          << " interior)\n";
  s.out() << "deep-pair failures: " << r.all.deep_failures() << ", deep-point failures: " << r.deep_points.failures.size()
          << "\n";
  for (std::size_t k = 0; k < tower.levels.size(); ++k) {
    auto rho = r.rho1_at(tower.levels[k].m + 1);
    s.out() << "rho1(m_" << k << " + 1) = " << (rho ? to_string(*rho) : std::string("n/a")) << ", 2^" << k << " = "
            << to_string(pow2(static_cast<int>(k))) << "\n";
  }
  if (r.frontier_pairs() > 0 && (r.all.shortness_violations() > r.interior.shortness_violations() ||
                                 r.all.deep_failures() > r.interior.deep_failures()))
    s.warn("violations on frontier pairs only");
  if (!(short_ok && lip_ok && deep_ok && exact_ok)) s.fail(kViolation);
}

// ---- loading chains ----------------------------------------------------------

std::vector<ScaleTree> build_trees(const CoverTower& tower) {
  std::vector<ScaleTree> trees;
  for (std::size_t c = 0; c < tower.colors; ++c) trees.push_back(build_tree(tower, c));
  return trees;
}

bool same_trees(const std::vector<ScaleTree>& a, const std::vector<ScaleTree>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t c = 0; c < a.size(); ++c) {
    if (a[c].root() != b[c].root() || a[c].nodes().size() != b[c].nodes().size()) return false;
    for (NodeId i = 0; i < a[c].nodes().size(); ++i) {
      const auto& x = a[c].nodes()[i];
      const auto& y = b[c].nodes()[i];
      if (x.is_virtual != y.is_virtual || x.ref != y.ref || x.parent != y.parent || x.attach != y.attach) return false;
    }
  }
  return true;
}

const Json& need(const Json& doc, const char* name) {
  if (!doc.contains(name)) throw Error(ErrorCode::ParseError, std::string("missing field '") + name + "'");
  return doc.at(name);
}

// ---- commands ----------------------------------------------------------------

void cmd_gen(Session& s) {
  auto space = make_space(s.config());
  note_space(s, *space);
  s.write("space.json", to_json(*space));
}

void cmd_cover(Session& s) {
  auto space = space_from_json(read_json(s.config().input), s.config().max_points);
  auto cover = make_seed(space, s.config());
  check_cover(s, cover);
  s.write("cover.json", to_json(cover));
}

CoverTower tower_stage(Session& s, const SpacePtr& space, const ColoredCover& seed) {
  const std::size_t colors = s.config().colors.value_or(std::max<std::size_t>(seed.colors(), 1));
  auto tower = build_tower(space, colors, s.config().levels, seed);
  check_tower(s, tower);
  return tower;
}

void cmd_tower(Session& s) {
  auto seed = cover_from_json(read_json(s.config().input), s.config().max_points);
  auto tower = tower_stage(s, seed.space, seed);
  s.write("tower.json", to_json(tower));
}

void cmd_trees(Session& s) {
  auto tower = tower_from_json(read_json(s.config().input), s.config().max_points);
  auto trees = build_trees(tower);
  check_trees(s, trees);
  s.write("trees.json", to_json(tower, trees));
}

void cmd_embed(Session& s) {
  auto doc = read_json(s.config().input);
  auto tower = tower_from_json(need(doc, "tower"), s.config().max_points);
  auto trees = trees_from_json(doc, tower);
  auto e = embed_space(tower, trees, s.config().workers);
  s.summary()["counts"]["anchored_nodes"] = e.anchors.size();
  s.write("embedding.json", to_json(tower, trees, e));
}

void write_report(Session& s, const CoverTower& tower, const std::vector<ScaleTree>& trees, const Embedding& e) {
  auto r = distortion_report(tower, trees, e, s.config().workers);
  check_report(s, r, tower);
  s.write("report.json", to_json(r, tower));
  s.write("report.csv", report_csv(r));
}

void cmd_report(Session& s) {
  auto doc = read_json(s.config().input);
  const auto& trees_doc = need(doc, "trees");
  auto tower = tower_from_json(need(trees_doc, "tower"), s.config().max_points);
  auto trees = trees_from_json(trees_doc, tower);
  auto e = embedding_from_json(doc, tower);
  write_report(s, tower, trees, e);
}

void cmd_pipeline(Session& s) {
  auto space = make_space(s.config());
  note_space(s, *space);
  auto seed = make_seed(space, s.config());
  check_cover(s, seed);
  auto tower = tower_stage(s, space, seed);
  auto trees = build_trees(tower);
  check_trees(s, trees);
  auto e = embed_space(tower, trees, s.config().workers);
  s.write("space.json", to_json(*space));
  s.write("cover.json", to_json(seed));
  s.write("tower.json", to_json(tower));
  s.write("trees.json", to_json(tower, trees));
  s.write("embedding.json", to_json(tower, trees, e));
  write_report(s, tower, trees, e);
}

void verify_report_doc(Session& s, const Json& doc) {
  // internal consistency of a stored report
  bool ok = true;
  Rational previous_reg{-1};
  const auto& buckets = need(doc, "buckets");
  for (std::size_t i = buckets.size(); i-- > 0;) {
    const auto& b = buckets[i];
    Rational rho1 = parse_rational(b.at("rho1").get<std::string>());
    Rational rho2 = parse_rational(b.at("rho2").get<std::string>());
    Rational reg = parse_rational(b.at("rho1_regularized").get<std::string>());
    if (rho1 > rho2 || reg > rho1 || (previous_reg >= Rational(0) && reg > previous_reg)) ok = false;
    previous_reg = reg;
  }
  const auto& inner = need(doc, "interior");
  std::uint64_t interior_failures = need(inner, "lipschitz_violations").get<std::uint64_t>();
  for (const auto& v : need(inner, "shortness")) interior_failures += v.at("violations").get<std::uint64_t>();
  for (const auto& d : need(inner, "deep_pairs")) interior_failures += d.at("failures").get<std::uint64_t>();
  for (const auto& f : need(need(doc, "deep_points"), "failures")) interior_failures += f.at("interior").get<bool>() ? 1 : 0;
  s.summary()["checks"]["report_consistent"] = ok;
  s.summary()["counts"]["interior_failures"] = interior_failures;
  s.out() << "report: envelopes " << (ok ? "consistent" : "INCONSISTENT") << ", interior failures " << interior_failures << "\n";
  if (!ok || interior_failures > 0) s.fail(kViolation);
}

void cmd_verify(Session& s) {
  auto doc = read_json(s.config().input);
  const auto kind = artifact_kind(doc);
  s.summary()["verified"] = to_string(kind);
  switch (kind) {
    case ArtifactKind::Space: {
      auto space = space_from_json(doc, s.config().max_points);
      note_space(s, *space);
      if (space->size() <= 2000) {
        if (auto bad = find_metric_violation(*space)) {
          s.out() << "metric violation at " << space->label((*bad)[0]) << " " << space->label((*bad)[1]) << " "
                  << space->label((*bad)[2]) << "\n";
          s.fail(kViolation);
        }
      }
      break;
    }
    case ArtifactKind::Cover: check_cover(s, cover_from_json(doc, s.config().max_points)); break;
    case ArtifactKind::Tower: check_tower(s, tower_from_json(doc, s.config().max_points)); break;
    case ArtifactKind::Trees: {
      auto tower = tower_from_json(need(doc, "tower"), s.config().max_points);
      auto trees = trees_from_json(doc, tower);
      check_trees(s, trees);
      const bool same = same_trees(trees, build_trees(tower));
      s.summary()["checks"]["trees_match_tower"] = same;
      if (!same) {
        s.out() << "trees do not match the ones built from the embedded tower\n";
        s.fail(kViolation);
      }
      break;
    }
    case ArtifactKind::Embedding: {
      const auto& trees_doc = need(doc, "trees");
      auto tower = tower_from_json(need(trees_doc, "tower"), s.config().max_points);
      auto trees = trees_from_json(trees_doc, tower);
      auto stored = embedding_from_json(doc, tower);
      auto fresh = embed_space(tower, trees, s.config().workers);
      const bool same = stored.points == fresh.points;
      s.summary()["checks"]["embedding_matches_trees"] = same;
      if (!same) {
        for (PointId p = 0; p < stored.points.size(); ++p) {
          if (stored.points[p] == fresh.points[p]) continue;
          s.out() << "embedding differs at point " << tower.space->label(p) << "\n";
          break;
        }
        s.fail(kViolation);
      }
      break;
    }
    case ArtifactKind::Report: verify_report_doc(s, doc); break;
  }
  s.out() << "verify " << to_string(kind) << ": " << (s.exit_code() == kOk ? "ok" : "FAILED") << "\n";
}

}  // namespace

void validate(const RunConfig& c) {
  static const std::vector<std::string> commands{"gen", "cover", "tower", "trees", "embed", "report", "verify", "pipeline"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw Error(ErrorCode::InvalidArgument, "unknown command '" + c.command + "'");
  if (c.levels < 1) throw Error(ErrorCode::InvalidArgument, "--levels must be >= 1");
  if (c.colors && *c.colors < 1) throw Error(ErrorCode::InvalidArgument, "--colors must be >= 1");
  if (c.max_points < 1) throw Error(ErrorCode::InvalidArgument, "--max-points must be positive");
  if (c.workers < 1) throw Error(ErrorCode::InvalidArgument, "--workers must be positive");
  if (c.d0 <= Rational(0) || c.block < Rational(0)) throw Error(ErrorCode::InvalidArgument, "--d0 must be positive and --block non-negative");
  const bool needs_input = c.command != "gen" && c.command != "pipeline";
  if (needs_input && c.input.empty()) throw Error(ErrorCode::InvalidArgument, c.command + " needs --input");
}

int run(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Session s(config, out, err);
  try {
    validate(config);
    if (config.command == "gen") cmd_gen(s);
    else if (config.command == "cover") cmd_cover(s);
    else if (config.command == "tower") cmd_tower(s);
    else if (config.command == "trees") cmd_trees(s);
    else if (config.command == "embed") cmd_embed(s);
    else if (config.command == "report") cmd_report(s);
    else if (config.command == "verify") cmd_verify(s);
    else cmd_pipeline(s);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    s.summary()["error"] = e.what();
    s.fail(kInputError);
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed artifact: " << e.what() << "\n";
    s.summary()["error"] = e.what();
    s.fail(kInputError);
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    s.fail(kInputError);
  }
  s.append_summary();
  return s.exit_code();
}

int main(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Coarse embeddings of finite metric windows into products of trees"};
  app.require_subcommand(1, 1);
  RunConfig config;
  std::string d0, block, metric = "l1";
  std::optional<int> extent, rank, radius;
  std::optional<std::size_t> colors;

  for (const char* name : {"gen", "cover", "tower", "trees", "embed", "report", "verify", "pipeline"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--input", config.input, "input artifact");
    sub->add_option("--output-dir", config.output_dir, "directory for artifacts and summary.jsonl");
    sub->add_option("--metric", metric, "grid norm: l1 or linf");
    sub->add_option("--dim", config.dim, "grid dimension");
    sub->add_option("--extent", extent, "grid half-width");
    sub->add_option("--rank", rank, "free group rank");
    sub->add_option("--radius", radius, "free group ball radius");
    sub->add_option("--colors", colors, "color budget (default: seed colors)");
    sub->add_option("--levels", config.levels, "tower levels");
    sub->add_option("--d0", d0, "seed separation, exact rational");
    sub->add_option("--block", block, "seed cluster diameter, exact rational");
    sub->add_option("--seed", config.seed, "seed for sampled checks");
    sub->add_option("--max-points", config.max_points, "point limit");
    sub->add_option("--workers", config.workers, "threads for pair scans");
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  config.command = app.get_subcommands().front()->get_name();
  config.extent = extent;
  config.rank = rank;
  config.radius = radius;
  config.colors = colors;
  try {
    config.metric = parse_norm(metric);
    if (!d0.empty()) config.d0 = parse_rational(d0);
    if (!block.empty()) config.block = parse_rational(block);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
  return run(config, out, err);
}

}  // namespace coarse::cli
