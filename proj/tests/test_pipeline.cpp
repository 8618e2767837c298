#include <filesystem>
#include <fstream>
#include <iterator>
#include <set>

#include "doctest.h"

#include "attrdesc/pipeline.hpp"

using namespace attrdesc;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("attrdesc_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

AttributeDistribution mid_distribution() {
  AttributeModelConfig c;
  c.initial_means = {10, 60, 50, 90, 30, 50};
  return default_distribution(c);
}

// Cheap optimizer configuration: one component per kind, two grid points.
PipelineConfig small_config() {
  PipelineConfig c = nlohmann::json::object().get<PipelineConfig>();
  c.models.builtin = 3;
  c.attributes.component_counts = {1, 1, 1, 1, 1, 1};
  c.attributes.grid_steps = {2, 2, 2, 2, 2, 2};
  c.optimizer.epochs = 1;
  c.optimizer.images_per_eval = 8;
  c.extractor.dimension = 8;
  return c;
}

void write_group(const fs::path& dir, const AttributeDistribution& d, std::size_t n, std::uint64_t seed) {
  fs::create_directories(dir);
  const auto models = builtin_models(3);
  const auto attrs = sample(d, n, seed);
  RenderOptions o;
  for (std::size_t i = 0; i < n; ++i) {
    write_ppm(dir / ("img" + std::to_string(i) + ".ppm"), render(models[i % 3], attrs[i], {}, {}, o).image);
  }
}

}  // namespace

TEST_CASE("group counts follow weights by largest remainder") {
  const auto eq = group_counts({"a", "b", "c"}, {}, 40);
  CHECK(eq.at("a") == 14);
  CHECK(eq.at("b") == 13);
  CHECK(eq.at("c") == 13);
  const std::map<std::string, double> w{{"a", 1.0}, {"b", 3.0}};
  for (std::size_t total : {0u, 1u, 7u, 40u, 101u}) {
    const auto c = group_counts({"a", "b"}, w, total);
    CHECK(c.at("a") + c.at("b") == total);
    CHECK(std::abs(static_cast<double>(c.at("b")) - 0.75 * total) < 1.0);
  }
  CHECK_THROWS(group_counts({}, {}, 3));
  CHECK_THROWS(group_counts({"a"}, {{"a", 0.0}}, 3));
  CHECK_THROWS(group_counts({"a"}, {{"a", -1.0}}, 3));
}

TEST_CASE("generate writes a complete manifest that regenerates foregrounds bit-exactly") {
  const fs::path out = fresh_dir("generate");
  const auto models = builtin_models(10);
  GenerationSettings g;
  g.save_foregrounds = true;
  g.seed = 9;
  const RenderSetup setup = default_render_setup();
  const DatasetManifest m = generate({{"cam-1", mid_distribution()}, {"cam 2", mid_distribution()}}, models, setup, g, out);
  REQUIRE(m.records.size() == 40);
  std::set<std::string> paths;
  std::size_t per_group_1 = 0;
  for (std::size_t k = 0; k < m.records.size(); ++k) {
    const ManifestRecord& r = m.records[k];
    CHECK(r.model == k % 10);
    CHECK(r.label == models[k % 10].label);
    CHECK(fs::exists(out / r.path));
    CHECK(paths.insert(r.path).second);
    for (AttributeKind kind : kAllAttributes) CHECK(normalize(kind, r.attributes[kind]) == r.attributes[kind]);
    per_group_1 += r.group == "cam-1" ? 1 : 0;
    CHECK(read_ppm(out / r.foreground) == regenerate_foreground(r, models, setup));
  }
  CHECK(per_group_1 == 20);
  // Groups are ordered by name; "cam 2" sorts before "cam-1" and is sanitized.
  CHECK(m.records[0].path == "cam-2_000_00000.ppm");
  CHECK(m.records[39].path == "cam-1_009_00039.ppm");

  const DatasetManifest back = load_manifest(out / "manifest.json");
  CHECK(nlohmann::json(back) == nlohmann::json(m));

  // Same inputs, same bytes.
  const fs::path again = fresh_dir("generate_again");
  generate({{"cam-1", mid_distribution()}, {"cam 2", mid_distribution()}}, models, setup, g, again);
  CHECK(slurp(out / "manifest.json") == slurp(again / "manifest.json"));
  CHECK(slurp(out / m.records[7].path) == slurp(again / m.records[7].path));
  fs::remove_all(out);
  fs::remove_all(again);
}

TEST_CASE("zero occlusion probability never flags occluders") {
  const fs::path out = fresh_dir("no_occ");
  GenerationSettings g;
  g.occlusion_probability = 0.0;
  g.images_per_model = 5;
  const DatasetManifest m = generate({{"all", mid_distribution()}}, builtin_models(4), default_render_setup(), g, out);
  for (const auto& r : m.records) CHECK_FALSE(r.occluded);
  g.occlusion_probability = 1.5;
  CHECK_THROWS(generate({{"all", mid_distribution()}}, builtin_models(4), default_render_setup(), g, out));
  CHECK_THROWS(generate({{"all", mid_distribution()}}, {}, default_render_setup(), GenerationSettings{}, out));
  fs::remove_all(out);
}

TEST_CASE("ingest groups by subdirectory, flat directory or manifest") {
  const fs::path root = fresh_dir("ingest");
  write_group(root / "by_cam" / "c1", mid_distribution(), 4, 1);
  write_group(root / "by_cam" / "c2", mid_distribution(), 5, 2);
  write_group(root / "flat", mid_distribution(), 3, 3);
  FeatureExtractor ex;
  ex.dimension = 8;

  const auto groups = ingest_target(root / "by_cam", ex);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].id == "c1");
  CHECK(groups[0].images.size() == 4);
  CHECK(groups[1].stats.count == 5);
  CHECK(groups[1].stats.dimension() == 8);

  const auto flat = ingest_target(root / "flat", ex);
  REQUIRE(flat.size() == 1);
  CHECK(flat[0].id == "all");

  write_group(root / "mixed" / "sub", mid_distribution(), 2, 4);
  write_group(root / "mixed", mid_distribution(), 2, 5);
  CHECK_THROWS(ingest_target(root / "mixed", ex));
  write_group(root / "tiny" / "one", mid_distribution(), 1, 6);
  CHECK_THROWS(ingest_target(root / "tiny", ex));
  CHECK_THROWS(ingest_target(root / "missing", ex));

  GenerationSettings g;
  g.images_per_model = 2;
  generate({{"x", mid_distribution()}, {"y", mid_distribution()}}, builtin_models(3), default_render_setup(), g,
           root / "gen");
  const auto from_manifest = ingest_target(root / "gen" / "manifest.json", ex);
  REQUIRE(from_manifest.size() == 2);
  CHECK(from_manifest[0].images.size() == 3);
  fs::remove_all(root);
}

TEST_CASE("warm stats cache returns identical bytes") {
  const fs::path root = fresh_dir("cache");
  write_group(root / "t" / "a", mid_distribution(), 4, 1);
  FeatureExtractor ex;
  ex.dimension = 8;
  {
    StatsCache cache(root / "stats.json");
    ingest_target(root / "t", ex, &cache);
  }
  const std::string first = slurp(root / "stats.json");
  StatsCache warm(root / "stats.json");
  const auto groups = ingest_target(root / "t", ex, &warm);
  CHECK(slurp(root / "stats.json") == first);
  const auto cold = ingest_target(root / "t", ex);
  CHECK(nlohmann::json(groups[0].stats) == nlohmann::json(cold[0].stats));
  fs::remove_all(root);
}

TEST_CASE("per-group optimization is independent and deterministic") {
  const fs::path root = fresh_dir("groups");
  write_group(root / "t" / "a", mid_distribution(), 6, 1);
  write_group(root / "t" / "b", mid_distribution(), 6, 1);
  write_group(root / "t" / "c", default_distribution(), 6, 2);
  const PipelineConfig cfg = small_config();
  const auto models = cfg.models.load();
  auto groups = ingest_target(root / "t", cfg.extractor);
  REQUIRE(groups.size() == 3);

  const auto res = optimize_groups(groups, models, cfg);
  REQUIRE(res.size() == 3);
  for (const auto& [id, o] : res) REQUIRE(o.result.has_value());
  CHECK(res.at("a").result->distribution == res.at("b").result->distribution);
  CHECK(res.at("a").result->trace.entries.size() == 12);

  // One group alone matches a direct call.
  const ObjectiveContext ctx = make_group_context(groups[2], models, cfg);
  const AttributeDistribution init = default_distribution(cfg.attributes);
  DescentOptions opt;
  opt.epochs = 1;
  const DescentResult direct = attribute_descent(ctx, init, make_search_space(init, cfg.attributes), opt);
  CHECK(direct.distribution == res.at("c").result->distribution);
  CHECK(direct.trace.best_fid == res.at("c").result->trace.best_fid);

  // Processing order does not matter.
  std::reverse(groups.begin(), groups.end());
  const auto rev = optimize_groups(groups, models, cfg);
  for (const auto& [id, o] : res) CHECK(rev.at(id).result->distribution == o.result->distribution);

  // A broken group reports its error and the others still finish.
  groups[0].stats.mean = Eigen::VectorXd::Zero(3);
  groups[0].stats.covariance = Eigen::MatrixXd::Identity(3, 3);
  const auto partial = optimize_groups(groups, models, cfg);
  CHECK_FALSE(partial.at(groups[0].id).result.has_value());
  CHECK_FALSE(partial.at(groups[0].id).error.empty());
  CHECK(partial.at(groups[1].id).result.has_value());
  CHECK_THROWS(optimize_groups({}, models, cfg));
  fs::remove_all(root);
}

TEST_CASE("pipeline config round-trips and resolves relative paths") {
  const fs::path root = fresh_dir("config");
  {
    std::ofstream(root / "cfg.json") << R"({
      "target": "data/target",
      "models": {"builtin": 4, "seed": 2},
      "extractor": {"kind": "gray_downsample", "grid": 8},
      "optimizer": {"epochs": 3, "order": ["camera", "lighting", "orientation"], "seed_policy": "per_run"},
      "generation": {"weights": {"a": 2}},
      "stats_cache": "cache.json"
    })";
  }
  const PipelineConfig c = load_config(root / "cfg.json");
  CHECK(c.target == root / "data/target");
  CHECK(c.stats_cache == root / "cache.json");
  CHECK(c.models.builtin == 4);
  CHECK(c.extractor.kind == FeatureKind::GrayDownsample);
  CHECK(c.extractor.normalize == default_pipeline_extractor().normalize);
  CHECK(c.optimizer.epochs == 3);
  CHECK(c.optimizer.seed_policy == SeedPolicy::PerRun);
  CHECK(c.generation.weights.at("a") == 2.0);
  const AttributeDistribution init = default_distribution(c.attributes);
  CHECK(resolve_parameters(init, c.optimizer.order).front() == init.first_parameter(AttributeKind::CameraHeight));
  CHECK(resolve_parameters(init, {"3", "azimuth"}).size() == 7);
  CHECK_THROWS(resolve_parameters(init, {"13"}));

  const nlohmann::json j = c;
  const PipelineConfig back = j.get<PipelineConfig>();
  CHECK(nlohmann::json(back) == j);
  CHECK(back.digest() == c.digest());

  std::ofstream(root / "bad.json") << "{ not json";
  CHECK_THROWS(load_config(root / "bad.json"));
  std::ofstream(root / "bad2.json") << R"({"optimizer": {"epochs": 0}})";
  CHECK_THROWS(load_config(root / "bad2.json"));
  std::ofstream(root / "bad3.json") << R"({"optimizer": {"seed_policy": "sometimes"}})";
  CHECK_THROWS(load_config(root / "bad3.json"));
  CHECK_THROWS(load_config(root / "absent.json"));
  fs::remove_all(root);
}
