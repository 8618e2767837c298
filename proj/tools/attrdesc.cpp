#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "attrdesc/analysis.hpp"
#include "attrdesc/closed_loop.hpp"
#include "attrdesc/frechet.hpp"
#include "attrdesc/optimizer.hpp"
#include "attrdesc/pipeline.hpp"
#include "attrdesc/seeding.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace attrdesc;

namespace {

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::optional<std::size_t> images_per_eval;
  std::vector<std::string> order;
  std::string out;
};

void add_common(CLI::App* cmd, Overrides& o, bool positional_config = true) {
  if (positional_config) cmd->add_option("config_file", o.config, "Pipeline config file");
  cmd->add_option("--config", o.config, "Pipeline config file");
  cmd->add_option("--seed", o.seed, "Run seed");
  cmd->add_option("--epochs", o.epochs, "Attribute descent epochs");
  cmd->add_option("--images-per-eval", o.images_per_eval, "Synthetic images per evaluation (K)");
  cmd->add_option("--order", o.order, "Parameter order: group names, kind names or indices")->delimiter(',');
  cmd->add_option("--out", o.out, "Output path");
}

PipelineConfig config_from(const Overrides& o) {
  PipelineConfig c = o.config.empty() ? json::object().get<PipelineConfig>() : load_config(o.config);
  if (o.seed) {
    c.optimizer.seed = *o.seed;
    c.generation.seed = *o.seed;
  }
  if (o.epochs) c.optimizer.epochs = *o.epochs;
  if (o.images_per_eval) c.optimizer.images_per_eval = *o.images_per_eval;
  if (!o.order.empty()) c.optimizer.order = o.order;
  if (c.optimizer.epochs < 1) throw std::invalid_argument("--epochs must be >= 1");
  if (c.optimizer.images_per_eval < 2) throw std::invalid_argument("--images-per-eval must be >= 2");
  return c;
}

fs::path require_out(const Overrides& o) {
  if (o.out.empty()) throw std::invalid_argument("--out is required");
  return o.out;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string file_stem(const std::string& group) {
  std::string s;
  for (unsigned char c : group) s.push_back(std::isalnum(c) || c == '-' || c == '_' ? static_cast<char>(c) : '-');
  return s.empty() ? "group" : s;
}

// Learned distributions per group.
json theta_document(const std::map<std::string, AttributeDistribution>& dists) {
  json groups = json::object();
  for (const auto& [g, d] : dists) groups[g] = d;
  return json{{"schema", "attrdesc.theta/1"}, {"groups", groups}};
}

std::map<std::string, AttributeDistribution> load_theta(const fs::path& path) {
  const json j = read_json(path);
  std::map<std::string, AttributeDistribution> out;
  if (j.value("schema", std::string{}) == "attrdesc.theta/1") {
    for (const auto& [g, d] : j.at("groups").items()) out[g] = d.get<AttributeDistribution>();
  } else {
    out["all"] = j.get<AttributeDistribution>();
  }
  if (out.empty()) throw std::invalid_argument(path.string() + " holds no distributions");
  return out;
}

// ---------------------------------------------------------------------------

int cmd_optimize(const Overrides& o, bool resume) {
  const PipelineConfig c = config_from(o);
  if (c.target.empty()) throw std::invalid_argument("config names no target");
  const fs::path out = require_out(o);
  std::optional<StatsCache> cache;
  if (!c.stats_cache.empty()) cache.emplace(c.stats_cache);
  const auto groups = ingest_target(c.target, c.extractor, cache ? &*cache : nullptr);
  const auto models = c.models.load();
  fs::create_directories(out / "traces");

  std::map<std::string, AttributeDistribution> learned;
  json summary{{"config_digest", c.digest()}, {"groups", json::object()}};
  bool failed = false;
  for (const auto& g : groups) {
    const fs::path trace_path = out / "traces" / (file_stem(g.id) + ".jsonl");
    json& s = summary["groups"][g.id];
    try {
      const ObjectiveContext ctx = make_group_context(g, models, c);
      const AttributeDistribution init = default_distribution(c.attributes);
      const SearchSpace space = make_search_space(init, c.attributes);
      DescentOptions opt;
      opt.epochs = c.optimizer.epochs;
      opt.order = resolve_parameters(init, c.optimizer.order);
      opt.frozen = resolve_parameters(init, c.optimizer.frozen);
      opt.seed_policy = c.optimizer.seed_policy;
      opt.acceptance = c.optimizer.acceptance;
      opt.seed = c.optimizer.seed;
      OptimizationTrace previous;
      if (resume && fs::exists(trace_path)) {
        previous = read_trace(trace_path);
        opt.resume = &previous;
      }
      const DescentResult r = attribute_descent(ctx, init, space, opt);
      write_trace(trace_path, r.trace);
      learned[g.id] = r.distribution;
      s = {{"images", g.images.size()},
           {"evaluations", r.trace.entries.size()},
           {"best_fid", r.trace.best_fid},
           {"theta", r.distribution.parameters()},
           {"trace", fs::relative(trace_path, out).generic_string()}};
      std::cout << g.id << ": " << r.trace.entries.size() << " evaluations, best FID " << fmt(r.trace.best_fid)
                << '\n';
    } catch (const std::exception& e) {
      failed = true;
      s = {{"error", e.what()}};
      std::cerr << "group " << g.id << " failed: " << e.what() << '\n';
    }
  }
  write_json(out / "theta.json", theta_document(learned));
  write_json(out / "summary.json", summary);
  return failed ? 1 : 0;
}

int cmd_generate(const Overrides& o, const std::string& theta_path, std::optional<std::size_t> per_model,
                 bool foregrounds) {
  PipelineConfig c = config_from(o);
  if (theta_path.empty()) throw std::invalid_argument("--theta is required");
  if (per_model) c.generation.images_per_model = *per_model;
  if (foregrounds) c.generation.save_foregrounds = true;
  const auto dists = load_theta(theta_path);
  const auto models = c.models.load();
  const DatasetManifest m = generate(dists, models, c.render, c.generation, require_out(o));
  std::cout << m.records.size() << " images written to " << o.out << '\n';
  return 0;
}

// Images of a directory tree or a manifest, pooled into one set. A directory
// holding manifest.json is read through it, which skips saved foregrounds.
std::vector<Image> image_set(const fs::path& p) {
  std::vector<fs::path> files;
  const fs::path manifest = fs::is_directory(p) && fs::exists(p / "manifest.json") ? p / "manifest.json" : p;
  if (fs::is_regular_file(manifest)) {
    const DatasetManifest m = load_manifest(manifest);
    for (const auto& r : m.records) files.push_back(manifest.parent_path() / r.path);
  } else if (fs::is_directory(p)) {
    for (const auto& e : fs::recursive_directory_iterator(p)) {
      if (e.is_regular_file() && e.path().extension() == ".ppm") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    throw std::runtime_error("cannot read image set " + p.string());
  }
  if (files.size() < 2) throw std::invalid_argument(p.string() + " needs at least 2 images");
  std::vector<Image> images;
  images.reserve(files.size());
  for (const auto& f : files) images.push_back(read_ppm(f));
  return images;
}

int cmd_score(const Overrides& o, const std::string& a, const std::string& b) {
  const PipelineConfig c = config_from(o);
  const FeaturePipeline features(c.extractor);
  const double eps = c.optimizer.regularization;
  const GaussianStats sa = regularized(fit_stats(features.extract(image_set(a))), eps);
  const GaussianStats sb = regularized(fit_stats(features.extract(image_set(b))), eps);
  const double d = frechet_distance(sa, sb);
  std::cout << fmt(d) << '\n';
  if (!o.out.empty()) write_json(o.out, {{"a", a}, {"b", b}, {"fid", d}, {"extractor", c.extractor}});
  return 0;
}

json score_row(const MethodScore& m) {
  return {{"method", m.method},
          {"evaluations", m.evaluations},
          {"search_fid", m.search_fid},
          {"final_fid", m.final_fid},
          {"theta", m.distribution.parameters()}};
}

int cmd_benchmark(const Overrides& o, bool closed_loop, std::size_t budget, bool preset, std::size_t runs) {
  const PipelineConfig c = config_from(o);
  const fs::path out = require_out(o);
  if (preset) budget = kRandomSearchPresetBudget;
  struct Case {
    std::string id;
    ObjectiveContext ctx;
    AttributeDistribution init;
    SearchSpace space;
    std::optional<AttributeDistribution> hidden;
  };
  std::vector<Case> cases;
  if (closed_loop || c.target.empty()) {
    ClosedLoopSpec spec = default_closed_loop();
    spec.images_per_eval = c.optimizer.images_per_eval;
    for (std::size_t r = 0; r < runs; ++r) {
      ClosedLoopFixture f = make_closed_loop(spec, r);
      cases.push_back({"closed_loop_" + std::to_string(r), f.context, f.init, f.space, f.hidden});
    }
  } else {
    std::optional<StatsCache> cache;
    if (!c.stats_cache.empty()) cache.emplace(c.stats_cache);
    const auto models = c.models.load();
    for (const auto& g : ingest_target(c.target, c.extractor, cache ? &*cache : nullptr)) {
      const AttributeDistribution init = default_distribution(c.attributes);
      cases.push_back({g.id, make_group_context(g, models, c), init, make_search_space(init, c.attributes), {}});
    }
  }

  fs::create_directories(out);
  std::ofstream table(out / "benchmark.csv");
  if (!table) throw std::runtime_error("cannot write benchmark table");
  table << "case,method,evaluations,search_fid,final_fid\n";
  json doc{{"config_digest", c.digest()}, {"cases", json::array()}};
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const Case& k = cases[i];
    DescentOptions opt;
    opt.epochs = c.optimizer.epochs;
    opt.order = resolve_parameters(k.init, c.optimizer.order);
    opt.frozen = resolve_parameters(k.init, c.optimizer.frozen);
    opt.seed_policy = c.optimizer.seed_policy;
    opt.acceptance = c.optimizer.acceptance;
    opt.seed = c.optimizer.seed + i;
    const BenchmarkReport rep = run_benchmark(k.ctx, k.init, k.space, opt, budget);
    json entry{{"case", k.id},
               {"seed", opt.seed},
               {"heldout_seed", rep.heldout_seed},
               {"methods", {score_row(rep.descent), score_row(rep.random_search), score_row(rep.random_attributes)}}};
    if (k.hidden) {
      const RecoveryReport rec = check_recovery(*k.hidden, rep.descent.distribution, k.space);
      entry["recovery"] = {{"mask", rec.mask()}, {"recovered", rec.all()}, {"error", rec.error}};
      entry["hidden_fid"] = evaluate(k.ctx, *k.hidden, rep.heldout_seed);
    }
    doc["cases"].push_back(entry);
    for (const MethodScore* m : {&rep.descent, &rep.random_search, &rep.random_attributes}) {
      table << k.id << ',' << m->method << ',' << m->evaluations << ',' << fmt(m->search_fid) << ','
            << fmt(m->final_fid) << '\n';
      std::cout << k.id << "  " << m->method << "  evals " << m->evaluations << "  final FID " << fmt(m->final_fid)
                << '\n';
    }
  }
  write_json(out / "benchmark.json", doc);
  return 0;
}

int cmd_analyze(const Overrides& o, const std::string& theta_path, const std::string& manifest_path,
                std::size_t n, std::size_t bins, double threshold) {
  const PipelineConfig c = config_from(o);
  const fs::path out = require_out(o);
  if (theta_path.empty() == manifest_path.empty()) {
    throw std::invalid_argument("give exactly one of --theta or --manifest");
  }
  if (n < 1) throw std::invalid_argument("--samples must be >= 1");
  if (bins < 1) throw std::invalid_argument("--bins must be >= 1");

  std::vector<ViewpointSample> cloud;
  std::vector<AttributeVector> attrs;
  json source;
  if (!theta_path.empty()) {
    const auto dists = load_theta(theta_path);
    std::size_t gi = 0;
    for (const auto& [g, d] : dists) {
      const std::uint64_t seed = derive_seed(c.optimizer.seed, {gi++});
      const auto samples = sample(d, n, seed);
      for (const auto& a : samples) cloud.push_back(viewpoint_of(a, c.render.mapping, threshold, g));
      attrs.insert(attrs.end(), samples.begin(), samples.end());
    }
    source = {{"theta", theta_path}, {"samples_per_group", n}};
  } else {
    const DatasetManifest m = load_manifest(manifest_path);
    cloud = viewpoint_cloud(m, threshold);
    for (const auto& r : m.records) attrs.push_back(r.attributes);
    source = {{"manifest", manifest_path}, {"records", m.records.size()}};
  }

  fs::create_directories(out);
  write_viewpoints_csv(out / "viewpoints.csv", cloud);
  json files = json::array({"viewpoints.csv"});
  for (AttributeKind kind : kAllAttributes) {
    const std::string name = "histogram_" + std::string(name_of(kind)) + ".csv";
    write_histogram_csv(out / name, attribute_histogram(attrs, kind, bins));
    files.push_back(name);
  }
  std::size_t high = 0;
  for (const auto& s : cloud) high += s.high_roll ? 1 : 0;
  write_json(out / "analysis.json", {{"schema", "attrdesc.analysis/1"},
                                     {"source", source},
                                     {"viewpoints", cloud.size()},
                                     {"high_roll", high},
                                     {"roll_threshold_deg", threshold},
                                     {"bins", bins},
                                     {"seed", c.optimizer.seed},
                                     {"files", files}});
  std::cout << cloud.size() << " viewpoints, " << high << " above " << fmt(threshold) << " deg roll\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Attribute descent: learn rendering-attribute distributions and generate datasets"};
  app.require_subcommand(1);

  Overrides opt_o, gen_o, score_o, bench_o, an_o;
  bool resume = false;
  std::string gen_theta;
  std::optional<std::size_t> per_model;
  bool foregrounds = false;
  std::string score_a, score_b;
  bool closed_loop = false, preset = false;
  std::size_t budget = 0, runs = 1;
  std::string an_theta, an_manifest;
  std::size_t an_n = 2000, an_bins = 36;
  double threshold = kDefaultRollThreshold;

  auto* optimize = app.add_subcommand("optimize", "Per-group attribute descent; writes theta.json and traces");
  add_common(optimize, opt_o);
  optimize->add_flag("--resume", resume, "Reuse scores from existing trace files");

  auto* gen = app.add_subcommand("generate", "Render a dataset with manifest from learned distributions");
  add_common(gen, gen_o);
  gen->add_option("--theta", gen_theta, "theta.json from optimize")->required();
  gen->add_option("--images-per-model", per_model, "Images per model");
  gen->add_flag("--foregrounds", foregrounds, "Also save pre-composite foregrounds");

  auto* score = app.add_subcommand("score", "Frechet distance between two image sets or manifests");
  score->add_option("a", score_a, "First image directory or manifest")->required();
  score->add_option("b", score_b, "Second image directory or manifest")->required();
  add_common(score, score_o, false);

  auto* bench = app.add_subcommand("benchmark", "Attribute descent vs random search vs random attributes");
  add_common(bench, bench_o);
  bench->add_flag("--closed-loop", closed_loop, "Use the built-in hidden-parameter target");
  bench->add_option("--budget", budget, "Random-search evaluations (default: match attribute descent)");
  bench->add_flag("--preset-200", preset, "Random-search budget of 200 evaluations");
  bench->add_option("--runs", runs, "Closed-loop runs (target seeds)")->check(CLI::PositiveNumber);

  auto* analyze = app.add_subcommand("analyze", "Viewpoint cloud and attribute histograms as CSV");
  add_common(analyze, an_o);
  analyze->add_option("--theta", an_theta, "theta.json to sample from");
  analyze->add_option("--manifest", an_manifest, "Dataset manifest to read attributes from");
  analyze->add_option("--samples", an_n, "Samples per group when reading theta");
  analyze->add_option("--bins", an_bins, "Histogram bins");
  analyze->add_option("--roll-threshold", threshold, "High-roll threshold in degrees");

  if (argc > 1 && argv[1][0] != '-' && app.get_subcommand_no_throw(argv[1]) == nullptr) {
    std::cerr << "error: unknown subcommand '" << argv[1] << "'\n" << app.help();
    return 2;
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (*optimize) return cmd_optimize(opt_o, resume);
    if (*gen) return cmd_generate(gen_o, gen_theta, per_model, foregrounds);
    if (*score) return cmd_score(score_o, score_a, score_b);
    if (*bench) return cmd_benchmark(bench_o, closed_loop, budget, preset, runs);
    if (*analyze) return cmd_analyze(an_o, an_theta, an_manifest, an_n, an_bins, threshold);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
