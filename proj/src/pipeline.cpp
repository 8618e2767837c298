#include "attrdesc/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <memory>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "attrdesc/parallel.hpp"
#include "attrdesc/seeding.hpp"

namespace attrdesc {

namespace fs = std::filesystem;
using nlohmann::json;

// ---------------------------------------------------------------------------
// Serialization

RenderOptions RenderSetup::options(RenderMode mode) const {
  RenderOptions o;
  o.mode = mode;
  o.shading = shading;
  o.crop = crop;
  o.samples = samples;
  return o;
}

void to_json(json& j, const RenderSetup& r) {
  j = json{{"intrinsics",
            {{"focal_length", r.intrinsics.focal_length},
             {"resolution_scale", r.intrinsics.resolution_scale},
             {"width", r.intrinsics.width},
             {"height", r.intrinsics.height}}},
           {"placement",
            {{"height_scale", r.mapping.height_scale},
             {"distance_scale", r.mapping.distance_scale},
             {"height_offset", r.mapping.height_offset},
             {"distance_offset", r.mapping.distance_offset}}},
           {"shading", {{"ambient", r.shading.ambient}, {"light_elevation", r.shading.light_elevation_deg}}},
           {"crop", {{"enabled", r.crop.enabled}, {"size", r.crop.size}, {"margin", r.crop.margin}}},
           {"samples", r.samples}};
}

void from_json(const json& j, RenderSetup& r) {
  r = default_render_setup();
  if (j.contains("intrinsics")) {
    const json& i = j.at("intrinsics");
    r.intrinsics.focal_length = i.value("focal_length", r.intrinsics.focal_length);
    r.intrinsics.resolution_scale = i.value("resolution_scale", r.intrinsics.resolution_scale);
    r.intrinsics.width = i.value("width", r.intrinsics.width);
    r.intrinsics.height = i.value("height", r.intrinsics.height);
  }
  if (j.contains("placement")) {
    const json& p = j.at("placement");
    r.mapping.height_scale = p.value("height_scale", r.mapping.height_scale);
    r.mapping.distance_scale = p.value("distance_scale", r.mapping.distance_scale);
    r.mapping.height_offset = p.value("height_offset", r.mapping.height_offset);
    r.mapping.distance_offset = p.value("distance_offset", r.mapping.distance_offset);
  }
  if (j.contains("shading")) {
    const json& s = j.at("shading");
    r.shading.ambient = s.value("ambient", r.shading.ambient);
    r.shading.light_elevation_deg = s.value("light_elevation", r.shading.light_elevation_deg);
  }
  if (j.contains("crop")) {
    const json& c = j.at("crop");
    r.crop.enabled = c.value("enabled", r.crop.enabled);
    r.crop.size = c.value("size", r.crop.size);
    r.crop.margin = c.value("margin", r.crop.margin);
  }
  r.samples = j.value("samples", r.samples);
  r.intrinsics.validate();
  r.mapping.validate();
  if (r.samples < 1) throw std::invalid_argument("render.samples must be >= 1");
  if (r.crop.size < 1) throw std::invalid_argument("render.crop.size must be >= 1");
}

void to_json(json& j, const ManifestRecord& r) {
  j = json{{"path", r.path},         {"label", r.label},
           {"group", r.group},       {"model", r.model},
           {"attributes", r.attributes}, {"background_id", r.background_id},
           {"occluded", r.occluded}, {"occluder_id", r.occluder_id},
           {"seed", r.seed}};
  if (!r.foreground.empty()) j["foreground"] = r.foreground;
}

void from_json(const json& j, ManifestRecord& r) {
  r = ManifestRecord{};
  j.at("path").get_to(r.path);
  r.label = j.value("label", std::string{});
  r.group = j.value("group", std::string{});
  r.model = j.value("model", std::size_t{0});
  if (j.contains("attributes")) j.at("attributes").get_to(r.attributes);
  r.background_id = j.value("background_id", -1);
  r.occluded = j.value("occluded", false);
  r.occluder_id = j.value("occluder_id", -1);
  r.seed = j.value("seed", std::uint64_t{0});
  r.foreground = j.value("foreground", std::string{});
}

void to_json(json& j, const DatasetManifest& m) {
  j = json{{"schema", "attrdesc.manifest/1"},
           {"dataset_id", m.dataset_id},
           {"config_digest", m.config_digest},
           {"image_format", m.image_format},
           {"render", m.render},
           {"records", m.records}};
}

void from_json(const json& j, DatasetManifest& m) {
  if (j.value("schema", std::string{}) != "attrdesc.manifest/1") {
    throw std::invalid_argument("not an attrdesc.manifest/1 document");
  }
  m = DatasetManifest{};
  m.dataset_id = j.value("dataset_id", std::string{});
  m.config_digest = j.value("config_digest", std::string{});
  m.image_format = j.value("image_format", std::string("ppm"));
  if (j.contains("render")) j.at("render").get_to(m.render);
  j.at("records").get_to(m.records);
}

void save_manifest(const fs::path& path, const DatasetManifest& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << json(m).dump(1) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

DatasetManifest load_manifest(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in).get<DatasetManifest>();
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

std::vector<ObjectModel> ModelSource::load() const {
  if (directory.empty()) {
    if (builtin == 0) throw std::invalid_argument("model source is empty");
    return builtin_models(builtin, seed);
  }
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(directory)) {
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no model files in " + directory.string());
  std::vector<ObjectModel> out;
  for (const auto& f : files) out.push_back(load_model(f));
  return out;
}

std::string seed_policy_name(SeedPolicy p) {
  switch (p) {
    case SeedPolicy::PerCandidate: return "per_candidate";
    case SeedPolicy::PerIteration: return "per_iteration";
    case SeedPolicy::PerRun: return "per_run";
  }
  return "unknown";
}

SeedPolicy parse_seed_policy(const std::string& s) {
  for (SeedPolicy p : {SeedPolicy::PerCandidate, SeedPolicy::PerIteration, SeedPolicy::PerRun}) {
    if (seed_policy_name(p) == s) return p;
  }
  throw std::invalid_argument("unknown seed policy: " + s);
}

std::string acceptance_name(AcceptanceMode m) {
  return m == AcceptanceMode::Persistent ? "persistent" : "reset_per_iteration";
}

AcceptanceMode parse_acceptance(const std::string& s) {
  if (s == "persistent") return AcceptanceMode::Persistent;
  if (s == "reset_per_iteration") return AcceptanceMode::ResetPerIteration;
  throw std::invalid_argument("unknown acceptance mode: " + s);
}

FeatureExtractor default_pipeline_extractor() {
  FeatureExtractor e;
  e.kind = FeatureKind::RandomProjection;
  e.grid = 16;
  e.dimension = 64;
  e.color = true;
  e.normalize = Normalization::Peak;
  return e;
}

RenderSetup default_render_setup() {
  RenderSetup r;
  r.crop.enabled = true;
  return r;
}

namespace {

template <typename T, std::size_t N>
std::array<T, N> array_from(const json& j, const char* name) {
  const auto v = j.get<std::vector<T>>();
  if (v.size() != N) {
    throw std::invalid_argument(std::string(name) + " needs " + std::to_string(N) + " entries");
  }
  std::array<T, N> out;
  std::copy(v.begin(), v.end(), out.begin());
  return out;
}

std::vector<std::string> string_list(const json& j) {
  std::vector<std::string> out;
  for (const auto& e : j) out.push_back(e.is_string() ? e.get<std::string>() : std::to_string(e.get<long long>()));
  return out;
}

}  // namespace

void to_json(json& j, const PipelineConfig& c) {
  json models = c.models.directory.empty() ? json{{"builtin", c.models.builtin}, {"seed", c.models.seed}}
                                           : json{{"directory", c.models.directory.generic_string()}};
  json attrs{{"component_counts", c.attributes.component_counts},
             {"grid_steps", c.attributes.grid_steps},
             {"variances", c.attributes.variances}};
  if (!c.attributes.initial_means.empty()) attrs["initial_means"] = c.attributes.initial_means;
  json opt{{"epochs", c.optimizer.epochs},
           {"order", c.optimizer.order},
           {"frozen", c.optimizer.frozen},
           {"seed_policy", seed_policy_name(c.optimizer.seed_policy)},
           {"acceptance", acceptance_name(c.optimizer.acceptance)},
           {"seed", c.optimizer.seed},
           {"images_per_eval", c.optimizer.images_per_eval},
           {"regularization", c.optimizer.regularization}};
  json gen{{"images_per_model", c.generation.images_per_model},
           {"occlusion_probability", c.generation.occlusion_probability},
           {"backgrounds", c.generation.backgrounds},
           {"seed", c.generation.seed},
           {"weights", c.generation.weights},
           {"save_foregrounds", c.generation.save_foregrounds}};
  j = json{{"schema", "attrdesc.pipeline/1"},
           {"target", c.target.generic_string()},
           {"models", models},
           {"extractor", c.extractor},
           {"attributes", attrs},
           {"render", c.render},
           {"optimizer", opt},
           {"generation", gen}};
  if (!c.stats_cache.empty()) j["stats_cache"] = c.stats_cache.generic_string();
}

void from_json(const json& j, PipelineConfig& c) {
  if (j.contains("schema") && j.at("schema") != "attrdesc.pipeline/1") {
    throw std::invalid_argument("unsupported pipeline config schema");
  }
  c = PipelineConfig{};
  c.extractor = default_pipeline_extractor();
  c.render = default_render_setup();
  c.target = j.value("target", std::string{});
  if (j.contains("models")) {
    const json& m = j.at("models");
    if (m.contains("directory")) {
      c.models.directory = m.at("directory").get<std::string>();
    } else {
      c.models.builtin = m.value("builtin", c.models.builtin);
      c.models.seed = m.value("seed", c.models.seed);
    }
  }
  if (j.contains("extractor")) {
    // Unset fields fall back to the pipeline defaults, not the bare struct.
    json merged = c.extractor;
    merged.update(j.at("extractor"));
    merged.get_to(c.extractor);
  }
  if (j.contains("attributes")) {
    const json& a = j.at("attributes");
    if (a.contains("component_counts")) {
      c.attributes.component_counts = array_from<std::size_t, kAttributeCount>(a.at("component_counts"), "component_counts");
    }
    if (a.contains("grid_steps")) {
      c.attributes.grid_steps = array_from<std::size_t, kAttributeCount>(a.at("grid_steps"), "grid_steps");
    }
    if (a.contains("variances")) {
      c.attributes.variances = array_from<double, kAttributeCount>(a.at("variances"), "variances");
    }
    if (a.contains("initial_means")) c.attributes.initial_means = a.at("initial_means").get<std::vector<double>>();
  }
  if (j.contains("render")) j.at("render").get_to(c.render);
  if (j.contains("optimizer")) {
    const json& o = j.at("optimizer");
    c.optimizer.epochs = o.value("epochs", c.optimizer.epochs);
    if (o.contains("order")) c.optimizer.order = string_list(o.at("order"));
    if (o.contains("frozen")) c.optimizer.frozen = string_list(o.at("frozen"));
    if (o.contains("seed_policy")) c.optimizer.seed_policy = parse_seed_policy(o.at("seed_policy"));
    if (o.contains("acceptance")) c.optimizer.acceptance = parse_acceptance(o.at("acceptance"));
    c.optimizer.seed = o.value("seed", c.optimizer.seed);
    c.optimizer.images_per_eval = o.value("images_per_eval", c.optimizer.images_per_eval);
    c.optimizer.regularization = o.value("regularization", c.optimizer.regularization);
  }
  if (j.contains("generation")) {
    const json& g = j.at("generation");
    c.generation.images_per_model = g.value("images_per_model", c.generation.images_per_model);
    c.generation.occlusion_probability = g.value("occlusion_probability", c.generation.occlusion_probability);
    c.generation.backgrounds = g.value("backgrounds", c.generation.backgrounds);
    c.generation.seed = g.value("seed", c.generation.seed);
    if (g.contains("weights")) c.generation.weights = g.at("weights").get<std::map<std::string, double>>();
    c.generation.save_foregrounds = g.value("save_foregrounds", c.generation.save_foregrounds);
  }
  c.stats_cache = j.value("stats_cache", std::string{});
  if (c.optimizer.epochs < 1) throw std::invalid_argument("optimizer.epochs must be >= 1");
  if (c.optimizer.images_per_eval < 2) throw std::invalid_argument("optimizer.images_per_eval must be >= 2");
}

std::string PipelineConfig::digest() const { return hex64(fnv1a(json(*this).dump())); }

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  PipelineConfig c;
  try {
    json::parse(in).get_to(c);
  } catch (const json::exception& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
  const fs::path base = path.parent_path();
  auto resolve = [&base](fs::path& p) {
    if (!p.empty() && p.is_relative()) p = base / p;
  };
  resolve(c.target);
  resolve(c.models.directory);
  resolve(c.stats_cache);
  return c;
}

std::vector<std::size_t> resolve_parameters(const AttributeDistribution& dist,
                                            const std::vector<std::string>& names) {
  std::vector<std::size_t> out;
  for (const auto& n : names) {
    if (!n.empty() && std::all_of(n.begin(), n.end(), [](unsigned char c) { return std::isdigit(c); })) {
      const std::size_t i = std::stoul(n);
      if (i >= dist.parameter_count()) throw std::out_of_range("parameter index " + n + " out of range");
      out.push_back(i);
    } else {
      const auto more = parameters_of(dist, {n});
      out.insert(out.end(), more.begin(), more.end());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Target ingestion

std::vector<fs::path> list_images(const fs::path& dir) {
  std::vector<fs::path> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".ppm") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

namespace {

std::string read_bytes(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + p.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

TargetGroup load_group(std::string id, std::vector<fs::path> images, const FeaturePipeline& features,
                       StatsCache* cache, bool& cache_dirty) {
  if (images.size() < 2) {
    throw std::invalid_argument("group '" + id + "' needs at least 2 images, has " + std::to_string(images.size()));
  }
  std::uint64_t h = fnv1a(id);
  for (const auto& p : images) {
    h = fnv1a(p.filename().string(), h);
    h = fnv1a(read_bytes(p), h);
  }
  const std::string dataset_id = id + "@" + hex64(h);
  TargetGroup g{std::move(id), std::move(images), {}};
  if (cache) {
    if (auto hit = cache->find(dataset_id, features.config())) {
      g.stats = *hit;
      return g;
    }
  }
  std::vector<Image> pixels;
  pixels.reserve(g.images.size());
  for (const auto& p : g.images) pixels.push_back(read_ppm(p));
  g.stats = fit_stats(features.extract(pixels));
  if (cache) {
    cache->store(dataset_id, features.config(), g.stats);
    cache_dirty = true;
  }
  return g;
}

}  // namespace

std::vector<TargetGroup> ingest_target(const fs::path& target, const FeatureExtractor& ex, StatsCache* cache) {
  if (!fs::exists(target)) throw std::runtime_error("target " + target.string() + " does not exist");
  std::map<std::string, std::vector<fs::path>> members;
  if (fs::is_regular_file(target)) {
    const DatasetManifest m = load_manifest(target);
    for (const auto& r : m.records) {
      if (r.group.empty()) throw std::invalid_argument("manifest record " + r.path + " has no group label");
      const fs::path p = fs::path(r.path).is_absolute() ? fs::path(r.path) : target.parent_path() / r.path;
      members[r.group].push_back(p);
    }
  } else {
    std::vector<fs::path> subdirs;
    for (const auto& e : fs::directory_iterator(target)) {
      if (e.is_directory() && !list_images(e.path()).empty()) subdirs.push_back(e.path());
    }
    const auto loose = list_images(target);
    if (!subdirs.empty() && !loose.empty()) {
      throw std::invalid_argument(target.string() + " mixes group subdirectories with unlabeled images");
    }
    if (subdirs.empty()) {
      if (loose.empty()) throw std::runtime_error("no images in " + target.string());
      members["all"] = loose;
    }
    for (const auto& d : subdirs) members[d.filename().string()] = list_images(d);
  }
  if (members.empty()) throw std::runtime_error("target has no images");

  const FeaturePipeline features(ex);
  std::vector<TargetGroup> groups;
  bool dirty = false;
  for (auto& [id, images] : members) groups.push_back(load_group(id, std::move(images), features, cache, dirty));
  if (cache && dirty) cache->save();
  return groups;
}

// ---------------------------------------------------------------------------
// Optimization

ObjectiveContext make_group_context(const TargetGroup& group, const std::vector<ObjectModel>& models,
                                    const PipelineConfig& config) {
  ObjectiveContext ctx;
  ctx.models = std::make_shared<const std::vector<ObjectModel>>(models);
  ctx.intrinsics = config.render.intrinsics;
  ctx.mapping = config.render.mapping;
  ctx.render_options = config.render.options(RenderMode::Optimization);
  ctx.features = std::make_shared<const FeaturePipeline>(config.extractor);
  ctx.target = std::make_shared<const FrechetReference>(regularized(group.stats, config.optimizer.regularization));
  ctx.images_per_eval = config.optimizer.images_per_eval;
  ctx.regularization = config.optimizer.regularization;
  ctx.workers = default_workers();
  ctx.validate();
  return ctx;
}

std::map<std::string, GroupOutcome> optimize_groups(const std::vector<TargetGroup>& groups,
                                                    const std::vector<ObjectModel>& models,
                                                    const PipelineConfig& config) {
  if (groups.empty()) throw std::invalid_argument("no target groups to optimize");
  std::map<std::string, GroupOutcome> out;
  for (const auto& g : groups) {
    GroupOutcome& o = out[g.id];
    try {
      const ObjectiveContext ctx = make_group_context(g, models, config);
      const AttributeDistribution init = default_distribution(config.attributes);
      const SearchSpace space = make_search_space(init, config.attributes);
      DescentOptions opt;
      opt.epochs = config.optimizer.epochs;
      opt.order = resolve_parameters(init, config.optimizer.order);
      opt.frozen = resolve_parameters(init, config.optimizer.frozen);
      opt.seed_policy = config.optimizer.seed_policy;
      opt.acceptance = config.optimizer.acceptance;
      opt.seed = config.optimizer.seed;
      o.result = attribute_descent(ctx, init, space, opt);
    } catch (const std::exception& e) {
      o.error = e.what();
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Generation

std::map<std::string, std::size_t> group_counts(const std::vector<std::string>& groups,
                                                const std::map<std::string, double>& weights,
                                                std::size_t total) {
  if (groups.empty()) throw std::invalid_argument("no groups to distribute images over");
  std::vector<double> w;
  for (const auto& g : groups) {
    const auto it = weights.find(g);
    const double v = it == weights.end() ? 1.0 : it->second;
    if (!(v >= 0.0) || !std::isfinite(v)) throw std::invalid_argument("group weight for '" + g + "' must be >= 0");
    w.push_back(v);
  }
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  if (!(sum > 0.0)) throw std::invalid_argument("group weights sum to zero");
  std::vector<std::size_t> count(groups.size());
  std::vector<double> rest(groups.size());
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < groups.size(); ++i) {
    const double exact = total * w[i] / sum;
    count[i] = static_cast<std::size_t>(std::floor(exact));
    rest[i] = exact - count[i];
    assigned += count[i];
  }
  std::vector<std::size_t> idx(groups.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return rest[a] > rest[b]; });
  for (std::size_t k = 0; assigned < total; ++k, ++assigned) ++count[idx[k % idx.size()]];
  std::map<std::string, std::size_t> out;
  for (std::size_t i = 0; i < groups.size(); ++i) out[groups[i]] = count[i];
  return out;
}

namespace {

std::string file_safe(const std::string& s) {
  std::string out;
  for (unsigned char c : s) out.push_back(std::isalnum(c) || c == '-' ? static_cast<char>(c) : '-');
  return out.empty() ? "group" : out;
}

std::string padded(std::size_t v, std::size_t width) {
  std::string s = std::to_string(v);
  return std::string(width > s.size() ? width - s.size() : 0, '0') + s;
}

std::size_t digits(std::size_t v) { return std::to_string(v).size(); }

}  // namespace

DatasetManifest generate(const std::map<std::string, AttributeDistribution>& dists,
                         const std::vector<ObjectModel>& models, const RenderSetup& render_setup,
                         const GenerationSettings& settings, const fs::path& out_dir) {
  if (models.empty()) throw std::invalid_argument("generate needs at least one model");
  if (dists.empty()) throw std::invalid_argument("generate needs at least one group distribution");
  if (!(settings.occlusion_probability >= 0.0 && settings.occlusion_probability <= 1.0)) {
    throw std::invalid_argument("occlusion probability must lie in [0,1]");
  }
  render_setup.intrinsics.validate();

  std::vector<std::string> names;
  for (const auto& [g, d] : dists) names.push_back(g);
  const std::size_t total = models.size() * settings.images_per_model;
  const auto counts = group_counts(names, settings.weights, total);

  RenderOptions base = render_setup.options(RenderMode::Generation);
  if (settings.backgrounds > 0) {
    base.backgrounds = std::make_shared<const std::vector<Image>>(
        procedural_backgrounds(settings.backgrounds, render_setup.intrinsics.width, render_setup.intrinsics.height,
                               derive_seed(settings.seed, {0x6267})));
  }
  if (settings.occlusion_probability > 0.0) base.occluders = default_occluders();
  base.occlusion_probability = settings.occlusion_probability;

  fs::create_directories(out_dir);
  if (settings.save_foregrounds) fs::create_directories(out_dir / "foreground");

  DatasetManifest m;
  m.render = render_setup;
  json digest_doc{{"dists", dists}, {"render", render_setup},
                  {"generation", {{"images_per_model", settings.images_per_model},
                                  {"occlusion_probability", settings.occlusion_probability},
                                  {"backgrounds", settings.backgrounds},
                                  {"seed", settings.seed},
                                  {"weights", settings.weights}}}};
  for (const auto& mod : models) digest_doc["models"].push_back(mod.label);
  m.config_digest = hex64(fnv1a(digest_doc.dump()));
  m.dataset_id = "synthetic-" + m.config_digest.substr(0, 8);
  m.records.resize(total);

  std::vector<const std::string*> group_of(total);
  {
    std::size_t k = 0;
    for (const auto& g : names) {
      for (std::size_t c = 0; c < counts.at(g); ++c) group_of[k++] = &g;
    }
  }
  const std::size_t model_width = std::max<std::size_t>(3, digits(models.size() - 1));
  const std::size_t seq_width = std::max<std::size_t>(5, digits(total == 0 ? 0 : total - 1));

  parallel_for(total, default_workers(), [&](std::size_t k) {
    const std::string& g = *group_of[k];
    ManifestRecord& r = m.records[k];
    r.group = g;
    r.model = k % models.size();
    r.label = models[r.model].label;
    r.seed = derive_seed(settings.seed, {k});
    r.attributes = sample(dists.at(g), 1, derive_seed(r.seed, {1})).front();
    RenderOptions opts = base;
    opts.seed = r.seed;
    const RenderResult res = render(models[r.model], r.attributes, render_setup.intrinsics, render_setup.mapping, opts);
    r.background_id = res.background_id;
    r.occluded = res.occluded;
    r.occluder_id = res.occluder_id;
    const std::string stem = file_safe(g) + "_" + padded(r.model, model_width) + "_" + padded(k, seq_width);
    r.path = stem + ".ppm";
    write_ppm(out_dir / r.path, res.image);
    if (settings.save_foregrounds) {
      r.foreground = (fs::path("foreground") / (stem + ".ppm")).generic_string();
      write_ppm(out_dir / r.foreground, res.foreground);
    }
  });
  save_manifest(out_dir / "manifest.json", m);
  return m;
}

Image regenerate_foreground(const ManifestRecord& record, const std::vector<ObjectModel>& models,
                            const RenderSetup& render_setup) {
  if (record.model >= models.size()) throw std::out_of_range("record model index out of range");
  RenderOptions opts = render_setup.options(RenderMode::Optimization);
  opts.crop.enabled = false;
  opts.seed = record.seed;
  return quantize8(
      render(models[record.model], record.attributes, render_setup.intrinsics, render_setup.mapping, opts).foreground);
}

}  // namespace attrdesc
