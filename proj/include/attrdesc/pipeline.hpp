#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "attrdesc/attributes.hpp"
#include "attrdesc/camera.hpp"
#include "attrdesc/frechet.hpp"
#include "attrdesc/optimizer.hpp"
#include "attrdesc/render.hpp"

namespace attrdesc {

/// Target images of one class or camera with their feature statistics.
struct TargetGroup {
  std::string id;
  std::vector<std::filesystem::path> images;
  GaussianStats stats;
};

struct ManifestRecord {
  std::string path;
  std::string label;
  std::string group;
  std::size_t model = 0;
  AttributeVector attributes;
  int background_id = -1;
  bool occluded = false;
  int occluder_id = -1;
  std::uint64_t seed = 0;
  /// Pre-composite render, when foregrounds were saved.
  std::string foreground;
};

/// Rendering settings a manifest needs for its records to be reproduced.
struct RenderSetup {
  CameraIntrinsics intrinsics;
  PlacementMapping mapping;
  Shading shading;
  CropOptions crop;
  int samples = 1;

  RenderOptions options(RenderMode mode) const;
};

struct DatasetManifest {
  std::string dataset_id;
  std::string config_digest;
  std::string image_format = "ppm";
  RenderSetup render;
  std::vector<ManifestRecord> records;
};

void to_json(nlohmann::json& j, const ManifestRecord& r);
void from_json(const nlohmann::json& j, ManifestRecord& r);
void to_json(nlohmann::json& j, const RenderSetup& r);
void from_json(const nlohmann::json& j, RenderSetup& r);
void to_json(nlohmann::json& j, const DatasetManifest& m);
void from_json(const nlohmann::json& j, DatasetManifest& m);

void save_manifest(const std::filesystem::path& path, const DatasetManifest& m);
DatasetManifest load_manifest(const std::filesystem::path& path);

/// Where the object models come from: `count` procedural vehicles, or
/// model files from a directory (sorted by name).
struct ModelSource {
  std::size_t builtin = 10;
  std::uint64_t seed = 0;
  std::filesystem::path directory;

  std::vector<ObjectModel> load() const;
};

struct OptimizerSettings {
  std::size_t epochs = 2;
  /// Group or kind names ("orientation", "azimuth", ...) or parameter
  /// indices as strings; empty means the default order.
  std::vector<std::string> order;
  std::vector<std::string> frozen;
  SeedPolicy seed_policy = SeedPolicy::PerIteration;
  AcceptanceMode acceptance = AcceptanceMode::Persistent;
  std::uint64_t seed = 0;
  std::size_t images_per_eval = 100;
  double regularization = 1e-6;
};

struct GenerationSettings {
  std::size_t images_per_model = 4;
  double occlusion_probability = 0.3;
  std::size_t backgrounds = 8;
  std::uint64_t seed = 0;
  /// Relative share of each group; groups not listed weigh 1.
  std::map<std::string, double> weights;
  bool save_foregrounds = false;
};

/// Everything the CLI reads from a pipeline config file.
struct PipelineConfig {
  std::filesystem::path target;
  ModelSource models;
  FeatureExtractor extractor;
  AttributeModelConfig attributes;
  RenderSetup render;
  OptimizerSettings optimizer;
  GenerationSettings generation;
  std::filesystem::path stats_cache;

  /// Digest of the serialized config.
  std::string digest() const;
};

/// Reference detector settings used when a config omits them.
FeatureExtractor default_pipeline_extractor();
RenderSetup default_render_setup();

void to_json(nlohmann::json& j, const PipelineConfig& c);
/// Relative paths are kept as written; load_config() resolves them.
void from_json(const nlohmann::json& j, PipelineConfig& c);

/// Reads a config and resolves relative paths against its directory.
PipelineConfig load_config(const std::filesystem::path& path);

std::string seed_policy_name(SeedPolicy p);
SeedPolicy parse_seed_policy(const std::string& s);
std::string acceptance_name(AcceptanceMode m);
AcceptanceMode parse_acceptance(const std::string& s);

/// Resolves names or decimal indices to parameter indices.
std::vector<std::size_t> resolve_parameters(const AttributeDistribution& dist,
                                            const std::vector<std::string>& names);

/// Loads every image of a target and computes per-group statistics.
///  - a manifest file: records grouped by their `group` field
///  - a directory with image subdirectories: one group per subdirectory
///  - a flat directory: a single group "all"
/// With a cache, statistics are looked up and stored by (dataset id,
/// extractor); the cache file is rewritten when new entries were added.
std::vector<TargetGroup> ingest_target(const std::filesystem::path& target, const FeatureExtractor& ex,
                                       StatsCache* cache = nullptr);

/// Image files of a directory (sorted), PPM only.
std::vector<std::filesystem::path> list_images(const std::filesystem::path& dir);

struct GroupOutcome {
  std::optional<DescentResult> result;
  std::string error;
};

/// One independent attribute descent per group, all with the same seed.
/// A failing group records its error and the others still run.
std::map<std::string, GroupOutcome> optimize_groups(const std::vector<TargetGroup>& groups,
                                                    const std::vector<ObjectModel>& models,
                                                    const PipelineConfig& config);

/// Objective for one group's statistics.
ObjectiveContext make_group_context(const TargetGroup& group, const std::vector<ObjectModel>& models,
                                    const PipelineConfig& config);

/// Images per group from the weights by largest remainder (ties go to the
/// earlier group); sums to `total`.
std::map<std::string, std::size_t> group_counts(const std::vector<std::string>& groups,
                                                const std::map<std::string, double>& weights,
                                                std::size_t total);

/// Renders models.size() * images_per_model images in Generation mode and
/// writes them plus `manifest.json` into `out_dir`. Image k uses model
/// k mod models.size() and seed derive_seed(settings.seed, {k}); groups take
/// contiguous blocks of k in name order.
DatasetManifest generate(const std::map<std::string, AttributeDistribution>& dists,
                         const std::vector<ObjectModel>& models, const RenderSetup& render,
                         const GenerationSettings& settings, const std::filesystem::path& out_dir);

/// Renders a record again in Optimization mode (no crop) and returns the
/// 8-bit foreground. Equal to the saved foreground of that record.
Image regenerate_foreground(const ManifestRecord& record, const std::vector<ObjectModel>& models,
                            const RenderSetup& render);

}  // namespace attrdesc
