#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <vector>

#include "json.hpp"

#include "attrdesc/attributes.hpp"
#include "attrdesc/camera.hpp"
#include "attrdesc/frechet.hpp"
#include "attrdesc/render.hpp"

namespace attrdesc {

/// Everything needed to score a distribution against a target image set.
struct ObjectiveContext {
  std::shared_ptr<const std::vector<ObjectModel>> models;
  CameraIntrinsics intrinsics;
  PlacementMapping mapping;
  /// Shading, crop and supersampling for synthetic renders; the mode is
  /// always Optimization.
  RenderOptions render_options;
  std::shared_ptr<const FeaturePipeline> features;
  /// Target statistics, already regularized.
  std::shared_ptr<const FrechetReference> target;
  std::size_t images_per_eval = 100;
  /// Relative covariance regularization applied to each synthetic set.
  double regularization = 1e-6;
  std::size_t workers = 1;

  void validate() const;
};

/// Builds a context whose target statistics come from `target_images`.
ObjectiveContext make_context(std::vector<ObjectModel> models, const std::vector<Image>& target_images,
                              const FeatureExtractor& extractor, const CameraIntrinsics& intr = {},
                              const PlacementMapping& map = {}, std::size_t images_per_eval = 100,
                              double regularization = 1e-6);

/// Sample K attribute vectors, render them on black, extract features, fit
/// statistics and return the Frechet distance to the target.
double evaluate(const ObjectiveContext& ctx, const AttributeDistribution& dist, std::uint64_t seed);

/// Renders the synthetic set used by evaluate() (Optimization mode).
std::vector<Image> render_set(const ObjectiveContext& ctx, const AttributeDistribution& dist,
                              std::uint64_t seed, std::size_t count);

/// How evaluation seeds are derived from the run seed.
enum class SeedPolicy {
  /// hash(seed, epoch, parameter, candidate): independent noise per evaluation.
  PerCandidate,
  /// hash(seed, epoch, parameter): candidates of one sweep share their noise.
  PerIteration,
  /// One seed for the whole run: every evaluation sees the same noise.
  PerRun,
};

/// Persistent keeps one best-so-far score across the whole run (a candidate
/// is accepted only if it beats every earlier score). ResetPerIteration
/// restarts the comparison at every parameter, making each sweep a plain
/// argmin over the grid.
enum class AcceptanceMode { Persistent, ResetPerIteration };

struct TraceEntry {
  std::size_t epoch = 0;      // 1-based
  std::size_t parameter = 0;  // 0-based flattened index
  std::size_t candidate = 0;  // index into the parameter's grid
  double value = 0.0;
  double fid = 0.0;
  bool accepted = false;
  double best_fid = 0.0;  // best-so-far after this entry
  std::uint64_t seed = 0;
  double wall_seconds = 0.0;
  /// Full parameter vector that was evaluated.
  std::vector<double> theta;
};

struct OptimizationTrace {
  std::vector<TraceEntry> entries;
  std::vector<double> best_theta;
  double best_fid = std::numeric_limits<double>::infinity();
};

void to_json(nlohmann::json& j, const TraceEntry& e);
void from_json(const nlohmann::json& j, TraceEntry& e);

/// One JSON record per line.
void write_trace(const std::filesystem::path& path, const OptimizationTrace& trace);
OptimizationTrace read_trace(const std::filesystem::path& path);

struct DescentOptions {
  std::size_t epochs = 2;
  /// Permutation of parameter indices; empty means 0..M-1 (orientation,
  /// lighting, camera pose).
  std::vector<std::size_t> order;
  /// Parameters that keep their initial value and are never evaluated.
  std::vector<std::size_t> frozen;
  SeedPolicy seed_policy = SeedPolicy::PerIteration;
  AcceptanceMode acceptance = AcceptanceMode::Persistent;
  std::uint64_t seed = 0;
  /// Earlier (possibly partial) trace of the same run; its scores are reused
  /// instead of re-evaluating.
  const OptimizationTrace* resume = nullptr;
  std::function<void(const TraceEntry&)> on_evaluation;
};

struct DescentResult {
  AttributeDistribution distribution;
  OptimizationTrace trace;
  /// Distribution at the end of each epoch.
  std::vector<AttributeDistribution> epoch_distributions;
};

/// Coordinate search over the grids of `space`, one parameter at a time.
/// The candidate for parameter i carries already-visited parameters at their
/// current-epoch values and the rest at their previous-epoch values. A
/// candidate replaces the incumbent only on strict improvement.
DescentResult attribute_descent(const ObjectiveContext& ctx, const AttributeDistribution& init,
                                const SearchSpace& space, const DescentOptions& options = {});

/// Scores a distribution under an evaluation seed. Called concurrently when
/// more than one worker is used.
using Objective = std::function<double(const AttributeDistribution&, std::uint64_t)>;

/// Same search over an arbitrary objective.
DescentResult attribute_descent(const Objective& objective, std::size_t workers, const AttributeDistribution& init,
                                const SearchSpace& space, const DescentOptions& options = {});

/// Group-name based orders, e.g. {"orientation", "lighting", "camera"}.
std::vector<std::size_t> group_order(const AttributeDistribution& dist,
                                     const std::vector<std::string>& groups);
/// Indices of the parameters belonging to the named groups or attribute kinds.
std::vector<std::size_t> parameters_of(const AttributeDistribution& dist,
                                       const std::vector<std::string>& groups);

struct RandomSearchResult {
  AttributeDistribution distribution;
  OptimizationTrace trace;
};

/// Draws `budget` parameter vectors uniformly over the per-parameter grids
/// and keeps the best. `layout` supplies variances and component counts.
RandomSearchResult random_search(const ObjectiveContext& ctx, const AttributeDistribution& layout,
                                 const SearchSpace& space, std::size_t budget, std::uint64_t seed,
                                 SeedPolicy policy = SeedPolicy::PerIteration);
RandomSearchResult random_search(const Objective& objective, std::size_t workers, const AttributeDistribution& layout,
                                 const SearchSpace& space, std::size_t budget, std::uint64_t seed,
                                 SeedPolicy policy = SeedPolicy::PerIteration);

inline constexpr std::size_t kRandomSearchPresetBudget = 200;

}  // namespace attrdesc
