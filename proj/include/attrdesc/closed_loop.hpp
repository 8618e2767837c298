#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "attrdesc/attributes.hpp"
#include "attrdesc/optimizer.hpp"
#include "attrdesc/pipeline.hpp"

namespace attrdesc {

/// Target rendered from known parameters so the optimizer output can be
/// checked against ground truth.
struct ClosedLoopSpec {
  /// Parameter layout of both the hidden and the optimized distribution.
  AttributeModelConfig layout;
  /// Hidden means, flattened in layout order.
  std::vector<double> hidden_theta;
  std::size_t target_images = 200;
  std::uint64_t target_seed = 1000;
  std::size_t builtin_models = 10;
  FeatureExtractor extractor;
  RenderSetup render;
  std::size_t images_per_eval = 100;
  double regularization = 1e-6;
};

/// Single components everywhere except a bimodal azimuth; every hidden mean
/// lies on its kind's search grid.
ClosedLoopSpec default_closed_loop();

struct ClosedLoopFixture {
  AttributeDistribution hidden;
  AttributeDistribution init;
  SearchSpace space;
  ObjectiveContext context;
};

/// Renders the target set with seed `target_seed + run` and builds the
/// objective around it.
ClosedLoopFixture make_closed_loop(const ClosedLoopSpec& spec, std::uint64_t run = 0);

/// Distance between two values of a kind, circular for angular kinds.
double attribute_distance(AttributeKind kind, double a, double b);

struct RecoveryReport {
  /// Per kind: every hidden mean is matched by a learned mean within one
  /// grid step, using the assignment that minimizes the largest error.
  std::array<bool, kAttributeCount> within{};
  std::array<double, kAttributeCount> error{};
  std::array<double, kAttributeCount> step{};
  bool all() const;
  /// One character per kind: '+' when recovered, else R A L D H C.
  std::string mask() const;
};

RecoveryReport check_recovery(const AttributeDistribution& hidden, const AttributeDistribution& learned,
                              const SearchSpace& space);

/// One row of a method comparison.
struct MethodScore {
  std::string method;
  std::size_t evaluations = 0;
  /// Lowest score seen during the search.
  double search_fid = 0.0;
  /// Score of the returned distribution under the shared held-out seed.
  double final_fid = 0.0;
  AttributeDistribution distribution;
};

struct BenchmarkReport {
  MethodScore descent;
  MethodScore random_search;
  MethodScore random_attributes;
  std::uint64_t heldout_seed = 0;
};

/// Attribute descent, random search with the same evaluation count (or
/// `random_search_budget` when nonzero) and the random-attributes baseline.
/// Final scores of all three use one held-out seed.
BenchmarkReport run_benchmark(const ObjectiveContext& ctx, const AttributeDistribution& init,
                              const SearchSpace& space, const DescentOptions& options,
                              std::size_t random_search_budget = 0);

/// Held-out seed used for final scores, derived from the run seed.
std::uint64_t heldout_seed(std::uint64_t seed);

}  // namespace attrdesc
