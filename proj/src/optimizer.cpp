#include "attrdesc/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <numeric>
#include <random>
#include <set>
#include <stdexcept>

#include "attrdesc/parallel.hpp"
#include "attrdesc/seeding.hpp"

namespace attrdesc {

void ObjectiveContext::validate() const {
  if (!models || models->empty()) throw std::invalid_argument("objective needs at least one model");
  if (!features) throw std::invalid_argument("objective needs a feature extractor");
  if (!target) throw std::invalid_argument("objective needs target statistics");
  if (target->dimension() != features->dimension()) {
    throw std::invalid_argument("target statistics dimension does not match the extractor");
  }
  if (images_per_eval < 2) throw std::invalid_argument("need at least two images per evaluation");
  intrinsics.validate();
  mapping.validate();
}

ObjectiveContext make_context(std::vector<ObjectModel> models, const std::vector<Image>& target_images,
                              const FeatureExtractor& extractor, const CameraIntrinsics& intr,
                              const PlacementMapping& map, std::size_t images_per_eval,
                              double regularization) {
  ObjectiveContext ctx;
  ctx.models = std::make_shared<const std::vector<ObjectModel>>(std::move(models));
  ctx.intrinsics = intr;
  ctx.mapping = map;
  ctx.features = std::make_shared<const FeaturePipeline>(extractor);
  ctx.target = std::make_shared<const FrechetReference>(
      regularized(fit_stats(ctx.features->extract(target_images)), regularization));
  ctx.images_per_eval = images_per_eval;
  ctx.regularization = regularization;
  ctx.workers = default_workers();
  ctx.validate();
  return ctx;
}

namespace {

std::vector<Image> render_set_impl(const ObjectiveContext& ctx, const AttributeDistribution& dist,
                                   std::uint64_t seed, std::size_t count, std::size_t workers) {
  const auto attrs = sample(dist, count, seed);
  RenderOptions opts = ctx.render_options;
  opts.mode = RenderMode::Optimization;
  std::vector<Image> images(count);
  const auto& models = *ctx.models;
  parallel_for(count, workers, [&](std::size_t i) {
    images[i] = render(models[i % models.size()], attrs[i], ctx.intrinsics, ctx.mapping, opts).image;
  });
  return images;
}

double evaluate_impl(const ObjectiveContext& ctx, const AttributeDistribution& dist, std::uint64_t seed,
                     std::size_t workers) {
  const auto images = render_set_impl(ctx, dist, seed, ctx.images_per_eval, workers);
  const GaussianStats stats = regularized(fit_stats(ctx.features->extract(images)), ctx.regularization);
  return ctx.target->distance(stats);
}

std::uint64_t evaluation_seed(SeedPolicy policy, std::uint64_t seed, std::size_t epoch,
                              std::size_t parameter, std::size_t candidate) {
  switch (policy) {
    case SeedPolicy::PerCandidate: return derive_seed(seed, {epoch, parameter, candidate});
    case SeedPolicy::PerIteration: return derive_seed(seed, {epoch, parameter});
    case SeedPolicy::PerRun: return derive_seed(seed, {0});
  }
  return seed;
}

}  // namespace

std::vector<Image> render_set(const ObjectiveContext& ctx, const AttributeDistribution& dist,
                              std::uint64_t seed, std::size_t count) {
  ctx.validate();
  return render_set_impl(ctx, dist, seed, count, ctx.workers);
}

double evaluate(const ObjectiveContext& ctx, const AttributeDistribution& dist, std::uint64_t seed) {
  ctx.validate();
  return evaluate_impl(ctx, dist, seed, ctx.workers);
}

// ---------------------------------------------------------------------------
// Attribute descent

DescentResult attribute_descent(const ObjectiveContext& ctx, const AttributeDistribution& init,
                                const SearchSpace& space, const DescentOptions& options) {
  ctx.validate();
  const Objective objective = [&ctx](const AttributeDistribution& d, std::uint64_t seed) {
    return evaluate_impl(ctx, d, seed, 1);
  };
  return attribute_descent(objective, ctx.workers, init, space, options);
}

DescentResult attribute_descent(const Objective& objective, std::size_t workers, const AttributeDistribution& init,
                                const SearchSpace& space, const DescentOptions& options) {
  const std::size_t m = init.parameter_count();
  if (space.size() != m) throw std::invalid_argument("search space does not match the distribution");
  if (options.epochs < 1) throw std::invalid_argument("need at least one epoch");
  for (std::size_t i = 0; i < m; ++i) {
    if (space.grid(i).empty()) throw std::invalid_argument("empty grid for parameter " + std::to_string(i));
    if (space.kind(i) != init.locate(i).first) {
      throw std::invalid_argument("search space kind mismatch at parameter " + std::to_string(i));
    }
  }

  std::vector<std::size_t> order = options.order;
  if (order.empty()) {
    order.resize(m);
    std::iota(order.begin(), order.end(), std::size_t{0});
  }
  {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    bool permutation = sorted.size() == m;
    for (std::size_t i = 0; permutation && i < m; ++i) permutation = sorted[i] == i;
    if (!permutation) throw std::invalid_argument("order must be a permutation of the parameter indices");
  }
  const std::set<std::size_t> frozen(options.frozen.begin(), options.frozen.end());
  for (std::size_t f : frozen) {
    if (f >= m) throw std::invalid_argument("frozen parameter index out of range");
  }

  DescentResult result;
  std::vector<double> theta = init.parameters();
  double optimal = std::numeric_limits<double>::infinity();
  auto& trace = result.trace;
  trace.best_theta = theta;
  std::size_t replayed = 0;

  for (std::size_t epoch = 1; epoch <= options.epochs; ++epoch) {
    for (std::size_t i : order) {
      if (frozen.contains(i)) continue;
      if (options.acceptance == AcceptanceMode::ResetPerIteration) {
        optimal = std::numeric_limits<double>::infinity();
      }
      const auto& grid = space.grid(i);
      const std::size_t n = grid.size();
      std::vector<double> scores(n);
      std::vector<double> seconds(n, 0.0);
      std::vector<std::uint64_t> seeds(n);
      std::vector<bool> fresh(n, true);
      for (std::size_t c = 0; c < n; ++c) {
        seeds[c] = evaluation_seed(options.seed_policy, options.seed, epoch, i, c);
        if (options.resume && replayed + c < options.resume->entries.size()) {
          const TraceEntry& old = options.resume->entries[replayed + c];
          if (old.epoch != epoch || old.parameter != i || old.candidate != c) {
            throw std::invalid_argument("resume trace does not match this run's schedule");
          }
          scores[c] = old.fid;
          seconds[c] = old.wall_seconds;
          fresh[c] = false;
        }
      }
      parallel_for(n, workers, [&](std::size_t c) {
        if (!fresh[c]) return;
        std::vector<double> candidate = theta;
        candidate[i] = grid[c];
        const auto start = std::chrono::steady_clock::now();
        scores[c] = objective(init.with_parameters(candidate), seeds[c]);
        seconds[c] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      });
      replayed += n;

      // Acceptance in grid order reproduces the sequential algorithm.
      const std::vector<double> sweep_base = theta;
      for (std::size_t c = 0; c < n; ++c) {
        TraceEntry e;
        e.epoch = epoch;
        e.parameter = i;
        e.candidate = c;
        e.value = grid[c];
        e.fid = scores[c];
        e.seed = seeds[c];
        e.wall_seconds = seconds[c];
        e.theta = sweep_base;
        e.theta[i] = grid[c];
        if (scores[c] < optimal) {
          optimal = scores[c];
          theta[i] = grid[c];
          e.accepted = true;
        }
        if (scores[c] < trace.best_fid) {
          trace.best_fid = scores[c];
          trace.best_theta = e.theta;
        }
        e.best_fid = trace.best_fid;
        if (options.on_evaluation) options.on_evaluation(e);
        trace.entries.push_back(std::move(e));
      }
    }
    result.epoch_distributions.push_back(init.with_parameters(theta));
  }
  result.distribution = init.with_parameters(theta);
  return result;
}

namespace {

std::vector<AttributeKind> kinds_of_group(const std::string& group) {
  if (group == "orientation") return {AttributeKind::InPlaneRotation, AttributeKind::Azimuth};
  if (group == "lighting") return {AttributeKind::LightIntensity, AttributeKind::LightDirection};
  if (group == "camera") return {AttributeKind::CameraHeight, AttributeKind::CameraDistance};
  return {parse_attribute_kind(group)};
}

}  // namespace

std::vector<std::size_t> parameters_of(const AttributeDistribution& dist,
                                       const std::vector<std::string>& groups) {
  std::vector<std::size_t> out;
  for (const auto& g : groups) {
    for (AttributeKind k : kinds_of_group(g)) {
      const std::size_t first = dist.first_parameter(k);
      for (std::size_t c = 0; c < dist.kind(k).components.size(); ++c) out.push_back(first + c);
    }
  }
  return out;
}

std::vector<std::size_t> group_order(const AttributeDistribution& dist,
                                     const std::vector<std::string>& groups) {
  auto out = parameters_of(dist, groups);
  if (out.size() != dist.parameter_count()) {
    throw std::invalid_argument("order must name every attribute exactly once");
  }
  return out;
}

// ---------------------------------------------------------------------------
// Random search

RandomSearchResult random_search(const ObjectiveContext& ctx, const AttributeDistribution& layout,
                                 const SearchSpace& space, std::size_t budget, std::uint64_t seed,
                                 SeedPolicy policy) {
  ctx.validate();
  const Objective objective = [&ctx](const AttributeDistribution& d, std::uint64_t s) {
    return evaluate_impl(ctx, d, s, 1);
  };
  return random_search(objective, ctx.workers, layout, space, budget, seed, policy);
}

RandomSearchResult random_search(const Objective& objective, std::size_t workers, const AttributeDistribution& layout,
                                 const SearchSpace& space, std::size_t budget, std::uint64_t seed,
                                 SeedPolicy policy) {
  if (budget < 1) throw std::invalid_argument("random search needs a budget of at least 1");
  const std::size_t m = layout.parameter_count();
  if (space.size() != m) throw std::invalid_argument("search space does not match the distribution");

  std::vector<std::vector<double>> thetas(budget, std::vector<double>(m));
  std::vector<std::uint64_t> seeds(budget);
  for (std::size_t t = 0; t < budget; ++t) {
    std::mt19937_64 rng(derive_seed(seed, {t}));
    for (std::size_t i = 0; i < m; ++i) {
      std::uniform_int_distribution<std::size_t> pick(0, space.grid(i).size() - 1);
      thetas[t][i] = space.grid(i)[pick(rng)];
    }
    seeds[t] = policy == SeedPolicy::PerCandidate ? derive_seed(seed, {1, t}) : derive_seed(seed, {1});
  }
  std::vector<double> scores(budget);
  std::vector<double> seconds(budget);
  parallel_for(budget, workers, [&](std::size_t t) {
    const auto start = std::chrono::steady_clock::now();
    scores[t] = objective(layout.with_parameters(thetas[t]), seeds[t]);
    seconds[t] = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  });

  RandomSearchResult result;
  auto& trace = result.trace;
  for (std::size_t t = 0; t < budget; ++t) {
    TraceEntry e;
    e.epoch = 1;
    e.parameter = m;  // no single coordinate
    e.candidate = t;
    e.fid = scores[t];
    e.seed = seeds[t];
    e.wall_seconds = seconds[t];
    e.theta = thetas[t];
    if (scores[t] < trace.best_fid) {
      trace.best_fid = scores[t];
      trace.best_theta = thetas[t];
      e.accepted = true;
    }
    e.best_fid = trace.best_fid;
    trace.entries.push_back(std::move(e));
  }
  result.distribution = layout.with_parameters(trace.best_theta);
  return result;
}

// ---------------------------------------------------------------------------
// Trace persistence

void to_json(nlohmann::json& j, const TraceEntry& e) {
  j = nlohmann::json{{"epoch", e.epoch},   {"parameter", e.parameter}, {"candidate", e.candidate},
                     {"value", e.value},   {"fid", e.fid},             {"accepted", e.accepted},
                     {"best_fid", e.best_fid}, {"seed", e.seed},       {"theta", e.theta},
                     {"wall_seconds", e.wall_seconds}};
}

void from_json(const nlohmann::json& j, TraceEntry& e) {
  e.epoch = j.at("epoch").get<std::size_t>();
  e.parameter = j.at("parameter").get<std::size_t>();
  e.candidate = j.at("candidate").get<std::size_t>();
  e.value = j.at("value").get<double>();
  e.fid = j.at("fid").get<double>();
  e.accepted = j.at("accepted").get<bool>();
  e.best_fid = j.at("best_fid").get<double>();
  e.seed = j.at("seed").get<std::uint64_t>();
  e.theta = j.at("theta").get<std::vector<double>>();
  e.wall_seconds = j.value("wall_seconds", 0.0);
}

void write_trace(const std::filesystem::path& path, const OptimizationTrace& trace) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write trace " + path.string());
  for (const auto& e : trace.entries) out << nlohmann::json(e).dump() << '\n';
}

OptimizationTrace read_trace(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read trace " + path.string());
  OptimizationTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    TraceEntry e = nlohmann::json::parse(line).get<TraceEntry>();
    if (e.fid < trace.best_fid) {
      trace.best_fid = e.fid;
      trace.best_theta = e.theta;
    }
    trace.entries.push_back(std::move(e));
  }
  return trace;
}

}  // namespace attrdesc
