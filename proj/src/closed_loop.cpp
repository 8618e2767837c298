#include "attrdesc/closed_loop.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "attrdesc/parallel.hpp"
#include "attrdesc/seeding.hpp"

namespace attrdesc {

ClosedLoopSpec default_closed_loop() {
  ClosedLoopSpec s;
  s.layout.component_counts = {1, 2, 1, 1, 1, 1};
  const AttributeDistribution d = default_distribution(s.layout);
  const SearchSpace space = make_search_space(d, s.layout);
  const std::size_t li = d.first_parameter(AttributeKind::LightIntensity);
  const std::size_t ch = d.first_parameter(AttributeKind::CameraHeight);
  s.hidden_theta = {60.0, 60.0, 240.0, space.grid(li)[4], 108.0, space.grid(ch)[3], 50.0};
  s.extractor = default_pipeline_extractor();
  s.render = default_render_setup();
  return s;
}

ClosedLoopFixture make_closed_loop(const ClosedLoopSpec& spec, std::uint64_t run) {
  ClosedLoopFixture f;
  f.init = default_distribution(spec.layout);
  f.space = make_search_space(f.init, spec.layout);
  f.hidden = f.init.with_parameters(spec.hidden_theta);
  const auto models = builtin_models(spec.builtin_models);
  const RenderOptions opts = spec.render.options(RenderMode::Optimization);
  const auto attrs = sample(f.hidden, spec.target_images, spec.target_seed + run);
  std::vector<Image> target(attrs.size());
  for (std::size_t i = 0; i < attrs.size(); ++i) {
    target[i] = render(models[i % models.size()], attrs[i], spec.render.intrinsics, spec.render.mapping, opts).image;
  }
  f.context = make_context(models, target, spec.extractor, spec.render.intrinsics, spec.render.mapping,
                           spec.images_per_eval, spec.regularization);
  f.context.render_options = opts;
  f.context.workers = default_workers();
  return f;
}

double attribute_distance(AttributeKind kind, double a, double b) {
  const AttributeRange r = range_of(kind);
  const double d = std::abs(a - b);
  if (!r.circular) return d;
  const double period = r.hi - r.lo;
  const double m = std::fmod(d, period);
  return std::min(m, period - m);
}

bool RecoveryReport::all() const {
  return std::all_of(within.begin(), within.end(), [](bool b) { return b; });
}

std::string RecoveryReport::mask() const {
  static constexpr char kLetters[] = "RALDHC";
  std::string m;
  for (std::size_t k = 0; k < kAttributeCount; ++k) m.push_back(within[k] ? '+' : kLetters[k]);
  return m;
}

RecoveryReport check_recovery(const AttributeDistribution& hidden, const AttributeDistribution& learned,
                              const SearchSpace& space) {
  RecoveryReport rep;
  for (AttributeKind kind : kAllAttributes) {
    const std::size_t k = index_of(kind);
    const auto& h = hidden.kind(kind).components;
    const auto& l = learned.kind(kind).components;
    const auto& grid = space.grid(learned.first_parameter(kind));
    const AttributeRange r = range_of(kind);
    rep.step[k] = grid.size() > 1 ? grid[1] - grid[0] : r.hi - r.lo;
    if (l.size() < h.size()) throw std::invalid_argument("learned distribution has fewer components than hidden");
    // Assignment of hidden modes to distinct learned components with the
    // smallest worst-case error; layouts are tiny, so enumerate.
    std::vector<std::size_t> perm(l.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (std::size_t i = 0; i < h.size(); ++i) {
        worst = std::max(worst, attribute_distance(kind, h[i].mean, l[perm[i]].mean));
      }
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    rep.error[k] = best;
    rep.within[k] = best <= rep.step[k] * (1.0 + 1e-9);
  }
  return rep;
}

std::uint64_t heldout_seed(std::uint64_t seed) { return derive_seed(seed, {0x686f6c64}); }

BenchmarkReport run_benchmark(const ObjectiveContext& ctx, const AttributeDistribution& init,
                              const SearchSpace& space, const DescentOptions& options,
                              std::size_t random_search_budget) {
  BenchmarkReport rep;
  rep.heldout_seed = heldout_seed(options.seed);

  const DescentResult d = attribute_descent(ctx, init, space, options);
  rep.descent = {"attribute_descent", d.trace.entries.size(), d.trace.best_fid,
                 evaluate(ctx, d.distribution, rep.heldout_seed), d.distribution};

  const std::size_t budget = random_search_budget ? random_search_budget : d.trace.entries.size();
  const RandomSearchResult rs =
      random_search(ctx, init, space, budget, derive_seed(options.seed, {0x7273}), options.seed_policy);
  rep.random_search = {"random_search", rs.trace.entries.size(), rs.trace.best_fid,
                       evaluate(ctx, rs.distribution, rep.heldout_seed), rs.distribution};

  const AttributeDistribution ra = random_attributes(space);
  const double ra_fid = evaluate(ctx, ra, rep.heldout_seed);
  rep.random_attributes = {"random_attributes", 1, ra_fid, ra_fid, ra};
  return rep;
}

}  // namespace attrdesc
