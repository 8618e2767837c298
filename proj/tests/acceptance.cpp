// Acceptance checks, one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "attrdesc/analysis.hpp"
#include "attrdesc/closed_loop.hpp"
#include "attrdesc/pipeline.hpp"

using namespace attrdesc;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string format(const char* fmt, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

GaussianStats make_stats(Eigen::VectorXd mu, Eigen::MatrixXd cov) {
  GaussianStats s;
  s.mean = std::move(mu);
  s.covariance = std::move(cov);
  s.count = 100;
  return s;
}

Eigen::MatrixXd random_psd(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0, 1);
  Eigen::MatrixXd a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = n(rng);
  return a * a.transpose() + 1e-3 * Eigen::MatrixXd::Identity(d, d);
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n(0, 1);
  Eigen::VectorXd v(d);
  for (int i = 0; i < d; ++i) v[i] = n(rng);
  return v;
}

// ---------------------------------------------------------------------------

Outcome frechet_correctness() {
  const auto t0 = Clock::now();
  Eigen::VectorXd m0(1), m1(1);
  m0 << 0;
  m1 << 1;
  Eigen::MatrixXd v1(1, 1), v4(1, 1);
  v1 << 1;
  v4 << 4;
  const double uni = frechet_distance(make_stats(m0, v1), make_stats(m1, v4));
  const bool a = std::abs(uni - 2.0) < 1e-9;

  std::mt19937_64 rng(11);
  const GaussianStats s = make_stats(random_vector(rng, 8), random_psd(rng, 8));
  const bool b = std::abs(frechet_distance(s, s)) < 1e-9;

  std::uniform_real_distribution<double> var(0.1, 5.0);
  double oracle_err = 0.0, sym_err = 0.0;
  for (int t = 0; t < 100; ++t) {
    Eigen::VectorXd da(8), db(8);
    for (int i = 0; i < 8; ++i) {
      da[i] = var(rng);
      db[i] = var(rng);
    }
    const GaussianStats x = make_stats(random_vector(rng, 8), da.asDiagonal().toDenseMatrix());
    const GaussianStats y = make_stats(random_vector(rng, 8), db.asDiagonal().toDenseMatrix());
    double oracle = (x.mean - y.mean).squaredNorm();
    for (int i = 0; i < 8; ++i) oracle += da[i] + db[i] - 2.0 * std::sqrt(da[i] * db[i]);
    oracle_err = std::max(oracle_err, std::abs(frechet_distance(x, y) - oracle));

    const GaussianStats p = make_stats(random_vector(rng, 8), random_psd(rng, 8));
    const GaussianStats q = make_stats(random_vector(rng, 8), random_psd(rng, 8));
    const double pq = frechet_distance(p, q), qp = frechet_distance(q, p);
    sym_err = std::max(sym_err, std::abs(pq - qp) / std::max(std::abs(pq), 1e-300));
  }
  const bool c = oracle_err < 1e-9;
  const bool d = sym_err < 1e-8;
  const double secs = seconds_since(t0);
  return {a && b && c && d && secs < 1.0,
          format("univariate %.12g, oracle err %.2e, symmetry rel err %.2e, %.3f s", uni, oracle_err, sym_err, secs)};
}

Outcome matrix_sqrt() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(12);
  double worst = 0.0;
  for (int d : {2, 16, 64, 128}) {
    for (int t = 0; t < 100; ++t) {
      const Eigen::MatrixXd sigma = random_psd(rng, d);
      const Eigen::MatrixXd r = sqrtm_psd(sigma);
      worst = std::max(worst, (r * r - sigma).norm() / sigma.norm());
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-8 && secs < 10.0, format("worst relative residual %.2e over 400 matrices, %.2f s", worst, secs)};
}

Outcome camera_geometry() {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> ang(0, 360), unit(0, 100);
  const PlacementMapping map;
  const CameraIntrinsics intr;
  double orth = 0.0, det = 0.0, center = 0.0;
  bool periodic = true;
  for (int t = 0; t < 10000; ++t) {
    const double az = ang(rng), h = unit(rng), dist = unit(rng), roll = ang(rng);
    const CameraExtrinsics e = extrinsics(az, h, dist, roll, map);
    orth = std::max(orth, (e.rotation * e.rotation.transpose() - Eigen::Matrix3d::Identity()).norm());
    det = std::max(det, std::abs(e.rotation.determinant() - 1.0));
    const Eigen::Vector2d px = project(projection_matrix(intr, e), Eigen::Vector3d::Zero(), intr);
    center = std::max(center, (px - Eigen::Vector2d(intr.width / 2.0, intr.height / 2.0)).norm());
    const double base = std::floor(az);
    const CameraExtrinsics e1 = extrinsics(base, h, dist, roll, map);
    const CameraExtrinsics e2 = extrinsics(base + 360.0, h, dist, roll, map);
    periodic = periodic && e1.rotation == e2.rotation && e1.translation == e2.translation;
  }
  return {orth < 1e-9 && det < 1e-9 && center < 1e-9 && periodic,
          format("orthonormality %.2e, determinant %.2e, centre %.2e px, periodic %s", orth, det, center,
                 periodic ? "exact" : "broken")};
}

// ---------------------------------------------------------------------------
// Closed-loop runs are shared between criteria.

class ClosedLoop {
 public:
  const ClosedLoopSpec spec = default_closed_loop();

  const ClosedLoopFixture& fixture(std::uint64_t run) {
    auto it = fixtures_.find(run);
    if (it == fixtures_.end()) it = fixtures_.emplace(run, make_closed_loop(spec, run)).first;
    return it->second;
  }

  // Descent on run `run` with seed `run`, cached by order and frozen set.
  const DescentResult& descent(std::uint64_t run, const std::vector<std::string>& order = {},
                               const std::vector<std::string>& frozen = {}) {
    const auto key = std::make_tuple(run, order, frozen);
    auto it = descents_.find(key);
    if (it != descents_.end()) return it->second;
    const ClosedLoopFixture& f = fixture(run);
    DescentOptions opt;
    opt.seed = run;
    if (!order.empty()) opt.order = group_order(f.init, order);
    if (!frozen.empty()) opt.frozen = parameters_of(f.init, frozen);
    return descents_.emplace(key, attribute_descent(f.context, f.init, f.space, opt)).first->second;
  }

  double heldout(std::uint64_t run, const AttributeDistribution& d) {
    return evaluate(fixture(run).context, d, heldout_seed(run));
  }

 private:
  std::map<std::uint64_t, ClosedLoopFixture> fixtures_;
  std::map<std::tuple<std::uint64_t, std::vector<std::string>, std::vector<std::string>>, DescentResult> descents_;
};

bool isolated(const TraceEntry& a, const TraceEntry& b) {
  for (std::size_t k = 0; k < a.theta.size(); ++k) {
    if (a.theta[k] != b.theta[k] && k != a.parameter) return false;
  }
  return true;
}

Outcome descent_mechanics(ClosedLoop& loop) {
  // Default layout against the closed-loop target.
  const ClosedLoopFixture& f = loop.fixture(0);
  const AttributeDistribution init = default_distribution();
  const SearchSpace space = make_search_space(init);
  const DescentResult r = attribute_descent(f.context, init, space, {});
  bool monotone = true, isolation = true;
  for (std::size_t k = 1; k < r.trace.entries.size(); ++k) {
    const TraceEntry& a = r.trace.entries[k - 1];
    const TraceEntry& b = r.trace.entries[k];
    monotone = monotone && b.best_fid <= a.best_fid;
    if (a.epoch == b.epoch && a.parameter == b.parameter) isolation = isolation && isolated(a, b);
  }
  const std::size_t n = r.trace.entries.size();
  return {n == 278 && monotone && isolation,
          format("%zu evaluations, best-so-far %s, isolation %s", n, monotone ? "non-increasing" : "increases",
                 isolation ? "holds" : "violated")};
}

Outcome closed_loop_recovery(ClosedLoop& loop) {
  const auto t0 = Clock::now();
  std::size_t ok = 0;
  std::string masks;
  for (std::uint64_t run = 0; run < 10; ++run) {
    const ClosedLoopFixture& f = loop.fixture(run);
    const RecoveryReport rep = check_recovery(f.hidden, loop.descent(run).distribution, f.space);
    ok += rep.all();
    masks += (run ? " " : "") + rep.mask();
  }
  const double secs = seconds_since(t0);
  return {ok >= 8 && secs < 600.0, format("%zu/10 runs recovered [%s], %.0f s", ok, masks.c_str(), secs)};
}

Outcome baseline_dominance(ClosedLoop& loop) {
  std::size_t ok = 0;
  double ratio_rs = 0.0, ratio_ra = 0.0;
  for (std::uint64_t run = 0; run < 10; ++run) {
    const ClosedLoopFixture& f = loop.fixture(run);
    DescentOptions opt;
    opt.seed = run;
    const BenchmarkReport rep = run_benchmark(f.context, f.init, f.space, opt);
    ok += rep.descent.final_fid <= rep.random_search.final_fid &&
          rep.descent.final_fid < rep.random_attributes.final_fid;
    ratio_rs += rep.descent.final_fid / rep.random_search.final_fid / 10.0;
    ratio_ra += rep.descent.final_fid / rep.random_attributes.final_fid / 10.0;
  }
  return {ok >= 9, format("%zu/10 runs; mean FID ratio vs random search %.3f, vs random attributes %.3f", ok,
                          ratio_rs, ratio_ra)};
}

Outcome order_robustness(ClosedLoop& loop) {
  const std::vector<std::string> alt = {"lighting", "camera", "orientation"};
  std::size_t close = 0, first_lower = 0;
  double worst_gap = 0.0;
  for (std::uint64_t run = 0; run < 5; ++run) {
    const DescentResult& a = loop.descent(run);
    const DescentResult& b = loop.descent(run, alt);
    const double fa = loop.heldout(run, a.distribution), fb = loop.heldout(run, b.distribution);
    const double gap = std::abs(fa - fb) / std::min(fa, fb);
    worst_gap = std::max(worst_gap, gap);
    close += gap <= 0.15;
    first_lower += loop.heldout(run, a.epoch_distributions.at(0)) < loop.heldout(run, b.epoch_distributions.at(0));
  }
  return {close == 5 && first_lower >= 4,
          format("epoch-2 within 15%% in %zu/5 (worst gap %.1f%%); orientation-first lower after epoch 1 in %zu/5",
                 close, 100.0 * worst_gap, first_lower)};
}

Outcome ablation_direction(ClosedLoop& loop) {
  std::size_t ok = 0;
  std::string rows;
  for (std::uint64_t run = 0; run < 5; ++run) {
    const double full = loop.heldout(run, loop.descent(run).distribution);
    const auto degradation = [&](const std::string& g) {
      return loop.heldout(run, loop.descent(run, {}, {g}).distribution) - full;
    };
    const double o = degradation("orientation"), l = degradation("lighting"), c = degradation("camera");
    ok += o > l && o > c;
    rows += format("%s(o %.2f l %.2f c %.2f)", run ? " " : "", o, l, c);
  }
  return {ok >= 4, format("%zu/5 seeds; degradation %s", ok, rows.c_str())};
}

Outcome pipeline_integrity() {
  const fs::path out = fs::temp_directory_path() / "attrdesc_acceptance_generate";
  fs::remove_all(out);
  const auto models = builtin_models(10);
  AttributeModelConfig c;
  c.component_counts = {1, 2, 1, 1, 1, 1};
  c.initial_means = {20, 60, 50, 90, 30, 50};
  const AttributeDistribution dist = default_distribution(c);
  GenerationSettings g;
  g.images_per_model = 4;
  g.save_foregrounds = true;
  const RenderSetup setup = default_render_setup();
  const DatasetManifest m = generate({{"all", dist}}, models, setup, g, out);
  const DatasetManifest back = load_manifest(out / "manifest.json");
  std::size_t exact = 0;
  for (const auto& r : back.records) exact += read_ppm(out / r.foreground) == regenerate_foreground(r, models, setup);

  std::size_t bad_norm = 0, bad_flag = 0, checked = 0;
  const auto check = [&](const std::vector<ViewpointSample>& cloud) {
    for (const auto& s : cloud) {
      ++checked;
      bad_norm += std::abs(s.direction.norm() - 1.0) > 1e-12;
      bad_flag += s.high_roll != (roll_magnitude(s.in_plane) > kDefaultRollThreshold);
    }
  };
  check(viewpoint_cloud(back));
  check(viewpoint_cloud(random_attributes(make_search_space(dist, c)), 10000, setup.mapping, 14));
  fs::remove_all(out);
  const bool pass = m.records.size() == 40 && back.records.size() == 40 && exact == 40 && bad_norm == 0 &&
                    bad_flag == 0;
  return {pass, format("%zu records, %zu/40 foregrounds bit-exact, %zu viewpoints: %zu off unit norm, %zu wrong flags",
                       back.records.size(), exact, checked, bad_norm, bad_flag)};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> wanted;
  for (int i = 1; i < argc; ++i) wanted.insert(std::stoi(argv[i]));
  ClosedLoop loop;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Frechet distance correctness", frechet_correctness},
      {"matrix square root", matrix_sqrt},
      {"camera geometry", camera_geometry},
      {"descent mechanics", [&] { return descent_mechanics(loop); }},
      {"closed-loop recovery", [&] { return closed_loop_recovery(loop); }},
      {"baseline dominance", [&] { return baseline_dominance(loop); }},
      {"order robustness", [&] { return order_robustness(loop); }},
      {"ablation direction", [&] { return ablation_direction(loop); }},
      {"pipeline integrity", pipeline_integrity},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!wanted.empty() && !wanted.count(id)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += !o.pass;
    std::printf("criterion %d %s: %s (%s)\n", id, criteria[i].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
