#include "doctest.h"

#include "attrdesc/closed_loop.hpp"

using namespace attrdesc;

TEST_CASE("attribute distance wraps angular kinds") {
  CHECK(attribute_distance(AttributeKind::Azimuth, 350, 10) == doctest::Approx(20));
  CHECK(attribute_distance(AttributeKind::InPlaneRotation, 0, 360) == doctest::Approx(0));
  CHECK(attribute_distance(AttributeKind::CameraHeight, 10, 90) == doctest::Approx(80));
}

TEST_CASE("recovery check matches modes within one grid step") {
  const ClosedLoopSpec spec = default_closed_loop();
  const AttributeDistribution hidden = default_distribution(spec.layout).with_parameters(spec.hidden_theta);
  const SearchSpace space = make_search_space(hidden, spec.layout);
  const RecoveryReport self = check_recovery(hidden, hidden, space);
  CHECK(self.all());
  CHECK(self.mask() == "++++++");

  // Swapped azimuth modes are the same distribution.
  auto theta = spec.hidden_theta;
  std::swap(theta[1], theta[2]);
  CHECK(check_recovery(hidden, hidden.with_parameters(theta), space).all());

  const std::size_t az = hidden.first_parameter(AttributeKind::Azimuth);
  const double step = space.grid(az)[1] - space.grid(az)[0];
  theta = spec.hidden_theta;
  theta[az] += step;
  CHECK(check_recovery(hidden, hidden.with_parameters(theta), space).all());
  theta[az] += 0.5 * step;
  const RecoveryReport off = check_recovery(hidden, hidden.with_parameters(theta), space);
  CHECK_FALSE(off.all());
  CHECK(off.mask() == "+A++++");
  CHECK(off.error[index_of(AttributeKind::Azimuth)] == doctest::Approx(1.5 * step));

  CHECK_THROWS(check_recovery(hidden, default_distribution(), space));
}

TEST_CASE("benchmark gives baselines the same budget and a shared held-out seed") {
  ClosedLoopSpec spec = default_closed_loop();
  spec.target_images = 24;
  spec.images_per_eval = 12;
  spec.extractor.dimension = 16;
  spec.layout.grid_steps = {3, 3, 3, 3, 3, 3};
  const AttributeDistribution init = default_distribution(spec.layout);
  spec.hidden_theta = init.parameters();
  const ClosedLoopFixture f = make_closed_loop(spec, 0);
  DescentOptions opt;
  opt.epochs = 1;
  opt.seed = 4;
  const BenchmarkReport rep = run_benchmark(f.context, f.init, f.space, opt);
  CHECK(rep.descent.evaluations == 21);
  CHECK(rep.random_search.evaluations == rep.descent.evaluations);
  CHECK(rep.random_attributes.evaluations == 1);
  CHECK(rep.heldout_seed == heldout_seed(4));
  CHECK(rep.descent.final_fid == evaluate(f.context, rep.descent.distribution, rep.heldout_seed));
  CHECK(rep.random_search.final_fid == evaluate(f.context, rep.random_search.distribution, rep.heldout_seed));
  CHECK(run_benchmark(f.context, f.init, f.space, opt, 5).random_search.evaluations == 5);
}
