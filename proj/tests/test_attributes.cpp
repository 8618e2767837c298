#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "doctest.h"

#include "attrdesc/attributes.hpp"

using namespace attrdesc;

TEST_CASE("attribute kinds have fixed ranges and wrap flags") {
  CHECK(kAllAttributes.size() == 6);
  CHECK(range_of(AttributeKind::InPlaneRotation).circular);
  CHECK(range_of(AttributeKind::Azimuth).circular);
  CHECK_FALSE(range_of(AttributeKind::LightIntensity).circular);
  CHECK_FALSE(range_of(AttributeKind::LightDirection).circular);
  CHECK(range_of(AttributeKind::LightDirection).hi == 180.0);
  CHECK(range_of(AttributeKind::CameraDistance).hi == 100.0);
  for (AttributeKind k : kAllAttributes) CHECK(parse_attribute_kind(name_of(k)) == k);
  CHECK_THROWS(parse_attribute_kind("zoom"));
}

TEST_CASE("normalize wraps circular kinds and clamps the rest") {
  CHECK(normalize(AttributeKind::Azimuth, 370.0) == doctest::Approx(10.0));
  CHECK(normalize(AttributeKind::Azimuth, -30.0) == doctest::Approx(330.0));
  CHECK(normalize(AttributeKind::Azimuth, 360.0) == 0.0);
  CHECK(normalize(AttributeKind::LightDirection, 200.0) == 180.0);
  CHECK(normalize(AttributeKind::CameraHeight, 50.0) == 50.0);
  CHECK(normalize(AttributeKind::CameraHeight, -1.0) == 0.0);
  CHECK_THROWS_AS(normalize(AttributeKind::Azimuth, std::numeric_limits<double>::quiet_NaN()),
                  std::invalid_argument);
  CHECK_THROWS_AS(normalize(AttributeKind::CameraHeight, std::numeric_limits<double>::infinity()),
                  std::invalid_argument);
}

TEST_CASE("default distribution starts at the lowest grid values") {
  const AttributeDistribution d = default_distribution();
  CHECK(d.parameter_count() == 13);
  CHECK(d.kind(AttributeKind::InPlaneRotation).components.size() == 3);
  CHECK(d.kind(AttributeKind::Azimuth).components.size() == 6);
  for (const auto& c : d.kind(AttributeKind::Azimuth).components) {
    CHECK(c.mean == 0.0);
    CHECK(c.variance == 20.0);
  }
  CHECK(d.kind(AttributeKind::CameraDistance).components.at(0).mean == 0.0);
  CHECK(d.kind(AttributeKind::CameraDistance).components.at(0).variance == 0.6);
  CHECK(d.kind(AttributeKind::InPlaneRotation).components.at(0).variance == 10.0);
  CHECK(d.kind(AttributeKind::LightIntensity).components.at(0).variance == 0.63);
  CHECK(d.kind(AttributeKind::LightDirection).components.at(0).variance == 7.07);
  CHECK(d.kind(AttributeKind::CameraHeight).components.at(0).variance == 0.4);
}

TEST_CASE("configured initial means replace the lowest grid value") {
  AttributeModelConfig c;
  c.initial_means = {90, 0, 0, 0, 0, 50};
  const AttributeDistribution d = default_distribution(c);
  CHECK(d.parameter(0) == 90.0);
  CHECK(d.parameter(2) == 90.0);
  CHECK(d.parameter(12) == 50.0);
}

TEST_CASE("search space grids follow the configured step counts") {
  const AttributeDistribution d = default_distribution();
  const SearchSpace s = make_search_space(d);
  REQUIRE(s.size() == 13);
  CHECK(s.total_candidates() == 3 * 12 + 6 * 12 + 10 + 6 + 10 + 5);
  const auto& az = s.grid(d.first_parameter(AttributeKind::Azimuth));
  REQUIRE(az.size() == 12);
  CHECK(az.front() == 0.0);
  CHECK(az.back() == doctest::Approx(330.0));
  const auto& ld = s.grid(d.first_parameter(AttributeKind::LightDirection));
  CHECK(ld == std::vector<double>{0, 36, 72, 108, 144, 180});
  const auto& cd = s.grid(d.first_parameter(AttributeKind::CameraDistance));
  CHECK(cd == std::vector<double>{0, 25, 50, 75, 100});
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& g = s.grid(i);
    CHECK(std::is_sorted(g.begin(), g.end()));
    CHECK(std::adjacent_find(g.begin(), g.end()) == g.end());
    for (double v : g) CHECK(range_of(s.kind(i)).contains(v));
  }
}

TEST_CASE("flatten and unflatten are inverse") {
  const AttributeDistribution d = default_distribution();
  std::vector<double> theta(d.parameter_count());
  for (std::size_t i = 0; i < theta.size(); ++i) theta[i] = static_cast<double>(i);
  const AttributeDistribution e = d.with_parameters(theta);
  CHECK(e.parameters() == theta);
  CHECK(e.with_parameters(e.parameters()) == e);
  CHECK_THROWS(d.with_parameters({1.0, 2.0}));
}

TEST_CASE("set_parameter writes exactly one coordinate") {
  const AttributeDistribution d = default_distribution();
  for (std::size_t i = 0; i < d.parameter_count(); ++i) {
    const AttributeDistribution e = d.set_parameter(i, 30.0);
    CHECK(e.parameter(i) == 30.0);
    for (std::size_t j = 0; j < d.parameter_count(); ++j) {
      if (j != i) CHECK(e.parameter(j) == d.parameter(j));
    }
    for (AttributeKind k : kAllAttributes) {
      for (std::size_t c = 0; c < d.kind(k).components.size(); ++c) {
        CHECK(e.kind(k).components[c].variance == d.kind(k).components[c].variance);
      }
    }
  }
  CHECK(d.set_parameter(0, 90.0).kind(AttributeKind::InPlaneRotation).components[0].mean == 90.0);
  CHECK(d.set_parameter(4, d.parameter(4)) == d);
  CHECK_THROWS_AS(d.set_parameter(13, 0.0), std::out_of_range);
  CHECK_THROWS_AS(d.set_parameter(9, 200.0), std::invalid_argument);
}

TEST_CASE("zero-variance sampling returns the component means") {
  AttributeModelConfig c;
  c.component_counts = {1, 1, 1, 1, 1, 1};
  c.variances = {0, 0, 0, 0, 0, 0};
  const AttributeDistribution d = default_distribution(c).with_parameters({30, 90, 40, 72, 20, 75});
  for (const auto& a : sample(d, 50, 7)) {
    CHECK(a[AttributeKind::InPlaneRotation] == 30.0);
    CHECK(a[AttributeKind::Azimuth] == 90.0);
    CHECK(a[AttributeKind::LightIntensity] == 40.0);
    CHECK(a[AttributeKind::LightDirection] == 72.0);
    CHECK(a[AttributeKind::CameraHeight] == 20.0);
    CHECK(a[AttributeKind::CameraDistance] == 75.0);
  }
}

TEST_CASE("sampling is deterministic per seed and respects ranges") {
  const AttributeDistribution d = default_distribution();
  const auto a = sample(d, 200, 11);
  CHECK(a == sample(d, 200, 11));
  CHECK(a != sample(d, 200, 12));
  for (const auto& v : a) {
    for (AttributeKind k : kAllAttributes) CHECK(normalize(k, v[k]) == v[k]);
  }
  CHECK(sample(d, 0, 1).empty());
}

TEST_CASE("bimodal azimuth mixture yields modes near both means") {
  AttributeModelConfig c;
  c.component_counts = {1, 2, 1, 1, 1, 1};
  c.variances = {1, 1, 1, 1, 1, 1};
  const AttributeDistribution d = default_distribution(c).with_parameters({0, 0, 180, 0, 0, 0, 0});
  const auto s = sample(d, 10000, 3);
  double sum0 = 0, sum180 = 0;
  std::size_t n0 = 0, n180 = 0;
  for (const auto& v : s) {
    const double az = v[AttributeKind::Azimuth];
    if (az > 90 && az < 270) {
      sum180 += az;
      ++n180;
    } else {
      sum0 += az > 180 ? az - 360 : az;
      ++n0;
    }
  }
  CHECK(n0 + n180 == 10000);
  CHECK(std::abs(static_cast<double>(n0) - 5000.0) < 300.0);
  CHECK(std::abs(sum0 / n0) < 1.0);
  CHECK(std::abs(sum180 / n180 - 180.0) < 1.0);
}

TEST_CASE("common random numbers: distributions differing in means share noise") {
  const AttributeDistribution d = default_distribution();
  const AttributeDistribution e = d.set_parameter(d.first_parameter(AttributeKind::LightIntensity), 50.0);
  const auto a = sample(d, 20, 5);
  const auto b = sample(e, 20, 5);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i][AttributeKind::Azimuth] == b[i][AttributeKind::Azimuth]);
    // Same variate around both means, except where the lower clamp bites.
    const double la = a[i][AttributeKind::LightIntensity];
    if (la > 0.0) CHECK(std::abs((b[i][AttributeKind::LightIntensity] - 50.0) - la) < 1e-9);
  }
}

TEST_CASE("random attributes sample uniformly over full ranges") {
  const SearchSpace space = make_search_space(default_distribution());
  const AttributeDistribution r = random_attributes(space);
  CHECK(r.is_uniform());
  CHECK(r.parameter_count() == 13);
  const auto s = sample(r, 100000, 21);
  std::map<int, int> bins;
  for (const auto& v : s) {
    bins[static_cast<int>(v[AttributeKind::Azimuth] / 30.0)]++;
    const double ld = v[AttributeKind::LightDirection];
    CHECK((ld >= 0.0 && ld <= 180.0));
  }
  CHECK(bins.size() == 12);
  // Each bin's share within 1.5 percentage points, and a chi-square
  // statistic below the 0.1% critical value for 11 degrees of freedom.
  const double expected = 100000.0 / 12.0;
  double chi2 = 0.0;
  for (const auto& [b, n] : bins) {
    CHECK(std::abs(n / 100000.0 - 1.0 / 12.0) < 0.015);
    chi2 += (n - expected) * (n - expected) / expected;
  }
  CHECK(chi2 < 31.26);
  CHECK(s == sample(r, 100000, 21));
}

TEST_CASE("distributions round-trip through JSON") {
  const AttributeDistribution d = default_distribution().set_parameter(3, 120.0);
  const nlohmann::json j = d;
  CHECK(j.at("schema") == "attrdesc.distribution/1");
  CHECK(j.get<AttributeDistribution>() == d);
  nlohmann::json bad = j;
  bad["schema"] = "other";
  CHECK_THROWS(bad.get<AttributeDistribution>());
}
