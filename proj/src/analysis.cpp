#include "attrdesc/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace attrdesc {

double roll_magnitude(double in_plane_deg) {
  const double v = normalize(AttributeKind::InPlaneRotation, in_plane_deg);
  return std::min(v, 360.0 - v);
}

ViewpointSample viewpoint_of(const AttributeVector& attrs, const PlacementMapping& map,
                             double roll_threshold, std::string group) {
  ViewpointSample s;
  s.direction = camera_position(attrs[AttributeKind::Azimuth], attrs[AttributeKind::CameraHeight],
                                attrs[AttributeKind::CameraDistance], map)
                    .normalized();
  s.in_plane = attrs[AttributeKind::InPlaneRotation];
  s.high_roll = roll_magnitude(s.in_plane) > roll_threshold;
  s.group = std::move(group);
  return s;
}

std::vector<ViewpointSample> viewpoint_cloud(const AttributeDistribution& dist, std::size_t n,
                                             const PlacementMapping& map, std::uint64_t seed,
                                             double roll_threshold, const std::string& group) {
  if (n < 1) throw std::invalid_argument("viewpoint_cloud needs n >= 1");
  std::vector<ViewpointSample> out;
  out.reserve(n);
  for (const auto& a : sample(dist, n, seed)) out.push_back(viewpoint_of(a, map, roll_threshold, group));
  return out;
}

std::vector<ViewpointSample> viewpoint_cloud(const DatasetManifest& manifest, double roll_threshold) {
  std::vector<ViewpointSample> out;
  out.reserve(manifest.records.size());
  for (const auto& r : manifest.records) {
    out.push_back(viewpoint_of(r.attributes, manifest.render.mapping, roll_threshold, r.group));
  }
  return out;
}

std::size_t Histogram::total() const { return std::accumulate(counts.begin(), counts.end(), std::size_t{0}); }

Histogram attribute_histogram(const std::vector<AttributeVector>& samples, AttributeKind kind,
                              std::size_t bins) {
  if (bins < 1) throw std::invalid_argument("histogram needs at least one bin");
  const AttributeRange range = range_of(kind);
  Histogram h;
  h.kind = kind;
  h.counts.assign(bins, 0);
  const double width = (range.hi - range.lo) / static_cast<double>(bins);
  for (std::size_t b = 0; b <= bins; ++b) h.edges.push_back(range.lo + width * static_cast<double>(b));
  h.edges.back() = range.hi;
  for (const auto& a : samples) {
    const double v = normalize(kind, a[kind]);
    auto b = static_cast<std::size_t>(std::floor((v - range.lo) / width));
    ++h.counts[std::min(b, bins - 1)];
  }
  return h;
}

Histogram attribute_histogram(const DatasetManifest& manifest, AttributeKind kind, std::size_t bins) {
  std::vector<AttributeVector> samples;
  samples.reserve(manifest.records.size());
  for (const auto& r : manifest.records) samples.push_back(r.attributes);
  return attribute_histogram(samples, kind, bins);
}

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

void write_viewpoints_csv(const std::filesystem::path& path, const std::vector<ViewpointSample>& samples) {
  std::ofstream out = open_out(path);
  out << "group,x,y,z,in_plane,high_roll\n";
  for (const auto& s : samples) {
    out << s.group << ',' << num(s.direction.x()) << ',' << num(s.direction.y()) << ',' << num(s.direction.z())
        << ',' << num(s.in_plane) << ',' << (s.high_roll ? 1 : 0) << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

void write_histogram_csv(const std::filesystem::path& path, const Histogram& histogram) {
  std::ofstream out = open_out(path);
  out << "bin,lo,hi,count\n";
  for (std::size_t b = 0; b < histogram.counts.size(); ++b) {
    out << b << ',' << num(histogram.edges[b]) << ',' << num(histogram.edges[b + 1]) << ',' << histogram.counts[b]
        << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

}  // namespace attrdesc
