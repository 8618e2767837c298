#include "attrdesc/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <random>
#include <stdexcept>

#include "attrdesc/parallel.hpp"
#include "attrdesc/seeding.hpp"

namespace attrdesc {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;
constexpr double kInf = std::numeric_limits<double>::infinity();

double primitive_bound(const Primitive& p) {
  if (p.shape == PrimitiveShape::Ellipsoid) return p.center.norm() + p.extents.maxCoeff();
  return (p.center.cwiseAbs() + p.extents).norm();
}

struct Hit {
  double t = kInf;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
};

// Slab test. Returns entry distance and outward normal of the entered face.
bool intersect_box(const Primitive& p, const Eigen::Vector3d& o, const Eigen::Vector3d& inv_d,
                   Hit& hit) {
  double t_near = -kInf;
  double t_far = kInf;
  int axis = 0;
  for (int a = 0; a < 3; ++a) {
    double t0 = (p.center[a] - p.extents[a] - o[a]) * inv_d[a];
    double t1 = (p.center[a] + p.extents[a] - o[a]) * inv_d[a];
    if (t0 > t1) std::swap(t0, t1);
    if (t0 > t_near) {
      t_near = t0;
      axis = a;
    }
    t_far = std::min(t_far, t1);
    if (t_near > t_far) return false;
  }
  if (t_near <= 0.0 || t_near >= hit.t) return false;
  hit.t = t_near;
  hit.normal = Eigen::Vector3d::Zero();
  hit.normal[axis] = inv_d[axis] > 0.0 ? -1.0 : 1.0;
  return true;
}

bool intersect_ellipsoid(const Primitive& p, const Eigen::Vector3d& o, const Eigen::Vector3d& d,
                         Hit& hit) {
  const Eigen::Vector3d inv_r = p.extents.cwiseInverse();
  const Eigen::Vector3d os = (o - p.center).cwiseProduct(inv_r);
  const Eigen::Vector3d ds = d.cwiseProduct(inv_r);
  const double a = ds.squaredNorm();
  const double b = os.dot(ds);
  const double c = os.squaredNorm() - 1.0;
  const double disc = b * b - a * c;
  if (disc < 0.0) return false;
  const double t = (-b - std::sqrt(disc)) / a;
  if (t <= 0.0 || t >= hit.t) return false;
  hit.t = t;
  const Eigen::Vector3d local = o + t * d - p.center;
  hit.normal = local.cwiseProduct(inv_r).cwiseProduct(inv_r).normalized();
  return true;
}

std::array<Eigen::Vector3d, 8> box_corners(const Eigen::Vector3d& c, const Eigen::Vector3d& e) {
  std::array<Eigen::Vector3d, 8> out;
  for (int i = 0; i < 8; ++i) {
    out[i] = c + Eigen::Vector3d((i & 1) ? e.x() : -e.x(), (i & 2) ? e.y() : -e.y(),
                                 (i & 4) ? e.z() : -e.z());
  }
  return out;
}

PixelBox primitive_bounds(const Primitive& p, const ProjectionMatrix& m, const CameraIntrinsics& intr) {
  PixelBox box{kInf, kInf, -kInf, -kInf};
  for (const auto& corner : box_corners(p.center, p.extents)) {
    const Eigen::Vector3d h = m * corner.homogeneous();
    const double depth = -h.z();
    if (!(depth > 0.0)) {
      // The camera is inside the box hull; fall back to the full frame.
      return {0.0, 0.0, static_cast<double>(intr.width), static_cast<double>(intr.height)};
    }
    const double u = 0.5 * intr.width + h.x() / depth;
    const double v = 0.5 * intr.height - h.y() / depth;
    box.x0 = std::min(box.x0, u);
    box.y0 = std::min(box.y0, v);
    box.x1 = std::max(box.x1, u);
    box.y1 = std::max(box.y1, v);
  }
  box.x0 = std::clamp(box.x0, 0.0, static_cast<double>(intr.width));
  box.x1 = std::clamp(box.x1, 0.0, static_cast<double>(intr.width));
  box.y0 = std::clamp(box.y0, 0.0, static_cast<double>(intr.height));
  box.y1 = std::clamp(box.y1, 0.0, static_cast<double>(intr.height));
  return box;
}

Rgb scale(const Rgb& c, double k) {
  auto ch = [k](float v) { return static_cast<float>(std::clamp(v * k, 0.0, 1.0)); };
  return {ch(c.r), ch(c.g), ch(c.b)};
}

void to_json_vec(nlohmann::json& j, const Eigen::Vector3d& v) { j = {v.x(), v.y(), v.z()}; }

Eigen::Vector3d vec_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("expected a 3-vector");
  return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

}  // namespace

// ---------------------------------------------------------------------------
// Object models

double bounding_radius(const ObjectModel& model) {
  double r = 0.0;
  for (const auto& p : model.primitives) r = std::max(r, primitive_bound(p));
  return r;
}

ObjectModel normalize_model(ObjectModel model) {
  if (model.primitives.empty()) throw std::invalid_argument("object model has no primitives");
  Eigen::Vector3d lo = Eigen::Vector3d::Constant(kInf);
  Eigen::Vector3d hi = Eigen::Vector3d::Constant(-kInf);
  for (const auto& p : model.primitives) {
    if ((p.extents.array() <= 0.0).any()) throw std::invalid_argument("primitive extents must be positive");
    lo = lo.cwiseMin(p.center - p.extents);
    hi = hi.cwiseMax(p.center + p.extents);
  }
  const Eigen::Vector3d mid = 0.5 * (lo + hi);
  for (auto& p : model.primitives) p.center -= mid;
  const double r = bounding_radius(model);
  for (auto& p : model.primitives) {
    p.center /= r;
    p.extents /= r;
  }
  return model;
}

ObjectModel builtin_model(std::size_t identity, std::uint64_t seed) {
  std::mt19937_64 rng(derive_seed(seed, {identity}));
  std::uniform_real_distribution<double> jitter(0.9, 1.1);
  std::uniform_real_distribution<double> hue(0.0, 1.0);

  const double h = hue(rng);
  auto channel = [h](double phase) {
    return static_cast<float>(0.35 + 0.5 * (0.5 + 0.5 * std::cos(2.0 * std::numbers::pi * (h + phase))));
  };
  const Rgb body{channel(0.0), channel(1.0 / 3.0), channel(2.0 / 3.0)};
  const Rgb glass{0.25f, 0.3f, 0.35f};
  const Rgb dark{0.08f, 0.08f, 0.08f};
  const Rgb trim{0.2f, 0.2f, 0.2f};
  const Rgb lamp{0.95f, 0.92f, 0.7f};
  const Rgb tail{0.85f, 0.1f, 0.08f};

  const double w = 0.45 * jitter(rng);
  const double l = 1.0 * jitter(rng);
  const double t = 0.25 * jitter(rng);
  const double cabin_shift = -0.15 * jitter(rng);

  ObjectModel m;
  m.label = "vehicle_" + std::to_string(identity);
  m.primitives = {
      {PrimitiveShape::Box, {0, 0, 0}, {w, l, t}, body},
      {PrimitiveShape::Box, {0, cabin_shift, t + 0.17}, {0.85 * w, 0.5 * l, 0.17}, glass},
      {PrimitiveShape::Ellipsoid, {0, 0.72 * l, 0.6 * t}, {0.85 * w, 0.3 * l, 0.45 * t}, body},
      {PrimitiveShape::Box, {0, l + 0.03, -0.4 * t}, {1.04 * w, 0.04, 0.35 * t}, trim},
      {PrimitiveShape::Box, {0.6 * w, l + 0.035, 0.2 * t}, {0.18 * w, 0.03, 0.2 * t}, lamp},
      {PrimitiveShape::Box, {-0.6 * w, l + 0.035, 0.2 * t}, {0.18 * w, 0.03, 0.2 * t}, lamp},
      {PrimitiveShape::Box, {0, -l - 0.03, -0.4 * t}, {1.04 * w, 0.04, 0.35 * t}, trim},
      {PrimitiveShape::Box, {0.7 * w, -l - 0.035, 0.3 * t}, {0.25 * w, 0.03, 0.25 * t}, tail},
      {PrimitiveShape::Box, {-0.7 * w, -l - 0.035, 0.3 * t}, {0.25 * w, 0.03, 0.25 * t}, tail},
  };
  for (double sx : {-1.0, 1.0}) {
    for (double sy : {-1.0, 1.0}) {
      m.primitives.push_back({PrimitiveShape::Ellipsoid, {sx * w, sy * 0.62 * l, -t}, {0.09, 0.2, 0.2}, dark});
    }
  }
  return normalize_model(std::move(m));
}

std::vector<ObjectModel> builtin_models(std::size_t count, std::uint64_t seed) {
  std::vector<ObjectModel> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(builtin_model(i, seed));
  return out;
}

void to_json(nlohmann::json& j, const ObjectModel& m) {
  j = nlohmann::json::object();
  j["schema"] = "attrdesc.model/1";
  j["label"] = m.label;
  j["primitives"] = nlohmann::json::array();
  for (const auto& p : m.primitives) {
    nlohmann::json e;
    e["shape"] = p.shape == PrimitiveShape::Box ? "box" : "ellipsoid";
    to_json_vec(e["center"], p.center);
    to_json_vec(e["extents"], p.extents);
    e["color"] = {p.color.r, p.color.g, p.color.b};
    j["primitives"].push_back(std::move(e));
  }
}

void from_json(const nlohmann::json& j, ObjectModel& m) {
  m.label = j.at("label").get<std::string>();
  m.primitives.clear();
  for (const auto& e : j.at("primitives")) {
    Primitive p;
    const auto shape = e.at("shape").get<std::string>();
    if (shape == "box") {
      p.shape = PrimitiveShape::Box;
    } else if (shape == "ellipsoid") {
      p.shape = PrimitiveShape::Ellipsoid;
    } else {
      throw std::invalid_argument("unknown primitive shape: " + shape);
    }
    p.center = vec_from_json(e.at("center"));
    p.extents = vec_from_json(e.at("extents"));
    const auto& c = e.at("color");
    p.color = {c.at(0).get<float>(), c.at(1).get<float>(), c.at(2).get<float>()};
    m.primitives.push_back(p);
  }
  m = normalize_model(std::move(m));
}

ObjectModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open model file " + path.string());
  return nlohmann::json::parse(in).get<ObjectModel>();
}

void save_model(const std::filesystem::path& path, const ObjectModel& model) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write model file " + path.string());
  out << nlohmann::json(model).dump(2) << '\n';
}

// ---------------------------------------------------------------------------
// Pools

std::vector<OccluderStamp> default_occluders() {
  return {
      {OccluderStamp::Shape::Rect, {0.35f, 0.35f, 0.38f}, 0.12},    // lamp post
      {OccluderStamp::Shape::Rect, {0.75f, 0.7f, 0.3f}, 1.6},       // billboard
      {OccluderStamp::Shape::Ellipse, {0.15f, 0.35f, 0.2f}, 0.7},   // trash can
  };
}

std::vector<Image> procedural_backgrounds(std::size_t count, int width, int height,
                                          std::uint64_t seed) {
  std::vector<Image> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::mt19937_64 rng(derive_seed(seed, {i}));
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const Rgb top{float(u(rng)), float(u(rng)), float(u(rng))};
    const Rgb bottom{float(u(rng)), float(u(rng)), float(u(rng))};
    const double stripe_freq = 2.0 + 6.0 * u(rng);
    const double stripe_amp = 0.15 * u(rng);
    Image img(width, height);
    for (int y = 0; y < height; ++y) {
      const double t = height > 1 ? static_cast<double>(y) / (height - 1) : 0.0;
      for (int x = 0; x < width; ++x) {
        const double s = stripe_amp * std::sin(2.0 * std::numbers::pi * stripe_freq * x / width);
        auto mix = [&](float a, float b) {
          return static_cast<float>(std::clamp((1.0 - t) * a + t * b + s, 0.0, 1.0));
        };
        img.at(x, y) = {mix(top.r, bottom.r), mix(top.g, bottom.g), mix(top.b, bottom.b)};
      }
    }
    out.push_back(std::move(img));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rendering

Eigen::Vector3d light_vector(double light_direction_deg, const Shading& shading) {
  const double beta = normalize(AttributeKind::LightDirection, light_direction_deg) * kDegToRad;
  const double elev = shading.light_elevation_deg * kDegToRad;
  return {std::cos(beta) * std::cos(elev), std::sin(beta) * std::cos(elev), std::sin(elev)};
}

PixelBox projected_bounds(const ObjectModel& model, const CameraExtrinsics& pose,
                          const CameraIntrinsics& intr) {
  const ProjectionMatrix m = projection_matrix(intr, pose);
  PixelBox out{kInf, kInf, -kInf, -kInf};
  for (const auto& p : model.primitives) {
    const PixelBox b = primitive_bounds(p, m, intr);
    if (b.empty()) continue;
    out.x0 = std::min(out.x0, b.x0);
    out.y0 = std::min(out.y0, b.y0);
    out.x1 = std::max(out.x1, b.x1);
    out.y1 = std::max(out.y1, b.y1);
  }
  if (!(out.x1 > out.x0)) return {};
  return out;
}

RenderResult render(const ObjectModel& model, const AttributeVector& attrs,
                    const CameraIntrinsics& intr, const PlacementMapping& map,
                    const RenderOptions& opts) {
  intr.validate();
  if (opts.samples < 1) throw std::invalid_argument("samples per axis must be >= 1");
  if (model.primitives.empty()) throw std::invalid_argument("object model has no primitives");
  AttributeVector a;
  for (AttributeKind k : kAllAttributes) a[k] = normalize(k, attrs[k]);

  const CameraExtrinsics pose = extrinsics(a, map);
  const ProjectionMatrix proj = projection_matrix(intr, pose);
  const Eigen::Vector3d origin = pose.position();
  const Eigen::Vector3d right = pose.rotation.row(0).transpose();
  const Eigen::Vector3d up = pose.rotation.row(1).transpose();
  const Eigen::Vector3d back = pose.rotation.row(2).transpose();
  const double fpx = intr.focal_pixels();
  const Eigen::Vector3d light = light_vector(a[AttributeKind::LightDirection], opts.shading);
  const double diffuse = a[AttributeKind::LightIntensity] / 100.0;

  struct Candidate {
    const Primitive* prim;
    int x0, y0, x1, y1;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(model.primitives.size());
  int ux0 = intr.width, uy0 = intr.height, ux1 = 0, uy1 = 0;
  for (const auto& p : model.primitives) {
    const PixelBox b = primitive_bounds(p, proj, intr);
    if (b.empty()) continue;
    Candidate c{&p, static_cast<int>(std::floor(b.x0)), static_cast<int>(std::floor(b.y0)),
                static_cast<int>(std::ceil(b.x1)), static_cast<int>(std::ceil(b.y1))};
    ux0 = std::min(ux0, c.x0);
    uy0 = std::min(uy0, c.y0);
    ux1 = std::max(ux1, c.x1);
    uy1 = std::max(uy1, c.y1);
    candidates.push_back(c);
  }

  RenderResult out;
  out.foreground = Image(intr.width, intr.height);
  out.silhouette = Mask(intr.width, intr.height);
  out.coverage.assign(static_cast<std::size_t>(intr.width) * intr.height, 0.0f);
  out.bounding_box = projected_bounds(model, pose, intr);

  const int ss = opts.samples;
  const double inv_ss = 1.0 / ss;
  for (int y = std::max(0, uy0); y < std::min(intr.height, uy1); ++y) {
    for (int x = std::max(0, ux0); x < std::min(intr.width, ux1); ++x) {
      double r = 0.0, g = 0.0, b = 0.0;
      int hits = 0;
      for (int sy = 0; sy < ss; ++sy) {
        const double yn = (0.5 * intr.height - (y + (sy + 0.5) * inv_ss)) / fpx;
        for (int sx = 0; sx < ss; ++sx) {
          const double xn = ((x + (sx + 0.5) * inv_ss) - 0.5 * intr.width) / fpx;
          Eigen::Vector3d d = xn * right + yn * up - back;
          Eigen::Vector3d inv_d;
          for (int k = 0; k < 3; ++k) {
            if (std::abs(d[k]) < 1e-15) d[k] = 1e-15;
            inv_d[k] = 1.0 / d[k];
          }
          Hit hit;
          const Primitive* hit_prim = nullptr;
          for (const auto& c : candidates) {
            if (x < c.x0 || x >= c.x1 || y < c.y0 || y >= c.y1) continue;
            const bool h = c.prim->shape == PrimitiveShape::Box ? intersect_box(*c.prim, origin, inv_d, hit)
                                                                : intersect_ellipsoid(*c.prim, origin, d, hit);
            if (h) hit_prim = c.prim;
          }
          if (!hit_prim) continue;
          const double lambert = std::max(0.0, hit.normal.dot(light));
          const Rgb c = scale(hit_prim->color, opts.shading.ambient + diffuse * lambert);
          r += c.r;
          g += c.g;
          b += c.b;
          ++hits;
        }
      }
      if (hits == 0) continue;
      const double n = ss * ss;
      out.foreground.at(x, y) = {static_cast<float>(r / n), static_cast<float>(g / n), static_cast<float>(b / n)};
      out.silhouette.set(x, y);
      out.coverage[static_cast<std::size_t>(y) * intr.width + x] = static_cast<float>(hits / n);
    }
  }
  out.empty_silhouette = out.silhouette.count() == 0;

  if (opts.mode == RenderMode::Optimization) {
    out.image = opts.crop.enabled ? crop_to_box(out.foreground, out.bounding_box, opts.crop) : out.foreground;
    return out;
  }

  Image background(intr.width, intr.height);
  if (opts.backgrounds && !opts.backgrounds->empty()) {
    std::mt19937_64 rng(derive_seed(opts.seed, {0x6267}));
    std::uniform_int_distribution<std::size_t> pick(0, opts.backgrounds->size() - 1);
    const std::size_t id = pick(rng);
    background = (*opts.backgrounds)[id];
    out.background_id = static_cast<int>(id);
  }
  CompositeResult comp = composite(out.foreground, out.silhouette, background, opts.occluders,
                                   opts.occlusion_probability, derive_seed(opts.seed, {0x6f63}),
                                   opts.placement, &out.coverage);
  out.image = opts.crop.enabled ? crop_to_box(comp.image, out.bounding_box, opts.crop) : std::move(comp.image);
  out.occluded = comp.occluded;
  out.occluder_id = comp.occluder_id;
  return out;
}

Image crop_to_box(const Image& source, const PixelBox& box, const CropOptions& crop) {
  if (crop.size < 1) throw std::invalid_argument("crop size must be >= 1");
  if (!(crop.margin >= 0.0)) throw std::invalid_argument("crop margin must be >= 0");
  Image out(crop.size, crop.size);
  if (box.empty()) return out;
  const double side = std::max(box.x1 - box.x0, box.y1 - box.y0) * (1.0 + crop.margin);
  const double left = 0.5 * (box.x0 + box.x1) - 0.5 * side;
  const double top = 0.5 * (box.y0 + box.y1) - 0.5 * side;
  const double step = side / crop.size;
  // Overlap of [lo, hi) with each source pixel along one axis.
  auto spans = [&](double lo, double hi, int limit) {
    std::vector<std::pair<int, double>> w;
    for (int p = std::max(0, static_cast<int>(std::floor(lo))); p < std::min(limit, static_cast<int>(std::ceil(hi))); ++p) {
      const double o = std::min(hi, p + 1.0) - std::max(lo, static_cast<double>(p));
      if (o > 0.0) w.emplace_back(p, o);
    }
    return w;
  };
  const double area = step * step;
  for (int j = 0; j < crop.size; ++j) {
    const auto ys = spans(top + j * step, top + (j + 1) * step, source.height());
    for (int i = 0; i < crop.size; ++i) {
      const auto xs = spans(left + i * step, left + (i + 1) * step, source.width());
      double r = 0.0, g = 0.0, b = 0.0;
      for (const auto& [y, wy] : ys) {
        for (const auto& [x, wx] : xs) {
          const Rgb& p = source.at(x, y);
          r += p.r * wx * wy;
          g += p.g * wx * wy;
          b += p.b * wx * wy;
        }
      }
      out.at(i, j) = {static_cast<float>(r / area), static_cast<float>(g / area), static_cast<float>(b / area)};
    }
  }
  return out;
}

std::vector<RenderResult> render_batch(const std::vector<ObjectModel>& models,
                                       const std::vector<AttributeVector>& attrs,
                                       const CameraIntrinsics& intr, const PlacementMapping& map,
                                       const RenderOptions& opts, std::size_t workers) {
  if (models.empty() || attrs.empty()) throw std::invalid_argument("render_batch needs models and attributes");
  std::vector<RenderResult> out(attrs.size());
  parallel_for(attrs.size(), workers, [&](std::size_t i) {
    RenderOptions local = opts;
    local.seed = derive_seed(opts.seed, {i});
    try {
      out[i] = render(models[i % models.size()], attrs[i], intr, map, local);
    } catch (const std::exception& e) {
      throw std::runtime_error("render " + std::to_string(i) + ": " + e.what());
    }
  });
  return out;
}

CompositeResult composite(const Image& foreground, const Mask& silhouette, const Image& background,
                          const std::vector<OccluderStamp>& occluders, double occlusion_probability,
                          std::uint64_t seed, const OccluderPlacement& placement,
                          const std::vector<float>* coverage) {
  const int w = foreground.width();
  const int h = foreground.height();
  if (background.width() != w || background.height() != h || silhouette.width != w ||
      silhouette.height != h) {
    throw std::invalid_argument("composite: image, mask and background dimensions differ");
  }
  if (coverage && coverage->size() != static_cast<std::size_t>(w) * h) {
    throw std::invalid_argument("composite: coverage size differs from the image");
  }
  if (!(occlusion_probability >= 0.0 && occlusion_probability <= 1.0)) {
    throw std::invalid_argument("occlusion probability must lie in [0,1]");
  }
  CompositeResult out;
  out.image = foreground;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb& bg = background.at(x, y);
      if (!silhouette.at(x, y)) {
        out.image.at(x, y) = bg;
      } else if (coverage) {
        const float k = 1.0f - (*coverage)[static_cast<std::size_t>(y) * w + x];
        Rgb& p = out.image.at(x, y);
        p = {p.r + k * bg.r, p.g + k * bg.g, p.b + k * bg.b};
      }
    }
  }
  if (occluders.empty()) return out;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (!(unit(rng) < occlusion_probability)) return out;

  const std::size_t id = std::min(occluders.size() - 1,
                                  static_cast<std::size_t>(unit(rng) * static_cast<double>(occluders.size())));
  const OccluderStamp& stamp = occluders[id];
  const double frac = placement.min_height_fraction +
                      unit(rng) * (placement.max_height_fraction - placement.min_height_fraction);
  const double sh = frac * h;
  const double sw = std::max(1.0, stamp.aspect * sh);
  const double cx = unit(rng) * w;
  const double cy = 0.5 * h + unit(rng) * 0.5 * h;
  out.occluded = true;
  out.occluder_id = static_cast<int>(id);
  for (int y = std::max(0, int(std::floor(cy - sh / 2))); y < std::min(h, int(std::ceil(cy + sh / 2))); ++y) {
    for (int x = std::max(0, int(std::floor(cx - sw / 2))); x < std::min(w, int(std::ceil(cx + sw / 2))); ++x) {
      const double px = (x + 0.5 - cx) / (sw / 2);
      const double py = (y + 0.5 - cy) / (sh / 2);
      const bool inside = stamp.shape == OccluderStamp::Shape::Rect
                              ? (std::abs(px) <= 1.0 && std::abs(py) <= 1.0)
                              : (px * px + py * py <= 1.0);
      if (inside) out.image.at(x, y) = stamp.color;
    }
  }
  return out;
}

}  // namespace attrdesc
