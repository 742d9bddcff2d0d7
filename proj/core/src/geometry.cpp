#include "dualpath/geometry.hpp"

#include <algorithm>
#include <cmath>

#include "dualpath/error.hpp"
#include "dualpath/params.hpp"

namespace dualpath {

Point2 PointPolar::cartesian() const { return {r * std::cos(theta), r * std::sin(theta)}; }

double normalize_angle(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  if (t >= kTwoPi) t = 0.0;
  return t;
}

Point2 rotate(Point2 p, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  return {c * p.x - s * p.y, s * p.x + c * p.y};
}

namespace {

void check_sampling_args(double intensity, double region_radius) {
  if (!std::isfinite(intensity) || intensity < 0.0)
    throw ParameterError("intensity must be finite and >= 0");
  if (!std::isfinite(region_radius) || region_radius <= 0.0)
    throw ParameterError("region_radius must be finite and > 0");
}

void check_rectangle(double length, double width) {
  if (!(std::isfinite(length) && length > 0.0 && std::isfinite(width) && width > 0.0))
    throw ParameterError("rectangle must have positive finite length and width");
}

Point2 uniform_in_disc(double radius, RngStream& rng) {
  const double r = radius * std::sqrt(uniform01(rng));
  const double t = kTwoPi * uniform01(rng);
  return {r * std::cos(t), r * std::sin(t)};
}

}  // namespace

std::vector<PointPolar> sample_bs_ppp(double intensity, double region_radius, RngStream& rng) {
  check_sampling_args(intensity, region_radius);
  const double mean = intensity * kPi * region_radius * region_radius;
  for (;;) {
    const std::uint64_t n = poisson_count(rng, mean);
    std::vector<PointPolar> pts;
    pts.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
      const double r = region_radius * std::sqrt(uniform01(rng));
      const double theta = kTwoPi * uniform01(rng);
      pts.push_back({r, theta});
    }
    std::sort(pts.begin(), pts.end(),
              [](const PointPolar& a, const PointPolar& b) { return a.r < b.r; });
    const bool tie = std::adjacent_find(pts.begin(), pts.end(), [](const auto& a, const auto& b) {
                       return a.r == b.r;
                     }) != pts.end();
    if (!tie) return pts;
  }
}

std::vector<Rectangle> sample_blockages(double intensity, double region_radius, double length,
                                        double width, double orientation, RngStream& rng,
                                        bool random_orientation) {
  check_sampling_args(intensity, region_radius);
  check_rectangle(length, width);
  const std::uint64_t n = poisson_count(rng, intensity * kPi * region_radius * region_radius);
  std::vector<Rectangle> out;
  out.reserve(n);
  const double phi = normalize_angle(orientation);
  for (std::uint64_t i = 0; i < n; ++i) {
    const Point2 c = uniform_in_disc(region_radius, rng);
    const double o = random_orientation ? kTwoPi * uniform01(rng) : phi;
    out.push_back({c, length, width, o});
  }
  return out;
}

bool segment_intersects_rectangle(Point2 a, Point2 b, const Rectangle& rect) {
  check_rectangle(rect.length, rect.width);
  if (a == b) throw ParameterError("segment endpoints must differ");

  // Rectangle frame: length along x, width along y.
  const Point2 pa = rotate({a.x - rect.center.x, a.y - rect.center.y}, -rect.orientation);
  const Point2 pb = rotate({b.x - rect.center.x, b.y - rect.center.y}, -rect.orientation);
  const double hx = 0.5 * rect.length;
  const double hy = 0.5 * rect.width;

  // Liang-Barsky clipping against the closed box.
  double t0 = 0.0;
  double t1 = 1.0;
  const double d[2] = {pb.x - pa.x, pb.y - pa.y};
  const double p0[2] = {pa.x, pa.y};
  const double h[2] = {hx, hy};
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (p0[axis] < -h[axis] || p0[axis] > h[axis]) return false;
      continue;
    }
    double ta = (-h[axis] - p0[axis]) / d[axis];
    double tb = (h[axis] - p0[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 > t1) return false;
  }
  return true;
}

std::size_t count_blocking(Point2 a, Point2 b, std::span<const Rectangle> blockages) {
  return static_cast<std::size_t>(std::count_if(
      blockages.begin(), blockages.end(),
      [&](const Rectangle& r) { return segment_intersects_rectangle(a, b, r); }));
}

LinkCorridor::LinkCorridor(Point2 a, Point2 b, double reach) : origin(a) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::hypot(dx, dy);
  if (!(len > 0.0)) throw ParameterError("segment endpoints must differ");
  axis = {dx / len, dy / len};
  along_min = -reach;
  along_max = len + reach;
  half_span = reach;
}

double LinkCorridor::area() const { return (along_max - along_min) * 2.0 * half_span; }

bool LinkCorridor::contains(Point2 p) const {
  const double rx = p.x - origin.x;
  const double ry = p.y - origin.y;
  const double u = rx * axis.x + ry * axis.y;
  const double v = -rx * axis.y + ry * axis.x;
  return u >= along_min && u <= along_max && v >= -half_span && v <= half_span;
}

Point2 LinkCorridor::sample(RngStream& rng) const {
  const double u = along_min + (along_max - along_min) * uniform01(rng);
  const double v = half_span * (2.0 * uniform01(rng) - 1.0);
  return {origin.x + u * axis.x - v * axis.y, origin.y + u * axis.y + v * axis.x};
}

std::vector<Rectangle> sample_blockages_near_segment(Point2 a, Point2 b, double intensity,
                                                     double length, double width,
                                                     double orientation, RngStream& rng,
                                                     bool random_orientation) {
  if (!std::isfinite(intensity) || intensity < 0.0)
    throw ParameterError("intensity must be finite and >= 0");
  check_rectangle(length, width);
  const LinkCorridor box(a, b, 0.5 * std::hypot(length, width));
  const std::uint64_t n = poisson_count(rng, intensity * box.area());
  std::vector<Rectangle> out;
  out.reserve(n);
  const double phi = normalize_angle(orientation);
  for (std::uint64_t i = 0; i < n; ++i) {
    const double o = random_orientation ? kTwoPi * uniform01(rng) : phi;
    out.push_back({box.sample(rng), length, width, o});
  }
  return out;
}

std::vector<bool> sample_shared_los(Point2 origin, std::span<const Point2> endpoints,
                                    double intensity, double length, double width,
                                    double orientation, RngStream& rng,
                                    bool random_orientation) {
  if (!std::isfinite(intensity) || intensity < 0.0)
    throw ParameterError("intensity must be finite and >= 0");
  check_rectangle(length, width);
  const double reach = 0.5 * std::hypot(length, width);
  const double phi = normalize_angle(orientation);

  std::vector<LinkCorridor> boxes;
  boxes.reserve(endpoints.size());
  for (const Point2& e : endpoints) boxes.emplace_back(origin, e, reach);

  std::vector<bool> los(endpoints.size(), true);
  // A centre is generated by the first corridor containing it, so the union of
  // kept points is a PPP on the union of corridors.
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    const std::uint64_t n = poisson_count(rng, intensity * boxes[i].area());
    for (std::uint64_t m = 0; m < n; ++m) {
      const Point2 c = boxes[i].sample(rng);
      const double o = random_orientation ? kTwoPi * uniform01(rng) : phi;
      bool owned = true;
      for (std::size_t j = 0; j < i && owned; ++j) owned = !boxes[j].contains(c);
      if (!owned) continue;
      const Rectangle rect{c, length, width, o};
      for (std::size_t j = i; j < boxes.size(); ++j) {
        if (!los[j] || !boxes[j].contains(c)) continue;
        if (segment_intersects_rectangle(origin, endpoints[j], rect)) los[j] = false;
      }
    }
  }
  return los;
}

}  // namespace dualpath
