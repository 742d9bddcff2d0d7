#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "dualpath/rng.hpp"

namespace dualpath {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Point2&) const = default;
};

/// Polar position relative to the typical user at the origin.
struct PointPolar {
  double r = 0.0;      ///< distance, m
  double theta = 0.0;  ///< azimuth in [0, 2*pi)

  Point2 cartesian() const;
  bool operator==(const PointPolar&) const = default;
};

/// Blockage footprint: `length` runs along the orientation axis, `width`
/// across it.
struct Rectangle {
  Point2 center;
  double length = 0.0;
  double width = 0.0;
  double orientation = 0.0;

  bool operator==(const Rectangle&) const = default;
};

/// One sampled network. Base stations are strictly sorted by distance.
struct Realization {
  std::vector<PointPolar> base_stations;
  std::vector<Rectangle> blockages;
  double region_radius = 0.0;
};

double normalize_angle(double theta);
Point2 rotate(Point2 p, double angle);

/// Homogeneous PPP on the disc of `region_radius` centred at the origin,
/// returned sorted ascending by r (a tie triggers a fresh draw).
std::vector<PointPolar> sample_bs_ppp(double intensity, double region_radius, RngStream& rng);

/// Boolean model of identical rectangles whose centres form a PPP on the disc.
/// With `random_orientation` each rectangle gets an independent uniform
/// orientation instead of the fixed `orientation` mark.
std::vector<Rectangle> sample_blockages(double intensity, double region_radius, double length,
                                        double width, double orientation, RngStream& rng,
                                        bool random_orientation = false);

/// Closed segment [a, b] against the closed rectangle.
bool segment_intersects_rectangle(Point2 a, Point2 b, const Rectangle& rect);

std::size_t count_blocking(Point2 a, Point2 b, std::span<const Rectangle> blockages);

/// Link-aligned box holding every centre from which a rectangle of circumradius
/// `reach` can touch segment [a, b].
struct LinkCorridor {
  Point2 origin;   ///< segment start a
  Point2 axis;     ///< unit vector a -> b
  double along_min = 0.0;
  double along_max = 0.0;
  double half_span = 0.0;

  LinkCorridor(Point2 a, Point2 b, double reach);
  double area() const;
  bool contains(Point2 p) const;
  Point2 sample(RngStream& rng) const;
};

/// Blockage field of the Boolean model restricted to the neighbourhood of
/// segment [a, b]. Statistically identical, for that segment, to the field on
/// the whole plane.
std::vector<Rectangle> sample_blockages_near_segment(Point2 a, Point2 b, double intensity,
                                                     double length, double width,
                                                     double orientation, RngStream& rng,
                                                     bool random_orientation = false);

/// LoS indicators for a set of links from `origin`, sharing one blockage field
/// sampled lazily over the union of the link corridors.
std::vector<bool> sample_shared_los(Point2 origin, std::span<const Point2> endpoints,
                                    double intensity, double length, double width,
                                    double orientation, RngStream& rng,
                                    bool random_orientation = false);

}  // namespace dualpath
