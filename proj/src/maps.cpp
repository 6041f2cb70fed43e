#include "boundarymap/maps.hpp"

#include <cmath>

namespace bmap {

namespace {

MapPolygon make_polygon(std::initializer_list<std::pair<double, double>> pts) {
  MapPolygon p;
  for (const auto& [x, y] : pts) p.vertices.emplace_back(x, y);
  return p;
}

// 2-fold symmetric cross; aliases half a lap apart.
MapPolygon symmetric_raw() {
  const double w = 5.0, lx = 12.0, ly = 7.25;
  return make_polygon({{-w / 2, -ly}, {w / 2, -ly}, {w / 2, -w / 2}, {lx, -w / 2},
                       {lx, w / 2}, {w / 2, w / 2}, {w / 2, ly}, {-w / 2, ly},
                       {-w / 2, w / 2}, {-lx, w / 2}, {-lx, -w / 2}, {-w / 2, -w / 2}});
}

MapPolygon curved_raw() {
  MapPolygon p;
  const int n = 72;
  for (int k = 0; k < n; ++k) {
    const double a = 2.0 * kPi * k / n;
    // slightly bean-shaped oval
    const double r = 1.0 + 0.15 * std::cos(2.0 * a);
    p.vertices.emplace_back(10.0 * r * std::cos(a), 6.0 * r * std::sin(a));
  }
  return p;
}

// Floor-plan style outline: three recesses of clearly different proportions
// plus one plain wall, so no boundary section repeats under rotation.
MapPolygon apartment_raw() {
  return make_polygon({{0, 0}, {5, 0}, {5, 3}, {9, 3}, {9, 0}, {24, 0},
                       {24, 6}, {19, 6}, {19, 12}, {24, 12}, {24, 20},
                       {14, 20}, {14, 18}, {12, 18}, {12, 20}, {0, 20}});
}

MapPolygon courtyard_raw() {
  return make_polygon({{0, 0}, {30, 0}, {30, 12}, {22, 12}, {22, 22}, {8, 22},
                       {8, 16}, {0, 16}});
}

}  // namespace

MapPolygon scale_to_perimeter(const MapPolygon& p, double perimeter) {
  const double current = p.perimeter();
  if (current <= 0.0) throw std::invalid_argument("degenerate polygon");
  const double s = perimeter / current;
  MapPolygon out;
  out.vertices.reserve(p.vertices.size());
  for (const auto& v : p.vertices) out.vertices.push_back(s * v);
  return out;
}

MapPolygon bundled_map(const std::string& name) {
  if (name == "symmetric") return scale_to_perimeter(symmetric_raw(), 77.0);
  if (name == "curved") return scale_to_perimeter(curved_raw(), 52.0);
  if (name == "apartment") return scale_to_perimeter(apartment_raw(), 100.0);
  if (name == "courtyard") return scale_to_perimeter(courtyard_raw(), 106.8);
  throw std::invalid_argument("unknown bundled map: " + name);
}

std::vector<std::string> bundled_map_names() {
  return {"symmetric", "curved", "apartment", "courtyard"};
}

}  // namespace bmap
