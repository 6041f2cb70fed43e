#pragma once

#include "boundarymap/geometry.hpp"

#include <string>

namespace bmap {

// Bundled evaluation polygons. These are reconstructions with matching
// circumference and qualitative character, not survey data:
//   "symmetric"  - 2-fold symmetric cross, U = 77 m
//   "curved"     - smooth oval, U = 52 m
//   "apartment"  - rectilinear floor-plan outline, U = 100 m
//   "courtyard"  - non-convex yard, U = 106.8 m
MapPolygon bundled_map(const std::string& name);

std::vector<std::string> bundled_map_names();

// Uniformly scales the polygon so its perimeter equals the target.
MapPolygon scale_to_perimeter(const MapPolygon& p, double perimeter);

}  // namespace bmap
