#pragma once

#include "facedepth/image.hpp"
#include "facedepth/mesh.hpp"

namespace facedepth {

/// Latitude/longitude sphere with poles on the y axis and outward
/// counter-clockwise winding. Triangle count is 2 * slices * (stacks - 1).
TriMesh make_uv_sphere(const Vec3& center, double radius, int stacks, int slices);

/// Axis-aligned rectangle in the plane z = `z`, facing +z, split into two triangles.
TriMesh make_quad(double z, double half_width, double half_height);

/// Stylized head: an ellipsoid (~0.16 x 0.21 x 0.19 m) with a nose, centered
/// at the origin, +y up, face towards +z. Carries "angry", "happy", "sad" and
/// "scared" morph targets built from smooth displacement fields.
TriMesh make_demo_head(int stacks = 72, int slices = 96);

/// Vertical two-color gradient.
RgbImage make_gradient_background(int width, int height, Rgb8 top, Rgb8 bottom);

}  // namespace facedepth
