#pragma once

#include <array>

#include "vdns/mesh.hpp"

namespace vdns {

/// Degree-4 symmetric rule on a triangle (six points, barycentric weights summing to 1).
struct TrianglePoint {
  double l0, l1, l2, weight;
};

inline constexpr std::array<TrianglePoint, 6> triangle_rule_deg4 = {{
    {0.108103018168070227, 0.445948490915964886, 0.445948490915964886, 0.223381589678011466},
    {0.445948490915964886, 0.108103018168070227, 0.445948490915964886, 0.223381589678011466},
    {0.445948490915964886, 0.445948490915964886, 0.108103018168070227, 0.223381589678011466},
    {0.816847572980458514, 0.091576213509770743, 0.091576213509770743, 0.109951743655321868},
    {0.091576213509770743, 0.816847572980458514, 0.091576213509770743, 0.109951743655321868},
    {0.091576213509770743, 0.091576213509770743, 0.816847572980458514, 0.109951743655321868},
}};

/// Five-point Gauss-Legendre on [0, 1]: (parameter, weight). Exact to degree 9.
inline constexpr std::array<std::array<double, 2>, 5> segment_rule_gauss5 = {{
    {0.046910077030668004, 0.118463442528094544},
    {0.230765344947158454, 0.239314335249683234},
    {0.5, 64.0 / 225.0},
    {0.769234655052841546, 0.239314335249683234},
    {0.953089922969331996, 0.118463442528094544},
}};

/// Integral of `fn` over a cell, fan-triangulated from its centroid.
/// `fn` maps a Vec2 to any type supporting `+` and scalar `*`.
template <class Fn>
auto integrate_cell(const Mesh& mesh, std::size_t cell, Fn&& fn) {
  const auto loop = mesh.cell_vertices(cell);
  const Vec2& c = mesh.cell_centroid(cell);
  using Value = std::decay_t<decltype(fn(c))>;
  Value sum = fn(c) * 0.0;
  for (std::size_t i = 0; i < loop.size(); ++i) {
    const Vec2& a = mesh.vertex(loop[i]);
    const Vec2& b = mesh.vertex(loop[(i + 1) % loop.size()]);
    const Vec2 ea = a - c;
    const Vec2 eb = b - c;
    const double area = 0.5 * std::abs(ea.x() * eb.y() - ea.y() * eb.x());
    for (const TrianglePoint& q : triangle_rule_deg4) {
      const Vec2 x = q.l0 * c + q.l1 * a + q.l2 * b;
      sum = sum + (q.weight * area) * fn(x);
    }
  }
  return sum;
}

template <class Fn>
auto integrate_face(const Mesh& mesh, std::size_t f, Fn&& fn) {
  const Face& face = mesh.face(f);
  const Vec2& a = mesh.vertex(face.v0);
  const Vec2& b = mesh.vertex(face.v1);
  const double len = mesh.face_measure(f);
  using Value = std::decay_t<decltype(fn(a))>;
  Value sum = fn(a) * 0.0;
  for (const auto& [s, w] : segment_rule_gauss5) {
    const Vec2 x = (1.0 - s) * a + s * b;
    sum = sum + (w * len) * fn(x);
  }
  return sum;
}

template <class Fn>
auto cell_mean(const Mesh& mesh, std::size_t cell, Fn&& fn) {
  auto sum = integrate_cell(mesh, cell, fn);
  sum = sum * (1.0 / mesh.cell_measure(cell));
  return sum;
}

template <class Fn>
auto face_mean(const Mesh& mesh, std::size_t f, Fn&& fn) {
  auto sum = integrate_face(mesh, f, fn);
  sum = sum * (1.0 / mesh.face_measure(f));
  return sum;
}

}  // namespace vdns
