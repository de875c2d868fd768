#pragma once

#include <cmath>
#include <cstdint>
#include <functional>

namespace lorentz {

/// Real 2-vector.
struct Vec2 {
  double x{0.0};
  double y{0.0};

  constexpr Vec2 &operator+=(const Vec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr Vec2 &operator-=(const Vec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr Vec2 operator+(Vec2 a, const Vec2 &b) { return a += b; }
  friend constexpr Vec2 operator-(Vec2 a, const Vec2 &b) { return a -= b; }
  friend constexpr Vec2 operator-(const Vec2 &a) { return {-a.x, -a.y}; }
  friend constexpr Vec2 operator*(double s, const Vec2 &a) { return {s * a.x, s * a.y}; }
  friend constexpr Vec2 operator*(const Vec2 &a, double s) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(const Vec2 &, const Vec2 &) = default;
};

constexpr double dot(const Vec2 &a, const Vec2 &b) { return a.x * b.x + a.y * b.y; }
constexpr double cross(const Vec2 &a, const Vec2 &b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2 &a) { return std::hypot(a.x, a.y); }
inline Vec2 normalized(const Vec2 &a) {
  const double n = norm(a);
  return {a.x / n, a.y / n};
}

/// Integer lattice vector: cells, displacements, corridor directions.
struct IVec2 {
  std::int64_t x{0};
  std::int64_t y{0};

  constexpr IVec2 &operator+=(const IVec2 &o) {
    x += o.x;
    y += o.y;
    return *this;
  }
  constexpr IVec2 &operator-=(const IVec2 &o) {
    x -= o.x;
    y -= o.y;
    return *this;
  }
  friend constexpr IVec2 operator+(IVec2 a, const IVec2 &b) { return a += b; }
  friend constexpr IVec2 operator-(IVec2 a, const IVec2 &b) { return a -= b; }
  friend constexpr IVec2 operator-(const IVec2 &a) { return {-a.x, -a.y}; }
  friend constexpr IVec2 operator*(std::int64_t s, const IVec2 &a) { return {s * a.x, s * a.y}; }
  friend constexpr bool operator==(const IVec2 &, const IVec2 &) = default;
  friend constexpr auto operator<=>(const IVec2 &, const IVec2 &) = default;
};

constexpr std::int64_t cross(const IVec2 &a, const IVec2 &b) { return a.x * b.y - a.y * b.x; }
constexpr std::int64_t dot(const IVec2 &a, const IVec2 &b) { return a.x * b.x + a.y * b.y; }
constexpr std::int64_t norm2(const IVec2 &a) { return a.x * a.x + a.y * a.y; }
inline double norm(const IVec2 &a) {
  return std::hypot(static_cast<double>(a.x), static_cast<double>(a.y));
}
constexpr Vec2 to_real(const IVec2 &a) {
  return {static_cast<double>(a.x), static_cast<double>(a.y)};
}

}  // namespace lorentz

template <>
struct std::hash<lorentz::IVec2> {
  std::size_t operator()(const lorentz::IVec2 &v) const noexcept {
    const auto h = static_cast<std::uint64_t>(v.x) * 0x9E3779B97F4A7C15ULL ^
                   (static_cast<std::uint64_t>(v.y) + 0x632BE59BD9B4E019ULL);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};
