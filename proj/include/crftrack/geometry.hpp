// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crftrack {

struct Displacement {
    double dx = 0.0;
    double dy = 0.0;

    Displacement operator+(const Displacement& o) const { return {dx + o.dx, dy + o.dy}; }
    Displacement operator-(const Displacement& o) const { return {dx - o.dx, dy - o.dy}; }
    Displacement operator*(double s) const { return {dx * s, dy * s}; }
    bool operator==(const Displacement& o) const = default;

    double norm() const { return std::hypot(dx, dy); }
    double normL1() const { return std::abs(dx) + std::abs(dy); }
    bool finite() const { return std::isfinite(dx) && std::isfinite(dy); }
};

struct Point {
    double x = 0.0;
    double y = 0.0;

    double distanceTo(const Point& o) const { return std::hypot(x - o.x, y - o.y); }
};

/// Axis-aligned box in continuous pixel coordinates, (x,y) = top-left corner.
/// Width and height must be strictly positive.
struct BoundingBox {
    double x = 0.0;
    double y = 0.0;
    double w = 1.0;
    double h = 1.0;

    bool operator==(const BoundingBox& o) const = default;

    bool valid() const { return w > 0.0 && h > 0.0 && std::isfinite(x) && std::isfinite(y) && std::isfinite(w) && std::isfinite(h); }
    double area() const { return w * h; }
    double right() const { return x + w; }
    double bottom() const { return y + h; }
    Point center() const { return {x + w / 2.0, y + h / 2.0}; }
    double diagonal() const { return std::hypot(w, h); }

    BoundingBox translated(const Displacement& d) const { return {x + d.dx, y + d.dy, w, h}; }
};

inline double iou(const BoundingBox& a, const BoundingBox& b) {
    if (a == b) return 1.0;  // exact for self-overlap regardless of rounding
    const double ix = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.x, b.x));
    const double iy = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.y, b.y));
    const double inter = ix * iy;
    if (inter <= 0.0) return 0.0;
    return inter / (a.area() + b.area() - inter);
}

/// Grows a box about its own center. Used to cut the context window around a
/// tracked object before displacement estimation.
inline BoundingBox enlargeBox(const BoundingBox& b, double widthFactor, double heightFactor) {
    if (widthFactor < 1.0 || heightFactor < 1.0)
        throw std::invalid_argument("enlargeBox: factors must be >= 1");
    const Point c = b.center();
    const double nw = b.w * widthFactor;
    const double nh = b.h * heightFactor;
    return {c.x - nw / 2.0, c.y - nh / 2.0, nw, nh};
}

struct Detection {
    int frame = 1;             // 1-based frame index
    BoundingBox box;
    double score = 1.0;        // detector confidence, detector-defined scale
};

}  // namespace crftrack
