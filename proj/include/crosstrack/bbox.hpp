#pragma once

namespace crosstrack {

/// Axis-aligned box in center form, pixel units.
struct BBox {
    double cx = 0.0;
    double cy = 0.0;
    double w = 0.0;
    double h = 0.0;
    double score = 1.0;

    double left() const { return cx - 0.5 * w; }
    double top() const { return cy - 0.5 * h; }
    double right() const { return cx + 0.5 * w; }
    double bottom() const { return cy + 0.5 * h; }
};

} // namespace crosstrack
