#include "rsense/geometry.hpp"

#include <cmath>
#include <stdexcept>

namespace rsense {

double distance(const Point2& a, const Point2& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

LinkGeometry::LinkGeometry(Point2 tx, Point2 rx) : tx_(tx), rx_(rx), d_(distance(tx, rx)) {
    if (!(d_ > 0.0)) {
        throw std::invalid_argument("LinkGeometry: TX and RX positions must differ");
    }
}

double excess_path_length(const Point2& p, const LinkGeometry& geom) {
    const double excess =
        distance(p, geom.tx()) + distance(p, geom.rx()) - geom.los_distance_m();
    // Guard against rounding below zero for points on the segment.
    return excess > 0.0 ? excess : 0.0;
}

}  // namespace rsense
