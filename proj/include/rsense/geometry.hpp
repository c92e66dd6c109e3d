#pragma once

namespace rsense {

struct Point2 {
    double x = 0.0;
    double y = 0.0;
};

double distance(const Point2& a, const Point2& b);

// TX/RX placement. Construction rejects coincident endpoints so the
// line-of-sight distance is always positive.
class LinkGeometry {
public:
    LinkGeometry(Point2 tx, Point2 rx);

    const Point2& tx() const { return tx_; }
    const Point2& rx() const { return rx_; }
    double los_distance_m() const { return d_; }

private:
    Point2 tx_;
    Point2 rx_;
    double d_;
};

// Extra distance travelled by a single-bounce path via p relative to the
// direct path. Non-negative for every p (triangle inequality); level sets
// are ellipses with TX and RX as foci.
double excess_path_length(const Point2& p, const LinkGeometry& geom);

}  // namespace rsense
