#include <bdtr/map_raster.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace bdtr {

namespace {

double cross(const Point2& a, const Point2& b, const Point2& c) {
    return (b.x() - a.x()) * (c.y() - a.y()) - (b.y() - a.y()) * (c.x() - a.x());
}

bool on_segment(const Point2& a, const Point2& b, const Point2& p) {
    return std::min(a.x(), b.x()) <= p.x() && p.x() <= std::max(a.x(), b.x()) && std::min(a.y(), b.y()) <= p.y() &&
           p.y() <= std::max(a.y(), b.y());
}

int sign(double v) { return (v > 0.0) - (v < 0.0); }

bool segments_intersect(const Point2& a, const Point2& b, const Point2& c, const Point2& d) {
    const int d1 = sign(cross(c, d, a));
    const int d2 = sign(cross(c, d, b));
    const int d3 = sign(cross(a, b, c));
    const int d4 = sign(cross(a, b, d));
    if (d1 != d2 && d3 != d4 && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0) return true;
    return (d1 == 0 && on_segment(c, d, a)) || (d2 == 0 && on_segment(c, d, b)) ||
           (d3 == 0 && on_segment(a, b, c)) || (d4 == 0 && on_segment(a, b, d));
}

void validate_ring(const Ring& ring, const std::string& label) {
    if (ring.size() < 3) throw ValidationError(label + ": ring needs at least 3 vertices");
    for (const auto& p : ring)
        if (!p.allFinite()) throw ValidationError(label + ": non-finite vertex");
    double area2 = 0.0;
    const std::size_t n = ring.size();
    for (std::size_t e = 0; e < n; ++e) {
        const Point2& a = ring[e];
        const Point2& b = ring[(e + 1) % n];
        area2 += a.x() * b.y() - b.x() * a.y();
        if (a == b) throw ValidationError(label + ": repeated consecutive vertex " + std::to_string(e));
    }
    if (area2 == 0.0) throw ValidationError(label + ": ring has zero area");
    // Non-adjacent edges must not touch.
    for (std::size_t e = 0; e < n; ++e) {
        for (std::size_t f = e + 1; f < n; ++f) {
            if (f == e + 1 || (e == 0 && f == n - 1)) continue;
            if (segments_intersect(ring[e], ring[(e + 1) % n], ring[f], ring[(f + 1) % n]))
                throw ValidationError(label + ": ring self-intersects at edges " + std::to_string(e) + " and " +
                                      std::to_string(f));
        }
    }
}

// Marks every cell center of row j whose x lies in [lo, hi].
void mark_span(MaskBits& bits, const GridSpec<double>& grid, int j, double lo, double hi) {
    const double ox = grid.origin().x();
    const double cell = grid.cell_l();
    const int first = std::max(0, static_cast<int>(std::floor((lo - ox) / cell - 0.5)) - 1);
    const int last = std::min(grid.cols() - 1, static_cast<int>(std::ceil((hi - ox) / cell - 0.5)) + 1);
    for (int i = first; i <= last; ++i) {
        const double cx = grid.cell_center(i, j).x();
        if (lo <= cx && cx <= hi) bits(i, j) = 1;
    }
}

void fill_polygon(MaskBits& bits, const GridSpec<double>& grid, const Polygon& poly) {
    std::vector<const Ring*> rings{&poly.outer};
    for (const auto& h : poly.holes) rings.push_back(&h);

    double ymin = poly.outer.front().y();
    double ymax = ymin;
    for (const auto& p : poly.outer) {
        ymin = std::min(ymin, p.y());
        ymax = std::max(ymax, p.y());
    }
    const double oy = grid.origin().y();
    const int j_first = std::max(0, static_cast<int>(std::floor((ymin - oy) / grid.cell_w() - 0.5)) - 1);
    const int j_last = std::min(grid.rows() - 1, static_cast<int>(std::ceil((ymax - oy) / grid.cell_w() - 0.5)) + 1);

    std::vector<double> xs;
    for (int j = j_first; j <= j_last; ++j) {
        const double yc = grid.cell_center(0, j).y();
        xs.clear();
        for (const Ring* ring : rings) {
            const std::size_t n = ring->size();
            for (std::size_t e = 0; e < n; ++e) {
                const Point2& a = (*ring)[e];
                const Point2& b = (*ring)[(e + 1) % n];
                if ((a.y() <= yc && b.y() > yc) || (b.y() <= yc && a.y() > yc)) {
                    xs.push_back(a.x() + (yc - a.y()) * (b.x() - a.x()) / (b.y() - a.y()));
                } else if (a.y() == yc && b.y() == yc) {
                    mark_span(bits, grid, j, std::min(a.x(), b.x()), std::max(a.x(), b.x()));
                }
                // Vertices sitting on the row are boundary points even when no edge crosses there.
                if (a.y() == yc) mark_span(bits, grid, j, a.x(), a.x());
            }
        }
        std::sort(xs.begin(), xs.end());
        for (std::size_t s = 0; s + 1 < xs.size(); s += 2) mark_span(bits, grid, j, xs[s], xs[s + 1]);
    }
}

}  // namespace

void validate(const PolygonSet& polys) {
    for (std::size_t p = 0; p < polys.size(); ++p) {
        const std::string base = "polygon " + std::to_string(p);
        validate_ring(polys[p].outer, base + " outer ring");
        for (std::size_t h = 0; h < polys[p].holes.size(); ++h)
            validate_ring(polys[p].holes[h], base + " hole " + std::to_string(h));
    }
}

const char* to_string(Drivability d) noexcept {
    switch (d) {
        case Drivability::drivable: return "drivable";
        case Drivability::non_drivable: return "non_drivable";
        case Drivability::out_of_range: return "out_of_range";
    }
    return "unknown";
}

DrivableMask::DrivableMask(const GridSpec<double>& grid)
    : grid_(grid), bits_(MaskBits::Zero(grid.cols(), grid.rows())) {}

DrivableMask::DrivableMask(const GridSpec<double>& grid, MaskBits bits) : grid_(grid), bits_(std::move(bits)) {
    if (bits_.rows() != grid_.cols() || bits_.cols() != grid_.rows())
        throw ValidationError("drivable mask: dimensions do not match the grid");
    if ((bits_.array() > std::uint8_t(1)).any()) throw ValidationError("drivable mask: bits must be 0 or 1");
}

DrivableMask DrivableMask::filled(const GridSpec<double>& grid, bool drivable) {
    return DrivableMask(grid, MaskBits::Constant(grid.cols(), grid.rows(), drivable ? 1 : 0));
}

Drivability DrivableMask::query(CellIndex c) const {
    if (!grid_.in_range(c)) return Drivability::out_of_range;
    return drivable(c) ? Drivability::drivable : Drivability::non_drivable;
}

Drivability DrivableMask::query(const Point2& p) const {
    const auto c = grid_.world_to_cell(p);
    if (!c) return Drivability::out_of_range;
    return query(*c);
}

long long DrivableMask::drivable_count() const { return bits_.cast<long long>().sum(); }

DrivableMask rasterize_drivable(const PolygonSet& polys, const GridSpec<double>& grid) {
    validate(polys);
    MaskBits bits = MaskBits::Zero(grid.cols(), grid.rows());
    for (const auto& poly : polys) fill_polygon(bits, grid, poly);
    return DrivableMask(grid, std::move(bits));
}

}  // namespace bdtr
