#pragma once

#include <bdtr/geometry.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <vector>

namespace bdtr {

using Point2 = Vector2<double>;
using Ring = std::vector<Point2>;

/// Simple polygon with optional holes; inside-ness follows the even-odd rule over all rings.
struct Polygon {
    Ring outer;
    std::vector<Ring> holes;

    bool operator==(const Polygon&) const = default;
};

/// Drivable region as a union of polygons.
using PolygonSet = std::vector<Polygon>;

/// Rejects rings with fewer than three vertices, zero area, or self-intersections.
void validate(const PolygonSet& polys);

enum class Drivability : std::uint8_t { drivable, non_drivable, out_of_range };

const char* to_string(Drivability d) noexcept;

using MaskBits = Eigen::Matrix<std::uint8_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Binary drivable grid D, bits(i, j) with 1 = drivable.
class DrivableMask {
public:
    /// All cells non-drivable.
    explicit DrivableMask(const GridSpec<double>& grid);
    DrivableMask(const GridSpec<double>& grid, MaskBits bits);

    static DrivableMask filled(const GridSpec<double>& grid, bool drivable);

    const GridSpec<double>& grid() const { return grid_; }
    const MaskBits& bits() const { return bits_; }

    bool drivable(CellIndex c) const { return bits_(c.i, c.j) != 0; }
    Drivability query(CellIndex c) const;
    Drivability query(const Point2& p) const;

    long long drivable_count() const;

    bool operator==(const DrivableMask&) const = default;

private:
    GridSpec<double> grid_;
    MaskBits bits_;
};

/// Cell is drivable iff its center lies in the union of `polys`; centers on an edge count as inside.
DrivableMask rasterize_drivable(const PolygonSet& polys, const GridSpec<double>& grid);

/// Out-of-grid points report `out_of_range` rather than non-drivable.
inline Drivability is_drivable_point(const DrivableMask& mask, const Point2& p) { return mask.query(p); }

}  // namespace bdtr
