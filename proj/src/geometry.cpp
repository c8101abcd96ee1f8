#include "mlescape/geometry.hpp"

#include "mlescape/error.hpp"

#include <cmath>
#include <string>

namespace mlescape {

void Region::validate() const
{
    if (!(a < b) || !(c < d))
        throw Error(ErrorKind::ConfigError, "region requires a < b and c < d");
}

void TargetStrip::validate(const Region& region) const
{
    if (a_p < region.b)
        throw Error(ErrorKind::GeometryError, "target strip must abut or lie right of D (a' >= b)");
    if (!(b_p > a_p))
        throw Error(ErrorKind::GeometryError, "target strip requires b' > a'");
}

UnitPoint to_unit(const Region& r, State p)
{
    const UnitPoint u{2.0 * (p.v - 0.5 * (r.a + r.b)) / (r.b - r.a),
                      2.0 * (p.w - 0.5 * (r.c + r.d)) / (r.d - r.c)};
    if (!(std::abs(u.s) <= 1.0 && std::abs(u.k) <= 1.0))
        throw Error(ErrorKind::OutOfRegion, "point lies outside the escape region");
    return u;
}

State from_unit(const Region& r, UnitPoint u)
{
    return {0.5 * (r.b - r.a) * u.s + 0.5 * (r.a + r.b), 0.5 * (r.d - r.c) * u.k + 0.5 * (r.c + r.d)};
}

void Grid::validate() const
{
    if (n_v < 1 || n_w < 1)
        throw Error(ErrorKind::ConfigError, "grid sizes must be >= 1");
}

} // namespace mlescape
