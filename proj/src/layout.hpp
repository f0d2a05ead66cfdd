#pragma once

// Structured patch layout shared by the outline and the mesher. Every point
// that lies on an edge shared by two patches is produced by the same
// expression in both, so shared nodes coincide bitwise.

#include "finray/design.hpp"

#include <string>
#include <vector>

namespace finray::detail {

/// (nu + 1) x (nv + 1) lattice of points, index i + j * (nu + 1).
struct GridPatch {
    int nu = 0;
    int nv = 0;
    std::vector<Vec2> points;
    std::vector<std::string> cell_region;  ///< nu * nv, index i + j * nu

    Vec2& at(int i, int j) { return points[static_cast<std::size_t>(i + j * (nu + 1))]; }
    const Vec2& at(int i, int j) const { return points[static_cast<std::size_t>(i + j * (nu + 1))]; }
    std::vector<Vec2> row(int j) const;
    std::vector<Vec2> column(int i) const;
};

struct Layout {
    std::vector<GridPatch> patches;

    // Ordered boundary chains (reference coordinates).
    Polyline front_outer;  ///< base -> cavity top
    Polyline front_inner;
    Polyline back_outer;
    Polyline back_inner;   ///< reflective face of the mirror sheet
    Polyline cap_front;    ///< cavity top -> tip, on the front outer line
    Polyline cap_back;
    Polyline cap_top;      ///< front -> back
    Polyline cap_cavity;   ///< cavity roof, front inner -> back inner
    Polyline front_base;   ///< outer -> inner at y = 0
    Polyline back_base;    ///< inner -> outer at y = 0
    Polyline gel_face;     ///< pad arc, base -> tip
    Polyline pad_chord;    ///< A -> B along the front outer line
    Polyline pad_lower_end;  ///< A -> arc start
    Polyline pad_upper_end;  ///< B -> arc end
    std::vector<Polyline> rib_bottom;  ///< front -> back
    std::vector<Polyline> rib_top;     ///< front -> back
    /// Front / back inner-face pieces bounding each cavity cell, base -> tip.
    std::vector<Polyline> cell_front;
    std::vector<Polyline> cell_back;

    double pad_lo = 0.0;  ///< pad end heights on the front outer line
    double pad_hi = 0.0;
};

int divisions(double length, double max_edge);

Layout build_layout(const FinRayDesign& design, double max_edge);

/// Same point sequence without consecutive exact duplicates.
Polyline join(std::initializer_list<const Polyline*> parts);
Polyline reversed(Polyline p);

}  // namespace finray::detail
