#include "layout.hpp"

#include "finray/errors.hpp"

#include <algorithm>
#include <cmath>

namespace finray::detail {

std::vector<Vec2> GridPatch::row(int j) const {
    std::vector<Vec2> r;
    for (int i = 0; i <= nu; ++i) r.push_back(at(i, j));
    return r;
}

std::vector<Vec2> GridPatch::column(int i) const {
    std::vector<Vec2> c;
    for (int j = 0; j <= nv; ++j) c.push_back(at(i, j));
    return c;
}

int divisions(double length, double max_edge) {
    return std::max(1, static_cast<int>(std::ceil(length / max_edge - 1e-9)));
}

Polyline join(std::initializer_list<const Polyline*> parts) {
    Polyline out;
    for (const Polyline* p : parts) {
        for (const Vec2& v : *p) {
            if (out.empty() || !(out.back() == v)) out.push_back(v);
        }
    }
    return out;
}

Polyline reversed(Polyline p) {
    std::reverse(p.begin(), p.end());
    return p;
}

namespace {

double at_fraction(double a, double b, int j, int n) {
    const double t = static_cast<double>(j) / n;
    return a * (1.0 - t) + b * t;
}

/// Transfinite (Coons) fill of a patch whose four boundary rows/columns are set.
void coons_fill(GridPatch& g) {
    const Vec2 c00 = g.at(0, 0), c10 = g.at(g.nu, 0), c01 = g.at(0, g.nv), c11 = g.at(g.nu, g.nv);
    for (int j = 1; j < g.nv; ++j) {
        const double t = static_cast<double>(j) / g.nv;
        for (int i = 1; i < g.nu; ++i) {
            const double s = static_cast<double>(i) / g.nu;
            const Vec2 edges = g.at(i, 0) * (1 - t) + g.at(i, g.nv) * t + g.at(0, j) * (1 - s) + g.at(g.nu, j) * s;
            const Vec2 corners = c00 * ((1 - s) * (1 - t)) + c10 * (s * (1 - t)) + c01 * ((1 - s) * t) + c11 * (s * t);
            g.at(i, j) = edges - corners;
        }
    }
}

GridPatch make_patch(int nu, int nv, const std::string& region) {
    GridPatch g;
    g.nu = nu;
    g.nv = nv;
    g.points.resize(static_cast<std::size_t>((nu + 1) * (nv + 1)));
    g.cell_region.assign(static_cast<std::size_t>(nu * nv), region);
    return g;
}

std::vector<double> unique_sorted(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    std::vector<double> out;
    for (double x : v) {
        if (out.empty() || x - out.back() > 1e-9) out.push_back(x);
    }
    return out;
}

struct Segment {
    double lo, hi;
    int n;
};

}  // namespace

Layout build_layout(const FinRayDesign& d, double h) {
    if (!(h > 0.0)) throw InvalidArgument("max_edge must be > 0");
    if (d.ribs.size() != static_cast<std::size_t>(d.rib_count))
        throw InvalidArgument("design has not been through build_design");

    Layout lay;
    const StrutFrame f = strut_frame(d);
    const double tf = d.front_strut_thickness;
    const std::vector<double> back_offsets = {0.0, d.backing_thickness, d.backing_thickness + d.back_strut_thickness,
                                              d.back_total_thickness()};
    const std::vector<std::string> back_regions = {region::backing, region::back_strut, region::mirror_sheet};
    const double ytop = d.cavity_top;

    // Pad chord end heights on the front outer line.
    const double face_len = norm(f.front_top - f.front_base);
    const Vec2 fdir = (f.front_top - f.front_base) / face_len;
    const double s_mid = d.gel_pad.center_fraction * face_len;
    lay.pad_lo = (f.front_base + fdir * (s_mid - 0.5 * d.gel_pad.chord_length)).y;
    lay.pad_hi = (f.front_base + fdir * (s_mid + 0.5 * d.gel_pad.chord_length)).y;

    // Break points along each strut; rib junctions share one division count.
    std::vector<double> fb = {0.0, ytop, lay.pad_lo, lay.pad_hi};
    std::vector<double> bb = {0.0, ytop};
    for (const auto& r : d.ribs) {
        fb.insert(fb.end(), {r.front_lo, r.front_hi});
        bb.insert(bb.end(), {r.back_lo, r.back_hi});
    }
    fb = unique_sorted(fb);
    bb = unique_sorted(bb);
    const double f_slope = 1.0 / fdir.y;  // along-strut length per unit height
    const double b_slope = norm(f.back_top - f.back_base) / (f.back_top.y - f.back_base.y);

    std::vector<int> junction_div;
    for (const auto& r : d.ribs) {
        junction_div.push_back(std::max(divisions((r.front_hi - r.front_lo) * f_slope, h),
                                        divisions((r.back_hi - r.back_lo) * b_slope, h)));
    }
    auto make_segments = [&](const std::vector<double>& brk, double slope, bool front) {
        std::vector<Segment> segs;
        for (std::size_t k = 0; k + 1 < brk.size(); ++k) {
            Segment s{brk[k], brk[k + 1], divisions((brk[k + 1] - brk[k]) * slope, h)};
            for (std::size_t r = 0; r < d.ribs.size(); ++r) {
                const double lo = front ? d.ribs[r].front_lo : d.ribs[r].back_lo;
                const double hi = front ? d.ribs[r].front_hi : d.ribs[r].back_hi;
                if (std::abs(s.lo - lo) <= 1e-9 && std::abs(s.hi - hi) <= 1e-9) s.n = junction_div[r];
            }
            segs.push_back(s);
        }
        return segs;
    };
    const std::vector<Segment> fsegs = make_segments(fb, f_slope, true);
    const std::vector<Segment> bsegs = make_segments(bb, b_slope, false);

    const int nf = divisions(tf, h);
    std::vector<int> nb;
    for (std::size_t l = 0; l + 1 < back_offsets.size(); ++l)
        nb.push_back(divisions(back_offsets[l + 1] - back_offsets[l], h));

    auto front_across = [&](double y, int i) { return lerp(f.front_at(y, 0.0), f.front_at(y, tf), double(i) / nf); };
    auto back_across = [&](double y, std::size_t layer, int i) {
        return lerp(f.back_at(y, back_offsets[layer]), f.back_at(y, back_offsets[layer + 1]), double(i) / nb[layer]);
    };

    // Front strut.
    for (const Segment& s : fsegs) {
        GridPatch g = make_patch(nf, s.n, region::front_strut);
        for (int j = 0; j <= s.n; ++j) {
            const double y = at_fraction(s.lo, s.hi, j, s.n);
            for (int i = 0; i <= nf; ++i) g.at(i, j) = front_across(y, i);
        }
        auto outer = g.column(0);
        auto inner = g.column(nf);
        lay.front_outer = join({&lay.front_outer, &outer});
        lay.front_inner = join({&lay.front_inner, &inner});
        lay.patches.push_back(std::move(g));
    }

    // Back strut: backing, strut, mirror sheet from outside in.
    const auto& patch_flag = d.variant_flags.rigid_back_patch;
    for (const Segment& s : bsegs) {
        for (std::size_t l = 0; l < nb.size(); ++l) {
            GridPatch g = make_patch(nb[l], s.n, back_regions[l]);
            for (int j = 0; j <= s.n; ++j) {
                const double y = at_fraction(s.lo, s.hi, j, s.n);
                for (int i = 0; i <= nb[l]; ++i) g.at(i, j) = back_across(y, l, i);
            }
            if (patch_flag) {
                for (int j = 0; j < s.n; ++j) {
                    const double yc = at_fraction(s.lo, s.hi, 2 * j + 1, 2 * s.n);
                    if (yc >= patch_flag->start && yc <= patch_flag->end) {
                        for (int i = 0; i < nb[l]; ++i) g.cell_region[static_cast<std::size_t>(i + j * nb[l])] = region::camera_patch;
                    }
                }
            }
            if (l == 0) {
                auto outer = g.column(0);
                lay.back_outer = join({&lay.back_outer, &outer});
            }
            if (l + 1 == nb.size()) {
                auto inner = g.column(nb[l]);
                lay.back_inner = join({&lay.back_inner, &inner});
            }
            lay.patches.push_back(std::move(g));
        }
    }

    // Ribs: i runs front -> back, j runs bottom -> top.
    auto chain_between = [](const Polyline& chain, double lo, double hi) {
        Polyline out;
        for (const Vec2& p : chain)
            if (p.y >= lo - 1e-9 && p.y <= hi + 1e-9) out.push_back(p);
        return out;
    };
    double prev_front = 0.0, prev_back = 0.0;
    for (std::size_t r = 0; r < d.ribs.size(); ++r) {
        const RibPlacement& rib = d.ribs[r];
        const Polyline left = chain_between(lay.front_inner, rib.front_lo, rib.front_hi);
        const Polyline right = chain_between(lay.back_inner, rib.back_lo, rib.back_hi);
        const int nv = junction_div[r];
        if (static_cast<int>(left.size()) != nv + 1 || static_cast<int>(right.size()) != nv + 1)
            throw MeshFailure("rib " + std::to_string(r) + " junction does not conform to the strut mesh");
        const double span = std::max(norm(right.front() - left.front()), norm(right.back() - left.back()));
        const int nu = divisions(span, h);
        GridPatch g = make_patch(nu, nv, region::ribs);
        for (int i = 0; i <= nu; ++i) {
            g.at(i, 0) = lerp(left.front(), right.front(), double(i) / nu);
            g.at(i, nv) = lerp(left.back(), right.back(), double(i) / nu);
        }
        for (int j = 0; j <= nv; ++j) {
            g.at(0, j) = left[static_cast<std::size_t>(j)];
            g.at(nu, j) = right[static_cast<std::size_t>(j)];
        }
        coons_fill(g);
        lay.rib_bottom.push_back(g.row(0));
        lay.rib_top.push_back(g.row(nv));
        lay.cell_front.push_back(chain_between(lay.front_inner, prev_front, rib.front_lo));
        lay.cell_back.push_back(chain_between(lay.back_inner, prev_back, rib.back_lo));
        prev_front = rib.front_hi;
        prev_back = rib.back_hi;
        lay.patches.push_back(std::move(g));
    }
    lay.cell_front.push_back(chain_between(lay.front_inner, prev_front, ytop));
    lay.cell_back.push_back(chain_between(lay.back_inner, prev_back, ytop));

    // Solid tip: bottom edge follows the strut tops and the cavity roof.
    {
        Polyline bottom;
        for (int i = 0; i <= nf; ++i) bottom.push_back(front_across(ytop, i));
        const Vec2 roof_a = f.front_at(ytop, tf);
        const Vec2 roof_b = f.back_at(ytop, back_offsets.back());
        const int nc = divisions(norm(roof_b - roof_a), h);
        for (int i = 0; i <= nc; ++i) lay.cap_cavity.push_back(lerp(roof_a, roof_b, double(i) / nc));
        for (int i = 1; i <= nc; ++i) bottom.push_back(lay.cap_cavity[static_cast<std::size_t>(i)]);
        for (std::size_t l = nb.size(); l-- > 0;) {
            for (int i = nb[l] - 1; i >= 0; --i) bottom.push_back(back_across(ytop, l, i));
        }
        const int nu = static_cast<int>(bottom.size()) - 1;
        const double len_f = (d.length - ytop) * f_slope;
        const double len_b = (d.length - ytop) * b_slope;
        const int nv = std::max(divisions(len_f, h), divisions(len_b, h));
        GridPatch g = make_patch(nu, nv, region::tip);
        const Vec2 p1 = f.front_at(d.length, 0.0);
        const Vec2 q1 = f.back_at(d.length, 0.0);
        for (int i = 0; i <= nu; ++i) {
            g.at(i, 0) = bottom[static_cast<std::size_t>(i)];
            g.at(i, nv) = lerp(p1, q1, double(i) / nu);
        }
        for (int j = 1; j < nv; ++j) {
            const double y = at_fraction(ytop, d.length, j, nv);
            g.at(0, j) = f.front_at(y, 0.0);
            g.at(nu, j) = f.back_at(y, 0.0);
        }
        coons_fill(g);
        lay.cap_front = g.column(0);
        lay.cap_back = g.column(nu);
        lay.cap_top = g.row(nv);
        lay.patches.push_back(std::move(g));
    }

    // Gel pad on the front face: i along the chord, j outward.
    {
        lay.pad_chord = chain_between(lay.front_outer, lay.pad_lo, lay.pad_hi);
        const std::size_t nchord = lay.pad_chord.size();
        if (nchord < 2) throw MeshFailure("gel pad chord has no mesh segments");
        const Vec2 a = lay.pad_chord.front();
        const Vec2 b = lay.pad_chord.back();
        const Vec2 mid = lerp(a, b, 0.5);
        const Vec2 outward = -f.front_inward;
        const double radius = d.gel_pad.face_radius;
        const double thick = d.gel_pad.thickness;
        const double half = 0.5 * d.gel_pad.chord_length;
        const int n_lo = divisions(kInsertFraction * thick, h);
        const int n_up = divisions((1.0 - kInsertFraction) * thick, h);
        const int nu = static_cast<int>(nchord) - 1;
        const int nv = n_lo + n_up;
        GridPatch g = make_patch(nu, nv, region::gel_pad);
        for (int i = 0; i <= nu; ++i) {
            const Vec2 c = lay.pad_chord[static_cast<std::size_t>(i)];
            const double u = std::clamp(dot(c - mid, fdir), -half, half);
            const double height = thick - radius + std::sqrt(radius * radius - u * u);
            for (int j = 0; j <= nv; ++j) {
                const double tau = j <= n_lo ? kInsertFraction * j / n_lo
                                             : kInsertFraction + (1.0 - kInsertFraction) * (j - n_lo) / n_up;
                g.at(i, j) = j == 0 ? c : c + outward * (height * tau);
            }
        }
        if (d.variant_flags.rigid_insert) {
            for (int j = 0; j < n_lo; ++j)
                for (int i = 0; i < nu; ++i) g.cell_region[static_cast<std::size_t>(i + j * nu)] = region::insert;
        }
        lay.gel_face = g.row(nv);
        lay.pad_lower_end = g.column(0);
        lay.pad_upper_end = g.column(nu);
        lay.patches.push_back(std::move(g));
    }

    for (int i = 0; i <= nf; ++i) lay.front_base.push_back(front_across(0.0, i));
    for (std::size_t l = nb.size(); l-- > 0;) {
        for (int i = nb[l]; i >= 0; --i) {
            const Vec2 p = back_across(0.0, l, i);
            if (lay.back_base.empty() || !(lay.back_base.back() == p)) lay.back_base.push_back(p);
        }
    }
    return lay;
}

}  // namespace finray::detail
