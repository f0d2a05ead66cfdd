#include "finray/mesh.hpp"

#include "finray/errors.hpp"
#include "layout.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace finray {

const std::vector<std::size_t>& Mesh2D::set(const std::string& name) const {
    auto it = node_sets.find(name);
    if (it == node_sets.end()) throw InvalidArgument("mesh has no node set '" + name + "'");
    return it->second;
}

double Mesh2D::signed_area(std::size_t e) const {
    const auto& t = elements[e].nodes;
    return 0.5 * cross(nodes[t[1]] - nodes[t[0]], nodes[t[2]] - nodes[t[0]]);
}

double Mesh2D::area() const {
    double a = 0.0;
    for (std::size_t e = 0; e < elements.size(); ++e) a += signed_area(e);
    return a;
}

double Mesh2D::max_edge_length() const {
    double m = 0.0;
    for (const auto& t : elements) {
        for (int k = 0; k < 3; ++k) m = std::max(m, norm(nodes[t.nodes[k]] - nodes[t.nodes[(k + 1) % 3]]));
    }
    return m;
}

namespace {

/// Assembles grid patches into one indexed mesh; nodes on shared patch edges
/// are bitwise identical and merge by exact coordinate.
class MeshBuilder {
public:
    std::size_t node(Vec2 p) {
        auto [it, inserted] = index_.try_emplace(std::make_pair(p.x, p.y), mesh_.nodes.size());
        if (inserted) mesh_.nodes.push_back(p);
        return it->second;
    }

    std::size_t lookup(Vec2 p) const {
        auto it = index_.find(std::make_pair(p.x, p.y));
        if (it == index_.end()) throw MeshFailure("boundary point is not a mesh node");
        return it->second;
    }

    std::vector<std::size_t> chain(const Polyline& line) const {
        std::vector<std::size_t> ids;
        for (const Vec2& p : line) {
            const std::size_t id = lookup(p);
            if (ids.empty() || ids.back() != id) ids.push_back(id);
        }
        return ids;
    }

    void add_patch(const detail::GridPatch& g, const std::map<std::string, std::string>& material_of) {
        std::vector<std::size_t> ids(g.points.size());
        for (std::size_t k = 0; k < g.points.size(); ++k) ids[k] = node(g.points[k]);
        auto id = [&](int i, int j) { return ids[static_cast<std::size_t>(i + j * (g.nu + 1))]; };
        for (int j = 0; j < g.nv; ++j) {
            for (int i = 0; i < g.nu; ++i) {
                const std::string& reg = g.cell_region[static_cast<std::size_t>(i + j * g.nu)];
                auto mit = material_of.find(reg);
                const std::string mat = mit == material_of.end() ? reg : mit->second;
                const std::size_t a = id(i, j), b = id(i + 1, j), c = id(i + 1, j + 1), dd = id(i, j + 1);
                // Shorter diagonal; ties alternate so regular grids stay mirror symmetric.
                const double ac = norm(mesh_.nodes[c] - mesh_.nodes[a]);
                const double bd = norm(mesh_.nodes[dd] - mesh_.nodes[b]);
                const bool use_ac = std::abs(ac - bd) <= 1e-9 * (ac + bd) ? (i + j) % 2 == 0 : ac < bd;
                if (use_ac) {
                    add_triangle({a, b, c}, mat, reg);
                    add_triangle({a, c, dd}, mat, reg);
                } else {
                    add_triangle({a, b, dd}, mat, reg);
                    add_triangle({b, c, dd}, mat, reg);
                }
            }
        }
    }

    Mesh2D take() { return std::move(mesh_); }
    Mesh2D& mesh() { return mesh_; }

private:
    void add_triangle(std::array<std::size_t, 3> t, const std::string& mat, const std::string& reg) {
        const Vec2 p0 = mesh_.nodes[t[0]], p1 = mesh_.nodes[t[1]], p2 = mesh_.nodes[t[2]];
        double a = cross(p1 - p0, p2 - p0);
        if (a < 0.0) {
            std::swap(t[1], t[2]);
            a = -a;
        }
        if (!(a > 0.0)) throw MeshFailure("degenerate triangle in region '" + reg + "'");
        mesh_.elements.push_back({t, mat, reg});
    }

    Mesh2D mesh_;
    std::map<std::pair<double, double>, std::size_t> index_;
};

}  // namespace

Mesh2D generate_mesh(const FinRayDesign& design, double max_edge) {
    if (!(max_edge > 0.0) || !std::isfinite(max_edge)) throw InvalidArgument("max_edge must be > 0");
    const detail::Layout lay = detail::build_layout(design, max_edge);
    MeshBuilder mb;
    for (const auto& g : lay.patches) mb.add_patch(g, design.material_ids);

    Mesh2D& m = mb.mesh();
    for (std::size_t i = 0; i < m.nodes.size(); ++i)
        if (m.nodes[i].y == 0.0) m.node_sets["fixed_base"].push_back(i);
    m.node_sets["gel_face"] = mb.chain(lay.gel_face);
    m.node_sets["front_outer"] = mb.chain(lay.front_outer);
    m.node_sets["front_inner"] = mb.chain(lay.front_inner);
    m.node_sets["back_face"] = mb.chain(lay.back_inner);
    m.node_sets["back_outer"] = mb.chain(lay.back_outer);

    Polyline below, above;
    for (const Vec2& p : lay.front_outer) {
        if (p.y <= lay.pad_chord.front().y) below.push_back(p);
        if (p.y >= lay.pad_chord.back().y) above.push_back(p);
    }
    const Polyline upper_end = detail::reversed(lay.pad_upper_end);
    m.node_sets["front_face"] = mb.chain(
        detail::join({&below, &lay.pad_lower_end, &lay.gel_face, &upper_end, &above, &lay.cap_front, &lay.cap_top}));

    const std::size_t n = lay.rib_top.size();
    for (std::size_t k = 0; k < n; ++k) {
        const Polyline& roof = (k + 1 < n) ? lay.rib_bottom[k + 1] : lay.cap_cavity;
        m.rib_faces.push_back({mb.chain(lay.rib_top[k]), mb.chain(detail::reversed(roof))});
    }
    for (std::size_t k = 0; k < lay.cell_front.size(); ++k) {
        m.wall_faces.push_back({mb.chain(detail::reversed(lay.cell_front[k])), mb.chain(lay.cell_back[k])});
    }

    Mesh2D out = mb.take();
    validate_mesh(out);
    return out;
}

Mesh2D mesh_rectangle_cells(double width, double height, int nx, int ny, const std::string& material, Vec2 origin) {
    if (!(width > 0.0 && height > 0.0) || nx < 1 || ny < 1) throw InvalidArgument("invalid rectangle");
    detail::GridPatch g;
    g.nu = nx;
    g.nv = ny;
    g.points.resize(static_cast<std::size_t>((nx + 1) * (ny + 1)));
    g.cell_region.assign(static_cast<std::size_t>(nx * ny), material);
    for (int j = 0; j <= ny; ++j)
        for (int i = 0; i <= nx; ++i)
            g.at(i, j) = origin + Vec2{width * i / nx, height * j / ny};
    MeshBuilder mb;
    mb.add_patch(g, {});
    Mesh2D m = mb.take();
    for (int j = 0; j <= ny; ++j) {
        m.node_sets["left"].push_back(static_cast<std::size_t>(j * (nx + 1)));
        m.node_sets["right"].push_back(static_cast<std::size_t>(nx + j * (nx + 1)));
    }
    for (int i = 0; i <= nx; ++i) {
        m.node_sets["bottom"].push_back(static_cast<std::size_t>(i));
        m.node_sets["top"].push_back(static_cast<std::size_t>(i + ny * (nx + 1)));
    }
    return m;
}

Mesh2D mesh_rectangle(double width, double height, double max_edge, const std::string& material, Vec2 origin) {
    if (!(max_edge > 0.0)) throw InvalidArgument("max_edge must be > 0");
    return mesh_rectangle_cells(width, height, detail::divisions(width, max_edge), detail::divisions(height, max_edge),
                                material, origin);
}

namespace {

std::map<std::pair<std::size_t, std::size_t>, int> edge_use(const Mesh2D& mesh) {
    std::map<std::pair<std::size_t, std::size_t>, int> use;
    for (const auto& t : mesh.elements) {
        for (int k = 0; k < 3; ++k) {
            std::size_t a = t.nodes[k], b = t.nodes[(k + 1) % 3];
            if (a > b) std::swap(a, b);
            ++use[{a, b}];
        }
    }
    return use;
}

}  // namespace

void validate_mesh(const Mesh2D& mesh, double dup_tol) {
    for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
        for (std::size_t id : mesh.elements[e].nodes)
            if (id >= mesh.nodes.size()) throw MeshFailure("element " + std::to_string(e) + " has invalid node index");
        if (!(mesh.signed_area(e) > 0.0)) throw MeshFailure("element " + std::to_string(e) + " has non-positive area");
    }
    std::vector<std::size_t> order(mesh.nodes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return mesh.nodes[a].x < mesh.nodes[b].x; });
    for (std::size_t k = 0; k < order.size(); ++k) {
        for (std::size_t l = k + 1; l < order.size(); ++l) {
            const Vec2 a = mesh.nodes[order[k]], b = mesh.nodes[order[l]];
            if (b.x - a.x > dup_tol) break;
            if (std::abs(b.y - a.y) <= dup_tol)
                throw MeshFailure("duplicate nodes " + std::to_string(order[k]) + " and " + std::to_string(order[l]));
        }
    }
    for (const auto& [edge, count] : edge_use(mesh))
        if (count > 2) throw MeshFailure("edge shared by more than two elements");
}

double boundary_length(const Mesh2D& mesh) {
    double len = 0.0;
    for (const auto& [edge, count] : edge_use(mesh))
        if (count == 1) len += norm(mesh.nodes[edge.second] - mesh.nodes[edge.first]);
    return len;
}

void write_mesh(std::ostream& os, const Mesh2D& mesh) {
    os << "nodes " << mesh.nodes.size() << " elements " << mesh.elements.size() << '\n';
    os << std::setprecision(17);
    for (const Vec2& p : mesh.nodes) os << p.x << ' ' << p.y << '\n';
    for (const auto& t : mesh.elements)
        os << t.nodes[0] << ' ' << t.nodes[1] << ' ' << t.nodes[2] << ' ' << t.material << ' ' << t.region << '\n';
    std::vector<std::pair<std::string, const std::vector<std::size_t>*>> sets;
    for (const auto& [name, ids] : mesh.node_sets) sets.emplace_back(name, &ids);
    for (std::size_t k = 0; k < mesh.rib_faces.size(); ++k) {
        sets.emplace_back("rib_faces." + std::to_string(k) + ".a", &mesh.rib_faces[k].a);
        sets.emplace_back("rib_faces." + std::to_string(k) + ".b", &mesh.rib_faces[k].b);
    }
    for (std::size_t k = 0; k < mesh.wall_faces.size(); ++k) {
        sets.emplace_back("wall_faces." + std::to_string(k) + ".a", &mesh.wall_faces[k].a);
        sets.emplace_back("wall_faces." + std::to_string(k) + ".b", &mesh.wall_faces[k].b);
    }
    os << "sets " << sets.size() << '\n';
    for (const auto& [name, ids] : sets) {
        os << name << ' ' << ids->size();
        for (std::size_t id : *ids) os << ' ' << id;
        os << '\n';
    }
}

Mesh2D read_mesh(std::istream& is) {
    auto fail = [](const std::string& what) -> Mesh2D { throw ParseError("mesh file: " + what); };
    std::string kw1, kw2;
    std::size_t n = 0, m = 0;
    if (!(is >> kw1 >> n >> kw2 >> m) || kw1 != "nodes" || kw2 != "elements") return fail("bad header");
    Mesh2D mesh;
    mesh.nodes.resize(n);
    for (auto& p : mesh.nodes)
        if (!(is >> p.x >> p.y)) return fail("bad node row");
    mesh.elements.resize(m);
    std::string rest;
    std::getline(is, rest);
    for (auto& t : mesh.elements) {
        std::string line;
        if (!std::getline(is, line)) return fail("missing element row");
        std::istringstream ls(line);
        if (!(ls >> t.nodes[0] >> t.nodes[1] >> t.nodes[2] >> t.material)) return fail("bad element row");
        if (!(ls >> t.region)) t.region = t.material;
    }
    std::size_t k = 0;
    if (!(is >> kw1 >> k) || kw1 != "sets") return fail("missing sets section");
    std::map<std::string, std::vector<std::size_t>> raw;
    for (std::size_t s = 0; s < k; ++s) {
        std::string name;
        std::size_t count = 0;
        if (!(is >> name >> count)) return fail("bad set row");
        std::vector<std::size_t> ids(count);
        for (auto& id : ids)
            if (!(is >> id)) return fail("bad set index");
        raw[name] = std::move(ids);
    }
    auto take_pairs = [&](const std::string& prefix, std::vector<FacePair>& out) {
        for (std::size_t p = 0;; ++p) {
            const std::string a = prefix + "." + std::to_string(p) + ".a";
            const std::string b = prefix + "." + std::to_string(p) + ".b";
            if (!raw.count(a) || !raw.count(b)) break;
            out.push_back({raw[a], raw[b]});
            raw.erase(a);
            raw.erase(b);
        }
    };
    take_pairs("rib_faces", mesh.rib_faces);
    take_pairs("wall_faces", mesh.wall_faces);
    mesh.node_sets = std::move(raw);
    return mesh;
}

}  // namespace finray
