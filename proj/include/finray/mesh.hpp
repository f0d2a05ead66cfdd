#pragma once

#include "finray/design.hpp"
#include "finray/geometry.hpp"

#include <array>
#include <cstddef>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace finray {

struct Triangle {
    std::array<std::size_t, 3> nodes{};
    std::string material;  ///< material label
    std::string region;
    bool operator==(const Triangle&) const = default;
};

/// Two opposing boundary faces, each an ordered node chain whose left-hand
/// normal points out of the material.
struct FacePair {
    std::vector<std::size_t> a;
    std::vector<std::size_t> b;
    bool operator==(const FacePair&) const = default;
};

/// Planar triangle mesh with named node sets.
///
/// Node sets produced for Fin Ray designs: `fixed_base`, `gel_face`,
/// `front_face` (exterior contact surface, base to tip), `front_outer`,
/// `front_inner`, `back_face` (reflective inner surface of the mirror sheet),
/// `back_outer`. Chains are ordered; `fixed_base` is not.
struct Mesh2D {
    std::vector<Vec2> nodes;
    std::vector<Triangle> elements;
    std::map<std::string, std::vector<std::size_t>> node_sets;
    std::vector<FacePair> rib_faces;   ///< rib k top vs rib k+1 bottom (last: vs tip roof)
    std::vector<FacePair> wall_faces;  ///< front vs back inner strut faces per cavity cell

    const std::vector<std::size_t>& set(const std::string& name) const;
    double signed_area(std::size_t element) const;
    double area() const;
    double max_edge_length() const;

    bool operator==(const Mesh2D&) const = default;
};

/// Structured triangulation of the design. Throws MeshFailure / InvalidArgument.
Mesh2D generate_mesh(const FinRayDesign& design, double max_edge);

/// Rectangle [0, width] x [0, height] with alternating diagonals; node sets
/// `left`, `right`, `bottom`, `top` (each ordered by increasing coordinate).
Mesh2D mesh_rectangle(double width, double height, double max_edge, const std::string& material,
                      Vec2 origin = {0.0, 0.0});
/// Same with explicit cell counts.
Mesh2D mesh_rectangle_cells(double width, double height, int nx, int ny, const std::string& material,
                            Vec2 origin = {0.0, 0.0});

/// Throws MeshFailure when an invariant fails: orientation, index range,
/// duplicate nodes (tolerance `dup_tol`), edge manifoldness.
void validate_mesh(const Mesh2D& mesh, double dup_tol = 1e-9);

/// Length of edges used by exactly one element.
double boundary_length(const Mesh2D& mesh);

/// Line-oriented exchange format: `nodes N elements M`, coordinates, elements,
/// then `sets K` with one `name count i...` line per set (face pairs are
/// stored as `rib_faces.k.a` / `rib_faces.k.b` and `wall_faces.k.*`).
void write_mesh(std::ostream& os, const Mesh2D& mesh);
Mesh2D read_mesh(std::istream& is);

}  // namespace finray
