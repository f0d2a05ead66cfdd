#pragma once

#include "finray/design.hpp"
#include "finray/geometry.hpp"
#include "finray/mesh.hpp"

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace finray {

using Mat2 = Eigen::Matrix2d;
using Mat6 = Eigen::Matrix<double, 6, 6>;
using ElementNodes = std::array<Vec2, 3>;

// -----------------------------------------------------------------------------
// Constitutive and element kernels (3-node triangle, plane stress)
// -----------------------------------------------------------------------------

/// Strain energy density per unit reference volume. Throws ElementInverted
/// (element id 0) when det F <= 0.
double energy_density(const Material& m, const Mat2& F);
/// First Piola-Kirchhoff stress dW/dF.
Mat2 first_piola(const Material& m, const Mat2& F);

Mat2 deformation_gradient(const ElementNodes& X, const ElementNodes& u);

/// Stored energy of one element (density x area x plane thickness).
double element_energy(const ElementNodes& X, const Material& m, const ElementNodes& u);
/// Gradient of element_energy with respect to the nodal displacements.
ElementNodes element_internal_force(const ElementNodes& X, const Material& m, const ElementNodes& u);
/// Hessian of element_energy; dof order (x0, y0, x1, y1, x2, y2).
Mat6 element_tangent(const ElementNodes& X, const Material& m, const ElementNodes& u);

// -----------------------------------------------------------------------------
// Contact
// -----------------------------------------------------------------------------

/// Rigid indenter. `center` is the reference position (touching the surface);
/// it travels along `approach` by the prescribed depth.
struct Indenter {
    enum class Shape { circle, rectangle };
    Shape shape = Shape::circle;
    double radius = 5.0;   ///< circle
    double width = 10.0;   ///< rectangle extent across the approach direction
    double height = 10.0;  ///< rectangle extent along the approach direction
    Vec2 center{0.0, 0.0};
    Vec2 approach{0.0, -1.0};  ///< unit travel direction

    static Indenter circle(double radius);
    static Indenter rectangle(double width, double height);
    /// Copy positioned so its leading edge touches `point`, moving against `outward`.
    Indenter touching(Vec2 point, Vec2 outward) const;
    Vec2 center_at(double depth) const { return center + approach * depth; }
    std::string describe() const;
};

/// Parses `circle:R` or `rect:WxH` (also `rectangle:WxH`). Throws InvalidArgument.
Indenter parse_indenter(const std::string& text);

struct ContactSpec {
    std::optional<Indenter> indenter;
    std::string indenter_set = "front_face";  ///< ordered node chain touched by the indenter
    std::vector<FacePair> self_pairs;         ///< node-to-segment pairs, checked both ways
    double penalty_stiffness = 0.0;           ///< N/mm per unit contact length
    double penetration_tol = 0.0;             ///< mm
};

/// Penalty 100 * max(E * plane_thickness) / max_edge and tolerance max_edge / 100,
/// self pairs taken from the mesh rib and wall faces.
ContactSpec default_contact(const Mesh2D& mesh, const MaterialTable& materials,
                            std::optional<Indenter> indenter = std::nullopt, bool self_contact = true);

// -----------------------------------------------------------------------------
// Static solve
// -----------------------------------------------------------------------------

struct LineSearchSettings {
    bool enabled = true;
    double factor = 0.5;
    int max_cuts = 30;  ///< factor bounds the shrink per cut; quadratic interpolation may cut further
};

struct SolveSettings {
    int load_steps = 20;
    double newton_tol_rel = 1e-6;
    double newton_tol_abs = 1e-6;  ///< N
    int max_newton_iters = 40;
    int max_step_cuts = 4;
    LineSearchSettings line_search;

    void validate() const;
};

struct PrescribedDof {
    std::size_t node = 0;
    int component = 0;  ///< 0 = x, 1 = y
    double value = 0.0; ///< mm, reached at the last load step
};

struct NodalLoad {
    std::size_t node = 0;
    Vec2 force;  ///< N, reached at the last load step
};

struct BoundaryConditions {
    std::vector<PrescribedDof> prescribed;
    std::vector<NodalLoad> loads;
    double indenter_depth = 0.0;  ///< mm, reached at the last load step

    /// Both components of every node in `set` held at zero.
    static BoundaryConditions clamped(const Mesh2D& mesh, const std::string& set = "fixed_base");
};

struct SolverState {
    std::vector<Vec2> displacements;
    std::vector<Vec2> external_forces;
    std::vector<Vec2> contact_forces;   ///< force exerted on each node by all contacts
    std::vector<Vec2> reaction_forces;  ///< support forces at prescribed dofs
    int step_index = 0;
    double load_factor = 0.0;
    double indenter_depth = 0.0;
    Vec2 indenter_force;  ///< total force of the indenter on the body
    double max_penetration = 0.0;
    double residual_norm = 0.0;
    int newton_iterations = 0;
};

/// Residual and tangent of the total potential at one configuration.
struct Assembly {
    Eigen::VectorXd residual;  ///< internal + contact - external
    Eigen::SparseMatrix<double> tangent;
    double energy = 0.0;  ///< stored + penalty - external work
    std::vector<Vec2> contact_forces;
    Vec2 indenter_force;
    double max_penetration = 0.0;
};

/// One active penalty term: energy kw/2 gap^2 over up to three nodes.
struct ContactTerm {
    int source = -1;        ///< -1 indenter, otherwise 2 * pair + direction
    std::size_t slave = 0;  ///< node whose tributary length weights the term
    int face = 0;           ///< rectangle face (leading, +side, -side, back)
    int count = 2;          ///< number of dofs used (2 or 6)
    std::array<std::size_t, 6> dofs{};
    double kw = 0.0;
    double gap = 0.0;
    Eigen::Matrix<double, 6, 1> grad = Eigen::Matrix<double, 6, 1>::Zero();
    Mat6 curvature = Mat6::Zero();  ///< second derivative of the gap
};

/// Precomputed element and contact data for repeated assembly.
class FemModel {
public:
    FemModel(const Mesh2D& mesh, const MaterialTable& materials, ContactSpec contact);

    std::size_t dof_count() const { return 2 * mesh_.nodes.size(); }
    const Mesh2D& mesh() const { return mesh_; }
    const ContactSpec& contact() const { return contact_; }

    /// Total potential; +infinity when an element is inverted.
    double energy(const Eigen::VectorXd& u, double depth, const Eigen::VectorXd& f_ext) const;
    Assembly assemble(const Eigen::VectorXd& u, double depth, const Eigen::VectorXd& f_ext,
                      bool with_tangent = true) const;
    /// Penetrating contact terms at a configuration.
    std::vector<ContactTerm> contact_terms(const Eigen::VectorXd& u, double depth, bool with_curvature) const;
    /// Same pairing (face or master segment) evaluated at another configuration,
    /// without the penetration filter.
    ContactTerm relinearize(const ContactTerm& term, const Eigen::VectorXd& u, double depth) const;

private:
    struct ElementData {
        std::array<std::size_t, 3> nodes;
        Mat2 dm_inv;
        double volume;  ///< area x plane thickness
        const Material* material;
    };
    struct Chain {
        std::vector<std::size_t> nodes;
        std::vector<double> weights;  ///< reference tributary length
    };

    Mesh2D mesh_;
    MaterialTable materials_;
    ContactSpec contact_;
    std::vector<ElementData> elements_;
    Chain indenter_chain_;
    std::vector<std::pair<Chain, Chain>> self_chains_;

    double add_elements(const Eigen::VectorXd& u, Eigen::VectorXd* grad,
                        std::vector<Eigen::Triplet<double>>* trip) const;
    double add_contact(const Eigen::VectorXd& u, double depth, Eigen::VectorXd* grad,
                       std::vector<Eigen::Triplet<double>>* trip, Assembly* out) const;
};

Assembly assemble(const Mesh2D& mesh, const MaterialTable& materials, const SolverState& state,
                  const ContactSpec& contact);

/// Quasi-static displacement/load-controlled solve; one state per load step.
/// Throws NonConvergence, ElementInverted, InvalidArgument.
std::vector<SolverState> solve_static(const Mesh2D& mesh, const MaterialTable& materials,
                                      const BoundaryConditions& bc, const ContactSpec& contact,
                                      const SolveSettings& settings);

/// CSV with header `node,x,y,ux,uy,fx,fy`; f is external plus contact force.
void write_state_csv(std::ostream& os, const Mesh2D& mesh, const SolverState& state);

/// First Piola-Kirchhoff stress of one mesh element.
Mat2 element_stress(const Mesh2D& mesh, const MaterialTable& materials, const std::vector<Vec2>& u,
                    std::size_t element);

}  // namespace finray
