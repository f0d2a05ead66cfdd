#include "finray/fem.hpp"

#include "finray/errors.hpp"

#include <Eigen/LU>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <set>

namespace finray {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

using Mat4 = Eigen::Matrix4d;
using Triplets = std::vector<Eigen::Triplet<double>>;

// Tangent modulus dP_ij/dF_kl stored at (2i + j, 2k + l).
Mat4 tangent_modulus(const Material& m, const Mat2& F) {
    const double mu = m.shear_modulus();
    const double lam = m.plane_stress_lambda();
    Mat4 C = Mat4::Zero();
    auto d = [](int a, int b) { return a == b ? 1.0 : 0.0; };
    if (m.model == MaterialModel::linear_elastic) {
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j)
                for (int k = 0; k < 2; ++k)
                    for (int l = 0; l < 2; ++l)
                        C(2 * i + j, 2 * k + l) = mu * (d(i, k) * d(j, l) + d(i, l) * d(j, k)) + lam * d(i, j) * d(k, l);
        return C;
    }
    const double J = F.determinant();
    const Mat2 G = F.inverse().transpose();
    const double c = lam * std::log(J) - mu;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                for (int l = 0; l < 2; ++l)
                    C(2 * i + j, 2 * k + l) = mu * d(i, k) * d(j, l) + lam * G(i, j) * G(k, l) - c * G(i, l) * G(k, j);
    return C;
}

Mat2 reference_inverse(const ElementNodes& X) {
    Mat2 Dm;
    Dm << X[1].x - X[0].x, X[2].x - X[0].x, X[1].y - X[0].y, X[2].y - X[0].y;
    return Dm.inverse();
}

Mat2 current_edges(const Vec2& x0, const Vec2& x1, const Vec2& x2) {
    Mat2 Ds;
    Ds << x1.x - x0.x, x2.x - x0.x, x1.y - x0.y, x2.y - x0.y;
    return Ds;
}

// Shape function gradients g_a (rows) from the inverse reference edge matrix.
Eigen::Matrix<double, 3, 2> shape_gradients(const Mat2& dm_inv) {
    Eigen::Matrix<double, 3, 2> g;
    g.row(1) = dm_inv.row(0);
    g.row(2) = dm_inv.row(1);
    g.row(0) = -g.row(1) - g.row(2);
    return g;
}

Mat6 tangent_from(const Mat4& C, const Eigen::Matrix<double, 3, 2>& g, double volume) {
    Mat6 K = Mat6::Zero();
    for (int a = 0; a < 3; ++a)
        for (int i = 0; i < 2; ++i)
            for (int b = 0; b < 3; ++b)
                for (int k = 0; k < 2; ++k) {
                    double s = 0.0;
                    for (int j = 0; j < 2; ++j)
                        for (int l = 0; l < 2; ++l) s += C(2 * i + j, 2 * k + l) * g(a, j) * g(b, l);
                    K(2 * a + i, 2 * b + k) = volume * s;
                }
    return K;
}

double reference_volume(const ElementNodes& X, const Material& m) {
    return 0.5 * std::abs(cross(X[1] - X[0], X[2] - X[0])) * m.plane_thickness;
}

ElementNodes current(const ElementNodes& X, const ElementNodes& u) {
    return {X[0] + u[0], X[1] + u[1], X[2] + u[2]};
}

Vec2 node_position(const Mesh2D& mesh, const Eigen::VectorXd& u, std::size_t n) {
    return {mesh.nodes[n].x + u[2 * n], mesh.nodes[n].y + u[2 * n + 1]};
}

void add_block(Triplets& trip, const std::size_t* dofs, int count, const double* H) {
    for (int r = 0; r < count; ++r)
        for (int c = 0; c < count; ++c) {
            const double v = H[r * count + c];
            if (v != 0.0) trip.emplace_back(static_cast<int>(dofs[r]), static_cast<int>(dofs[c]), v);
        }
}

// Signed distance of node sn from the line through (n1, n2), positive on the
// left; gradient and curvature over (x1, x2, xs).
ContactTerm segment_term(const Mesh2D& mesh, const Eigen::VectorXd& u, std::size_t n1, std::size_t n2,
                         std::size_t sn, bool with_curvature) {
    const Vec2 x1 = node_position(mesh, u, n1);
    const Vec2 x2 = node_position(mesh, u, n2);
    const Vec2 xs = node_position(mesh, u, sn);
    const Eigen::Vector2d av(x2.x - x1.x, x2.y - x1.y), bv(xs.x - x1.x, xs.y - x1.y);
    const double l = av.norm();
    const double cval = av.x() * bv.y() - av.y() * bv.x();
    const Eigen::Vector2d ca(bv.y(), -bv.x()), cb(-av.y(), av.x());
    const Eigen::Vector2d ga = ca / l - cval * av / (l * l * l);
    const Eigen::Vector2d gb = cb / l;

    ContactTerm term;
    term.count = 6;
    term.dofs = {2 * n1, 2 * n1 + 1, 2 * n2, 2 * n2 + 1, 2 * sn, 2 * sn + 1};
    term.gap = cval / l;
    // With a = x2 - x1 and b = xs - x1.
    term.grad << -ga - gb, ga, gb;
    if (with_curvature) {
        const double l3 = l * l * l;
        const Eigen::Matrix2d I = Eigen::Matrix2d::Identity();
        Eigen::Matrix2d rot;
        rot << 0.0, 1.0, -1.0, 0.0;
        const Eigen::Matrix2d Haa = -(ca * av.transpose() + av * ca.transpose()) / l3 - cval * I / l3 +
                                    3.0 * cval * av * av.transpose() / (l3 * l * l);
        const Eigen::Matrix2d Hab = rot / l - av * cb.transpose() / l3;
        Eigen::Matrix4d Hg;
        Hg << Haa, Hab, Hab.transpose(), Eigen::Matrix2d::Zero();
        Eigen::Matrix<double, 4, 6> T = Eigen::Matrix<double, 4, 6>::Zero();
        T.block<2, 2>(0, 0) = -I;
        T.block<2, 2>(0, 2) = I;
        T.block<2, 2>(2, 0) = -I;
        T.block<2, 2>(2, 4) = I;
        term.curvature = T.transpose() * Hg * T;
    }
    return term;
}

}  // namespace

// -----------------------------------------------------------------------------
// Kernels
// -----------------------------------------------------------------------------

double energy_density(const Material& m, const Mat2& F) {
    const double J = F.determinant();
    if (!(J > 0.0)) throw ElementInverted(0, J);
    const double mu = m.shear_modulus();
    const double lam = m.plane_stress_lambda();
    if (m.model == MaterialModel::linear_elastic) {
        const Mat2 eps = 0.5 * (F + F.transpose()) - Mat2::Identity();
        const double tr = eps.trace();
        return mu * eps.squaredNorm() + 0.5 * lam * tr * tr;
    }
    const double lnJ = std::log(J);
    return 0.5 * mu * (F.squaredNorm() - 2.0 - 2.0 * lnJ) + 0.5 * lam * lnJ * lnJ;
}

Mat2 first_piola(const Material& m, const Mat2& F) {
    const double J = F.determinant();
    if (!(J > 0.0)) throw ElementInverted(0, J);
    const double mu = m.shear_modulus();
    const double lam = m.plane_stress_lambda();
    if (m.model == MaterialModel::linear_elastic) {
        const Mat2 eps = 0.5 * (F + F.transpose()) - Mat2::Identity();
        return 2.0 * mu * eps + lam * eps.trace() * Mat2::Identity();
    }
    return mu * F + (lam * std::log(J) - mu) * F.inverse().transpose();
}

Mat2 deformation_gradient(const ElementNodes& X, const ElementNodes& u) {
    const ElementNodes x = current(X, u);
    return current_edges(x[0], x[1], x[2]) * reference_inverse(X);
}

double element_energy(const ElementNodes& X, const Material& m, const ElementNodes& u) {
    return reference_volume(X, m) * energy_density(m, deformation_gradient(X, u));
}

ElementNodes element_internal_force(const ElementNodes& X, const Material& m, const ElementNodes& u) {
    const Mat2 P = first_piola(m, deformation_gradient(X, u));
    const auto g = shape_gradients(reference_inverse(X));
    const double V = reference_volume(X, m);
    ElementNodes f;
    for (int a = 0; a < 3; ++a) {
        const Eigen::Vector2d v = V * P * g.row(a).transpose();
        f[static_cast<std::size_t>(a)] = {v.x(), v.y()};
    }
    return f;
}

Mat6 element_tangent(const ElementNodes& X, const Material& m, const ElementNodes& u) {
    const Mat2 F = deformation_gradient(X, u);
    if (!(F.determinant() > 0.0)) throw ElementInverted(0, F.determinant());
    return tangent_from(tangent_modulus(m, F), shape_gradients(reference_inverse(X)), reference_volume(X, m));
}

// -----------------------------------------------------------------------------
// Indenter
// -----------------------------------------------------------------------------

Indenter Indenter::circle(double radius) {
    if (!(radius > 0.0)) throw InvalidArgument("indenter radius must be positive");
    Indenter i;
    i.shape = Shape::circle;
    i.radius = radius;
    return i;
}

Indenter Indenter::rectangle(double width, double height) {
    if (!(width > 0.0) || !(height > 0.0)) throw InvalidArgument("indenter extents must be positive");
    Indenter i;
    i.shape = Shape::rectangle;
    i.width = width;
    i.height = height;
    return i;
}

Indenter Indenter::touching(Vec2 point, Vec2 outward) const {
    Indenter out = *this;
    const Vec2 n = normalized(outward);
    out.approach = n * -1.0;
    out.center = point + n * (shape == Shape::circle ? radius : 0.5 * height);
    return out;
}

std::string Indenter::describe() const {
    char buf[64];
    if (shape == Shape::circle)
        std::snprintf(buf, sizeof buf, "circle:%g", radius);
    else
        std::snprintf(buf, sizeof buf, "rect:%gx%g", width, height);
    return buf;
}

Indenter parse_indenter(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw InvalidArgument("indenter must look like circle:R or rect:WxH, got '" + text + "'");
    const std::string kind = text.substr(0, colon);
    const std::string dims = text.substr(colon + 1);
    auto number = [&](const std::string& s) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty()) throw InvalidArgument("bad indenter dimension '" + s + "'");
        return v;
    };
    if (kind == "circle" || kind == "cylinder") return Indenter::circle(number(dims));
    if (kind == "rect" || kind == "rectangle" || kind == "cuboid") {
        const auto x = dims.find('x');
        if (x == std::string::npos) throw InvalidArgument("rectangle indenter needs WxH, got '" + dims + "'");
        return Indenter::rectangle(number(dims.substr(0, x)), number(dims.substr(x + 1)));
    }
    throw InvalidArgument("unknown indenter shape '" + kind + "'");
}

ContactSpec default_contact(const Mesh2D& mesh, const MaterialTable& materials, std::optional<Indenter> indenter,
                            bool self_contact) {
    double max_et = 0.0;
    for (const Triangle& t : mesh.elements) {
        const auto it = materials.find(t.material);
        if (it == materials.end()) throw InvalidArgument("no material named '" + t.material + "'");
        max_et = std::max(max_et, it->second.youngs_modulus * it->second.plane_thickness);
    }
    const double h = mesh.max_edge_length();
    if (!(h > 0.0)) throw InvalidArgument("mesh has no edges");
    ContactSpec c;
    c.indenter = indenter;
    c.penalty_stiffness = 100.0 * max_et / h;
    c.penetration_tol = h / 100.0;
    if (self_contact) {
        c.self_pairs = mesh.rib_faces;
        c.self_pairs.insert(c.self_pairs.end(), mesh.wall_faces.begin(), mesh.wall_faces.end());
    }
    return c;
}

// -----------------------------------------------------------------------------
// Model
// -----------------------------------------------------------------------------

FemModel::FemModel(const Mesh2D& mesh, const MaterialTable& materials, ContactSpec contact)
    : mesh_(mesh), materials_(materials), contact_(std::move(contact)) {
    for (const auto& [name, m] : materials_) validate_material(m);
    if (contact_.indenter || !contact_.self_pairs.empty()) {
        if (!(contact_.penalty_stiffness > 0.0)) throw InvalidArgument("penalty_stiffness must be positive");
    }
    elements_.reserve(mesh_.elements.size());
    for (std::size_t e = 0; e < mesh_.elements.size(); ++e) {
        const Triangle& t = mesh_.elements[e];
        const auto it = materials_.find(t.material);
        if (it == materials_.end()) throw InvalidArgument("no material named '" + t.material + "'");
        const ElementNodes X = {mesh_.nodes[t.nodes[0]], mesh_.nodes[t.nodes[1]], mesh_.nodes[t.nodes[2]]};
        const double area = 0.5 * cross(X[1] - X[0], X[2] - X[0]);
        if (!(area > 0.0)) throw ElementInverted(e, area);
        elements_.push_back({t.nodes, reference_inverse(X), area * it->second.plane_thickness, &it->second});
    }

    auto make_chain = [&](const std::vector<std::size_t>& nodes) {
        Chain c;
        c.nodes = nodes;
        c.weights.assign(nodes.size(), 0.0);
        for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
            const double l = norm(mesh_.nodes[nodes[i + 1]] - mesh_.nodes[nodes[i]]);
            c.weights[i] += 0.5 * l;
            c.weights[i + 1] += 0.5 * l;
        }
        return c;
    };
    if (contact_.indenter) indenter_chain_ = make_chain(mesh_.set(contact_.indenter_set));
    for (const FacePair& p : contact_.self_pairs) self_chains_.emplace_back(make_chain(p.a), make_chain(p.b));
}

double FemModel::add_elements(const Eigen::VectorXd& u, Eigen::VectorXd* grad, Triplets* trip) const {
    double total = 0.0;
    for (std::size_t e = 0; e < elements_.size(); ++e) {
        const ElementData& el = elements_[e];
        const Vec2 x0 = node_position(mesh_, u, el.nodes[0]);
        const Vec2 x1 = node_position(mesh_, u, el.nodes[1]);
        const Vec2 x2 = node_position(mesh_, u, el.nodes[2]);
        const Mat2 F = current_edges(x0, x1, x2) * el.dm_inv;
        const double J = F.determinant();
        if (!(J > 0.0)) throw ElementInverted(e, J);
        total += el.volume * energy_density(*el.material, F);
        if (!grad) continue;
        const auto g = shape_gradients(el.dm_inv);
        const Mat2 P = first_piola(*el.material, F);
        std::size_t dofs[6];
        for (int a = 0; a < 3; ++a) {
            const Eigen::Vector2d f = el.volume * P * g.row(a).transpose();
            dofs[2 * a] = 2 * el.nodes[static_cast<std::size_t>(a)];
            dofs[2 * a + 1] = dofs[2 * a] + 1;
            (*grad)[static_cast<Eigen::Index>(dofs[2 * a])] += f.x();
            (*grad)[static_cast<Eigen::Index>(dofs[2 * a + 1])] += f.y();
        }
        if (trip) {
            const Mat6 K = tangent_from(tangent_modulus(*el.material, F), g, el.volume);
            Eigen::Matrix<double, 6, 6, Eigen::RowMajor> Kr = K;
            add_block(*trip, dofs, 6, Kr.data());
        }
    }
    return total;
}

std::vector<ContactTerm> FemModel::contact_terms(const Eigen::VectorXd& u, double depth, bool with_curvature) const {
    const double k = contact_.penalty_stiffness;
    std::vector<ContactTerm> terms;

    if (contact_.indenter) {
        const Indenter& ind = *contact_.indenter;
        const Vec2 c = ind.center_at(depth);
        const Vec2 a = ind.approach;
        const Vec2 t{-a.y, a.x};
        for (std::size_t i = 0; i < indenter_chain_.nodes.size(); ++i) {
            const std::size_t n = indenter_chain_.nodes[i];
            const Vec2 x = node_position(mesh_, u, n);
            ContactTerm term;
            term.source = -1;
            term.slave = n;
            term.count = 2;
            term.dofs = {2 * n, 2 * n + 1, 0, 0, 0, 0};
            term.kw = k * indenter_chain_.weights[i];
            Vec2 nrm;
            if (ind.shape == Indenter::Shape::circle) {
                const double r = norm(x - c);
                term.gap = r - ind.radius;
                if (!(term.gap < 0.0) || r == 0.0) continue;
                nrm = (x - c) / r;
                if (with_curvature) {
                    const Eigen::Vector2d nv(nrm.x, nrm.y);
                    term.curvature.topLeftCorner<2, 2>() = (Eigen::Matrix2d::Identity() - nv * nv.transpose()) / r;
                }
            } else {
                const double s = dot(x - c, t);
                const double q = dot(x - c, a);
                const double hw = 0.5 * ind.width, hh = 0.5 * ind.height;
                if (!(std::abs(s) < hw && std::abs(q) < hh)) continue;
                const double depths[4] = {hh - q, hw - s, hw + s, hh + q};
                const Vec2 normals[4] = {a, t, t * -1.0, a * -1.0};
                int best = 0;
                for (int f = 1; f < 4; ++f)
                    if (depths[f] < depths[best]) best = f;
                term.gap = -depths[best];
                term.face = best;
                nrm = normals[best];
            }
            term.grad[0] = nrm.x;
            term.grad[1] = nrm.y;
            terms.push_back(term);
        }
    }

    // Node-to-segment self contact; slave chain against master segments.
    auto one_way = [&](const Chain& slave, const Chain& master, int source) {
        for (std::size_t si = 0; si < slave.nodes.size(); ++si) {
            const std::size_t sn = slave.nodes[si];
            if (std::find(master.nodes.begin(), master.nodes.end(), sn) != master.nodes.end()) continue;
            const Vec2 xs = node_position(mesh_, u, sn);
            double best_g = -kInf;
            std::size_t best_seg = 0;
            for (std::size_t m = 0; m + 1 < master.nodes.size(); ++m) {
                const Vec2 x1 = node_position(mesh_, u, master.nodes[m]);
                const Vec2 x2 = node_position(mesh_, u, master.nodes[m + 1]);
                const Vec2 av = x2 - x1, bv = xs - x1;
                const double l2 = dot(av, av);
                if (l2 == 0.0) continue;
                const double proj = dot(av, bv) / l2;
                if (proj < 0.0 || proj > 1.0) continue;
                const double l = std::sqrt(l2);
                const double g = cross(av, bv) / l;
                if (g < 0.0 && g > -l && g > best_g) {
                    best_g = g;
                    best_seg = m;
                }
            }
            if (best_g == -kInf) continue;
            ContactTerm term = segment_term(mesh_, u, master.nodes[best_seg], master.nodes[best_seg + 1], sn,
                                            with_curvature);
            term.source = source;
            term.slave = sn;
            term.kw = k * slave.weights[si];
            terms.push_back(term);
        }
    };
    for (std::size_t p = 0; p < self_chains_.size(); ++p) {
        one_way(self_chains_[p].first, self_chains_[p].second, static_cast<int>(2 * p));
        one_way(self_chains_[p].second, self_chains_[p].first, static_cast<int>(2 * p + 1));
    }
    return terms;
}

ContactTerm FemModel::relinearize(const ContactTerm& term, const Eigen::VectorXd& u, double depth) const {
    if (term.source >= 0) {
        ContactTerm out = segment_term(mesh_, u, term.dofs[0] / 2, term.dofs[2] / 2, term.slave, false);
        out.source = term.source;
        out.slave = term.slave;
        out.kw = term.kw;
        return out;
    }
    const Indenter& ind = *contact_.indenter;
    const Vec2 c = ind.center_at(depth);
    const Vec2 x = node_position(mesh_, u, term.slave);
    ContactTerm out = term;
    out.grad.setZero();
    out.curvature.setZero();
    Vec2 nrm;
    if (ind.shape == Indenter::Shape::circle) {
        const double r = norm(x - c);
        nrm = r > 0.0 ? (x - c) / r : ind.approach;
        out.gap = r - ind.radius;
    } else {
        const Vec2 a = ind.approach;
        const Vec2 t{-a.y, a.x};
        const Vec2 normals[4] = {a, t, t * -1.0, a * -1.0};
        const double extent[4] = {0.5 * ind.height, 0.5 * ind.width, 0.5 * ind.width, 0.5 * ind.height};
        nrm = normals[term.face];
        out.gap = dot(x - c, nrm) - extent[term.face];
    }
    out.grad[0] = nrm.x;
    out.grad[1] = nrm.y;
    return out;
}

double FemModel::add_contact(const Eigen::VectorXd& u, double depth, Eigen::VectorXd* grad, Triplets* trip,
                             Assembly* out) const {
    double total = 0.0;
    for (const ContactTerm& term : contact_terms(u, depth, trip != nullptr)) {
        const double kwg = term.kw * term.gap;
        total += 0.5 * kwg * term.gap;
        if (out) out->max_penetration = std::max(out->max_penetration, -term.gap);
        for (int r = 0; r < term.count; ++r) {
            const double v = kwg * term.grad[r];
            if (grad) (*grad)[static_cast<Eigen::Index>(term.dofs[static_cast<std::size_t>(r)])] += v;
            if (out) {
                const std::size_t node = term.dofs[static_cast<std::size_t>(r)] / 2;
                Vec2 f;
                (r % 2 == 0 ? f.x : f.y) = -v;
                out->contact_forces[node] = out->contact_forces[node] + f;
                if (term.source < 0) out->indenter_force = out->indenter_force + f;
            }
        }
        if (trip) {
            const Mat6 H = term.kw * (term.grad * term.grad.transpose() + term.gap * term.curvature);
            Eigen::Matrix<double, 6, 6, Eigen::RowMajor> Hr = H;
            if (term.count == 6) {
                add_block(*trip, term.dofs.data(), 6, Hr.data());
            } else {
                const double H2[4] = {H(0, 0), H(0, 1), H(1, 0), H(1, 1)};
                add_block(*trip, term.dofs.data(), 2, H2);
            }
        }
    }
    return total;
}

double FemModel::energy(const Eigen::VectorXd& u, double depth, const Eigen::VectorXd& f_ext) const {
    try {
        return add_elements(u, nullptr, nullptr) + add_contact(u, depth, nullptr, nullptr, nullptr) - f_ext.dot(u);
    } catch (const ElementInverted&) {
        return kInf;
    }
}

Assembly FemModel::assemble(const Eigen::VectorXd& u, double depth, const Eigen::VectorXd& f_ext,
                            bool with_tangent) const {
    const auto n = static_cast<Eigen::Index>(dof_count());
    if (u.size() != n || f_ext.size() != n) throw DimensionMismatch("state size does not match the mesh");
    Assembly out;
    out.residual = Eigen::VectorXd::Zero(n);
    out.contact_forces.assign(mesh_.nodes.size(), Vec2{});
    Triplets trip;
    if (with_tangent) trip.reserve(elements_.size() * 36);
    out.energy = add_elements(u, &out.residual, with_tangent ? &trip : nullptr);
    out.energy += add_contact(u, depth, &out.residual, with_tangent ? &trip : nullptr, &out);
    out.energy -= f_ext.dot(u);
    out.residual -= f_ext;
    if (with_tangent) {
        out.tangent.resize(n, n);
        out.tangent.setFromTriplets(trip.begin(), trip.end());
    }
    return out;
}

namespace {

Eigen::VectorXd flatten(const std::vector<Vec2>& v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(2 * v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[static_cast<Eigen::Index>(2 * i)] = v[i].x;
        out[static_cast<Eigen::Index>(2 * i + 1)] = v[i].y;
    }
    return out;
}

std::vector<Vec2> unflatten(const Eigen::VectorXd& v) {
    std::vector<Vec2> out(static_cast<std::size_t>(v.size() / 2));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = {v[static_cast<Eigen::Index>(2 * i)], v[static_cast<Eigen::Index>(2 * i + 1)]};
    return out;
}

}  // namespace

Assembly assemble(const Mesh2D& mesh, const MaterialTable& materials, const SolverState& state,
                  const ContactSpec& contact) {
    if (state.displacements.size() != mesh.nodes.size()) throw DimensionMismatch("displacement count != node count");
    std::vector<Vec2> f = state.external_forces;
    if (f.empty()) f.assign(mesh.nodes.size(), Vec2{});
    if (f.size() != mesh.nodes.size()) throw DimensionMismatch("force count != node count");
    const FemModel model(mesh, materials, contact);
    return model.assemble(flatten(state.displacements), state.indenter_depth, flatten(f));
}

// -----------------------------------------------------------------------------
// Static solve
// -----------------------------------------------------------------------------

void SolveSettings::validate() const {
    if (load_steps < 1) throw InvalidArgument("load_steps must be >= 1");
    if (!(newton_tol_rel > 0.0) || !(newton_tol_abs > 0.0)) throw InvalidArgument("Newton tolerances must be positive");
    if (max_newton_iters < 1) throw InvalidArgument("max_newton_iters must be >= 1");
    if (max_step_cuts < 0) throw InvalidArgument("max_step_cuts must be >= 0");
    if (!(line_search.factor > 0.0 && line_search.factor < 1.0))
        throw InvalidArgument("line search factor must lie in (0, 1)");
    if (line_search.max_cuts < 0) throw InvalidArgument("line search max_cuts must be >= 0");
}

BoundaryConditions BoundaryConditions::clamped(const Mesh2D& mesh, const std::string& set) {
    BoundaryConditions bc;
    for (std::size_t n : mesh.set(set)) {
        bc.prescribed.push_back({n, 0, 0.0});
        bc.prescribed.push_back({n, 1, 0.0});
    }
    return bc;
}

namespace {

class StaticSolver {
public:
    StaticSolver(const FemModel& model, const BoundaryConditions& bc, const SolveSettings& s)
        : model_(model), bc_(bc), s_(s) {
        const std::size_t n = model.dof_count();
        free_index_.assign(n, -1);
        prescribed_value_.assign(n, 0.0);
        std::vector<bool> fixed(n, false);
        for (const PrescribedDof& p : bc.prescribed) {
            if (p.node >= model.mesh().nodes.size() || (p.component != 0 && p.component != 1))
                throw InvalidArgument("prescribed dof out of range");
            const std::size_t d = 2 * p.node + static_cast<std::size_t>(p.component);
            fixed[d] = true;
            prescribed_value_[d] = p.value;
        }
        for (std::size_t d = 0; d < n; ++d) {
            if (fixed[d]) {
                fixed_dofs_.push_back(d);
            } else {
                free_index_[d] = static_cast<int>(free_dofs_.size());
                free_dofs_.push_back(d);
            }
        }
        f_full_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
        for (const NodalLoad& l : bc.loads) {
            if (l.node >= model.mesh().nodes.size()) throw InvalidArgument("load node out of range");
            f_full_[static_cast<Eigen::Index>(2 * l.node)] += l.force.x;
            f_full_[static_cast<Eigen::Index>(2 * l.node + 1)] += l.force.y;
        }
        u_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    }

    std::vector<SolverState> run() {
        std::vector<SolverState> states;
        double lam = 0.0;
        for (int k = 1; k <= s_.load_steps; ++k) {
            step_ = k;
            const double target = static_cast<double>(k) / s_.load_steps;
            iterations_ = 0;
            inverted_ = false;
            if (!advance(lam, target, s_.max_step_cuts)) {
                if (inverted_) throw ElementInverted(inverted_element_, inverted_det_);
                throw NonConvergence(k, iterations_, "after " + std::to_string(s_.max_step_cuts) + " step cuts");
            }
            lam = target;
            states.push_back(make_state(k, lam));
        }
        return states;
    }

private:
    const FemModel& model_;
    const BoundaryConditions& bc_;
    const SolveSettings& s_;
    std::vector<int> free_index_;
    std::vector<std::size_t> free_dofs_, fixed_dofs_;
    std::vector<double> prescribed_value_;
    Eigen::VectorXd f_full_, u_;
    int step_ = 0;
    int iterations_ = 0;
    bool inverted_ = false;
    std::size_t inverted_element_ = 0;
    double inverted_det_ = 0.0;
    double last_residual_ = 0.0;

    double depth(double lam) const { return bc_.indenter_depth * lam; }

    bool advance(double from, double to, int cuts_left) {
        const Eigen::VectorXd saved = u_;
        if (increment(to)) return true;
        u_ = saved;
        if (cuts_left == 0) return false;
        const double mid = 0.5 * (from + to);
        return advance(from, mid, cuts_left - 1) && advance(mid, to, cuts_left - 1);
    }

    Eigen::VectorXd gather(const Eigen::VectorXd& full, const std::vector<std::size_t>& dofs) const {
        Eigen::VectorXd out(static_cast<Eigen::Index>(dofs.size()));
        for (std::size_t i = 0; i < dofs.size(); ++i) out[static_cast<Eigen::Index>(i)] = full[static_cast<Eigen::Index>(dofs[i])];
        return out;
    }

    void split(const Eigen::SparseMatrix<double>& K, Eigen::SparseMatrix<double>& Kff,
               Eigen::SparseMatrix<double>* Kfp) const {
        std::vector<int> fixed_index(free_index_.size(), -1);
        for (std::size_t i = 0; i < fixed_dofs_.size(); ++i) fixed_index[fixed_dofs_[i]] = static_cast<int>(i);
        Triplets tf, tp;
        for (int c = 0; c < K.outerSize(); ++c) {
            for (Eigen::SparseMatrix<double>::InnerIterator it(K, c); it; ++it) {
                const int r = free_index_[static_cast<std::size_t>(it.row())];
                if (r < 0) continue;
                const int fc = free_index_[static_cast<std::size_t>(it.col())];
                if (fc >= 0)
                    tf.emplace_back(r, fc, it.value());
                else if (Kfp)
                    tp.emplace_back(r, fixed_index[static_cast<std::size_t>(it.col())], it.value());
            }
        }
        const auto nf = static_cast<Eigen::Index>(free_dofs_.size());
        Kff.resize(nf, nf);
        Kff.setFromTriplets(tf.begin(), tf.end());
        if (Kfp) {
            Kfp->resize(nf, static_cast<Eigen::Index>(fixed_dofs_.size()));
            Kfp->setFromTriplets(tp.begin(), tp.end());
        }
    }

    // Solves K d = -r, shifting the diagonal until d is a descent direction for `g`
    // (defaults to r).
    bool descent_direction(const Eigen::SparseMatrix<double>& K, const Eigen::VectorXd& r, Eigen::VectorXd& d,
                           const Eigen::VectorXd* g = nullptr) const {
        if (!g) g = &r;
        double max_diag = 0.0;
        for (Eigen::Index i = 0; i < K.rows(); ++i) max_diag = std::max(max_diag, std::abs(K.coeff(i, i)));
        if (max_diag == 0.0) max_diag = 1.0;
        Eigen::SparseMatrix<double> I(K.rows(), K.cols());
        I.setIdentity();
        double shift = 0.0;
        for (int attempt = 0; attempt < 12; ++attempt) {
            const Eigen::SparseMatrix<double> A = shift > 0.0 ? Eigen::SparseMatrix<double>(K + shift * I) : K;
            bool ok = false;
            Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(A);
            if (ldlt.info() == Eigen::Success) {
                d = ldlt.solve(-r);
                ok = ldlt.info() == Eigen::Success;
            }
            if (!ok) {
                Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
                lu.compute(A);
                if (lu.info() == Eigen::Success) {
                    d = lu.solve(-r);
                    ok = lu.info() == Eigen::Success;
                }
            }
            if (ok && d.allFinite() && g->dot(d) < 0.0) return true;
            shift = shift == 0.0 ? 1e-8 * max_diag : shift * 10.0;
        }
        return false;
    }

    // Newton direction that also sees contacts the step would open. Terms that
    // penetrate at the trial point but not at u join a candidate pool,
    // linearized about u with the same pairing. An active set on the
    // linearized gaps then minimizes the convex model kw/2 min(g + grad.d, 0)^2
    // until the set settles.
    bool contact_aware_direction(const Eigen::SparseMatrix<double>& Kff, const Eigen::VectorXd& r, double dep,
                                 Eigen::VectorXd& df) const {
        if (!descent_direction(Kff, r, df)) return false;
        const ContactSpec& c = model_.contact();
        if (!c.indenter && c.self_pairs.empty()) return true;
        using Key = std::pair<int, std::size_t>;
        std::set<Key> keys;
        for (const ContactTerm& t : model_.contact_terms(u_, dep, false)) keys.insert({t.source, t.slave});
        std::vector<ContactTerm> pool;
        std::vector<bool> in_set;
        const Eigen::VectorXd plain = df;
        auto linear_gap = [](const ContactTerm& t, const Eigen::VectorXd& d) {
            double g = t.gap;
            for (int i = 0; i < t.count; ++i) g += t.grad[i] * d[static_cast<Eigen::Index>(t.dofs[static_cast<std::size_t>(i)])];
            return g;
        };
        for (int round = 0; round < 12; ++round) {
            const Eigen::VectorXd d = scatter_free(df);
            bool changed = false;
            for (const ContactTerm& t : model_.contact_terms(u_ + d, dep, false)) {
                if (!keys.insert({t.source, t.slave}).second) continue;
                const ContactTerm lin = model_.relinearize(t, u_, dep);
                if (!(lin.gap > 0.0)) continue;
                pool.push_back(lin);
                in_set.push_back(false);
            }
            for (std::size_t k = 0; k < pool.size(); ++k) {
                const bool want = linear_gap(pool[k], d) < 0.0;
                if (want != in_set[k]) changed = true;
                in_set[k] = want;
            }
            if (!changed) break;
            Triplets trip;
            Eigen::VectorXd rhs = r;
            for (std::size_t k = 0; k < pool.size(); ++k) {
                if (!in_set[k]) continue;
                const ContactTerm& t = pool[k];
                for (int i = 0; i < t.count; ++i) {
                    const int fi = free_index_[t.dofs[static_cast<std::size_t>(i)]];
                    if (fi < 0) continue;
                    rhs[fi] += t.kw * t.gap * t.grad[i];
                    for (int j = 0; j < t.count; ++j) {
                        const int fj = free_index_[t.dofs[static_cast<std::size_t>(j)]];
                        if (fj >= 0) trip.emplace_back(fi, fj, t.kw * t.grad[i] * t.grad[j]);
                    }
                }
            }
            Eigen::SparseMatrix<double> extra(Kff.rows(), Kff.cols());
            extra.setFromTriplets(trip.begin(), trip.end());
            Eigen::VectorXd next;
            if (!descent_direction(Kff + extra, rhs, next)) break;
            df = next;
        }
        if (!(r.dot(df) < 0.0)) df = plain;
        return true;
    }

    Eigen::VectorXd scatter_free(const Eigen::VectorXd& df) const {
        Eigen::VectorXd full = Eigen::VectorXd::Zero(u_.size());
        for (std::size_t i = 0; i < free_dofs_.size(); ++i)
            full[static_cast<Eigen::Index>(free_dofs_[i])] = df[static_cast<Eigen::Index>(i)];
        return full;
    }

    void note_inversion(const Eigen::VectorXd& u, double dep, const Eigen::VectorXd& f) {
        try {
            model_.assemble(u, dep, f, false);
        } catch (const ElementInverted& e) {
            inverted_ = true;
            inverted_element_ = e.element();
            inverted_det_ = e.det();
        }
    }

    bool increment(double lam) {
        const double dep = depth(lam);
        const Eigen::VectorXd f = f_full_ * lam;

        // Predictor: move prescribed dofs and take one linearized step for the rest.
        {
            const Assembly A = model_.assemble(u_, dep, f);
            Eigen::VectorXd dp(static_cast<Eigen::Index>(fixed_dofs_.size()));
            for (std::size_t i = 0; i < fixed_dofs_.size(); ++i)
                dp[static_cast<Eigen::Index>(i)] =
                    prescribed_value_[fixed_dofs_[i]] * lam - u_[static_cast<Eigen::Index>(fixed_dofs_[i])];
            Eigen::VectorXd u_p = u_;
            for (std::size_t i = 0; i < fixed_dofs_.size(); ++i)
                u_p[static_cast<Eigen::Index>(fixed_dofs_[i])] += dp[static_cast<Eigen::Index>(i)];
            Eigen::SparseMatrix<double> Kff, Kfp;
            split(A.tangent, Kff, &Kfp);
            const Eigen::VectorXd rhs = gather(A.residual, free_dofs_) + Kfp * dp;
            Eigen::VectorXd df;
            bool moved = false;
            if (free_dofs_.empty()) {
                u_ = u_p;
                moved = true;
            } else if (descent_direction(Kff, rhs, df)) {
                const Eigen::VectorXd trial = u_p + scatter_free(df);
                if (std::isfinite(model_.energy(trial, dep, f))) {
                    u_ = trial;
                    moved = true;
                }
            }
            if (!moved) {
                if (!std::isfinite(model_.energy(u_p, dep, f))) {
                    note_inversion(u_p, dep, f);
                    return false;
                }
                u_ = u_p;
            }
        }

        for (int it = 0; it <= s_.max_newton_iters; ++it) {
            const Assembly A = model_.assemble(u_, dep, f);
            const Eigen::VectorXd r = gather(A.residual, free_dofs_);
            const double reaction = gather(A.residual, fixed_dofs_).norm();
            const double res = r.norm();
            last_residual_ = res;
            if (res <= s_.newton_tol_rel * reaction + s_.newton_tol_abs) return true;
            if (it == s_.max_newton_iters) break;
            ++iterations_;

            Eigen::SparseMatrix<double> Kff;
            split(A.tangent, Kff, nullptr);
            Eigen::VectorXd df;
            if (!contact_aware_direction(Kff, r, dep, df)) return false;
            const Eigen::VectorXd d = scatter_free(df);

            if (!s_.line_search.enabled) {
                const Eigen::VectorXd trial = u_ + d;
                if (!std::isfinite(model_.energy(trial, dep, f))) {
                    note_inversion(trial, dep, f);
                    return false;
                }
                u_ = trial;
                continue;
            }
            const double slope = r.dot(df);
            const double scale = std::abs(A.energy) + 1.0;
            double alpha = 1.0;
            bool accepted = false;
            Eigen::VectorXd last_trial;
            for (int cut = 0; cut <= s_.line_search.max_cuts; ++cut) {
                const Eigen::VectorXd trial = u_ + alpha * d;
                const double e = model_.energy(trial, dep, f);
                if (!std::isfinite(e)) {
                    last_trial = trial;
                    alpha *= s_.line_search.factor;
                    continue;
                }
                if (e <= A.energy + 1e-4 * alpha * slope) {
                    u_ = trial;
                    accepted = true;
                    break;
                }
                // Energy differences below round-off: fall back to the residual.
                if (std::abs(alpha * slope) <= 1e-10 * scale) {
                    const Assembly B = model_.assemble(trial, dep, f, false);
                    if (gather(B.residual, free_dofs_).norm() < res) {
                        u_ = trial;
                        accepted = true;
                        break;
                    }
                }
                // Minimiser of the quadratic through phi(0), phi'(0), phi(alpha); penalty
                // contact makes phi piecewise quadratic, so this lands close quickly.
                const double curv = e - A.energy - slope * alpha;
                double next = curv > 0.0 ? -slope * alpha * alpha / (2.0 * curv) : s_.line_search.factor * alpha;
                next = std::clamp(next, 1e-4 * alpha, s_.line_search.factor * alpha);
                alpha = next;
            }
            if (!accepted) {
                if (last_trial.size() > 0) note_inversion(last_trial, dep, f);
                return false;
            }
        }
        return false;
    }

    SolverState make_state(int step, double lam) const {
        const double dep = depth(lam);
        const Eigen::VectorXd f = f_full_ * lam;
        const Assembly A = model_.assemble(u_, dep, f, false);
        SolverState s;
        s.displacements = unflatten(u_);
        s.external_forces = unflatten(f);
        s.contact_forces = A.contact_forces;
        Eigen::VectorXd reaction = Eigen::VectorXd::Zero(u_.size());
        for (std::size_t d : fixed_dofs_) reaction[static_cast<Eigen::Index>(d)] = A.residual[static_cast<Eigen::Index>(d)];
        s.reaction_forces = unflatten(reaction);
        s.step_index = step;
        s.load_factor = lam;
        s.indenter_depth = dep;
        s.indenter_force = A.indenter_force;
        s.max_penetration = A.max_penetration;
        s.residual_norm = gather(A.residual, free_dofs_).norm();
        s.newton_iterations = iterations_;
        return s;
    }
};

}  // namespace

std::vector<SolverState> solve_static(const Mesh2D& mesh, const MaterialTable& materials, const BoundaryConditions& bc,
                                      const ContactSpec& contact, const SolveSettings& settings) {
    settings.validate();
    if (bc.prescribed.empty()) throw InvalidArgument("at least one prescribed dof is required");
    if (!std::isfinite(bc.indenter_depth) || bc.indenter_depth < 0.0) throw InvalidArgument("indenter depth must be >= 0");
    const FemModel model(mesh, materials, contact);
    StaticSolver solver(model, bc, settings);
    return solver.run();
}

void write_state_csv(std::ostream& os, const Mesh2D& mesh, const SolverState& state) {
    if (state.displacements.size() != mesh.nodes.size()) throw DimensionMismatch("state does not match mesh");
    os << "node,x,y,ux,uy,fx,fy\n";
    char buf[256];
    for (std::size_t i = 0; i < mesh.nodes.size(); ++i) {
        Vec2 f = i < state.external_forces.size() ? state.external_forces[i] : Vec2{};
        if (i < state.contact_forces.size()) f = f + state.contact_forces[i];
        std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", i, mesh.nodes[i].x, mesh.nodes[i].y,
                      state.displacements[i].x, state.displacements[i].y, f.x, f.y);
        os << buf;
    }
}

Mat2 element_stress(const Mesh2D& mesh, const MaterialTable& materials, const std::vector<Vec2>& u,
                    std::size_t element) {
    if (element >= mesh.elements.size()) throw InvalidArgument("element index out of range");
    if (u.size() != mesh.nodes.size()) throw DimensionMismatch("displacement count != node count");
    const Triangle& t = mesh.elements[element];
    const auto it = materials.find(t.material);
    if (it == materials.end()) throw InvalidArgument("no material named '" + t.material + "'");
    const ElementNodes X = {mesh.nodes[t.nodes[0]], mesh.nodes[t.nodes[1]], mesh.nodes[t.nodes[2]]};
    const ElementNodes ue = {u[t.nodes[0]], u[t.nodes[1]], u[t.nodes[2]]};
    try {
        return first_piola(it->second, deformation_gradient(X, ue));
    } catch (const ElementInverted& e) {
        throw ElementInverted(element, e.det());
    }
}

}  // namespace finray
