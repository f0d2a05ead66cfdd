// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "cli_support.hpp"

#include "finray/dataset.hpp"
#include "finray/experiments.hpp"
#include "finray/fem.hpp"
#include "finray/imaging.hpp"
#include "finray/materials.hpp"
#include "finray/mesh.hpp"
#include "finray/optics.hpp"
#include "finray/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <sstream>

using namespace finray;

namespace {

// Tolerances and limits.
constexpr double kPatchTol = 1e-8;
constexpr double kCantileverTol = 0.05;
constexpr double kCantileverSeconds = 30.0;
constexpr double kFiniteDiffTol = 1e-5;
constexpr double kProtocolSeconds = 600.0;
constexpr double kMaxMinFov = 120.0;
constexpr double kOpticsTol = 1e-9;
constexpr double kMaxCenterErrorPx = 2.0;
constexpr double kMinRectDice = 0.80;
constexpr double kCornerTol = 1e-9;
constexpr double kTensileRelTol = 1e-3;
constexpr double kMinAccuracy = 0.95;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Material rubber(MaterialModel model) {
    Material m;
    m.label = "rubber";
    m.model = model;
    m.youngs_modulus = 26.0;
    m.poisson_ratio = 0.3;
    m.plane_thickness = 20.0;
    return m;
}

// -----------------------------------------------------------------------------

void fem_verification(Outcome& o) {
    // Uniform stretch of a patch; linear stress must be exact.
    {
        const double W = 6.0, H = 3.0, delta = 0.06;
        const Mesh2D mesh = mesh_rectangle_cells(W, H, 6, 3, "rubber");
        BoundaryConditions bc;
        for (std::size_t n : mesh.set("left")) bc.prescribed.push_back({n, 0, 0.0});
        for (std::size_t n : mesh.set("right")) bc.prescribed.push_back({n, 0, delta});
        bc.prescribed.push_back({mesh.set("left").front(), 1, 0.0});
        SolveSettings s;
        s.load_steps = 1;
        const Material m = rubber(MaterialModel::linear_elastic);
        const MaterialTable table{{m.label, m}};
        const auto states = solve_static(mesh, table, bc, {}, s);
        const double sigma = m.youngs_modulus * delta / W;
        double worst = 0.0;
        for (std::size_t e = 0; e < mesh.elements.size(); ++e) {
            const Mat2 P = element_stress(mesh, table, states.back().displacements, e);
            worst = std::max({worst, std::abs(P(0, 0) - sigma), std::abs(P(1, 1)), std::abs(P(0, 1)), std::abs(P(1, 0))});
        }
        o.detail << "patch rel err " << worst / sigma;
        o.require(worst <= kPatchTol * sigma, "patch test");
    }
    // End-loaded cantilever against beam theory.
    {
        const double L = 50.0, b = 2.0, P = 1e-3;
        const Material m = rubber(MaterialModel::neo_hookean);
        const auto t0 = std::chrono::steady_clock::now();
        const Mesh2D mesh = mesh_rectangle(L, b, 0.25, "rubber");
        BoundaryConditions bc = BoundaryConditions::clamped(mesh, "left");
        const auto& tip = mesh.set("right");
        for (std::size_t n : tip) bc.loads.push_back({n, Vec2{0.0, -P / static_cast<double>(tip.size())}});
        SolveSettings s;
        s.load_steps = 1;
        const auto states = solve_static(mesh, {{m.label, m}}, bc, {}, s);
        const double secs = seconds_since(t0);
        double uy = 0.0;
        for (std::size_t n : tip) uy -= states.back().displacements[n].y;
        uy /= static_cast<double>(tip.size());
        const double oracle = P * L * L * L / (3.0 * m.youngs_modulus * (m.plane_thickness * b * b * b / 12.0));
        const double err = std::abs(uy - oracle) / oracle;
        o.detail << "; cantilever err " << err * 100 << "% (max edge " << mesh.max_edge_length() << " mm, " << secs
                 << " s)";
        o.require(mesh.max_edge_length() <= 0.5, "cantilever mesh size");
        o.require(err <= kCantileverTol, "cantilever deflection");
        o.require(secs < kCantileverSeconds, "cantilever time");
    }
    // Internal force and tangent against central differences at random states.
    {
        std::mt19937_64 rng(7);
        std::uniform_real_distribution<double> U(-0.15, 0.15);
        const ElementNodes X = {Vec2{0.0, 0.0}, Vec2{0.8, 0.1}, Vec2{0.2, 0.7}};
        const Material m = rubber(MaterialModel::neo_hookean);
        double worst_f = 0.0, worst_k = 0.0;
        const double h = 1e-6;
        for (int trial = 0; trial < 10; ++trial) {
            ElementNodes u;
            for (auto& v : u) v = {U(rng), U(rng)};
            const ElementNodes f = element_internal_force(X, m, u);
            const Mat6 K = element_tangent(X, m, u);
            double fscale = 0.0;
            for (const Vec2& v : f) fscale = std::max(fscale, norm(v));
            const double kscale = K.cwiseAbs().maxCoeff();
            auto comp = [](const ElementNodes& w, int d) {
                const Vec2 v = w[static_cast<std::size_t>(d / 2)];
                return d % 2 == 0 ? v.x : v.y;
            };
            for (int d = 0; d < 6; ++d) {
                ElementNodes up = u, um = u;
                auto& pu = up[static_cast<std::size_t>(d / 2)];
                auto& pm = um[static_cast<std::size_t>(d / 2)];
                (d % 2 == 0 ? pu.x : pu.y) += h;
                (d % 2 == 0 ? pm.x : pm.y) -= h;
                const double fd = (element_energy(X, m, up) - element_energy(X, m, um)) / (2.0 * h);
                worst_f = std::max(worst_f, std::abs(comp(f, d) - fd) / fscale);
                const ElementNodes fp = element_internal_force(X, m, up), fm = element_internal_force(X, m, um);
                for (int r = 0; r < 6; ++r)
                    worst_k = std::max(worst_k, std::abs(K(r, d) - (comp(fp, r) - comp(fm, r)) / (2.0 * h)) / kscale);
            }
        }
        o.detail << "; finite-difference rel err force " << worst_f << ", tangent " << worst_k;
        o.require(worst_f < kFiniteDiffTol && worst_k < kFiniteDiffTol, "finite differences");
    }
}

void compliance_direction(Outcome& o) {
    const auto t0 = std::chrono::steady_clock::now();
    const ProtocolSettings s;
    const ProtocolResult r = fig5_protocol({baby_preset(), original_preset()}, s);
    const double secs = seconds_since(t0);
    o.require(r.failures.empty(), "all eight scenarios converge");
    std::size_t checked = 0;
    for (const std::string ind : {s.cylinder.describe(), s.cuboid.describe()})
        for (ProbeLocation loc : {ProbeLocation::finger_pad, ProbeLocation::fingertip}) {
            const auto* a = r.find("baby", ind, loc);
            const auto* b = r.find("original", ind, loc);
            if (!a || !b) {
                o.require(false, "missing curve " + ind + "/" + to_string(loc));
                continue;
            }
            for (std::size_t i = 0; i < a->samples.size(); ++i) {
                if (a->samples[i].depth < 0.5) continue;
                ++checked;
                o.require(a->samples[i].force < b->samples[i].force,
                          ind + "/" + to_string(loc) + " at " + std::to_string(a->samples[i].depth) + " mm");
            }
        }
    bool positive = !r.compliance.entries.empty();
    for (const auto& e : r.compliance.entries) positive = positive && std::isfinite(e.reduction_pct) && e.reduction_pct > 0;
    o.require(positive, "reductions strictly positive and finite");
    o.require(secs < kProtocolSeconds, "protocol time");
    o.detail << checked << " depth samples over 4 scenario pairs; reduction " << r.compliance.min_reduction << "% .. "
             << r.compliance.max_reduction << "%; " << secs << " s";
}

void optics(Outcome& o) {
    const OpticalScene sc = fin_ray_scene(baby_preset());
    const double frac = coverage(sc.camera, sc.mirror, sc.sensing, sc.occluders, 721).fraction;
    const double need = min_fov(sc.camera, sc.mirror, sc.sensing, sc.occluders, 721);
    o.require(sc.camera.fov_deg == 100.0, "nominal fov");
    o.require(frac == 1.0, "coverage");
    o.require(need <= kMaxMinFov, "min_fov");

    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-10, 10), A(-0.7, 0.7);
    double worst_inv = 0.0, worst_virtual = 0.0;
    for (int i = 0; i < 2000; ++i) {
        const Vec2 a{U(rng), U(rng)}, b{U(rng), U(rng)};
        if (norm(b - a) < 1.0) continue;
        const Vec2 o2{U(rng), U(rng)};
        const Vec2 target = lerp(a, b, (U(rng) + 10) / 20);
        if (norm(target - o2) < 1e-3) continue;
        const Ray2 ray{o2, normalized(target - o2)};
        const auto r = reflect(ray, a, b);
        if (!r) continue;
        // Involution: reflecting back across the mirror line restores the ray.
        const Vec2 n = normalized(perp(b - a));
        worst_inv = std::max(worst_inv, norm(r->dir - n * (2 * dot(r->dir, n)) - ray.dir));
        // The virtual camera sees the hit point along the straight continuation of the reflected ray.
        const Camera2D v = virtual_camera({o2, ray.dir, 90.0}, a, b);
        const Vec2 far = r->origin + r->dir * 7.0;
        const Vec2 dv = normalized(r->origin - v.position);
        const double along = dot(far - v.position, dv);
        worst_virtual = std::max(worst_virtual, norm(v.position + dv * along - far));
    }
    o.require(worst_inv < kOpticsTol, "reflection involution");
    o.require(worst_virtual < kOpticsTol, "virtual-camera equivalence");
    o.detail << "coverage " << frac << " at fov 100 deg, min_fov " << need << " deg; involution err " << worst_inv
             << ", virtual-camera err " << worst_virtual;
}

void imaging_metrics(Outcome& o) {
    const PipelineSettings settings;
    SyntheticScene ball;  // 4.75 mm diameter ball
    ball.radius = 2.375;
    const PressEvaluation b = evaluate_press("ball", ball, settings);
    SyntheticScene rect;
    rect.shape = SyntheticScene::Shape::rectangle;
    rect.rect_width = 5.0;
    rect.rect_height = 10.0;
    const PressEvaluation r = evaluate_press("rect", rect, settings);
    o.require(b.metrics.center_error_px <= kMaxCenterErrorPx, "ball center error");
    o.require(r.metrics.dice >= kMinRectDice, "rect dice");

    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> jitter(-30, 30);
    const Quad dst{Vec2{0, 0}, Vec2{239, 0}, Vec2{239, 134}, Vec2{0, 134}};
    double worst = 0.0;
    for (int t = 0; t < 100; ++t) {
        const Quad src{Vec2{40 + jitter(rng), 30 + jitter(rng)}, Vec2{280 + jitter(rng), 30 + jitter(rng)},
                       Vec2{280 + jitter(rng), 200 + jitter(rng)}, Vec2{40 + jitter(rng), 200 + jitter(rng)}};
        const Homography h = estimate_homography(src, dst);
        for (int i = 0; i < 4; ++i) worst = std::max(worst, norm(h.apply(src[i]) - dst[i]));
    }
    o.require(worst <= kCornerTol, "homography corners");
    o.detail << "ball center error " << b.metrics.center_error_px << " px (dice " << b.metrics.dice << "); rect dice "
             << r.metrics.dice << "; worst corner residual " << worst << " px over 100 quads";
}

void tensile(Outcome& o) {
    const DogboneSpec spec;
    std::vector<std::pair<std::string, StressStrainCurve>> curves;
    for (const auto& p : reference_paints()) curves.emplace_back(p.name, to_stress_strain(synthetic_tensile_record(p, spec), spec));
    const auto rows = summarize(curves);
    const double uts_expect[] = {1.37, 1.65, 0.23, 0.26};
    const double elong_expect[] = {1212, 1348, 267, 269};
    o.require(rows.size() == 4, "four rows");
    double worst = 0.0;
    for (std::size_t i = 0; i < std::min<std::size_t>(4, rows.size()); ++i) {
        worst = std::max({worst, std::abs(rows[i].uts_mpa - uts_expect[i]) / uts_expect[i],
                          std::abs(rows[i].elongation_pct - elong_expect[i]) / elong_expect[i]});
        o.detail << rows[i].name << " " << rows[i].uts_mpa << " MPa/" << rows[i].elongation_pct << "%; ";
    }
    o.require(worst <= kTensileRelTol, "tabulated values");
    o.detail << "worst rel err " << worst;
}

// Smallest and largest k with both tails of Binomial(n, p) at least (1 - level)/2.
std::pair<int, int> binomial_interval(int n, double p, double level) {
    const double tail = (1.0 - level) / 2.0;
    std::vector<double> pmf(static_cast<std::size_t>(n) + 1);
    for (int k = 0; k <= n; ++k)
        pmf[static_cast<std::size_t>(k)] = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) -
                                                    std::lgamma(n - k + 1.0) + k * std::log(p) + (n - k) * std::log1p(-p));
    int lo = 0, hi = n;
    double acc = 0.0;
    while (acc + pmf[static_cast<std::size_t>(lo)] < tail) acc += pmf[static_cast<std::size_t>(lo++)];
    acc = 0.0;
    while (acc + pmf[static_cast<std::size_t>(hi)] < tail) acc += pmf[static_cast<std::size_t>(hi--)];
    return {lo, hi};
}

void classifier(Outcome& o) {
    std::vector<DatasetItem> items;
    for (const char* label : {"a", "b", "c", "d"})
        for (int i = 0; i < 500; ++i) items.push_back({std::string(label) + std::to_string(i), label});
    const DatasetSplit split = split_dataset(items, 0.8, 42);
    std::map<std::string, std::pair<int, int>> per_class;
    for (const auto& it : split.train) ++per_class[it.label].first;
    for (const auto& it : split.val) ++per_class[it.label].second;
    bool exact = per_class.size() == 4;
    for (const auto& [label, counts] : per_class) exact = exact && counts.first == 400 && counts.second == 100;
    o.require(exact, "400/100 per class");

    CorpusSettings cs;
    cs.per_class = 500;
    const auto corpus = texture_corpus(cs, 42);
    const LabeledSplit ls = split_images(corpus, 0.8, 42);
    const double acc = accuracy(classify_fit(ls.train, 4), ls.val);
    o.require(acc >= kMinAccuracy, "validation accuracy");

    const int n = static_cast<int>(ls.val.size());
    const auto [lo, hi] = binomial_interval(n, 0.25, 0.99);
    const double null_acc = permuted_label_accuracy(corpus, 0.8, 4, 1);
    const double hits = std::round(null_acc * n);
    o.require(hits >= lo && hits <= hi, "permutation null");
    o.detail << "split 400/100 per class; validation accuracy " << acc << " on " << n << "; permuted-label accuracy "
             << null_acc << " (99% band " << static_cast<double>(lo) / n << " .. " << static_cast<double>(hi) / n << ")";
}

void determinism(Outcome& o) {
    namespace fs = std::filesystem;
    const fs::path root = fs::temp_directory_path() / "finray_acceptance";
    const auto fa = cli_support::run_workload(root / "a");
    const auto fb = cli_support::run_workload(root / "b");
    for (const auto& f : fa) o.require(false, "run a: " + f);
    for (const auto& f : fb) o.require(false, "run b: " + f);
    const auto ha = cli_support::hash_tree(root / "a" / "out");
    const auto hb = cli_support::hash_tree(root / "b" / "out");
    std::size_t differing = 0;
    for (const auto& [rel, h] : ha) {
        const auto it = hb.find(rel);
        if (it == hb.end() || it->second != h) {
            ++differing;
            o.require(false, rel);
        }
    }
    o.require(ha.size() == hb.size() && !ha.empty(), "same artifact set");
    o.detail << cli_support::workload().size() << " command runs, " << ha.size() << " artifacts, " << differing
             << " differing SHA-256";
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<void(Outcome&)>>> criteria = {
        {"FEM verification", fem_verification},
        {"compliance direction", compliance_direction},
        {"optics coverage", optics},
        {"imaging metrics", imaging_metrics},
        {"tensile summary", tensile},
        {"dataset and classifier", classifier},
        {"CLI determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            criteria[i].second(o);
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail << " [exception: " << e.what() << "]";
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << i + 1 << " (" << criteria[i].first
                  << "): " << o.detail.str() << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
