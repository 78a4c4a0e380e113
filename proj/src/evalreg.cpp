#include "voleta/evalreg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "voleta/errors.hpp"
#include "voleta/kdtree.hpp"
#include "voleta/kernels.hpp"

namespace voleta {

namespace {

// Uniform in [0,1) from the top 53 bits; portable across standard libraries.
double unit_uniform(std::mt19937_64& rng)
{
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Vec3 centroid(std::span<const Vec3> pts)
{
    Vec3 c = Vec3::Zero();
    for (const auto& p : pts)
        c += p;
    return c / static_cast<double>(pts.size());
}

void require_nonempty(const PointCloud& c, const char* what)
{
    if (c.empty())
        throw InvalidInput(std::string(what) + ": empty point cloud");
}

void require_well_conditioned(std::span<const Vec3> pts)
{
    if (pts.size() < 3)
        throw IllConditioned("icp_register: source needs at least 3 non-collinear points, got " + std::to_string(pts.size()));
    const Vec3 c = centroid(pts);
    Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
    for (const auto& p : pts)
        cov += (p - c) * (p - c).transpose();
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(cov);
    const auto& ev = eig.eigenvalues(); // ascending
    if (!(ev[2] > 0.0) || ev[1] <= 1e-12 * ev[2])
        throw IllConditioned("icp_register: source points are coincident or collinear");
}

double mean_sq(std::span<const NearestHit> hits)
{
    double s = 0.0;
    for (const auto& h : hits)
        s += h.sq_distance;
    return s / static_cast<double>(hits.size());
}

} // namespace

PointCloud RigidTransform::apply(const PointCloud& cloud) const
{
    PointCloud out;
    out.source = cloud.source;
    out.points.reserve(cloud.points.size());
    for (const auto& p : cloud.points)
        out.points.push_back(apply(p));
    return out;
}

RigidTransform RigidTransform::compose(const RigidTransform& other) const
{
    RigidTransform out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
}

RigidTransform RigidTransform::inverse() const
{
    RigidTransform out;
    out.rotation = rotation.transpose();
    out.translation = -(out.rotation * translation);
    return out;
}

Eigen::Matrix4d RigidTransform::homogeneous() const
{
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m.topLeftCorner<3, 3>() = rotation;
    m.topRightCorner<3, 1>() = translation;
    return m;
}

double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b)
{
    return Eigen::AngleAxisd(Eigen::Matrix3d(a.transpose() * b)).angle();
}

PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed)
{
    if (mesh.empty())
        throw_invalid("sample_surface: empty mesh");
    if (n == 0)
        throw_invalid("sample_surface: sample count must be positive");

    std::vector<double> cumulative(mesh.triangles.size());
    double total = 0.0;
    for (std::size_t i = 0; i < mesh.triangles.size(); ++i) {
        const auto& t = mesh.triangles[i];
        total += 0.5 * (mesh.vertices[t[1]] - mesh.vertices[t[0]]).cross(mesh.vertices[t[2]] - mesh.vertices[t[0]]).norm();
        cumulative[i] = total;
    }
    if (!(total > 0.0))
        throw_invalid("sample_surface: mesh has zero surface area");

    std::mt19937_64 rng(seed);
    PointCloud cloud;
    cloud.source = mesh.name;
    cloud.points.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double u = unit_uniform(rng) * total;
        auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
        if (it == cumulative.end())
            --it;
        const auto& t = mesh.triangles[static_cast<std::size_t>(it - cumulative.begin())];
        const double r1 = std::sqrt(unit_uniform(rng));
        const double r2 = unit_uniform(rng);
        cloud.points.push_back((1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                               r1 * r2 * mesh.vertices[t[2]]);
    }
    return cloud;
}

std::vector<double> nearest_distances(const PointCloud& queries, const PointCloud& target)
{
    require_nonempty(target, "nearest_distances");
    const KdTree tree(target.points);
    const auto hits = kernels::nearest(tree, queries.points);
    std::vector<double> out(hits.size());
    std::transform(hits.begin(), hits.end(), out.begin(), [](const NearestHit& h) { return std::sqrt(h.sq_distance); });
    return out;
}

RigidTransform fit_rigid(std::span<const Vec3> src, std::span<const Vec3> dst)
{
    if (src.size() != dst.size() || src.empty())
        throw_invalid("fit_rigid: correspondence sets must be nonempty and of equal size");
    const Vec3 cs = centroid(src);
    const Vec3 cd = centroid(dst);
    Eigen::Matrix3d h = Eigen::Matrix3d::Zero();
    for (std::size_t i = 0; i < src.size(); ++i)
        h += (src[i] - cs) * (dst[i] - cd).transpose();

    Eigen::JacobiSVD<Eigen::Matrix3d> svd(h, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::Matrix3d& u = svd.matrixU();
    const Eigen::Matrix3d& v = svd.matrixV();
    Eigen::Matrix3d d = Eigen::Matrix3d::Identity();
    d(2, 2) = (v * u.transpose()).determinant() < 0 ? -1.0 : 1.0;

    RigidTransform t;
    t.rotation = v * d * u.transpose();
    t.translation = cd - t.rotation * cs;
    return t;
}

IcpResult icp_register(const PointCloud& source, const PointCloud& target, const IcpParams& params)
{
    require_well_conditioned(source.points);
    require_nonempty(target, "icp_register");
    if (params.max_iterations < 0)
        throw_invalid("icp_register: negative iteration limit");
    if (!(params.trim_fraction >= 0.0 && params.trim_fraction < 1.0))
        throw_invalid("icp_register: trim fraction must lie in [0,1)");

    const KdTree tree(target.points);
    IcpResult result;
    if (params.centroid_prealign)
        result.transform.translation = centroid(target.points) - centroid(source.points);

    const std::size_t n = source.points.size();
    const auto keep = std::max<std::size_t>(3, static_cast<std::size_t>(std::ceil((1.0 - params.trim_fraction) * n)));
    std::vector<Vec3> current(n), src_sel, dst_sel;
    std::vector<std::size_t> order(n);

    for (;;) {
        for (std::size_t i = 0; i < n; ++i)
            current[i] = result.transform.apply(source.points[i]);
        const auto hits = kernels::nearest(tree, current);

        std::iota(order.begin(), order.end(), std::size_t{0});
        std::size_t used = n;
        if (keep < n) {
            std::nth_element(order.begin(), order.begin() + keep, order.end(),
                             [&](std::size_t a, std::size_t b) { return hits[a].sq_distance < hits[b].sq_distance; });
            used = keep;
        }
        double sq = 0.0;
        for (std::size_t k = 0; k < used; ++k)
            sq += hits[order[k]].sq_distance;
        const double rmse = std::sqrt(sq / static_cast<double>(used));

        const bool converged = !result.rmse_history.empty() && result.rmse_history.back() - rmse < params.convergence_eps;
        result.rmse_history.push_back(rmse);
        if (converged || rmse == 0.0 || result.iterations >= params.max_iterations)
            break;

        src_sel.resize(used);
        dst_sel.resize(used);
        for (std::size_t k = 0; k < used; ++k) {
            src_sel[k] = current[order[k]];
            dst_sel[k] = target.points[hits[order[k]].index];
        }
        result.transform = fit_rigid(src_sel, dst_sel).compose(result.transform);
        ++result.iterations;
    }
    result.rmse = result.rmse_history.back();
    return result;
}

double chamfer_distance(const PointCloud& a, const PointCloud& b)
{
    require_nonempty(a, "chamfer_distance");
    require_nonempty(b, "chamfer_distance");
    const KdTree tree_a(a.points);
    const KdTree tree_b(b.points);
    return mean_sq(kernels::nearest(tree_b, a.points)) + mean_sq(kernels::nearest(tree_a, b.points));
}

double mape(std::span<const double> v_true, std::span<const double> v_pred)
{
    if (v_true.size() != v_pred.size())
        throw_invalid("mape: length mismatch");
    if (v_true.empty())
        throw_invalid("mape: no volumes");
    double sum = 0.0;
    for (std::size_t i = 0; i < v_true.size(); ++i) {
        if (!(v_true[i] > 0.0))
            throw_invalid("mape: true volumes must be positive");
        sum += std::abs((v_true[i] - v_pred[i]) / v_true[i]);
    }
    return sum / static_cast<double>(v_true.size()) * 100.0;
}

EvalResult evaluate_pair(const TriangleMesh& ours, const TriangleMesh& ground_truth, const EvalParams& params)
{
    const PointCloud a = sample_surface(ours, params.samples, params.seed);
    const PointCloud b = sample_surface(ground_truth, params.samples, params.seed);

    EvalResult r;
    r.chamfer_without_transform = chamfer_distance(a, b);
    const auto icp = icp_register(a, b, params.icp);
    r.transform = icp.transform;
    r.icp_rmse = icp.rmse;
    r.iterations_used = icp.iterations;
    r.chamfer_with_transform = chamfer_distance(icp.transform.apply(a), b);
    return r;
}

} // namespace voleta
