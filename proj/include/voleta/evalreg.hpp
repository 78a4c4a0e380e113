#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "voleta/mesh.hpp"

namespace voleta {

struct PointCloud {
    std::vector<Vec3> points;
    std::string source;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// x -> rotation * x + translation, rotation proper orthonormal.
struct RigidTransform {
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
    Vec3 translation = Vec3::Zero();

    Vec3 apply(const Vec3& p) const { return rotation * p + translation; }
    PointCloud apply(const PointCloud& cloud) const;
    /// this * other: apply `other` first.
    RigidTransform compose(const RigidTransform& other) const;
    RigidTransform inverse() const;
    Eigen::Matrix4d homogeneous() const;

    static RigidTransform identity() { return {}; }
};

/// Angle of rotation a^T b, radians.
double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b);

/// Area-proportional uniform sampling. Same seed, same cloud.
PointCloud sample_surface(const TriangleMesh& mesh, std::size_t n, std::uint64_t seed);

/// Exact Euclidean distance from every query to its nearest target point.
std::vector<double> nearest_distances(const PointCloud& queries, const PointCloud& target);

struct IcpParams {
    int max_iterations = 50;
    double convergence_eps = 1e-6; ///< stop once the rmse improvement drops below this
    double trim_fraction = 0.0;    ///< drop this fraction of the worst correspondences per step
    bool centroid_prealign = true;
};

struct IcpResult {
    RigidTransform transform;
    double rmse = 0.0;
    int iterations = 0;                ///< transform updates applied
    std::vector<double> rmse_history;  ///< rmse at each correspondence pass, last entry = final pose
};

/// Least-squares rigid motion taking src[i] onto dst[i] (cross-covariance SVD with
/// reflection guard).
RigidTransform fit_rigid(std::span<const Vec3> src, std::span<const Vec3> dst);

/// Point-to-point ICP. Returned transform maps the original source into the target frame.
IcpResult icp_register(const PointCloud& source, const PointCloud& target, const IcpParams& params = {});

/// mean_a min_b |a-b|^2 + mean_b min_a |a-b|^2.
double chamfer_distance(const PointCloud& a, const PointCloud& b);

/// Mean absolute percentage error, in percent.
double mape(std::span<const double> v_true, std::span<const double> v_pred);

struct EvalParams {
    std::size_t samples = 100000;
    std::uint64_t seed = 42;
    IcpParams icp;
};

struct EvalResult {
    double chamfer_with_transform = 0.0;
    double chamfer_without_transform = 0.0;
    double icp_rmse = 0.0;
    int iterations_used = 0;
    RigidTransform transform;
};

/// Samples both meshes with the same seed, registers ours onto the ground truth and
/// reports Chamfer distance before and after the recovered transform.
EvalResult evaluate_pair(const TriangleMesh& ours, const TriangleMesh& ground_truth, const EvalParams& params = {});

} // namespace voleta
