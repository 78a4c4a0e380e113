#include "voleta/kdtree.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "voleta/errors.hpp"

namespace voleta {

KdTree::KdTree(std::vector<Vec3> points, int leaf_size)
    : points_(std::move(points)), leaf_size_(std::max(1, leaf_size))
{
    if (points_.empty())
        throw_invalid("KdTree: empty point set");
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(2 * points_.size() / leaf_size_ + 1);
    build(0, static_cast<std::uint32_t>(points_.size()), 0);
}

std::int32_t KdTree::build(std::uint32_t begin, std::uint32_t end, int depth)
{
    const auto id = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= static_cast<std::uint32_t>(leaf_size_) || depth > 64)
        return id;

    // Split the widest axis at the median.
    Aabb box;
    for (auto i = begin; i < end; ++i)
        box.extend(points_[order_[i]]);
    Eigen::Index axis = 0;
    (box.hi - box.lo).maxCoeff(&axis);
    if (box.hi[axis] == box.lo[axis])
        return id; // all points coincide

    const auto mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) { return points_[a][axis] < points_[b][axis]; });

    const double split = points_[order_[mid]][axis];
    const auto left = build(begin, mid, depth + 1);
    const auto right = build(mid, end, depth + 1);
    Node& n = nodes_[id];
    n.axis = static_cast<int>(axis);
    n.split = split;
    n.left = left;
    n.right = right;
    return id;
}

NearestHit KdTree::nearest(const Vec3& query) const
{
    NearestHit best{0, std::numeric_limits<double>::infinity()};
    search(0, query, best);
    return best;
}

void KdTree::search(std::int32_t node_id, const Vec3& q, NearestHit& best) const
{
    const Node& n = nodes_[node_id];
    if (n.axis < 0) {
        for (auto i = n.begin; i < n.end; ++i) {
            const auto idx = order_[i];
            const double d = (points_[idx] - q).squaredNorm();
            if (d < best.sq_distance || (d == best.sq_distance && idx < best.index)) {
                best.sq_distance = d;
                best.index = idx;
            }
        }
        return;
    }
    // Left holds coordinates <= split, right holds >= split.
    const double delta = q[n.axis] - n.split;
    const auto near = delta < 0 ? n.left : n.right;
    const auto far = delta < 0 ? n.right : n.left;
    search(near, q, best);
    if (delta * delta <= best.sq_distance)
        search(far, q, best);
}

} // namespace voleta
