#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "voleta/mesh.hpp"

namespace voleta {

struct NearestHit {
    std::uint32_t index = 0;
    double sq_distance = 0.0;
};

/// Static 3-d tree over a point set, exact nearest-neighbour queries.
/// Immutable after construction; concurrent queries are safe.
class KdTree {
public:
    explicit KdTree(std::vector<Vec3> points, int leaf_size = 8);

    NearestHit nearest(const Vec3& query) const;

    const std::vector<Vec3>& points() const { return points_; }
    std::size_t size() const { return points_.size(); }

private:
    struct Node {
        // Leaf: [begin, end) into order_. Inner: split axis/value, children.
        std::uint32_t begin = 0, end = 0;
        std::int32_t left = -1, right = -1;
        int axis = -1;
        double split = 0.0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end, int depth);
    void search(std::int32_t node, const Vec3& q, NearestHit& best) const;

    std::vector<Vec3> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    int leaf_size_;
};

} // namespace voleta
