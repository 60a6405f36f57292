#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace semicp {

/// Exact nearest-neighbour search over a static set of 3D points.
/// Median-split tree; distance ties break toward the lowest point index so
/// queries have a unique, platform-independent answer.
class KdTree3 {
public:
    KdTree3() = default;
    explicit KdTree3(std::vector<Eigen::Vector3d> points);

    std::size_t size() const { return points_.size(); }
    bool empty() const { return points_.empty(); }

    /// Returns (index, squared distance) of the exact nearest point.
    std::pair<std::size_t, double> nearest(const Eigen::Vector3d& query) const;

    /// k nearest points sorted by (squared distance, index) ascending.
    std::vector<std::pair<std::size_t, double>> knearest(const Eigen::Vector3d& query,
                                                         std::size_t k) const;

private:
    struct Node {
        int axis = -1;           // -1 marks a leaf
        double split = 0.0;
        std::int32_t left = -1;
        std::int32_t right = -1;
        std::uint32_t begin = 0;  // leaf range into order_
        std::uint32_t end = 0;
    };

    std::int32_t build(std::uint32_t begin, std::uint32_t end);

    struct Best {
        std::size_t index;
        double d2;
    };
    void search(std::int32_t node, const Eigen::Vector3d& query, Best& best) const;

    struct KBest;
    void search_k(std::int32_t node, const Eigen::Vector3d& query, KBest& best) const;

    std::vector<Eigen::Vector3d> points_;
    std::vector<std::uint32_t> order_;
    std::vector<Node> nodes_;
    std::int32_t root_ = -1;

    static constexpr std::uint32_t kLeafSize = 8;
};

}  // namespace semicp
