#include "semicp/kdtree.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace semicp {

KdTree3::KdTree3(std::vector<Eigen::Vector3d> points) : points_(std::move(points)) {
    order_.resize(points_.size());
    std::iota(order_.begin(), order_.end(), 0u);
    nodes_.reserve(points_.empty() ? 0 : 2 * points_.size() / kLeafSize + 2);
    if (!points_.empty()) root_ = build(0, static_cast<std::uint32_t>(points_.size()));
}

std::int32_t KdTree3::build(std::uint32_t begin, std::uint32_t end) {
    Node node;
    node.begin = begin;
    node.end = end;
    if (end - begin <= kLeafSize) {
        nodes_.push_back(node);
        return static_cast<std::int32_t>(nodes_.size() - 1);
    }

    Eigen::Vector3d lo = points_[order_[begin]];
    Eigen::Vector3d hi = lo;
    for (std::uint32_t i = begin + 1; i < end; ++i) {
        lo = lo.cwiseMin(points_[order_[i]]);
        hi = hi.cwiseMax(points_[order_[i]]);
    }
    int axis = 0;
    (hi - lo).maxCoeff(&axis);

    const std::uint32_t mid = begin + (end - begin) / 2;
    std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                     [&](std::uint32_t a, std::uint32_t b) {
                         const double ca = points_[a][axis];
                         const double cb = points_[b][axis];
                         return ca < cb || (ca == cb && a < b);
                     });
    node.axis = axis;
    node.split = points_[order_[mid]][axis];

    const auto self = static_cast<std::int32_t>(nodes_.size());
    nodes_.push_back(node);
    const std::int32_t left = build(begin, mid);
    const std::int32_t right = build(mid, end);
    nodes_[self].left = left;
    nodes_[self].right = right;
    return self;
}

void KdTree3::search(std::int32_t ni, const Eigen::Vector3d& query, Best& best) const {
    const Node& node = nodes_[ni];
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const std::uint32_t idx = order_[i];
            const double d2 = (points_[idx] - query).squaredNorm();
            if (d2 < best.d2 || (d2 == best.d2 && idx < best.index)) {
                best.d2 = d2;
                best.index = idx;
            }
        }
        return;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    search(near, query, best);
    // Equal plane distance can still hide an equal-distance lower index.
    if (diff * diff <= best.d2) search(far, query, best);
}

std::pair<std::size_t, double> KdTree3::nearest(const Eigen::Vector3d& query) const {
    Best best{static_cast<std::size_t>(-1), std::numeric_limits<double>::infinity()};
    search(root_, query, best);
    return {best.index, best.d2};
}

struct KdTree3::KBest {
    // Sorted ascending by (d2, index); worst candidate at the back.
    std::vector<std::pair<double, std::size_t>> items;
    std::size_t k = 0;

    double bound() const {
        return items.size() < k ? std::numeric_limits<double>::infinity() : items.back().first;
    }
    void offer(double d2, std::size_t idx) {
        const std::pair<double, std::size_t> cand{d2, idx};
        if (items.size() == k) {
            if (!(cand < items.back())) return;
            items.pop_back();
        }
        items.insert(std::upper_bound(items.begin(), items.end(), cand), cand);
    }
};

void KdTree3::search_k(std::int32_t ni, const Eigen::Vector3d& query, KBest& best) const {
    const Node& node = nodes_[ni];
    if (node.axis < 0) {
        for (std::uint32_t i = node.begin; i < node.end; ++i) {
            const std::uint32_t idx = order_[i];
            best.offer((points_[idx] - query).squaredNorm(), idx);
        }
        return;
    }
    const double diff = query[node.axis] - node.split;
    const std::int32_t near = diff < 0.0 ? node.left : node.right;
    const std::int32_t far = diff < 0.0 ? node.right : node.left;
    search_k(near, query, best);
    if (diff * diff <= best.bound()) search_k(far, query, best);
}

std::vector<std::pair<std::size_t, double>> KdTree3::knearest(const Eigen::Vector3d& query,
                                                              std::size_t k) const {
    KBest best;
    best.k = std::min(k, points_.size());
    best.items.reserve(best.k + 1);
    if (root_ >= 0 && best.k > 0) search_k(root_, query, best);
    std::vector<std::pair<std::size_t, double>> out;
    out.reserve(best.items.size());
    for (const auto& [d2, idx] : best.items) out.emplace_back(idx, d2);
    return out;
}

}  // namespace semicp
