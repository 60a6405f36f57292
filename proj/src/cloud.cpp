#include "semicp/cloud.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/Eigenvalues>

#include "semicp/kdtree.hpp"
#include "semicp/rng.hpp"

namespace semicp {

std::set<int> PointCloud::label_set() const {
    return std::set<int>(labels.begin(), labels.end());
}

void PointCloud::check() const {
    if (points.empty()) throw EmptyCloudError();
    if (labels.size() != points.size())
        throw Error("labels/points length mismatch: " + std::to_string(labels.size()) + " vs " +
                    std::to_string(points.size()));
    if (normals) {
        if (normals->size() != points.size())
            throw Error("normals/points length mismatch");
        for (const auto& n : *normals) {
            if (std::abs(n.norm() - 1.0) > 1e-6) throw Error("normal is not unit length");
        }
    }
    for (int l : labels) {
        if (l < 0) throw Error("negative label " + std::to_string(l));
    }
}

PointCloud NormalizationMap::cloud_to_normalized(const PointCloud& cloud) const {
    PointCloud out;
    out.points.reserve(cloud.size());
    for (const auto& p : cloud.points) out.points.push_back(to_normalized(p));
    out.labels = cloud.labels;
    if (cloud.normals) {
        std::vector<Eigen::Vector3d> normals;
        normals.reserve(cloud.normals->size());
        for (const auto& n : *cloud.normals) normals.push_back(normal_to_normalized(n));
        out.normals = std::move(normals);
    }
    return out;
}

Eigen::Matrix4d NormalizationMap::forward_matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 0) = scale_.x();
    m(1, 1) = scale_.y();
    m(2, 2) = scale_.z();
    m.block<3, 1>(0, 3) = -scale_.cwiseProduct(offset_);
    return m;
}

Eigen::Matrix4d NormalizationMap::inverse_matrix() const {
    Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
    m(0, 0) = 1.0 / scale_.x();
    m(1, 1) = 1.0 / scale_.y();
    m(2, 2) = 1.0 / scale_.z();
    m.block<3, 1>(0, 3) = offset_;
    return m;
}

ValidationReport validate_pair(const PointCloud& source, const PointCloud& target, bool semantic,
                               bool allow_label_fallback) {
    ValidationReport report;
    if (source.points.empty() || target.points.empty()) {
        report.message = source.points.empty() ? "source cloud is empty" : "target cloud is empty";
        return report;
    }
    report.source_labels = source.label_set();
    report.target_labels = target.label_set();
    for (int l : report.source_labels) {
        if (!report.target_labels.count(l)) report.missing_in_target.push_back(l);
    }
    if (semantic && (report.source_labels.size() < 2 || report.target_labels.size() < 2)) {
        report.message =
            "semantic matching needs at least 2 distinct labels (source has " +
            std::to_string(report.source_labels.size()) + ", target has " +
            std::to_string(report.target_labels.size()) + ")";
        return report;
    }
    if (semantic && !report.missing_in_target.empty() && !allow_label_fallback) {
        report.message = "source label " + std::to_string(report.missing_in_target.front()) +
                         " has no counterpart in the target cloud";
        return report;
    }
    report.ok = true;
    return report;
}

PointCloud estimate_normals(const PointCloud& cloud, int k) {
    if (k < 3) throw TooFewPointsError("normal estimation needs k >= 3, got " + std::to_string(k));
    if (cloud.size() < static_cast<std::size_t>(k) + 1)
        throw TooFewPointsError("normal estimation with k=" + std::to_string(k) + " needs at least " +
                                std::to_string(k + 1) + " points, cloud has " +
                                std::to_string(cloud.size()));

    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& p : cloud.points) centroid += p;
    centroid /= static_cast<double>(cloud.size());

    const KdTree3 tree(cloud.points);
    std::vector<Eigen::Vector3d> normals(cloud.size());
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        // k+1 neighbours include the query point itself at distance 0.
        const auto nn = tree.knearest(cloud.points[i], static_cast<std::size_t>(k) + 1);
        Eigen::Vector3d mean = Eigen::Vector3d::Zero();
        for (const auto& [idx, d2] : nn) mean += cloud.points[idx];
        mean /= static_cast<double>(nn.size());
        Eigen::Matrix3d cov = Eigen::Matrix3d::Zero();
        for (const auto& [idx, d2] : nn) {
            const Eigen::Vector3d c = cloud.points[idx] - mean;
            cov += c * c.transpose();
        }
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(cov);
        Eigen::Vector3d n = solver.eigenvectors().col(0);  // least variance
        const double len = n.norm();
        n = len > 0.0 ? Eigen::Vector3d(n / len) : Eigen::Vector3d(0, 0, 1);
        if (n.dot(cloud.points[i] - centroid) < 0.0) n = -n;
        normals[i] = n;
    }

    PointCloud out = cloud;
    out.normals = std::move(normals);
    return out;
}

namespace {

// Largest-remainder proportional allocation of n slots over the label
// counts, with a floor of one slot per label.
std::map<int, std::size_t> allocate_counts(const std::map<int, std::vector<std::size_t>>& by_label,
                                           std::size_t n, std::size_t total) {
    std::map<int, std::size_t> alloc;
    std::vector<std::pair<double, int>> remainders;  // (-remainder, label) for stable ordering
    std::size_t assigned = 0;
    for (const auto& [label, idx] : by_label) {
        const double exact = static_cast<double>(n) * static_cast<double>(idx.size()) /
                             static_cast<double>(total);
        const auto floor_part = static_cast<std::size_t>(exact);
        alloc[label] = floor_part;
        assigned += floor_part;
        remainders.emplace_back(-(exact - static_cast<double>(floor_part)), label);
    }
    std::sort(remainders.begin(), remainders.end());
    for (std::size_t r = 0; assigned < n && r < remainders.size(); ++r) {
        ++alloc[remainders[r].second];
        ++assigned;
    }
    // Every present label keeps at least one point; steal from the largest.
    for (auto& [label, count] : alloc) {
        while (count == 0) {
            auto donor = alloc.end();
            for (auto it = alloc.begin(); it != alloc.end(); ++it) {
                if (it->first == label) continue;
                if (donor == alloc.end() || it->second > donor->second) donor = it;
            }
            if (donor == alloc.end() || donor->second <= 1) break;
            --donor->second;
            ++count;
        }
    }
    return alloc;
}

}  // namespace

PointCloud downsample_stratified(const PointCloud& cloud, std::size_t n, std::uint64_t seed) {
    if (cloud.size() <= n) return cloud;

    std::map<int, std::vector<std::size_t>> by_label;
    for (std::size_t i = 0; i < cloud.size(); ++i) by_label[cloud.labels[i]].push_back(i);
    if (n < by_label.size())
        throw std::invalid_argument("downsample target " + std::to_string(n) +
                                    " is below the number of distinct labels " +
                                    std::to_string(by_label.size()));
    const auto alloc = allocate_counts(by_label, n, cloud.size());

    Rng rng(seed);
    std::vector<std::size_t> selected;
    selected.reserve(n);
    for (auto& [label, indices] : by_label) {
        auto pool = indices;
        const std::size_t take = std::min(alloc.at(label), pool.size());
        for (std::size_t i = 0; i < take; ++i) {
            const std::size_t j = i + rng.uniform_index(pool.size() - i);
            std::swap(pool[i], pool[j]);
            selected.push_back(pool[i]);
        }
    }
    std::sort(selected.begin(), selected.end());

    PointCloud out;
    out.points.reserve(selected.size());
    out.labels.reserve(selected.size());
    if (cloud.normals) out.normals.emplace();
    for (std::size_t i : selected) {
        out.points.push_back(cloud.points[i]);
        out.labels.push_back(cloud.labels[i]);
        if (cloud.normals) out.normals->push_back((*cloud.normals)[i]);
    }
    return out;
}

NormalizationMap fit_normalization(const PointCloud& a, const PointCloud& b, double margin) {
    if (a.points.empty() || b.points.empty()) throw EmptyCloudError();

    Eigen::Vector3d lo = a.points.front();
    Eigen::Vector3d hi = lo;
    for (const auto& p : a.points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }
    for (const auto& p : b.points) {
        lo = lo.cwiseMin(p);
        hi = hi.cwiseMax(p);
    }

    Eigen::Vector3d offset, scale;
    for (int axis = 0; axis < 3; ++axis) {
        double extent = hi[axis] - lo[axis];
        double l = lo[axis];
        double h = hi[axis];
        if (extent == 0.0) {
            l -= 0.5;
            h += 0.5;
            extent = 1.0;
        }
        l -= margin * extent;
        h += margin * extent;
        offset[axis] = 0.5 * (l + h);
        scale[axis] = 2.0 / (h - l);
    }
    return NormalizationMap(offset, scale);
}

}  // namespace semicp
