#include "semicp/matching.hpp"

#include <thread>

namespace semicp {

SemanticIndex SemanticIndex::build(const PointCloud& target, bool semantic) {
    if (target.points.empty()) throw EmptyCloudError("cannot index an empty target cloud");

    SemanticIndex index;
    index.semantic_ = semantic;
    index.global_ = KdTree3(target.points);
    if (semantic) {
        std::map<int, std::vector<std::size_t>> by_label;
        for (std::size_t i = 0; i < target.size(); ++i) by_label[target.labels[i]].push_back(i);
        for (auto& [label, indices] : by_label) {
            LabelIndex li;
            li.to_global = indices;  // ascending by construction
            std::vector<Eigen::Vector3d> pts;
            pts.reserve(indices.size());
            for (std::size_t i : indices) pts.push_back(target.points[i]);
            li.tree = KdTree3(std::move(pts));
            index.per_label_.emplace(label, std::move(li));
        }
    }
    return index;
}

std::size_t SemanticIndex::label_index_size(int label) const {
    const auto it = per_label_.find(label);
    return it == per_label_.end() ? 0 : it->second.tree.size();
}

std::pair<std::size_t, double> SemanticIndex::nearest(const Eigen::Vector3d& query, int label,
                                                      bool fallback_global) const {
    if (semantic_) {
        const auto it = per_label_.find(label);
        if (it != per_label_.end()) {
            const auto [local, d2] = it->second.tree.nearest(query);
            return {it->second.to_global[local], d2};
        }
        if (!fallback_global) throw MissingLabelIndexError(label);
    }
    return global_.nearest(query);
}

Correspondences match(const SemanticIndex& index, const PointCloud& source, bool fallback_global,
                      int threads) {
    Correspondences out(source.size());
    auto worker = [&](std::size_t begin, std::size_t end) {
        for (std::size_t j = begin; j < end; ++j) {
            const int label = source.labels[j];
            const auto [target_index, d2] = index.nearest(source.points[j], label, fallback_global);
            out[j] = Correspondence{target_index, d2, label};
        }
    };

    const std::size_t n = source.size();
    if (threads <= 1 || n < 256) {
        worker(0, n);
        return out;
    }
    // In semantic mode a missing label throws; probe the label set up front so
    // the error surfaces on this thread.
    if (index.semantic() && !fallback_global) {
        for (int label : source.label_set()) {
            if (!index.has_label(label)) throw MissingLabelIndexError(label);
        }
    }
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(threads), n);
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    const std::size_t chunk = (n + nthreads - 1) / nthreads;
    for (std::size_t t = 0; t < nthreads; ++t) {
        const std::size_t begin = t * chunk;
        const std::size_t end = std::min(n, begin + chunk);
        if (begin >= end) break;
        pool.emplace_back(worker, begin, end);
    }
    for (auto& th : pool) th.join();
    return out;
}

}  // namespace semicp
