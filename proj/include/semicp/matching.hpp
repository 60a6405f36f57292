#pragma once

#include <cstddef>
#include <map>
#include <vector>

#include "semicp/cloud.hpp"
#include "semicp/kdtree.hpp"

namespace semicp {

/// One matched pair: the source point at position j in the query cloud was
/// matched to target point `target_index` at `squared_distance` (in the
/// units of the clouds handed to build/match, normalized in the pipeline).
struct Correspondence {
    std::size_t target_index;
    double squared_distance;
    int source_label;
};
using Correspondences = std::vector<Correspondence>;

/// Nearest-neighbour indices over a static target cloud: one tree per target
/// label in semantic mode, plus a global tree used for the non-semantic mode
/// and for the optional missing-label fallback.
class SemanticIndex {
public:
    static SemanticIndex build(const PointCloud& target, bool semantic);

    bool semantic() const { return semantic_; }
    std::size_t label_index_count() const { return per_label_.size(); }
    std::size_t label_index_size(int label) const;
    bool has_label(int label) const { return per_label_.count(label) != 0; }
    std::size_t target_size() const { return global_.size(); }

    /// Exact nearest target point sharing `label` (semantic mode) or the
    /// global nearest (non-semantic mode / fallback). Returns the global
    /// target index and squared distance.
    std::pair<std::size_t, double> nearest(const Eigen::Vector3d& query, int label,
                                           bool fallback_global) const;

private:
    struct LabelIndex {
        KdTree3 tree;
        std::vector<std::size_t> to_global;  // ascending, so local ties == global ties
    };
    std::map<int, LabelIndex> per_label_;
    KdTree3 global_;
    bool semantic_ = true;
};

/// Matches every source point to its exact nearest same-label target point.
/// Queries are independent, so they may run on several threads; the result
/// does not depend on the thread count.
Correspondences match(const SemanticIndex& index, const PointCloud& source,
                      bool fallback_global, int threads = 1);

}  // namespace semicp
