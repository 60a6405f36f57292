#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>

#include "semicp/cloud.hpp"
#include "semicp/deform.hpp"

namespace semicp {

struct LabelMetrics {
    double hd95_mm = 0.0;
    double msd_mm = 0.0;
    std::optional<double> tre_mm;
};

struct MetricsReport {
    std::map<int, LabelMetrics> per_label;
    double average_hd95_mm = 0.0;
    double average_msd_mm = 0.0;
    std::optional<double> average_tre_mm;
    std::optional<double> sdlogj;
    std::optional<double> folded_cell_fraction;
    double runtime_s = 0.0;

    /// Key-value text form (UTF-8, one `key = value` per line).
    std::string serialize() const;
};

/// Directed 95th-percentile nearest-neighbour distance from p to q, with
/// linear interpolation between the closest order statistics.
double hd95(const PointCloud& p, const PointCloud& q);

/// Directed mean nearest-neighbour distance from p to q.
double msd(const PointCloud& p, const PointCloud& q);

/// Mean distance between index-aligned corresponding points.
double tre(const PointCloud& warped, const PointCloud& truth);

/// Standard deviation of log det J over the grid's cell centres, evaluated in
/// physical coordinates; cells with det J <= 0 are excluded and reported as
/// the folded fraction. Throws AllCellsFoldedError when nothing remains.
std::pair<double, double> sdlogj(const ControlGrid& grid);

/// Per-shared-label hd95/msd (and tre when the clouds are index-aligned and
/// `with_tre` is set) plus unweighted macro averages; optional grid metrics.
MetricsReport evaluate_pair(const PointCloud& p, const PointCloud& q, const ControlGrid* grid,
                            bool with_tre = false, double runtime_s = 0.0);

}  // namespace semicp
