#include "semicp/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "semicp/kdtree.hpp"

namespace semicp {

namespace {

std::vector<double> directed_nn_distances(const PointCloud& p, const PointCloud& q) {
    if (p.points.empty() || q.points.empty()) throw EmptyCloudError();
    const KdTree3 tree(q.points);
    std::vector<double> dist;
    dist.reserve(p.size());
    for (const auto& x : p.points) dist.push_back(std::sqrt(tree.nearest(x).second));
    return dist;
}

// Linear interpolation between the closest order statistics: the percentile
// position is q*(n-1) over the sorted sample.
double percentile(std::vector<double> values, double q) {
    std::sort(values.begin(), values.end());
    if (values.size() == 1) return values.front();
    const double pos = q * static_cast<double>(values.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return values[lo] + frac * (values[hi] - values[lo]);
}

PointCloud filter_label(const PointCloud& cloud, int label) {
    PointCloud out;
    for (std::size_t i = 0; i < cloud.size(); ++i) {
        if (cloud.labels[i] == label) {
            out.points.push_back(cloud.points[i]);
            out.labels.push_back(label);
        }
    }
    return out;
}

std::string format_value(double v) {
    std::ostringstream os;
    os.precision(9);
    os << v;
    return os.str();
}

}  // namespace

double hd95(const PointCloud& p, const PointCloud& q) {
    return percentile(directed_nn_distances(p, q), 0.95);
}

double msd(const PointCloud& p, const PointCloud& q) {
    const auto dist = directed_nn_distances(p, q);
    double sum = 0.0;
    for (double d : dist) sum += d;
    return sum / static_cast<double>(dist.size());
}

double tre(const PointCloud& warped, const PointCloud& truth) {
    if (warped.size() != truth.size())
        throw LengthMismatchError("TRE needs index-aligned clouds: " + std::to_string(warped.size()) +
                                  " vs " + std::to_string(truth.size()) + " points");
    if (warped.points.empty()) throw EmptyCloudError();
    double sum = 0.0;
    for (std::size_t i = 0; i < warped.size(); ++i)
        sum += (warped.points[i] - truth.points[i]).norm();
    return sum / static_cast<double>(warped.size());
}

std::pair<double, double> sdlogj(const ControlGrid& grid) {
    const int G = grid.resolution();
    const double step = grid.step();
    const double h = 0.25 * step;  // stays inside the cell; exact for trilinear
    const Eigen::Vector3d scale = grid.normalization().scale();

    std::vector<double> logdets;
    logdets.reserve(static_cast<std::size_t>(G - 1) * (G - 1) * (G - 1));
    std::size_t folded = 0;

    for (int i = 0; i + 1 < G; ++i) {
        for (int j = 0; j + 1 < G; ++j) {
            for (int k = 0; k + 1 < G; ++k) {
                const Eigen::Vector3d center(-1.0 + (i + 0.5) * step, -1.0 + (j + 0.5) * step,
                                             -1.0 + (k + 0.5) * step);
                Eigen::Matrix3d dd;  // dd(c, a) = d d_c / d y_a, normalized coords
                for (int a = 0; a < 3; ++a) {
                    Eigen::Vector3d plus = center;
                    Eigen::Vector3d minus = center;
                    plus[a] += h;
                    minus[a] -= h;
                    const Eigen::Vector3d dp =
                        apply_cell_weights(grid, cell_weights(grid, plus, false, 0));
                    const Eigen::Vector3d dm =
                        apply_cell_weights(grid, cell_weights(grid, minus, false, 0));
                    dd.col(a) = (dp - dm) / (2.0 * h);
                }
                // Chain into physical coordinates: u_mm = S^-1 d(S(x - o)).
                Eigen::Matrix3d jac = Eigen::Matrix3d::Identity();
                for (int c = 0; c < 3; ++c)
                    for (int a = 0; a < 3; ++a) jac(c, a) += dd(c, a) * scale[a] / scale[c];
                const double det = jac.determinant();
                if (det > 0.0) {
                    logdets.push_back(std::log(det));
                } else {
                    ++folded;
                }
            }
        }
    }

    const std::size_t cells = logdets.size() + folded;
    const double folded_fraction = static_cast<double>(folded) / static_cast<double>(cells);
    if (logdets.empty()) throw AllCellsFoldedError();

    double mean = 0.0;
    for (double v : logdets) mean += v;
    mean /= static_cast<double>(logdets.size());
    double var = 0.0;
    for (double v : logdets) var += (v - mean) * (v - mean);
    var /= static_cast<double>(logdets.size());  // population variance
    return {std::sqrt(var), folded_fraction};
}

MetricsReport evaluate_pair(const PointCloud& p, const PointCloud& q, const ControlGrid* grid,
                            bool with_tre, double runtime_s) {
    MetricsReport report;
    report.runtime_s = runtime_s;

    std::set<int> shared;
    const auto ql = q.label_set();
    for (int l : p.label_set()) {
        if (ql.count(l)) shared.insert(l);
    }
    if (shared.empty()) throw Error("clouds share no labels");

    double sum_hd = 0.0, sum_msd = 0.0, sum_tre = 0.0;
    for (int label : shared) {
        const PointCloud pl = filter_label(p, label);
        const PointCloud qls = filter_label(q, label);
        LabelMetrics lm;
        lm.hd95_mm = hd95(pl, qls);
        lm.msd_mm = msd(pl, qls);
        if (with_tre) {
            lm.tre_mm = tre(pl, qls);
            sum_tre += *lm.tre_mm;
        }
        sum_hd += lm.hd95_mm;
        sum_msd += lm.msd_mm;
        report.per_label[label] = lm;
    }
    const auto n = static_cast<double>(shared.size());
    report.average_hd95_mm = sum_hd / n;
    report.average_msd_mm = sum_msd / n;
    if (with_tre) report.average_tre_mm = sum_tre / n;

    if (grid) {
        const auto [sd, folded] = sdlogj(*grid);
        report.sdlogj = sd;
        report.folded_cell_fraction = folded;
    }
    return report;
}

std::string MetricsReport::serialize() const {
    std::ostringstream os;
    for (const auto& [label, lm] : per_label) {
        os << "per_label." << label << ".hd95_mm = " << format_value(lm.hd95_mm) << "\n";
        os << "per_label." << label << ".msd_mm = " << format_value(lm.msd_mm) << "\n";
        if (lm.tre_mm)
            os << "per_label." << label << ".tre_mm = " << format_value(*lm.tre_mm) << "\n";
    }
    os << "average.hd95_mm = " << format_value(average_hd95_mm) << "\n";
    os << "average.msd_mm = " << format_value(average_msd_mm) << "\n";
    if (average_tre_mm) os << "average.tre_mm = " << format_value(*average_tre_mm) << "\n";
    if (sdlogj) os << "sdlogj = " << format_value(*sdlogj) << "\n";
    if (folded_cell_fraction)
        os << "folded_cell_fraction = " << format_value(*folded_cell_fraction) << "\n";
    os << "runtime_s = " << format_value(runtime_s) << "\n";
    return os.str();
}

}  // namespace semicp
