// metrics.hpp - ground-truth error metrics over simulator label regions.
#pragma once

#include <string>
#include <vector>

#include "core/volume.hpp"

namespace mpf {

struct ReconMetrics {
    std::string name;
    double masked_rmse = 0.0; // object region (label 1), metal excluded
    double metal_rmse = 0.0;  // metal region (label 2)
    double global_rmse = 0.0; // all voxels
    int iterations = -1;      // -1 when unknown
    double runtime_seconds = -1.0;
};

struct MetricsReport {
    std::vector<ReconMetrics> entries;
    std::string table() const;      // human-readable
    std::string key_values() const; // machine-readable `name.key=value` lines
};

// RMSE of (recon - truth) over voxels where labels == label_value;
// label_value < 0 means all voxels.
double region_rmse(const Volume& truth, const Volume& recon, const Volume& labels,
                   double label_value);

ReconMetrics compute_metrics(const std::string& name, const Volume& truth,
                             const Volume& labels, const Volume& recon);

} // namespace mpf
