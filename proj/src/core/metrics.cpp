#include "core/metrics.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "core/error.hpp"
#include "core/simulate.hpp"

namespace mpf {

double region_rmse(const Volume& truth, const Volume& recon, const Volume& labels,
                   double label_value) {
    require_same_grid(truth, recon, "region_rmse");
    require_same_grid(truth, labels, "region_rmse");
    double acc = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (label_value >= 0.0 && labels.values[i] != label_value)
            continue;
        double d = recon.values[i] - truth.values[i];
        acc += d * d;
        ++count;
    }
    if (count == 0)
        return 0.0;
    return std::sqrt(acc / static_cast<double>(count));
}

ReconMetrics compute_metrics(const std::string& name, const Volume& truth,
                             const Volume& labels, const Volume& recon) {
    ReconMetrics m;
    m.name = name;
    m.masked_rmse = region_rmse(truth, recon, labels, kLabelBody);
    m.metal_rmse = region_rmse(truth, recon, labels, kLabelMetal);
    m.global_rmse = region_rmse(truth, recon, labels, -1.0);
    return m;
}

namespace {
std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.9e", v);
    return buf;
}
} // namespace

std::string MetricsReport::table() const {
    std::ostringstream os;
    os << "name  masked_rmse  metal_rmse  global_rmse  iterations\n";
    for (const auto& e : entries) {
        os << e.name << "  " << fmt(e.masked_rmse) << "  " << fmt(e.metal_rmse) << "  "
           << fmt(e.global_rmse) << "  ";
        if (e.iterations >= 0)
            os << e.iterations;
        else
            os << "-";
        os << "\n";
    }
    return os.str();
}

std::string MetricsReport::key_values() const {
    std::ostringstream os;
    for (const auto& e : entries) {
        os << e.name << ".masked_rmse=" << fmt(e.masked_rmse) << "\n";
        os << e.name << ".metal_rmse=" << fmt(e.metal_rmse) << "\n";
        os << e.name << ".global_rmse=" << fmt(e.global_rmse) << "\n";
        if (e.iterations >= 0)
            os << e.name << ".iterations=" << e.iterations << "\n";
    }
    return os.str();
}

} // namespace mpf
