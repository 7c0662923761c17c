#include "pathway/partition.hpp"

#include <algorithm>
#include <cmath>

#include "pathway/errors.hpp"

namespace pathway {

void SignatureSpec::validate() const {
    if (kind == Kind::mean) return;
    if (quantiles.empty()) throw ConfigError("percentile signature needs quantile levels");
    for (std::size_t i = 0; i < quantiles.size(); ++i) {
        if (quantiles[i] < 0.0 || quantiles[i] > 1.0)
            throw ConfigError("quantile levels must lie in [0,1]");
        if (i > 0 && !(quantiles[i] > quantiles[i - 1]))
            throw ConfigError("quantile levels must be strictly increasing");
    }
}

PartitionGrid make_partitions(const FieldDataset& ds, std::size_t p) {
    if (p < 1 || p > std::min(ds.nlat(), ds.nlon()))
        throw ConfigError("partition size p out of range for grid " +
                          std::to_string(ds.nlat()) + "x" + std::to_string(ds.nlon()));
    PartitionGrid g;
    g.p = p;
    g.nrow = ds.nlat() / p;
    g.ncol = ds.nlon() / p;
    g.band_lat.resize(g.nrow);
    g.band_lon.resize(g.ncol);
    for (std::size_t r = 0; r < g.nrow; ++r) {
        double s = 0.0;
        for (std::size_t i = r * p; i < (r + 1) * p; ++i) s += ds.lats[i];
        g.band_lat[r] = s / static_cast<double>(p);
    }
    for (std::size_t c = 0; c < g.ncol; ++c) {
        double s = 0.0;
        for (std::size_t j = c * p; j < (c + 1) * p; ++j) s += ds.lons[j];
        g.band_lon[c] = s / static_cast<double>(p);
    }
    return g;
}

std::vector<double> signature(std::vector<double>& values, const SignatureSpec& spec) {
    if (spec.kind == SignatureSpec::Kind::mean) {
        double s = 0.0;
        for (double v : values) s += v;
        return {s / static_cast<double>(values.size())};
    }
    // linear interpolation between order statistics
    std::sort(values.begin(), values.end());
    std::vector<double> out;
    out.reserve(spec.quantiles.size());
    const std::size_t n = values.size();
    for (double q : spec.quantiles) {
        double h = q * static_cast<double>(n - 1);
        std::size_t lo = static_cast<std::size_t>(std::floor(h));
        std::size_t hi = std::min(lo + 1, n - 1);
        double frac = h - static_cast<double>(lo);
        out.push_back(values[lo] + frac * (values[hi] - values[lo]));
    }
    return out;
}

SignatureTensor compute_signatures(const FieldDataset& ds, const PartitionGrid& grid,
                                   const SignatureSpec& spec, const std::string& variable,
                                   MissingPolicy policy) {
    spec.validate();
    const Variable& var = ds.variable(variable);

    SignatureTensor out;
    out.nt = ds.nt();
    out.npart = grid.count();
    out.dim = spec.dim();
    out.values.assign(out.nt * out.npart * out.dim, 0.0);
    out.valid.assign(out.nt * out.npart, 0);

    std::vector<double> cellbuf;
    cellbuf.reserve(grid.p * grid.p);
    for (std::size_t t = 0; t < out.nt; ++t) {
        for (std::size_t part = 0; part < out.npart; ++part) {
            std::size_t r = grid.row_of(part), c = grid.col_of(part);
            cellbuf.clear();
            bool any_masked = false;
            for (std::size_t i = r * grid.p; i < (r + 1) * grid.p; ++i)
                for (std::size_t j = c * grid.p; j < (c + 1) * grid.p; ++j) {
                    std::size_t idx = ds.at(t, i, j);
                    if (var.missing[idx]) {
                        any_masked = true;
                        continue;
                    }
                    cellbuf.push_back(var.values[idx]);
                }
            if (cellbuf.empty()) continue;
            if (policy == MissingPolicy::partition_invalid && any_masked) continue;
            std::vector<double> sig = signature(cellbuf, spec);
            std::copy(sig.begin(), sig.end(), out.row(t, part));
            out.valid[t * out.npart + part] = 1;
        }
    }
    return out;
}

}  // namespace pathway
