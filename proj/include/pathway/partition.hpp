#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathway/grid.hpp"

namespace pathway {

// p x p blocks of grid cells; leftover rows/columns are dropped.
struct PartitionGrid {
    std::size_t p = 1;
    std::size_t nrow = 0;  // partition rows (latitude bands)
    std::size_t ncol = 0;  // partition columns
    std::vector<double> band_lat;  // centroid latitude per partition row
    std::vector<double> band_lon;  // centroid longitude per partition column

    std::size_t count() const { return nrow * ncol; }
    std::size_t row_of(std::size_t part) const { return part / ncol; }
    std::size_t col_of(std::size_t part) const { return part % ncol; }
    double centroid_lat(std::size_t part) const { return band_lat[row_of(part)]; }
    double centroid_lon(std::size_t part) const { return band_lon[col_of(part)]; }
};

struct SignatureSpec {
    enum class Kind { mean, percentile };
    Kind kind = Kind::mean;
    std::vector<double> quantiles;  // strictly increasing in [0,1]

    std::size_t dim() const { return kind == Kind::mean ? 1 : quantiles.size(); }
    void validate() const;  // throws ConfigError

    static SignatureSpec mean() { return SignatureSpec{}; }
    static SignatureSpec percentile5() {
        return SignatureSpec{Kind::percentile, {0.0, 0.25, 0.5, 0.75, 1.0}};
    }
};

// Per-(timestep, partition) signature vectors with a validity mask.
struct SignatureTensor {
    std::size_t nt = 0;
    std::size_t npart = 0;
    std::size_t dim = 0;
    std::vector<double> values;        // [t][partition][d]
    std::vector<std::uint8_t> valid;   // [t][partition]

    double* row(std::size_t t, std::size_t part) {
        return values.data() + (t * npart + part) * dim;
    }
    const double* row(std::size_t t, std::size_t part) const {
        return values.data() + (t * npart + part) * dim;
    }
    bool is_valid(std::size_t t, std::size_t part) const {
        return valid[t * npart + part] != 0;
    }
};

enum class MissingPolicy {
    exclude,            // masked cells are dropped from the signature
    partition_invalid,  // any masked cell invalidates the (t, partition) entry
};

PartitionGrid make_partitions(const FieldDataset& ds, std::size_t p);

// Signature of one multiset of values. `values` is modified (sorted) in place.
std::vector<double> signature(std::vector<double>& values, const SignatureSpec& spec);

SignatureTensor compute_signatures(const FieldDataset& ds, const PartitionGrid& grid,
                                   const SignatureSpec& spec, const std::string& variable,
                                   MissingPolicy policy = MissingPolicy::exclude);

}  // namespace pathway
