#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pathway/cluster.hpp"
#include "pathway/grid.hpp"
#include "pathway/partition.hpp"

namespace pathway {

// counts[c][t] of valid partitions per cluster, plus fractions of the valid
// partition count at each timestep.
struct MembershipSeries {
    std::size_t k = 0;
    std::size_t nt = 0;
    std::vector<std::vector<std::size_t>> counts;    // [c][t]
    std::vector<std::vector<double>> fraction;       // [c][t]
    std::vector<std::size_t> valid_total;            // [t]
};

enum class SigFlag { none, increase, decrease };

struct SignificanceSeries {
    std::vector<double> t_stat;
    std::vector<double> p_value;
    std::vector<SigFlag> flag;
    double alpha = 0.05;
};

struct WelchResult {
    double t_stat = 0.0;
    double dof = 0.0;
    double p_value = 1.0;
    bool degenerate = false;  // zero variance on both sides with unequal means
};

MembershipSeries membership_counts(const LabelField& labels, std::size_t nt,
                                   std::size_t npart, std::size_t k);

// Two-sided Welch unequal-variance t-test.
WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b);

// Regularized incomplete beta I_x(a, b); exposed for oracle cross-checks.
double incomplete_beta(double a, double b, double x);
// Two-sided Student-t tail probability for |t| with the given dof.
double student_t_two_sided(double t, double dof);

// Per-timestep Welch test of forced vs baseline membership fractions of one
// cluster across ensemble members.
SignificanceSeries detect_significance(const std::vector<MembershipSeries>& forced,
                                       const std::vector<MembershipSeries>& baseline,
                                       std::size_t cluster, double alpha);

// Modal cluster ID per partition-row latitude band; -1 where the whole band
// is invalid. Ties break toward the lower cluster ID.
std::vector<std::vector<std::int32_t>> latitude_mode(const LabelField& labels,
                                                     std::size_t nt,
                                                     const PartitionGrid& grid);

struct ClusterStats {
    std::size_t count = 0;  // raw cells pooled over (t, partition) members
    double mean = 0.0;
    double stddev = 0.0;
    bool defined = false;
};

std::vector<ClusterStats> cluster_stats(const FieldDataset& ds, const LabelField& labels,
                                        const PartitionGrid& grid,
                                        const std::string& variable, std::size_t k);

}  // namespace pathway
