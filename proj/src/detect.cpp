#include "pathway/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pathway/errors.hpp"

namespace pathway {

MembershipSeries membership_counts(const LabelField& labels, std::size_t nt,
                                   std::size_t npart, std::size_t k) {
    if (labels.size() != nt * npart)
        throw InternalError("membership_counts: label field size mismatch");
    MembershipSeries ms;
    ms.k = k;
    ms.nt = nt;
    ms.counts.assign(k, std::vector<std::size_t>(nt, 0));
    ms.fraction.assign(k, std::vector<double>(nt, 0.0));
    ms.valid_total.assign(nt, 0);
    for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t p = 0; p < npart; ++p) {
            std::int32_t l = labels[t * npart + p];
            if (l < 0) continue;
            ms.counts[static_cast<std::size_t>(l)][t]++;
            ms.valid_total[t]++;
        }
        if (ms.valid_total[t] > 0)
            for (std::size_t c = 0; c < k; ++c)
                ms.fraction[c][t] = static_cast<double>(ms.counts[c][t]) /
                                    static_cast<double>(ms.valid_total[t]);
    }
    return ms;
}

namespace {

// Continued fraction for the regularized incomplete beta (Lentz's method).
double betacf(double a, double b, double x) {
    const double eps = std::numeric_limits<double>::epsilon();
    const double fpmin = std::numeric_limits<double>::min() / eps;
    double qab = a + b, qap = a + 1.0, qam = a - 1.0;
    double c = 1.0, d = 1.0 - qab * x / qap;
    if (std::abs(d) < fpmin) d = fpmin;
    d = 1.0 / d;
    double h = d;
    for (int m = 1; m <= 300; ++m) {
        double m2 = 2.0 * m;
        double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        h *= d * c;
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if (std::abs(d) < fpmin) d = fpmin;
        c = 1.0 + aa / c;
        if (std::abs(c) < fpmin) c = fpmin;
        d = 1.0 / d;
        double del = d * c;
        h *= del;
        if (std::abs(del - 1.0) < 10 * eps) break;
    }
    return h;
}

}  // namespace

double incomplete_beta(double a, double b, double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    double lnfront = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                     a * std::log(x) + b * std::log(1.0 - x);
    double front = std::exp(lnfront);
    if (x < (a + 1.0) / (a + b + 2.0))
        return front * betacf(a, b, x) / a;
    return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

double student_t_two_sided(double t, double dof) {
    double x = dof / (dof + t * t);
    return incomplete_beta(dof / 2.0, 0.5, x);
}

WelchResult welch_t(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() < 2 || b.size() < 2)
        throw ConfigError("welch_t: both samples need at least 2 values");
    for (double v : a)
        if (!std::isfinite(v)) throw DataError("welch_t: non-finite sample value");
    for (double v : b)
        if (!std::isfinite(v)) throw DataError("welch_t: non-finite sample value");

    double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double ma = 0.0, mb = 0.0;
    for (double v : a) ma += v;
    for (double v : b) mb += v;
    ma /= na;
    mb /= nb;
    double va = 0.0, vb = 0.0;
    for (double v : a) va += (v - ma) * (v - ma);
    for (double v : b) vb += (v - mb) * (v - mb);
    va /= na - 1.0;
    vb /= nb - 1.0;

    WelchResult r;
    double se2 = va / na + vb / nb;
    if (se2 == 0.0) {
        if (ma == mb) {
            r.t_stat = 0.0;
            r.p_value = 1.0;
            r.dof = na + nb - 2.0;
        } else {
            r.t_stat = ma > mb ? std::numeric_limits<double>::infinity()
                               : -std::numeric_limits<double>::infinity();
            r.p_value = 0.0;
            r.dof = na + nb - 2.0;
            r.degenerate = true;
        }
        return r;
    }
    r.t_stat = (ma - mb) / std::sqrt(se2);
    double num = se2 * se2;
    double den = (va / na) * (va / na) / (na - 1.0) + (vb / nb) * (vb / nb) / (nb - 1.0);
    r.dof = num / den;
    r.p_value = student_t_two_sided(r.t_stat, r.dof);
    return r;
}

SignificanceSeries detect_significance(const std::vector<MembershipSeries>& forced,
                                       const std::vector<MembershipSeries>& baseline,
                                       std::size_t cluster, double alpha) {
    if (forced.size() < 2 || baseline.size() != forced.size())
        throw ConfigError("detect_significance: need E >= 2 paired members per arm");
    std::size_t nt = forced[0].nt;
    SignificanceSeries out;
    out.alpha = alpha;
    out.t_stat.resize(nt);
    out.p_value.resize(nt);
    out.flag.resize(nt);
    std::vector<double> fa(forced.size()), ba(baseline.size());
    for (std::size_t t = 0; t < nt; ++t) {
        for (std::size_t e = 0; e < forced.size(); ++e) {
            fa[e] = forced[e].fraction[cluster][t];
            ba[e] = baseline[e].fraction[cluster][t];
        }
        WelchResult w = welch_t(fa, ba);
        out.t_stat[t] = w.t_stat;
        out.p_value[t] = w.p_value;
        if (w.p_value < alpha)
            out.flag[t] = w.t_stat > 0 ? SigFlag::increase : SigFlag::decrease;
        else
            out.flag[t] = SigFlag::none;
    }
    return out;
}

std::vector<std::vector<std::int32_t>> latitude_mode(const LabelField& labels,
                                                     std::size_t nt,
                                                     const PartitionGrid& grid) {
    std::vector<std::vector<std::int32_t>> mode(grid.nrow,
                                                std::vector<std::int32_t>(nt, -1));
    std::vector<std::size_t> tally;
    for (std::size_t r = 0; r < grid.nrow; ++r) {
        for (std::size_t t = 0; t < nt; ++t) {
            tally.clear();
            for (std::size_t c = 0; c < grid.ncol; ++c) {
                std::int32_t l = labels[t * grid.count() + r * grid.ncol + c];
                if (l < 0) continue;
                if (tally.size() <= static_cast<std::size_t>(l))
                    tally.resize(static_cast<std::size_t>(l) + 1, 0);
                tally[static_cast<std::size_t>(l)]++;
            }
            std::int32_t best = -1;
            std::size_t best_n = 0;
            for (std::size_t c = 0; c < tally.size(); ++c)
                if (tally[c] > best_n) {  // strict >: ties go to the lower ID
                    best_n = tally[c];
                    best = static_cast<std::int32_t>(c);
                }
            mode[r][t] = best;
        }
    }
    return mode;
}

std::vector<ClusterStats> cluster_stats(const FieldDataset& ds, const LabelField& labels,
                                        const PartitionGrid& grid,
                                        const std::string& variable, std::size_t k) {
    const Variable& var = ds.variable(variable);
    // streaming mean/M2 (Welford) per cluster
    std::vector<double> mean(k, 0.0), m2(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t t = 0; t < ds.nt(); ++t) {
        for (std::size_t part = 0; part < grid.count(); ++part) {
            std::int32_t l = labels[t * grid.count() + part];
            if (l < 0) continue;
            std::size_t c = static_cast<std::size_t>(l);
            std::size_t r = grid.row_of(part), cc = grid.col_of(part);
            for (std::size_t i = r * grid.p; i < (r + 1) * grid.p; ++i)
                for (std::size_t j = cc * grid.p; j < (cc + 1) * grid.p; ++j) {
                    std::size_t idx = ds.at(t, i, j);
                    if (var.missing[idx]) continue;
                    count[c]++;
                    double delta = var.values[idx] - mean[c];
                    mean[c] += delta / static_cast<double>(count[c]);
                    m2[c] += delta * (var.values[idx] - mean[c]);
                }
        }
    }
    std::vector<ClusterStats> out(k);
    for (std::size_t c = 0; c < k; ++c) {
        out[c].count = count[c];
        if (count[c] == 0) continue;
        out[c].defined = true;
        out[c].mean = mean[c];
        out[c].stddev = count[c] > 1 ? std::sqrt(m2[c] / static_cast<double>(count[c] - 1))
                                     : 0.0;
    }
    return out;
}

}  // namespace pathway
