#include "pathway/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "pathway/errors.hpp"
#include "pathway/util.hpp"

namespace pathway {

namespace {

double dist2(const double* a, const double* b, std::size_t d) {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

int nearest(const double* pt, const std::vector<double>& centroids, std::size_t k,
            std::size_t d, double* out_d2 = nullptr) {
    int best = 0;
    double bd = dist2(pt, centroids.data(), d);
    for (std::size_t c = 1; c < k; ++c) {
        double dd = dist2(pt, centroids.data() + c * d, d);
        if (dd < bd) {
            bd = dd;
            best = static_cast<int>(c);
        }
    }
    if (out_d2) *out_d2 = bd;
    return best;
}

std::vector<double> random_init(const std::vector<double>& points, std::size_t n,
                                std::size_t d, std::size_t k, NormalRng& rng) {
    // k distinct points uniformly without replacement (partial Fisher-Yates)
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::vector<double> centroids(k * d);
    for (std::size_t c = 0; c < k; ++c) {
        std::size_t pick = c + rng.below(n - c);
        std::swap(idx[c], idx[pick]);
        std::copy(points.begin() + static_cast<std::ptrdiff_t>(idx[c] * d),
                  points.begin() + static_cast<std::ptrdiff_t>((idx[c] + 1) * d),
                  centroids.begin() + static_cast<std::ptrdiff_t>(c * d));
    }
    return centroids;
}

}  // namespace

std::vector<double> kmeanspp_init(const std::vector<double>& points, std::size_t n,
                                  std::size_t d, std::size_t k, std::uint64_t seed) {
    if (n < k) throw ConfigError("kmeans++: need n >= k");
    NormalRng rng(seed);
    std::vector<double> centroids(k * d);
    std::size_t first = rng.below(n);
    std::copy(points.begin() + static_cast<std::ptrdiff_t>(first * d),
              points.begin() + static_cast<std::ptrdiff_t>((first + 1) * d),
              centroids.begin());

    std::vector<double> mind2(n);
    for (std::size_t i = 0; i < n; ++i)
        mind2[i] = dist2(points.data() + i * d, centroids.data(), d);

    for (std::size_t c = 1; c < k; ++c) {
        double total = std::accumulate(mind2.begin(), mind2.end(), 0.0);
        std::size_t pick;
        if (total <= 0.0) {
            pick = rng.below(n);  // all remaining points coincide with a centroid
        } else {
            double r = rng.uniform() * total;
            double acc = 0.0;
            pick = n - 1;
            for (std::size_t i = 0; i < n; ++i) {
                acc += mind2[i];
                if (r < acc) {
                    pick = i;
                    break;
                }
            }
        }
        std::copy(points.begin() + static_cast<std::ptrdiff_t>(pick * d),
                  points.begin() + static_cast<std::ptrdiff_t>((pick + 1) * d),
                  centroids.begin() + static_cast<std::ptrdiff_t>(c * d));
        for (std::size_t i = 0; i < n; ++i)
            mind2[i] = std::min(mind2[i], dist2(points.data() + i * d,
                                                centroids.data() + c * d, d));
    }
    return centroids;
}

Clustering kmeans(const std::vector<double>& points, std::size_t n, std::size_t d,
                  std::size_t k, KmeansInit init, std::uint64_t seed, int max_iter,
                  double tol) {
    if (k < 1) throw ConfigError("kmeans: k must be >= 1");
    if (n < k) throw ConfigError("kmeans: need n >= k, got n=" + std::to_string(n) +
                                 ", k=" + std::to_string(k));
    if (points.size() != n * d) throw InternalError("kmeans: points size mismatch");
    for (double v : points)
        if (!std::isfinite(v)) throw DataError("kmeans: non-finite input value");

    Clustering out;
    out.k = k;
    out.dim = d;
    out.seed = seed;
    if (init == KmeansInit::plusplus) {
        out.centroids = kmeanspp_init(points, n, d, k, seed);
    } else {
        NormalRng rng(seed);
        out.centroids = random_init(points, n, d, k, rng);
    }

    out.labels.assign(n, 0);
    std::vector<double> d2(n);
    std::vector<double> sums(k * d);
    std::vector<std::size_t> counts(k);

    for (int iter = 0; iter < max_iter; ++iter) {
        for (std::size_t i = 0; i < n; ++i)
            out.labels[i] = nearest(points.data() + i * d, out.centroids, k, d, &d2[i]);

        // repair empty clusters: reseed at the point farthest from its centroid
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) counts[static_cast<std::size_t>(out.labels[i])]++;
        for (std::size_t c = 0; c < k; ++c) {
            if (counts[c] > 0) continue;
            std::size_t far = 0;
            for (std::size_t i = 1; i < n; ++i)
                if (d2[i] > d2[far]) far = i;
            std::copy(points.begin() + static_cast<std::ptrdiff_t>(far * d),
                      points.begin() + static_cast<std::ptrdiff_t>((far + 1) * d),
                      out.centroids.begin() + static_cast<std::ptrdiff_t>(c * d));
            counts[static_cast<std::size_t>(out.labels[far])]--;
            out.labels[far] = static_cast<int>(c);
            counts[c] = 1;
            d2[far] = 0.0;
        }

        out.inertia_history.push_back(std::accumulate(d2.begin(), d2.end(), 0.0));

        std::fill(sums.begin(), sums.end(), 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            double* s = sums.data() + static_cast<std::size_t>(out.labels[i]) * d;
            const double* p = points.data() + i * d;
            for (std::size_t c = 0; c < d; ++c) s[c] += p[c];
        }
        double movement = 0.0;
        for (std::size_t c = 0; c < k; ++c) {
            double* ctr = out.centroids.data() + c * d;
            double move2 = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                double nv = sums[c * d + j] / static_cast<double>(counts[c]);
                double diff = nv - ctr[j];
                move2 += diff * diff;
                ctr[j] = nv;
            }
            movement = std::max(movement, std::sqrt(move2));
        }
        out.iterations = iter + 1;
        if (movement < tol) break;
    }

    // final assignment so the argmin invariant holds against the final centroids
    out.inertia = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dd;
        out.labels[i] = nearest(points.data() + i * d, out.centroids, k, d, &dd);
        out.inertia += dd;
    }
    return out;
}

std::vector<int> relabel_by_centroid(Clustering& c) {
    std::vector<double> means(c.k);
    for (std::size_t i = 0; i < c.k; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j < c.dim; ++j) s += c.centroids[i * c.dim + j];
        means[i] = s / static_cast<double>(c.dim);
    }
    std::vector<std::size_t> order(c.k);
    std::iota(order.begin(), order.end(), 0);
    // ties broken by original ID order
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return means[a] < means[b]; });

    std::vector<int> perm(c.k);  // old id -> new id
    for (std::size_t rank = 0; rank < c.k; ++rank)
        perm[order[rank]] = static_cast<int>(rank);

    std::vector<double> nc(c.centroids.size());
    for (std::size_t old = 0; old < c.k; ++old)
        std::copy(c.centroids.begin() + static_cast<std::ptrdiff_t>(old * c.dim),
                  c.centroids.begin() + static_cast<std::ptrdiff_t>((old + 1) * c.dim),
                  nc.begin() + static_cast<std::ptrdiff_t>(
                      static_cast<std::size_t>(perm[old]) * c.dim));
    c.centroids = std::move(nc);
    for (auto& l : c.labels) l = perm[static_cast<std::size_t>(l)];
    return perm;
}

namespace {

struct PairCounts {
    long double sum_cells = 0;  // sum_ij C(n_ij, 2)
    long double sum_rows = 0;   // sum_i C(a_i, 2)
    long double sum_cols = 0;   // sum_j C(b_j, 2)
    long double total_pairs = 0;
};

long double choose2(long double x) { return x * (x - 1) / 2; }

PairCounts contingency(const std::vector<int>& a, const std::vector<int>& b) {
    if (a.size() != b.size()) throw ConfigError("rand index: label length mismatch");
    if (a.size() < 2) throw ConfigError("rand index: need at least 2 items");
    int ka = *std::max_element(a.begin(), a.end()) + 1;
    int kb = *std::max_element(b.begin(), b.end()) + 1;
    std::vector<std::size_t> table(static_cast<std::size_t>(ka) * static_cast<std::size_t>(kb), 0);
    std::vector<std::size_t> rows(static_cast<std::size_t>(ka), 0),
        cols(static_cast<std::size_t>(kb), 0);
    for (std::size_t i = 0; i < a.size(); ++i) {
        table[static_cast<std::size_t>(a[i]) * static_cast<std::size_t>(kb) +
              static_cast<std::size_t>(b[i])]++;
        rows[static_cast<std::size_t>(a[i])]++;
        cols[static_cast<std::size_t>(b[i])]++;
    }
    PairCounts pc;
    for (auto v : table) pc.sum_cells += choose2(static_cast<long double>(v));
    for (auto v : rows) pc.sum_rows += choose2(static_cast<long double>(v));
    for (auto v : cols) pc.sum_cols += choose2(static_cast<long double>(v));
    pc.total_pairs = choose2(static_cast<long double>(a.size()));
    return pc;
}

}  // namespace

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    PairCounts pc = contingency(a, b);
    long double agree_same = pc.sum_cells;
    long double agree_diff = pc.total_pairs + pc.sum_cells - pc.sum_rows - pc.sum_cols;
    return static_cast<double>((agree_same + agree_diff) / pc.total_pairs);
}

double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    // Hubert-Arabie permutation-model form
    PairCounts pc = contingency(a, b);
    long double expected = pc.sum_rows * pc.sum_cols / pc.total_pairs;
    long double maxidx = (pc.sum_rows + pc.sum_cols) / 2;
    long double denom = maxidx - expected;
    if (denom == 0) return 1.0;  // both labelings structurally identical
    return static_cast<double>((pc.sum_cells - expected) / denom);
}

StabilityEstimate stability_estimate(const std::vector<double>& points, std::size_t n,
                                     std::size_t d, std::size_t k, std::uint64_t seed,
                                     int threads) {
    StabilityEstimate est;
    est.k = k;

    std::vector<Clustering> pp(10), rnd(6);
    parallel_for(16, threads, [&](std::size_t i) {
        if (i < 10)
            pp[i] = kmeans(points, n, d, k, KmeansInit::plusplus, seed + i);
        else
            rnd[i - 10] = kmeans(points, n, d, k, KmeansInit::random_points, seed + i);
    });

    std::size_t best = 0;
    for (std::size_t i = 1; i < pp.size(); ++i)
        if (pp[i].inertia < pp[best].inertia) best = i;
    est.near_optimal_inertia = pp[best].inertia;

    double sum = 0.0;
    for (const auto& r : rnd) {
        double ari = adjusted_rand_index(r.labels, pp[best].labels);
        est.comparison_aris.push_back(ari);
        sum += ari;
    }
    est.averaged_ari = sum / static_cast<double>(rnd.size());
    return est;
}

SweepResult stability_sweep_k(const std::vector<double>& points, std::size_t n,
                              std::size_t d, const std::vector<std::size_t>& ks,
                              std::uint64_t seed, int threads) {
    if (ks.empty()) throw ConfigError("stability sweep: empty k range");
    SweepResult res;
    res.rows.resize(ks.size());
    for (std::size_t i = 0; i < ks.size(); ++i)
        res.rows[i] = stability_estimate(points, n, d, ks[i], seed, threads);

    auto ari = [&](std::size_t i) { return res.rows[i].averaged_ari; };
    for (std::size_t i = 0; i < ks.size(); ++i) {
        if (ks[i] <= 3) continue;
        bool peak;
        if (i == 0)
            peak = ks.size() > 1 && ari(i) > ari(i + 1);
        else if (i + 1 == ks.size())
            peak = ari(i) > ari(i - 1);
        else
            peak = ari(i) >= ari(i - 1) && ari(i) >= ari(i + 1);
        if (peak) res.peaks.push_back(ks[i]);
    }
    if (!res.peaks.empty()) {
        res.recommended_k = res.peaks.front();
    } else {
        // flat or monotone curve: fall back to the smallest k > 3 in range
        res.tie_fallback = true;
        for (std::size_t kv : ks)
            if (kv > 3) {
                res.recommended_k = kv;
                break;
            }
        if (res.recommended_k == 0) res.recommended_k = ks.back();
    }
    return res;
}

LabelField assign_labels(const SignatureTensor& sig, const std::vector<double>& centroids,
                         std::size_t k, std::size_t d) {
    if (d != sig.dim) throw ConfigError("assign_labels: dimension mismatch");
    LabelField out(sig.nt * sig.npart, -1);
    for (std::size_t t = 0; t < sig.nt; ++t)
        for (std::size_t p = 0; p < sig.npart; ++p)
            if (sig.is_valid(t, p))
                out[t * sig.npart + p] = nearest(sig.row(t, p), centroids, k, d);
    return out;
}

}  // namespace pathway
