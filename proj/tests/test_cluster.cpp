#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "pathway/cluster.hpp"
#include "pathway/errors.hpp"

using namespace pathway;

namespace {

// Pair-counting ARI, independent of the contingency-table implementation.
double ari_pair_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    double n11 = 0, n00 = 0, n10 = 0, n01 = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            bool sa = a[i] == a[j], sb = b[i] == b[j];
            if (sa && sb) n11++;
            else if (!sa && !sb) n00++;
            else if (sa) n10++;
            else n01++;
        }
    double denom = (n11 + n10) * (n10 + n00) + (n11 + n01) * (n01 + n00);
    if (denom == 0) return 1.0;
    return 2.0 * (n11 * n00 - n10 * n01) / denom;
}

double ri_pair_oracle(const std::vector<int>& a, const std::vector<int>& b) {
    double agree = 0, total = 0;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = i + 1; j < a.size(); ++j) {
            bool sa = a[i] == a[j], sb = b[i] == b[j];
            if (sa == sb) agree++;
            total++;
        }
    return agree / total;
}

}  // namespace

TEST_CASE("kmeans: two separated pairs in 1-D") {
    std::vector<double> pts{0.0, 0.1, 10.0, 10.1};
    Clustering c = kmeans(pts, 4, 1, 2, KmeansInit::plusplus, 3);
    CHECK(c.labels[0] == c.labels[1]);
    CHECK(c.labels[2] == c.labels[3]);
    CHECK(c.labels[0] != c.labels[2]);
    std::vector<double> ctr = c.centroids;
    std::sort(ctr.begin(), ctr.end());
    CHECK(ctr[0] == doctest::Approx(0.05));
    CHECK(ctr[1] == doctest::Approx(10.05));
    // exhaustive check: no other 2-partition has lower inertia
    double best = 1e18;
    for (int mask = 1; mask < 15; ++mask) {
        double m0 = 0, m1 = 0;
        int c0 = 0, c1 = 0;
        for (int i = 0; i < 4; ++i)
            (mask >> i & 1) ? (m1 += pts[i], c1++) : (m0 += pts[i], c0++);
        if (!c0 || !c1) continue;
        m0 /= c0;
        m1 /= c1;
        double inertia = 0;
        for (int i = 0; i < 4; ++i) {
            double d = pts[i] - ((mask >> i & 1) ? m1 : m0);
            inertia += d * d;
        }
        best = std::min(best, inertia);
    }
    CHECK(c.inertia == doctest::Approx(best));
}

TEST_CASE("kmeans: k=1 and k=n degenerate cases") {
    std::vector<double> pts{1, 2, 3, 4, 5};
    Clustering one = kmeans(pts, 5, 1, 1, KmeansInit::plusplus, 1);
    CHECK(one.centroids[0] == doctest::Approx(3.0));
    double var = 0;
    for (double p : pts) var += (p - 3.0) * (p - 3.0);
    CHECK(one.inertia == doctest::Approx(var));

    Clustering full = kmeans(pts, 5, 1, 5, KmeansInit::plusplus, 1);
    CHECK(full.inertia == doctest::Approx(0.0));
    std::vector<int> seen = full.labels;
    std::sort(seen.begin(), seen.end());
    CHECK(seen == std::vector<int>{0, 1, 2, 3, 4});
}

TEST_CASE("kmeans: errors") {
    std::vector<double> pts{1, 2};
    CHECK_THROWS_AS(kmeans(pts, 2, 1, 3, KmeansInit::plusplus, 1), ConfigError);
    std::vector<double> bad{1.0, std::nan("")};
    CHECK_THROWS_AS(kmeans(bad, 2, 1, 1, KmeansInit::plusplus, 1), DataError);
}

TEST_CASE("kmeans: Lloyd inertia is non-increasing; determinism") {
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> dist(-5, 5);
    for (int trial = 0; trial < 50; ++trial) {
        std::size_t n = 10 + rng() % 60, d = 1 + rng() % 3, k = 1 + rng() % 5;
        if (n < k) continue;
        std::vector<double> pts(n * d);
        for (auto& v : pts) v = dist(rng);
        Clustering c = kmeans(pts, n, d, k, KmeansInit::plusplus, trial);
        for (std::size_t i = 1; i < c.inertia_history.size(); ++i)
            CHECK(c.inertia_history[i] <= c.inertia_history[i - 1] + 1e-9);
        Clustering c2 = kmeans(pts, n, d, k, KmeansInit::plusplus, trial);
        CHECK(c.labels == c2.labels);
        CHECK(c.centroids == c2.centroids);
        // argmin + inertia invariants
        double recomputed = 0;
        for (std::size_t i = 0; i < n; ++i) {
            double bd = 1e300;
            int bc = -1;
            for (std::size_t cc = 0; cc < k; ++cc) {
                double s = 0;
                for (std::size_t x = 0; x < d; ++x) {
                    double diff = pts[i * d + x] - c.centroids[cc * d + x];
                    s += diff * diff;
                }
                if (s < bd) {
                    bd = s;
                    bc = static_cast<int>(cc);
                }
            }
            CHECK(c.labels[i] == bc);
            recomputed += bd;
        }
        CHECK(recomputed == doctest::Approx(c.inertia).epsilon(1e-9));
    }
}

TEST_CASE("kmeanspp_init") {
    // k=1: a single point
    std::vector<double> pts{1, 2, 3};
    auto c1 = kmeanspp_init(pts, 3, 1, 1, 5);
    CHECK(std::find(pts.begin(), pts.end(), c1[0]) != pts.end());

    // duplicate-free points, k=n: every point chosen
    std::vector<double> uniq{0, 3, 7, 11};
    auto cn = kmeanspp_init(uniq, 4, 1, 4, 17);
    std::sort(cn.begin(), cn.end());
    CHECK(cn == uniq);

    // D^2 weights {0,0,0,81}: whenever the first pick is 0, the second is 9
    std::vector<double> spread{0, 0, 0, 9};
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
        auto cc = kmeanspp_init(spread, 4, 1, 2, seed);
        if (cc[0] == 0.0) CHECK(cc[1] == 9.0);
    }
}

TEST_CASE("relabel_by_centroid") {
    Clustering c;
    c.k = 2;
    c.dim = 1;
    c.centroids = {5.0, 2.0};
    c.labels = {0, 1, 0};
    std::vector<int> before = c.labels;
    auto perm = relabel_by_centroid(c);
    CHECK(perm == std::vector<int>{1, 0});
    CHECK(c.centroids == std::vector<double>{2.0, 5.0});
    CHECK(c.labels == std::vector<int>{1, 0, 1});
    CHECK(adjusted_rand_index(before, c.labels) == doctest::Approx(1.0));

    Clustering sorted;
    sorted.k = 3;
    sorted.dim = 1;
    sorted.centroids = {1, 2, 3};
    sorted.labels = {0, 1, 2};
    CHECK(relabel_by_centroid(sorted) == std::vector<int>{0, 1, 2});
}

TEST_CASE("rand index and ARI: spec examples") {
    std::vector<int> a{0, 0, 1, 1}, b{0, 1, 0, 1};
    CHECK(rand_index(a, b) == doctest::Approx(ri_pair_oracle(a, b)));
    CHECK(adjusted_rand_index(a, b) == doctest::Approx(ari_pair_oracle(a, b)));
    CHECK(adjusted_rand_index(a, a) == doctest::Approx(1.0));
    std::vector<int> perm{1, 1, 0, 0};  // relabeled copy of a
    CHECK(adjusted_rand_index(a, perm) == doctest::Approx(1.0));
    CHECK_THROWS_AS(adjusted_rand_index(a, std::vector<int>{0, 1}), ConfigError);
    CHECK_THROWS_AS(adjusted_rand_index(std::vector<int>{0}, std::vector<int>{0}),
                    ConfigError);
}

TEST_CASE("ARI properties on random labelings") {
    std::mt19937 rng(1234);
    for (int trial = 0; trial < 300; ++trial) {
        std::size_t n = 2 + rng() % 30;
        int ka = 1 + static_cast<int>(rng() % 5), kb = 1 + static_cast<int>(rng() % 5);
        std::vector<int> a(n), b(n);
        for (auto& v : a) v = static_cast<int>(rng() % static_cast<unsigned>(ka));
        for (auto& v : b) v = static_cast<int>(rng() % static_cast<unsigned>(kb));
        double ari = adjusted_rand_index(a, b);
        CHECK(ari == doctest::Approx(ari_pair_oracle(a, b)).epsilon(1e-12));
        CHECK(ari >= -0.5 - 1e-12);
        CHECK(ari <= 1.0 + 1e-12);
        CHECK(ari == doctest::Approx(adjusted_rand_index(b, a)).epsilon(1e-12));
        // permutation invariance
        std::vector<int> sigma(static_cast<std::size_t>(ka));
        for (int i = 0; i < ka; ++i) sigma[static_cast<std::size_t>(i)] = i;
        std::shuffle(sigma.begin(), sigma.end(), rng);
        std::vector<int> ap(n);
        for (std::size_t i = 0; i < n; ++i)
            ap[i] = sigma[static_cast<std::size_t>(a[i])];
        CHECK(adjusted_rand_index(ap, b) == doctest::Approx(ari).epsilon(1e-12));
        CHECK(adjusted_rand_index(a, a) == doctest::Approx(1.0));
    }
}

TEST_CASE("stability_estimate: separated blobs are fully stable") {
    std::mt19937 rng(5);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::vector<double> pts;
    for (int blob = 0; blob < 2; ++blob)
        for (int i = 0; i < 40; ++i) pts.push_back(blob * 50.0 + noise(rng));
    StabilityEstimate est = stability_estimate(pts, pts.size(), 1, 2, 100);
    CHECK(est.comparison_aris.size() == 6);
    CHECK(est.averaged_ari == doctest::Approx(1.0));

    // k=1 degenerate: single-cluster labelings are identical by definition
    StabilityEstimate one = stability_estimate(pts, pts.size(), 1, 1, 100);
    CHECK(one.averaged_ari == doctest::Approx(1.0));
}

TEST_CASE("stability_estimate: unstructured data is unstable for large k") {
    std::mt19937 rng(6);
    std::uniform_real_distribution<double> dist(0, 1);
    std::vector<double> pts(300);
    for (auto& v : pts) v = dist(rng);
    StabilityEstimate est = stability_estimate(pts, 300, 1, 9, 42);
    CHECK(est.averaged_ari < 0.9);
}

TEST_CASE("stability_sweep_k: four separated blobs recommend k=4") {
    std::mt19937 rng(8);
    std::normal_distribution<double> noise(0.0, 0.25);
    std::vector<double> pts;
    for (int blob = 0; blob < 4; ++blob)
        for (int i = 0; i < 30; ++i) pts.push_back(blob * 20.0 + noise(rng));
    std::vector<std::size_t> ks{1, 2, 3, 4, 5, 6, 7, 8};
    SweepResult res = stability_sweep_k(pts, pts.size(), 1, ks, 21, 4);
    CHECK(res.recommended_k == 4);
    // the winning k must carry a higher score than both sweep neighbours
    CHECK(res.rows[3].averaged_ari > res.rows[2].averaged_ari);
    CHECK(res.rows[3].averaged_ari > res.rows[4].averaged_ari);

    CHECK_THROWS_AS(stability_sweep_k(pts, pts.size(), 1, {}, 21), ConfigError);
}

TEST_CASE("assign_labels ties break to the lowest cluster ID") {
    SignatureTensor sig;
    sig.nt = 1;
    sig.npart = 1;
    sig.dim = 1;
    sig.values = {5.0};
    sig.valid = {1};
    std::vector<double> centroids{4.0, 6.0};  // equidistant
    LabelField lf = assign_labels(sig, centroids, 2, 1);
    CHECK(lf[0] == 0);

    sig.valid = {0};
    CHECK(assign_labels(sig, centroids, 2, 1)[0] == -1);
}
