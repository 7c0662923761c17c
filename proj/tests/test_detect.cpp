#include <doctest.h>

#include <cmath>
#include <random>

#include "pathway/detect.hpp"
#include "pathway/errors.hpp"

using namespace pathway;

namespace {

// Two-sided tail of the Student-t distribution via Simpson integration of the
// density over [-|t|, |t|]; independent of the incomplete-beta route.
double t_two_sided_oracle(double t, double dof) {
    double at = std::abs(t);
    double lognorm = std::lgamma((dof + 1.0) / 2.0) - std::lgamma(dof / 2.0) -
                     0.5 * std::log(dof * std::acos(-1.0));
    auto pdf = [&](double x) {
        return std::exp(lognorm - (dof + 1.0) / 2.0 * std::log1p(x * x / dof));
    };
    const int n = 20000;  // even
    double h = 2.0 * at / n, sum = pdf(-at) + pdf(at);
    for (int i = 1; i < n; ++i) sum += pdf(-at + i * h) * (i % 2 ? 4.0 : 2.0);
    double central = sum * h / 3.0;
    return 1.0 - central;
}

}  // namespace

TEST_CASE("incomplete_beta: closed-form checks") {
    CHECK(incomplete_beta(1.0, 1.0, 0.3) == doctest::Approx(0.3).epsilon(1e-12));
    CHECK(incomplete_beta(2.0, 2.0, 0.5) == doctest::Approx(0.5).epsilon(1e-12));
    // I_x(1, b) = 1 - (1-x)^b
    CHECK(incomplete_beta(1.0, 3.0, 0.2) ==
          doctest::Approx(1.0 - std::pow(0.8, 3.0)).epsilon(1e-12));
    // symmetry: I_x(a,b) = 1 - I_{1-x}(b,a)
    CHECK(incomplete_beta(2.5, 4.0, 0.3) ==
          doctest::Approx(1.0 - incomplete_beta(4.0, 2.5, 0.7)).epsilon(1e-10));
    CHECK(incomplete_beta(2.0, 3.0, 0.0) == 0.0);
    CHECK(incomplete_beta(2.0, 3.0, 1.0) == 1.0);
}

TEST_CASE("student_t_two_sided: closed forms for dof 1 and 2") {
    const double pi = std::acos(-1.0);
    for (double t : {0.0, 0.5, 1.0, 2.5, 7.0}) {
        // dof=1 (Cauchy): p = 1 - 2*atan(t)/pi
        CHECK(student_t_two_sided(t, 1.0) ==
              doctest::Approx(1.0 - 2.0 * std::atan(t) / pi).epsilon(1e-10));
        // dof=2: p = 1 - t/sqrt(2 + t^2)
        CHECK(student_t_two_sided(t, 2.0) ==
              doctest::Approx(1.0 - t / std::sqrt(2.0 + t * t)).epsilon(1e-10));
    }
    // symmetric in t
    CHECK(student_t_two_sided(-1.7, 5.0) ==
          doctest::Approx(student_t_two_sided(1.7, 5.0)));
}

TEST_CASE("student_t_two_sided matches a numeric integration oracle") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> td(-6.0, 6.0), dd(1.0, 40.0);
    for (int trial = 0; trial < 40; ++trial) {
        double t = td(rng), dof = dd(rng);
        CHECK(student_t_two_sided(t, dof) ==
              doctest::Approx(t_two_sided_oracle(t, dof)).epsilon(1e-7));
    }
}

TEST_CASE("welch_t: hand-worked example") {
    std::vector<double> a{1, 2, 3, 4, 5}, b{2, 4, 6, 8, 10};
    WelchResult w = welch_t(a, b);
    // means 3 and 6, variances 2.5 and 10, se^2 = 2.5
    CHECK(w.t_stat == doctest::Approx(-3.0 / std::sqrt(2.5)).epsilon(1e-12));
    CHECK(w.dof == doctest::Approx(6.25 / 1.0625).epsilon(1e-12));
    CHECK(w.p_value == doctest::Approx(t_two_sided_oracle(w.t_stat, w.dof)).epsilon(1e-7));
    CHECK_FALSE(w.degenerate);

    WelchResult r = welch_t(b, a);
    CHECK(r.t_stat == doctest::Approx(-w.t_stat));
    CHECK(r.p_value == doctest::Approx(w.p_value));
}

TEST_CASE("welch_t: degenerate and error cases") {
    WelchResult same = welch_t({3, 3, 3}, {3, 3});
    CHECK(same.t_stat == 0.0);
    CHECK(same.p_value == 1.0);
    CHECK_FALSE(same.degenerate);

    WelchResult diff = welch_t({4, 4}, {3, 3, 3});
    CHECK(diff.degenerate);
    CHECK(diff.p_value == 0.0);
    CHECK(diff.t_stat > 0);

    CHECK_THROWS_AS(welch_t({1.0}, {2.0, 3.0}), ConfigError);
    CHECK_THROWS_AS(welch_t({1.0, std::nan("")}, {2.0, 3.0}), DataError);
}

TEST_CASE("welch_t properties on random samples") {
    std::mt19937 rng(31);
    std::normal_distribution<double> na(0, 1), nb(0.4, 2.0);
    for (int trial = 0; trial < 100; ++trial) {
        std::size_t sa = 2 + rng() % 10, sb = 2 + rng() % 10;
        std::vector<double> a(sa), b(sb);
        for (auto& v : a) v = na(rng);
        for (auto& v : b) v = nb(rng);
        WelchResult w = welch_t(a, b);
        CHECK(w.p_value >= 0.0);
        CHECK(w.p_value <= 1.0);
        CHECK(w.dof >= std::min(sa, sb) - 1.0 - 1e-9);
        CHECK(w.dof <= sa + sb - 2.0 + 1e-9);
        WelchResult r = welch_t(b, a);
        CHECK(r.t_stat == doctest::Approx(-w.t_stat).epsilon(1e-12));
        CHECK(r.p_value == doctest::Approx(w.p_value).epsilon(1e-12));
        // shift invariance of the p-value
        std::vector<double> a2 = a, b2 = b;
        for (auto& v : a2) v += 10.0;
        for (auto& v : b2) v += 10.0;
        WelchResult s = welch_t(a2, b2);
        CHECK(s.t_stat == doctest::Approx(w.t_stat).epsilon(1e-9));
    }
}

TEST_CASE("membership_counts") {
    // nt=2, npart=3, k=2; labels row-major [t][part]
    LabelField labels{0, 1, 0, /*t=1*/ 1, -1, 1};
    MembershipSeries ms = membership_counts(labels, 2, 3, 2);
    CHECK(ms.counts[0][0] == 2);
    CHECK(ms.counts[1][0] == 1);
    CHECK(ms.valid_total[0] == 3);
    CHECK(ms.fraction[0][0] == doctest::Approx(2.0 / 3.0));
    CHECK(ms.counts[0][1] == 0);
    CHECK(ms.counts[1][1] == 2);
    CHECK(ms.valid_total[1] == 2);
    CHECK(ms.fraction[1][1] == doctest::Approx(1.0));
    // fractions sum to 1 where anything is valid
    for (std::size_t t = 0; t < 2; ++t) {
        double s = ms.fraction[0][t] + ms.fraction[1][t];
        CHECK(s == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(membership_counts(labels, 2, 4, 2), InternalError);
}

TEST_CASE("detect_significance flags follow p-value and sign") {
    std::size_t nt = 3, npart = 4, k = 2;
    auto make = [&](double frac0) {
        MembershipSeries ms;
        ms.k = k;
        ms.nt = nt;
        ms.counts.assign(k, std::vector<std::size_t>(nt, 0));
        ms.fraction.assign(k, std::vector<double>(nt, 0.0));
        ms.valid_total.assign(nt, npart);
        for (std::size_t t = 0; t < nt; ++t) {
            ms.fraction[0][t] = frac0;
            ms.fraction[1][t] = 1.0 - frac0;
        }
        return ms;
    };
    std::vector<MembershipSeries> forced{make(0.90), make(0.92), make(0.88)};
    std::vector<MembershipSeries> baseline{make(0.10), make(0.12), make(0.08)};
    SignificanceSeries sig = detect_significance(forced, baseline, 0, 0.05);
    for (std::size_t t = 0; t < nt; ++t) {
        CHECK(sig.p_value[t] < 0.05);
        CHECK(sig.flag[t] == SigFlag::increase);
    }
    SignificanceSeries inv = detect_significance(forced, baseline, 1, 0.05);
    for (std::size_t t = 0; t < nt; ++t) CHECK(inv.flag[t] == SigFlag::decrease);

    SignificanceSeries null = detect_significance(forced, forced, 0, 0.05);
    for (std::size_t t = 0; t < nt; ++t) CHECK(null.flag[t] == SigFlag::none);

    CHECK_THROWS_AS(detect_significance({forced[0]}, {baseline[0]}, 0, 0.05),
                    ConfigError);
}

TEST_CASE("latitude_mode: majority with ties to the lower cluster ID") {
    PartitionGrid grid;
    grid.p = 1;
    grid.nrow = 2;
    grid.ncol = 4;
    // t=0: row0 = {2,2,1,1} (tie -> 1), row1 = {0,0,0,3}
    // t=1: row0 all invalid, row1 = {1,-1,1,2}
    LabelField labels{2, 2, 1, 1, 0, 0, 0, 3,
                      -1, -1, -1, -1, 1, -1, 1, 2};
    auto mode = latitude_mode(labels, 2, grid);
    CHECK(mode[0][0] == 1);
    CHECK(mode[1][0] == 0);
    CHECK(mode[0][1] == -1);
    CHECK(mode[1][1] == 1);
}

TEST_CASE("cluster_stats matches a brute-force oracle") {
    FieldDataset ds;
    std::size_t nt = 2, nlat = 4, nlon = 4;
    for (std::size_t t = 0; t < nt; ++t) ds.times.push_back(std::to_string(t));
    for (std::size_t i = 0; i < nlat; ++i) ds.lats.push_back(static_cast<double>(i));
    for (std::size_t j = 0; j < nlon; ++j) ds.lons.push_back(static_cast<double>(j));
    Variable v;
    v.name = "X";
    v.values.resize(nt * nlat * nlon);
    std::mt19937 rng(12);
    std::uniform_real_distribution<double> dist(-1, 1);
    for (auto& x : v.values) x = dist(rng);
    v.missing.assign(v.values.size(), 0);
    v.missing[5] = 1;
    ds.variables.push_back(std::move(v));

    PartitionGrid grid;
    grid.p = 2;
    grid.nrow = 2;
    grid.ncol = 2;

    std::size_t k = 3;
    LabelField labels{0, 1, 2, 0, /*t=1*/ 1, -1, 0, 2};
    auto stats = cluster_stats(ds, labels, grid, "X", k);

    // oracle: pool raw values per cluster, two-pass mean/stddev
    std::vector<std::vector<double>> pools(k);
    for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t part = 0; part < 4; ++part) {
            std::int32_t l = labels[t * 4 + part];
            if (l < 0) continue;
            std::size_t r = grid.row_of(part), c = grid.col_of(part);
            for (std::size_t i = r * 2; i < r * 2 + 2; ++i)
                for (std::size_t j = c * 2; j < c * 2 + 2; ++j) {
                    std::size_t idx = ds.at(t, i, j);
                    if (ds.variables[0].missing[idx]) continue;
                    pools[static_cast<std::size_t>(l)].push_back(
                        ds.variables[0].values[idx]);
                }
        }
    for (std::size_t c = 0; c < k; ++c) {
        CHECK(stats[c].count == pools[c].size());
        if (pools[c].empty()) {
            CHECK_FALSE(stats[c].defined);
            continue;
        }
        double m = 0;
        for (double x : pools[c]) m += x;
        m /= static_cast<double>(pools[c].size());
        double s2 = 0;
        for (double x : pools[c]) s2 += (x - m) * (x - m);
        double sd = pools[c].size() > 1
                        ? std::sqrt(s2 / static_cast<double>(pools[c].size() - 1))
                        : 0.0;
        CHECK(stats[c].mean == doctest::Approx(m).epsilon(1e-10));
        CHECK(stats[c].stddev == doctest::Approx(sd).epsilon(1e-10));
    }
}
