#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "fedsim/errors.hpp"
#include "fedsim/metrics.hpp"
#include "fedsim/rng.hpp"

using namespace fedsim;

namespace {

EvalSeries make_series(std::vector<double> v,
                       Orientation o = Orientation::lower_is_better) {
    return EvalSeries{std::move(v), o, "loss"};
}

// Ten-line restatement of the forgetting math used as the equality oracle.
std::vector<double> naive_psis(const std::vector<double>& raw, Orientation o, bool inclusive) {
    std::vector<double> v = raw;
    if (o == Orientation::higher_is_better) {
        for (auto& x : v) x = -x;
    }
    std::vector<double> out(v.size(), 0.0);
    for (std::size_t r = 1; r < v.size(); ++r) {
        double best = v[0];
        for (std::size_t i = 1; i < r; ++i) best = std::min(best, v[i]);
        if (inclusive) best = std::min(best, v[r]);
        out[r] = v[r] - best;
    }
    return out;
}

std::vector<double> random_series(Rng& rng, std::size_t len) {
    std::vector<double> v(len);
    double level = rng.uniform(0.5, 2.0);
    for (auto& x : v) {
        level += 0.3 * rng.normal() - 0.02;
        x = level;
    }
    return v;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("forgetting gap against the prior best") {
    const auto s = make_series({0.9, 0.7, 0.8});
    CHECK(forgetting_psi(s, 3) == doctest::Approx(0.1).epsilon(1e-15));
    CHECK(forgetting_psi(s, 1) == 0.0);
    CHECK(forgetting_psi(s, 2) == doctest::Approx(-0.2).epsilon(1e-15));

    const auto improving = make_series({1.0, 0.8, 0.6, 0.5});
    for (int r = 1; r <= 4; ++r) CHECK(forgetting_psi(improving, r) <= 0.0);

    for (int r = 1; r <= 3; ++r) {
        CHECK(forgetting_psi(s, r, PsiVariant::inclusive_min) >= 0.0);
    }
    CHECK_THROWS_AS((void)forgetting_psi(s, 4), UsageError);
    CHECK_THROWS_AS((void)forgetting_psi(s, 0), UsageError);
}

TEST_CASE("split_psi branches") {
    CHECK(split_psi(0.1) == std::pair<double, double>{0.1, 0.0});
    CHECK(split_psi(-0.2) == std::pair<double, double>{0.0, 0.2});
    CHECK(split_psi(0.0) == std::pair<double, double>{0.0, 0.0});
}

TEST_CASE("zeta sums both readings") {
    const std::vector<double> psis = {-0.2, 0.1, -0.05};
    const ZetaPair z = zeta(psis);
    CHECK(z.abs_sum == doctest::Approx(0.35).epsilon(1e-15));
    CHECK(z.signed_sum == doctest::Approx(-0.15).epsilon(1e-15));

    const std::vector<double> zeros(4, 0.0);
    const ZetaPair zz = zeta(zeros);
    CHECK(zz.abs_sum == 0.0);
    CHECK(zz.signed_sum == 0.0);
}

TEST_CASE("signed zeta goes more negative for smoother improvement") {
    // A noisy improving series accumulates positive regressions that a
    // smoothed copy avoids; reference tables report the smoother method as
    // more negative under the signed reading.
    Rng rng(50);
    std::vector<double> noisy(60);
    for (std::size_t i = 0; i < noisy.size(); ++i) {
        noisy[i] = 2.0 - 0.03 * static_cast<double>(i) + 0.05 * rng.normal();
    }
    std::vector<double> smooth = noisy;
    for (std::size_t i = 1; i < smooth.size(); ++i) {
        smooth[i] = 0.5 * smooth[i - 1] + 0.5 * noisy[i];
    }
    const auto zn = zeta(forgetting_psi_series(make_series(noisy)));
    const auto zs = zeta(forgetting_psi_series(make_series(smooth)));
    CHECK(zs.signed_sum <= zn.signed_sum);
    CHECK(zn.signed_sum < 0.0);
}

TEST_CASE("abs zeta dominates the signed magnitude") {
    Rng rng(60);
    for (int trial = 0; trial < 50; ++trial) {
        const auto psis = random_series(rng, 2 + rng.below(30));
        const ZetaPair z = zeta(psis);
        CHECK(z.abs_sum >= std::fabs(z.signed_sum) - 1e-12);
        bool one_sign = true;
        for (double p : psis) {
            if ((p > 0) != (psis[0] > 0) && p != 0.0) one_sign = false;
        }
        if (one_sign) CHECK(z.abs_sum == doctest::Approx(std::fabs(z.signed_sum)).epsilon(1e-12));
    }
}

TEST_CASE("drift magnitude") {
    CHECK(drift_magnitude(ParameterVector({1, 2}), ParameterVector({1, 2})) == 0.0);
    CHECK(drift_magnitude(ParameterVector({3, 4}), ParameterVector::zeros(2)) == 5.0);

    Rng rng(70);
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t dim = 1 + rng.below(10);
        std::vector<double> a(dim), b(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            a[i] = rng.normal();
            b[i] = rng.normal();
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < dim; ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
        CHECK(drift_magnitude(ParameterVector(a), ParameterVector(b)) ==
              doctest::Approx(std::sqrt(acc)).epsilon(1e-12));
    }
}

TEST_CASE("empirical_udp examples") {
    const std::vector<double> drifts = {1, 2, 3, 10};
    const TailEstimate a = empirical_udp(drifts, 5.0);
    CHECK(a.probability == 0.25);
    REQUIRE(a.log_probability.has_value());
    CHECK(*a.log_probability == doctest::Approx(std::log(0.25)).epsilon(1e-12));

    const TailEstimate never = empirical_udp(drifts, 100.0);
    CHECK(never.probability == 0.0);
    CHECK_FALSE(never.log_probability.has_value());

    const TailEstimate all = empirical_udp(drifts, 1e-12);
    CHECK(all.probability == 1.0);
    CHECK(*all.log_probability == 0.0);
}

TEST_CASE("empirical_udp is monotone non-increasing in delta") {
    Rng rng(80);
    std::vector<double> drifts(50);
    for (auto& d : drifts) d = std::fabs(rng.normal()) * 3.0;
    double prev = 2.0;
    for (double delta = 0.1; delta < 10.0; delta += 0.37) {
        const double p = empirical_udp(drifts, delta).probability;
        CHECK(p <= prev);
        prev = p;
    }
}

TEST_CASE("rounds_to_target") {
    const auto s = make_series({0.9, 0.6, 0.4});
    CHECK(rounds_to_target(s, 0.5) == 3);
    CHECK(rounds_to_target(s, 1.0) == 1);
    CHECK_FALSE(rounds_to_target(s, 0.1).has_value());

    const auto acc = make_series({0.2, 0.5, 0.8}, Orientation::higher_is_better);
    CHECK(rounds_to_target(acc, 0.75) == 3);
}

TEST_CASE("orientation flip leaves psi and zeta unchanged") {
    Rng rng(90);
    for (int trial = 0; trial < 20; ++trial) {
        const auto values = random_series(rng, 2 + rng.below(20));
        auto lower = make_series(values);
        std::vector<double> negated = values;
        for (auto& v : negated) v = -v;
        const EvalSeries higher{negated, Orientation::higher_is_better, "flipped"};

        const auto pl = forgetting_psi_series(lower);
        const auto ph = forgetting_psi_series(higher);
        REQUIRE(pl.size() == ph.size());
        for (std::size_t i = 0; i < pl.size(); ++i) CHECK(pl[i] == ph[i]);
        const auto zl = zeta(pl);
        const auto zh = zeta(ph);
        CHECK(zl.abs_sum == zh.abs_sum);
        CHECK(zl.signed_sum == zh.signed_sum);
    }
}

TEST_CASE("psi, split and zeta agree exactly with the naive restatement") {
    Rng rng(100);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t len = 1 + rng.below(40);
        const auto values = random_series(rng, len);
        const Orientation o = trial % 2 == 0 ? Orientation::lower_is_better
                                             : Orientation::higher_is_better;
        const EvalSeries series{values, o, "metric"};

        for (bool inclusive : {false, true}) {
            const auto variant =
                inclusive ? PsiVariant::inclusive_min : PsiVariant::exclusive_prior_min;
            const auto expect = naive_psis(values, o, inclusive);
            const auto got = forgetting_psi_series(series, variant);
            REQUIRE(got.size() == expect.size());
            for (std::size_t r = 0; r < len; ++r) {
                CHECK(got[r] == expect[r]); // exact double equality
                CHECK(forgetting_psi(series, static_cast<int>(r) + 1, variant) == expect[r]);
            }
            double abs_sum = 0.0, signed_sum = 0.0;
            for (double p : expect) {
                const auto [pos, neg] = split_psi(p);
                CHECK(pos == std::max(p, 0.0));
                CHECK(neg == std::max(-p, 0.0));
                abs_sum += pos + neg;
                signed_sum += p;
            }
            const ZetaPair z = zeta(got);
            CHECK(z.abs_sum == abs_sum);
            CHECK(z.signed_sum == signed_sum);
        }
    }
}

} // TEST_SUITE
