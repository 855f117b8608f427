#include "qgdetect/analyzer.hpp"
#include "qgdetect/rng.hpp"

#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

using namespace qgd;

namespace {

AnomalyCandidate make_candidate(std::size_t start, std::vector<double> amps) {
    AnomalyCandidate c;
    c.start = start;
    c.amplitudes = std::move(amps);
    return c;
}

// Flat amplitude vector with a given length, total and peak.
AnomalyCandidate shaped(std::size_t len, double cum, double mx) {
    std::vector<double> a(len, (cum - mx) / static_cast<double>(len - 1));
    a[0] = mx;
    return make_candidate(0, std::move(a));
}

bool filters_all(std::span<const AnomalyCandidate> cs, const RuleSet& r) {
    return apply_rules(cs, r).confirmed.empty();
}

} // namespace

TEST_CASE("matching sequences produce no candidates") {
    const QuantizationGrid g = build_static_grid(4);
    const std::vector<int> same{0, 1, 2, 3, 2, 1};
    CHECK(collect_candidates(same, same, g).empty());
}

TEST_CASE("a mismatch run becomes one candidate with grid-midpoint amplitudes") {
    const QuantizationGrid g = build_static_grid(4);
    std::vector<int> real(14, 0), pred(14, 0);
    for (std::size_t i = 10; i <= 12; ++i) pred[i] = 2;

    const auto cs = collect_candidates(pred, real, g);
    REQUIRE(cs.size() == 1);
    CHECK(cs[0].start == 10);
    CHECK(cs[0].length() == 3);
    for (double a : cs[0].amplitudes) CHECK(a == doctest::Approx(0.5));
    CHECK(cs[0].cum_amp() == doctest::Approx(1.5));
    CHECK(cs[0].max_amp() == doctest::Approx(0.5));
}

TEST_CASE("a correct prediction splits runs under the default policy") {
    const QuantizationGrid g = build_static_grid(4);
    std::vector<int> real(10, 1), pred(10, 1);
    pred[5] = 3;
    pred[7] = 3;

    const auto cs = collect_candidates(pred, real, g);
    REQUIRE(cs.size() == 2);
    CHECK(cs[0].start == 5);
    CHECK(cs[0].length() == 1);
    CHECK(cs[1].start == 7);
    CHECK(cs[1].length() == 1);
}

TEST_CASE("rejection policies stretch runs across isolated correct samples") {
    const QuantizationGrid g = build_static_grid(4);

    SUBCASE("true_count keeps the run open until a correct streak") {
        // mismatch, mismatch, correct, mismatch, correct, correct
        const std::vector<int> real{0, 0, 0, 0, 0, 0, 0};
        const std::vector<int> pred{2, 2, 0, 2, 0, 0, 0};
        RejectionPolicy pol;
        pol.true_count = 2;
        const auto cs = collect_candidates(pred, real, g, pol);
        REQUIRE(cs.size() == 1);
        CHECK(cs[0].start == 0);
        CHECK(cs[0].length() == 4); // trailing correct samples trimmed
        CHECK(cs[0].amplitudes[2] == 0.0);
        CHECK(cs[0].cum_amp() == doctest::Approx(1.5));
    }

    SUBCASE("true_ratio closes the run once correctness dominates") {
        // mismatch, correct, mismatch, correct, correct, then far-away mismatch
        const std::vector<int> real{0, 0, 0, 0, 0, 0};
        const std::vector<int> pred{2, 0, 2, 0, 0, 2};
        RejectionPolicy pol;
        pol.true_count = 100;
        pol.true_ratio = 0.5;
        const auto cs = collect_candidates(pred, real, g, pol);
        REQUIRE(cs.size() == 2);
        CHECK(cs[0].start == 0);
        CHECK(cs[0].length() == 3); // closes at 3/5 correct > 0.5
        CHECK(cs[1].start == 5);
        CHECK(cs[1].length() == 1);
    }

    SUBCASE("policy bounds are validated") {
        RejectionPolicy bad;
        bad.true_count = 0;
        CHECK_THROWS_AS((void)collect_candidates(std::vector<int>{0}, std::vector<int>{0},
                                                 g, bad),
                        std::invalid_argument);
        bad.true_count = 1;
        bad.true_ratio = 1.0;
        CHECK_THROWS_AS((void)collect_candidates(std::vector<int>{0}, std::vector<int>{0},
                                                 g, bad),
                        std::invalid_argument);
    }
}

TEST_CASE("collect_candidates validates its inputs") {
    const QuantizationGrid g = build_static_grid(4);
    CHECK_THROWS_AS((void)collect_candidates(std::vector<int>{0, 1},
                                             std::vector<int>{0}, g),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)collect_candidates(std::vector<int>{4}, std::vector<int>{0}, g),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)collect_candidates(std::vector<int>{-1}, std::vector<int>{0}, g),
                    std::invalid_argument);
}

TEST_CASE("candidate properties obey their mutual bounds") {
    const QuantizationGrid g = build_static_grid(8);
    rng::engine eng(5);
    std::vector<int> real(500), pred(500);
    for (std::size_t i = 0; i < 500; ++i) {
        real[i] = static_cast<int>(rng::below(eng, 8));
        pred[i] = static_cast<int>(rng::below(eng, 8));
    }
    RejectionPolicy pol;
    pol.true_count = 3;
    const auto cs = collect_candidates(pred, real, g, pol);
    REQUIRE(!cs.empty());
    for (const AnomalyCandidate& c : cs) {
        CHECK(c.length() >= 1);
        CHECK(c.max_amp() <= c.cum_amp() + 1e-12);
        CHECK(c.cum_amp() <=
              static_cast<double>(c.length()) * c.max_amp() + 1e-12);
        for (double a : c.amplitudes) CHECK(a >= 0.0);
        // runs end on a mismatch
        CHECK(c.amplitudes.back() > 0.0);
    }
}

TEST_CASE("rule application confirms exactly the strict exceeders") {
    SUBCASE("no active rules confirm everything") {
        const std::vector<AnomalyCandidate> cs{shaped(3, 0.6, 0.3), shaped(1, 0.1, 0.1)};
        const DetectionRun run = apply_rules(cs, RuleSet{});
        CHECK(run.confirmed.size() == 2);
        REQUIRE(run.anomalies.size() == 2);
        CHECK(run.anomalies[0] == Interval{0, 3});
    }

    SUBCASE("equality does not exceed") {
        RuleSet r;
        r.length = 14.0;
        const std::vector<AnomalyCandidate> at{shaped(14, 1.4, 0.2)};
        const std::vector<AnomalyCandidate> over{shaped(15, 1.5, 0.2)};
        CHECK(apply_rules(at, r).confirmed.empty());
        CHECK(apply_rules(over, r).confirmed.size() == 1);
    }

    SUBCASE("active rules combine conjunctively") {
        RuleSet r;
        r.length = 10.0;
        r.cum_amp = 1.55;
        const std::vector<AnomalyCandidate> cs{shaped(12, 1.2, 0.2),
                                               shaped(12, 1.7, 0.2)};
        const DetectionRun run = apply_rules(cs, r);
        REQUIRE(run.confirmed.size() == 1);
        CHECK(run.confirmed[0].cum_amp() == doctest::Approx(1.7));
    }

    SUBCASE("index offset shifts reported intervals") {
        const std::vector<AnomalyCandidate> cs{make_candidate(5, {0.5, 0.5})};
        const DetectionRun run = apply_rules(cs, RuleSet{}, 100);
        REQUIRE(run.anomalies.size() == 1);
        CHECK(run.anomalies[0] == Interval{105, 107});
    }
}

TEST_CASE("raising a threshold never confirms more") {
    rng::engine eng(17);
    std::vector<AnomalyCandidate> cs;
    for (int i = 0; i < 200; ++i) {
        const std::size_t len = 1 + rng::below(eng, 30);
        std::vector<double> amps(len);
        for (double& a : amps) a = rng::uniform(eng, 0.05, 1.0);
        cs.push_back(make_candidate(i * 40, std::move(amps)));
    }
    RuleSet r;
    r.length = 5.0;
    r.cum_amp = 2.0;
    const std::size_t base = apply_rules(cs, r).confirmed.size();
    for (Property p : all_properties) {
        RuleSet higher = r;
        higher.set(p, higher.get(p) + 3.0);
        CHECK(apply_rules(cs, higher).confirmed.size() <= base);
    }
}

TEST_CASE("threshold search on a single candidate filters it") {
    const std::vector<AnomalyCandidate> cs{shaped(5, 2.0, 0.5)};
    const ThresholdSearchResult res = auto_thresholds(cs);
    CHECK(res.maxima[0] == 5.0);
    CHECK(res.maxima[1] == doctest::Approx(2.0));
    CHECK(res.maxima[2] == doctest::Approx(0.5));
    CHECK(filters_all(cs, res.best));
    CHECK(res.saved_area >= 0.0);
}

TEST_CASE("threshold search saves area when properties disagree") {
    // One long faint candidate, one short loud one: filtering needs a
    // conjunction and leaves positive area.
    std::vector<double> faint(20, 0.025);
    std::vector<double> loud(3, 1.0);
    const std::vector<AnomalyCandidate> cs{make_candidate(0, faint),
                                           make_candidate(100, loud)};
    const ThresholdSearchResult res = auto_thresholds(cs);
    CHECK(!res.fallback);
    CHECK(res.saved_area > 0.0);
    CHECK(filters_all(cs, res.best));
    // The long one must fail an amplitude axis, the loud one the length axis.
    CHECK(res.best.length >= 3.0);
    CHECK(res.best.length < 20.0);
}

TEST_CASE("threshold search matches brute force over its own bin grid") {
    rng::engine eng(23);
    for (int rep = 0; rep < 30; ++rep) {
        std::vector<AnomalyCandidate> cs;
        const std::size_t n = 1 + rng::below(eng, 40);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t len = 1 + rng::below(eng, 12);
            std::vector<double> amps(len);
            for (double& a : amps) a = rng::uniform(eng, 0.1, 0.9);
            cs.push_back(make_candidate(i * 30, std::move(amps)));
        }
        const ThresholdSearchResult res = auto_thresholds(cs);
        CAPTURE(rep);
        CHECK(filters_all(cs, res.best));

        // Independent exhaustive enumeration over the same threshold options.
        std::array<std::vector<double>, 3> options;
        for (std::size_t a = 0; a < 3; ++a) {
            options[a] = res.boundaries[a];
            options[a].insert(options[a].begin(), 0.0);
            options[a].erase(std::unique(options[a].begin(), options[a].end()),
                             options[a].end());
        }
        double best_area = 0.0;
        RuleSet best;
        bool found = false;
        for (double t0 : options[0])
            for (double t1 : options[1])
                for (double t2 : options[2]) {
                    RuleSet r;
                    r.length = t0;
                    r.cum_amp = t1;
                    r.max_amp = t2;
                    if (!filters_all(cs, r)) continue;
                    if (t0 == 0.0 && t1 == 0.0 && t2 == 0.0) continue;
                    double area = 1.0;
                    if (t0 != 0.0) area *= 1.0 - t0 / res.maxima[0];
                    if (t1 != 0.0) area *= 1.0 - t1 / res.maxima[1];
                    if (t2 != 0.0) area *= 1.0 - t2 / res.maxima[2];
                    if (area > best_area) {
                        best_area = area;
                        best = r;
                        found = true;
                    }
                }
        if (found) {
            CHECK(!res.fallback);
            CHECK(res.saved_area == doctest::Approx(best_area).epsilon(1e-12));
            CHECK(res.best.length == best.length);
            CHECK(res.best.cum_amp == best.cum_amp);
            CHECK(res.best.max_amp == best.max_amp);
        } else {
            CHECK(res.fallback);
            CHECK(res.best.length == res.maxima[0]);
            CHECK(res.saved_area == 0.0);
        }
    }
}

TEST_CASE("threshold search handles the degenerate inputs") {
    const ThresholdSearchResult empty = auto_thresholds({});
    CHECK(empty.best == RuleSet{});
    CHECK(empty.saved_area == 0.0);

    // Identical candidates: every property tie means the only filtering
    // option pins an axis to its maximum; fallback is allowed but the
    // post-condition is not negotiable.
    const std::vector<AnomalyCandidate> same{shaped(4, 1.0, 0.4), shaped(4, 1.0, 0.4),
                                             shaped(4, 1.0, 0.4)};
    const ThresholdSearchResult res = auto_thresholds(same);
    CHECK(filters_all(same, res.best));
}

TEST_CASE("threshold search always yields a clean training verdict") {
    rng::engine eng(31);
    for (int rep = 0; rep < 50; ++rep) {
        std::vector<AnomalyCandidate> cs;
        const std::size_t n = 1 + rng::below(eng, 1000);
        for (std::size_t i = 0; i < n; ++i) {
            const std::size_t len = 1 + rng::below(eng, 50);
            std::vector<double> amps(len);
            for (double& a : amps) a = rng::uniform(eng, 0.01, 1.0);
            cs.push_back(make_candidate(i, std::move(amps)));
        }
        const ThresholdSearchResult res = auto_thresholds(cs);
        CHECK(filters_all(cs, res.best));
        CHECK(res.saved_area >= 0.0);
    }
}
