// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <vector>

#include "crftrack/assignment.hpp"
#include "crftrack/random.hpp"

using namespace crftrack;
using Catch::Matchers::WithinAbs;

namespace {

// Brute-force oracle: the best total over every injective row->column map,
// rows allowed to stay unmatched. Enumerates column choices recursively.
double bruteForceBest(const ScoreMatrix& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    std::vector<char> used(cols, 0);
    double best = 0.0;
    auto recurse = [&](auto&& self, std::size_t r, double acc) -> void {
        if (r == rows) {
            best = std::max(best, acc);
            return;
        }
        self(self, r + 1, acc);  // leave row r unmatched
        for (std::size_t c = 0; c < cols; ++c) {
            if (used[c] || !m.valid(r, c)) continue;
            used[c] = 1;
            self(self, r + 1, acc + m.score(r, c));
            used[c] = 0;
        }
    };
    recurse(recurse, 0, 0.0);
    return best;
}

}  // namespace

TEST_CASE("1x1 matrix yields the single pair") {
    ScoreMatrix m(1, 1);
    m.set(0, 0, 0.7);
    const AssignmentResult r = solveAssignment(m);
    REQUIRE(r.rowToCol == std::vector<int>{0});
    REQUIRE_THAT(r.totalScore, WithinAbs(0.7, 1e-12));
}

TEST_CASE("2x2 prefers the diagonal") {
    ScoreMatrix m(2, 2);
    m.set(0, 0, 2.0);
    m.set(0, 1, 1.0);
    m.set(1, 0, 1.0);
    m.set(1, 1, 2.0);
    const AssignmentResult r = solveAssignment(m);
    REQUIRE(r.rowToCol == std::vector<int>{0, 1});
    REQUIRE_THAT(r.totalScore, WithinAbs(4.0, 1e-12));
}

TEST_CASE("fully masked rows and columns stay unmatched") {
    ScoreMatrix m(2, 2);
    m.set(0, 0, 5.0);
    m.mask(0, 1);
    m.mask(1, 0);
    m.mask(1, 1);
    m.set(0, 0, 5.0, true);
    const AssignmentResult r = solveAssignment(m);
    REQUIRE(r.rowToCol[0] == 0);
    REQUIRE(r.rowToCol[1] == -1);
}

TEST_CASE("masked entries are never selected even when scores tempt") {
    ScoreMatrix m(2, 2);
    m.set(0, 0, 100.0, false);  // masked in spite of the high score
    m.set(0, 1, 0.1);
    m.set(1, 0, 0.1);
    m.set(1, 1, 100.0, false);
    const AssignmentResult r = solveAssignment(m);
    REQUIRE(r.rowToCol == std::vector<int>{1, 0});
    REQUIRE_THAT(r.totalScore, WithinAbs(0.2, 1e-12));
}

TEST_CASE("assignment matches brute force on random instances up to 7x7") {
    Rng rng(1234);
    for (int trial = 0; trial < 500; ++trial) {
        const std::size_t rows = static_cast<std::size_t>(rng.uniformInt(1, 7));
        const std::size_t cols = static_cast<std::size_t>(rng.uniformInt(1, 7));
        ScoreMatrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c)
                m.set(r, c, rng.uniform(0.0, 2.0), !rng.bernoulli(0.25));
        const AssignmentResult got = solveAssignment(m);
        const double best = bruteForceBest(m);
        REQUIRE_THAT(got.totalScore, WithinAbs(best, 1e-9));

        // sanity: one-to-one and mask respected
        std::vector<char> seen(cols, 0);
        for (std::size_t r = 0; r < rows; ++r) {
            const int c = got.rowToCol[r];
            if (c < 0) continue;
            REQUIRE(m.valid(r, static_cast<std::size_t>(c)));
            REQUIRE(!seen[static_cast<std::size_t>(c)]);
            seen[static_cast<std::size_t>(c)] = 1;
        }
    }
}

TEST_CASE("rectangular matrices match brute force") {
    Rng rng(88);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t rows = static_cast<std::size_t>(rng.uniformInt(1, 4));
        const std::size_t cols = static_cast<std::size_t>(rng.uniformInt(4, 7));
        ScoreMatrix m(rows, cols);
        for (std::size_t r = 0; r < rows; ++r)
            for (std::size_t c = 0; c < cols; ++c) m.set(r, c, rng.uniform(0.0, 1.0));
        REQUIRE_THAT(solveAssignment(m).totalScore, WithinAbs(bruteForceBest(m), 1e-9));
    }
}

TEST_CASE("score ties canonicalize toward lower indices") {
    ScoreMatrix m(2, 2);
    m.set(0, 0, 1.0);
    m.set(0, 1, 1.0);
    m.set(1, 0, 1.0);
    m.set(1, 1, 1.0);
    const AssignmentResult r = solveAssignment(m);
    REQUIRE(r.rowToCol == std::vector<int>{0, 1});
}

TEST_CASE("overall similarity blends visual and spatial terms") {
    REQUIRE(overallSimilarity(0.0, 0.0, 3.0) == 0.0);
    REQUIRE(overallSimilarity(1.0, 1.0, 1.0) == 2.0);
    REQUIRE_THAT(overallSimilarity(0.6, 0.4, 0.5), WithinAbs(0.8, 1e-12));
}

TEST_CASE("associateFrame commit tiers") {
    const auto iouSimilarity = [](const BoundingBox& a, const BoundingBox& b) { return iou(a, b); };

    SECTION("exact overlap commits the detection box") {
        const std::vector<TrackCandidatePair> tracks{{7, {10, 10, 20, 40}}};
        const std::vector<BoundingBox> dets{{10, 10, 20, 40}};
        const FrameAssociation fa = associateFrame(tracks, dets, iouSimilarity);
        REQUIRE(fa.matches.size() == 1);
        REQUIRE(fa.matches[0].trackletId == 7);
        REQUIRE(fa.matches[0].detectionIndex == 0);
        REQUIRE(fa.matches[0].iouAtMatch == 1.0);
        REQUIRE(fa.matches[0].action == CommitAction::Detection);
        REQUIRE(fa.unmatchedDetections.empty());
        REQUIRE(fa.unmatchedTracklets.empty());
    }

    SECTION("mid overlap commits the componentwise average") {
        // predicted (0,0,10,10) vs detection (4,0,10,10): IoU = 60/140 ~ 0.43
        const std::vector<TrackCandidatePair> tracks{{1, {0, 0, 10, 10}}};
        const std::vector<BoundingBox> dets{{4, 0, 10, 10}};
        const FrameAssociation fa = associateFrame(tracks, dets, iouSimilarity);
        REQUIRE(fa.matches.size() == 1);
        REQUIRE_THAT(fa.matches[0].iouAtMatch, WithinAbs(60.0 / 140.0, 1e-12));
        REQUIRE(fa.matches[0].action == CommitAction::Average);
        const BoundingBox committed = averageBoxes(dets[0], tracks[0].predictedBox);
        REQUIRE(committed == BoundingBox{2, 0, 10, 10});
    }

    SECTION("low overlap demotes the pair") {
        // predicted (0,0,10,10) vs detection (8,0,10,10): IoU = 20/180 ~ 0.11
        const std::vector<TrackCandidatePair> tracks{{1, {0, 0, 10, 10}}};
        const std::vector<BoundingBox> dets{{8, 0, 10, 10}};
        const FrameAssociation fa = associateFrame(tracks, dets, iouSimilarity);
        REQUIRE(fa.matches.empty());
        REQUIRE(fa.unmatchedTracklets == std::vector<int>{1});
        REQUIRE(fa.unmatchedDetections == std::vector<int>{0});
    }

    SECTION("zero-overlap low-visual pairs are hard-masked") {
        const std::vector<TrackCandidatePair> tracks{{1, {0, 0, 10, 10}}};
        const std::vector<BoundingBox> dets{{500, 500, 10, 10}};
        const FrameAssociation fa = associateFrame(tracks, dets, iouSimilarity);
        REQUIRE(fa.matches.empty());
        REQUIRE(fa.unmatchedTracklets == std::vector<int>{1});
        REQUIRE(fa.unmatchedDetections == std::vector<int>{0});
    }
}

TEST_CASE("no detection is committed twice") {
    Rng rng(5150);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<TrackCandidatePair> tracks;
        std::vector<BoundingBox> dets;
        const int nt = rng.uniformInt(1, 8);
        const int nd = rng.uniformInt(1, 8);
        for (int i = 0; i < nt; ++i)
            tracks.push_back({i + 1, {rng.uniform(0, 200), rng.uniform(0, 200), rng.uniform(5, 40), rng.uniform(5, 40)}});
        for (int i = 0; i < nd; ++i)
            dets.push_back({rng.uniform(0, 200), rng.uniform(0, 200), rng.uniform(5, 40), rng.uniform(5, 40)});
        const FrameAssociation fa = associateFrame(
            tracks, dets, [](const BoundingBox& a, const BoundingBox& b) { return iou(a, b); });
        std::vector<char> seen(dets.size(), 0);
        for (const Match& mch : fa.matches) {
            REQUIRE(!seen[static_cast<std::size_t>(mch.detectionIndex)]);
            seen[static_cast<std::size_t>(mch.detectionIndex)] = 1;
        }
        REQUIRE(fa.matches.size() + fa.unmatchedTracklets.size() == tracks.size());
    }
}

TEST_CASE("raising the commit gates never commits more detections") {
    Rng rng(31337);
    for (int trial = 0; trial < 40; ++trial) {
        std::vector<TrackCandidatePair> tracks;
        std::vector<BoundingBox> dets;
        const int n = rng.uniformInt(2, 8);
        for (int i = 0; i < n; ++i) {
            const BoundingBox b{rng.uniform(0, 300), rng.uniform(0, 300), rng.uniform(10, 50), rng.uniform(10, 50)};
            tracks.push_back({i + 1, b});
            dets.push_back({b.x + rng.uniform(-15, 15), b.y + rng.uniform(-15, 15), b.w, b.h});
        }
        const auto sim = [](const BoundingBox& a, const BoundingBox& b) { return iou(a, b); };
        AssociationGates low, high;
        high.averageIou = 0.45;
        high.commitIou = 0.6;
        const std::size_t committedLow = associateFrame(tracks, dets, sim, low).matches.size();
        const std::size_t committedHigh = associateFrame(tracks, dets, sim, high).matches.size();
        REQUIRE(committedHigh <= committedLow);
    }
}
