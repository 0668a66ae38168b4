// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"

namespace crftrack {

/// Rectangular score matrix with a validity mask. Masked pairs are excluded
/// from assignment outright.
class ScoreMatrix {
public:
    ScoreMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), scores_(rows * cols, 0.0), valid_(rows * cols, 1) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    void set(std::size_t r, std::size_t c, double score, bool valid = true) {
        scores_[r * cols_ + c] = score;
        valid_[r * cols_ + c] = valid ? 1 : 0;
    }
    void mask(std::size_t r, std::size_t c) { valid_[r * cols_ + c] = 0; }
    double score(std::size_t r, std::size_t c) const { return scores_[r * cols_ + c]; }
    bool valid(std::size_t r, std::size_t c) const { return valid_[r * cols_ + c] != 0; }

private:
    std::size_t rows_, cols_;
    std::vector<double> scores_;
    std::vector<char> valid_;
};

struct AssignmentResult {
    std::vector<int> rowToCol;  // -1 when the row stays unmatched
    double totalScore = 0.0;
};

/// Maximum-total-score one-to-one assignment over the unmasked entries of a
/// rectangular matrix. Rows and columns whose entries are all masked stay
/// unmatched. Shortest-augmenting-path solver on a square padding where
/// dummies stand for "leave unmatched"; score-equal results are canonicalized
/// toward lower row then lower column indices.
inline AssignmentResult solveAssignment(const ScoreMatrix& m) {
    const std::size_t rows = m.rows(), cols = m.cols();
    AssignmentResult result;
    result.rowToCol.assign(rows, -1);
    if (rows == 0 || cols == 0) return result;

    // Pad to (rows+cols) square: column j >= cols is row j-cols's private
    // dummy. Costs are negated scores shifted to nonnegative; a dummy costs
    // exactly like a zero-score pair, masked pairs cost a forbidding constant.
    const std::size_t n = rows + cols;
    double maxScore = 0.0;
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c)
            if (m.valid(r, c)) maxScore = std::max(maxScore, std::abs(m.score(r, c)));
    const double big = (maxScore + 1.0) * static_cast<double>(n + 1);

    auto cost = [&](std::size_t r, std::size_t c) -> double {
        if (r < rows && c < cols) return m.valid(r, c) ? maxScore - m.score(r, c) : big;
        if (r < rows) return c == cols + r ? maxScore : big;   // row dummy
        if (c < cols) return r == rows + c ? maxScore : big;   // column dummy
        return maxScore;                                       // dummy-dummy, free
    };

    // Jonker-Volgenant style row-by-row augmentation (1-based internals).
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<std::size_t> colOwner(n + 1, 0), way(n + 1, 0);
    for (std::size_t r = 1; r <= n; ++r) {
        colOwner[0] = r;
        std::size_t j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = colOwner[j0];
            std::size_t j1 = 0;
            double delta = inf;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[colOwner[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (colOwner[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            colOwner[j0] = colOwner[j1];
            j0 = j1;
        } while (j0 != 0);
    }

    for (std::size_t j = 1; j <= n; ++j) {
        const std::size_t r = colOwner[j];
        if (r >= 1 && r <= rows && j <= cols && m.valid(r - 1, j - 1))
            result.rowToCol[r - 1] = static_cast<int>(j - 1);
    }

    // Canonicalize score-preserving ties: prefer the lower row index on the
    // lower column index. A bounded pairwise pass is enough for determinism
    // plus the documented preference on exact ties.
    bool changed = true;
    while (changed) {
        changed = false;
        for (std::size_t r1 = 0; r1 < rows; ++r1) {
            if (result.rowToCol[r1] < 0) continue;
            const std::size_t c1 = static_cast<std::size_t>(result.rowToCol[r1]);
            for (std::size_t r2 = r1 + 1; r2 < rows; ++r2) {
                if (result.rowToCol[r2] < 0) continue;
                const std::size_t c2 = static_cast<std::size_t>(result.rowToCol[r2]);
                if (c2 >= c1) continue;
                if (!m.valid(r1, c2) || !m.valid(r2, c1)) continue;
                if (m.score(r1, c2) + m.score(r2, c1) == m.score(r1, c1) + m.score(r2, c2)) {
                    result.rowToCol[r1] = static_cast<int>(c2);
                    result.rowToCol[r2] = static_cast<int>(c1);
                    changed = true;
                }
            }
        }
    }

    for (std::size_t r = 0; r < rows; ++r)
        if (result.rowToCol[r] >= 0) result.totalScore += m.score(r, static_cast<std::size_t>(result.rowToCol[r]));
    return result;
}

/// Overall tracklet-detection similarity: visual score plus lambda-weighted
/// spatial overlap.
inline double overallSimilarity(double visual, double iouVal, double lambda) {
    return visual + lambda * iouVal;
}

enum class CommitAction { Detection, Average };

struct Match {
    int trackletId = 0;
    int detectionIndex = -1;
    double iouAtMatch = 0.0;
    CommitAction action = CommitAction::Detection;
};

struct FrameAssociation {
    std::vector<Match> matches;
    std::vector<int> unmatchedTracklets;   // tracklet ids
    std::vector<int> unmatchedDetections;  // detection indices
};

struct TrackCandidatePair {
    int trackletId = 0;
    BoundingBox predictedBox;
};

struct AssociationGates {
    double lambda = 1.0;
    double commitIou = 0.5;      // at or above: take the detection box
    double averageIou = 0.3;     // within [averageIou, commitIou): blend boxes
    double hardMaskVisual = 0.1; // mask zero-overlap pairs below this visual score
};

/// Associates predicted tracklet boxes with detections for one frame:
/// a masked max-score assignment followed by the overlap-tiered commit rule.
/// Pairs whose overlap falls below the averaging tier are demoted: the
/// tracklet counts as unmatched and its detection returns to the pool.
template <typename SimilarityFn>
FrameAssociation associateFrame(const std::vector<TrackCandidatePair>& tracklets,
                                const std::vector<BoundingBox>& detections,
                                SimilarityFn&& visualSimilarity,
                                const AssociationGates& gates = {}) {
    FrameAssociation out;
    ScoreMatrix scores(tracklets.size(), detections.size());
    for (std::size_t r = 0; r < tracklets.size(); ++r) {
        for (std::size_t c = 0; c < detections.size(); ++c) {
            const double overlap = iou(tracklets[r].predictedBox, detections[c]);
            const double visual = visualSimilarity(tracklets[r].predictedBox, detections[c]);
            // Appearance-only matches across the whole image are not wanted:
            // drop pairs with no overlap and weak visual evidence.
            const bool masked = overlap == 0.0 && visual < gates.hardMaskVisual;
            scores.set(r, c, overallSimilarity(visual, overlap, gates.lambda), !masked);
        }
    }
    const AssignmentResult assignment = solveAssignment(scores);

    std::vector<char> detTaken(detections.size(), 0);
    for (std::size_t r = 0; r < tracklets.size(); ++r) {
        const int c = assignment.rowToCol[r];
        if (c < 0) {
            out.unmatchedTracklets.push_back(tracklets[r].trackletId);
            continue;
        }
        const double overlap = iou(tracklets[r].predictedBox, detections[static_cast<std::size_t>(c)]);
        if (overlap >= gates.commitIou) {
            out.matches.push_back({tracklets[r].trackletId, c, overlap, CommitAction::Detection});
            detTaken[static_cast<std::size_t>(c)] = 1;
        } else if (overlap >= gates.averageIou) {
            out.matches.push_back({tracklets[r].trackletId, c, overlap, CommitAction::Average});
            detTaken[static_cast<std::size_t>(c)] = 1;
        } else {
            out.unmatchedTracklets.push_back(tracklets[r].trackletId);
        }
    }
    for (std::size_t c = 0; c < detections.size(); ++c)
        if (!detTaken[c]) out.unmatchedDetections.push_back(static_cast<int>(c));
    return out;
}

/// Componentwise mean of two boxes, the mid-tier commit rule.
inline BoundingBox averageBoxes(const BoundingBox& a, const BoundingBox& b) {
    return {(a.x + b.x) / 2.0, (a.y + b.y) / 2.0, (a.w + b.w) / 2.0, (a.h + b.h) / 2.0};
}

}  // namespace crftrack
