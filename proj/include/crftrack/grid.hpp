// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <cmath>
#include <numeric>
#include <vector>

#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"

namespace crftrack {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Confidence weight of the unary evidence: sigmoid(a1 * maxConfidence + b1).
/// Strictly inside (0,1), increasing in maxConfidence when a1 > 0.
inline double unaryConfidenceWeight(double maxConfidence, double a1, double b1) {
    return sigmoid(a1 * maxConfidence + b1);
}

/// Discretized 2D displacement hypothesis space with one confidence per bin.
///
/// Bin centers sit at (i - bins/2) * step per axis with step = 2*range/bins,
/// so the covered interval is [-range, range - step] and, for even bin
/// counts, a bin at exactly zero displacement exists. Confidences must be
/// nonnegative and sum to 1 (softmax-style output).
struct DisplacementGrid {
    int binsX = 20;
    int binsY = 20;
    double rangeX = 50.0;  // pixels
    double rangeY = 50.0;
    std::vector<double> confidences;  // row-major: iy * binsX + ix

    int binCount() const { return binsX * binsY; }
    double stepX() const { return 2.0 * rangeX / binsX; }
    double stepY() const { return 2.0 * rangeY / binsY; }

    Displacement binDisplacement(int ix, int iy) const {
        return {(ix - binsX / 2) * stepX(), (iy - binsY / 2) * stepY()};
    }

    Displacement binDisplacement(int k) const { return binDisplacement(k % binsX, k / binsX); }

    /// Index of the bin whose center is nearest to d (clamped to the grid).
    int nearestBin(const Displacement& d) const {
        auto clampIdx = [](double v, int n) {
            const int i = static_cast<int>(std::lround(v));
            return std::min(std::max(i, 0), n - 1);
        };
        const int ix = clampIdx(d.dx / stepX() + binsX / 2, binsX);
        const int iy = clampIdx(d.dy / stepY() + binsY / 2, binsY);
        return iy * binsX + ix;
    }

    double confidenceSum() const {
        return std::accumulate(confidences.begin(), confidences.end(), 0.0);
    }

    bool satisfiesInvariants(double tol = 1e-9) const {
        if (static_cast<int>(confidences.size()) != binCount() || binCount() <= 0) return false;
        for (double c : confidences)
            if (!(c >= 0.0) || !std::isfinite(c)) return false;
        return std::abs(confidenceSum() - 1.0) <= tol;
    }

    /// Provider-boundary normalization: drift up to `acceptTol` from unit sum
    /// is silently renormalized (file rounding); anything larger is an error.
    void normalize(double acceptTol = 1e-6) {
        if (static_cast<int>(confidences.size()) != binCount())
            throw InvariantError("DisplacementGrid: confidence vector size does not match bin count");
        const double sum = confidenceSum();
        if (!std::isfinite(sum) || std::abs(sum - 1.0) > acceptTol)
            throw InvariantError("DisplacementGrid: confidences sum to " + std::to_string(sum) + ", expected 1");
        for (double& c : confidences) c /= sum;
    }

    Displacement maxConfidenceBin() const {
        int best = 0;
        for (int k = 1; k < binCount(); ++k)
            if (confidences[k] > confidences[best]) best = k;
        return binDisplacement(best);
    }

    double maxConfidence() const {
        double best = 0.0;
        for (double c : confidences) best = std::max(best, c);
        return best;
    }
};

/// Weighted mean of the bin displacements: sum_k c^k * p^k.
inline Displacement weightedMeanDisplacement(const DisplacementGrid& grid) {
    if (!grid.satisfiesInvariants())
        throw InvariantError("weightedMeanDisplacement: grid confidences must be nonnegative and sum to 1");
    Displacement mean;
    for (int k = 0; k < grid.binCount(); ++k) {
        const Displacement p = grid.binDisplacement(k);
        mean.dx += grid.confidences[k] * p.dx;
        mean.dy += grid.confidences[k] * p.dy;
    }
    return mean;
}

/// A grid bundled with its cached weighted mean and peak confidence -- the
/// two summary statistics the tracker consumes.
struct DisplacementEvidence {
    DisplacementGrid grid;
    Displacement meanDisplacement;
    double maxConfidence = 1.0;

    static DisplacementEvidence fromGrid(DisplacementGrid g) {
        g.normalize();
        DisplacementEvidence ev;
        ev.meanDisplacement = weightedMeanDisplacement(g);
        ev.maxConfidence = g.maxConfidence();
        ev.grid = std::move(g);
        return ev;
    }
};

}  // namespace crftrack
