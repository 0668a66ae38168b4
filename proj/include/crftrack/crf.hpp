// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "crftrack/config.hpp"
#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"
#include "crftrack/grid.hpp"

namespace crftrack {

enum class PairwiseMode { Asymmetric, SymmetricGaussian, None };

inline std::string toString(PairwiseMode m) {
    switch (m) {
        case PairwiseMode::Asymmetric: return "asymmetric";
        case PairwiseMode::SymmetricGaussian: return "symmetricGaussian";
        case PairwiseMode::None: return "none";
    }
    return "?";
}

inline PairwiseMode pairwiseModeFromString(const std::string& s) {
    if (s == "asymmetric") return PairwiseMode::Asymmetric;
    if (s == "symmetricGaussian" || s == "symmetric_gaussian") return PairwiseMode::SymmetricGaussian;
    if (s == "none") return PairwiseMode::None;
    throw ConfigError("unknown pairwise mode `" + s + "` (expected asymmetric|symmetricGaussian|none)");
}

/// All scalar parameters of the random field plus iteration settings.
///
/// The defaults below are artifact defaults chosen for sane behaviour with
/// untrained providers; they are not fitted values. Sign conventions follow
/// the model: a21 > 0 and a22 < 0 make smaller, more confident senders
/// influential.
struct CrfParams {
    double a1 = 5.0;
    double b1 = -2.5;
    std::vector<double> a21{1.0, 1.0};   // size-based weighting, one entry per kernel
    std::vector<double> b21{0.0, 0.0};
    std::vector<double> a22{-1.0, -1.0}; // confidence-based weighting
    std::vector<double> b22{0.0, 0.0};
    std::vector<double> symmetricBandwidth{150.0, 400.0};  // pixels, Gaussian mode
    int maxIterations = 10;
    double convergenceTol = 1e-6;  // pixels, max componentwise change
    PairwiseMode pairwiseMode = PairwiseMode::Asymmetric;
    double neighborhoodRadius = std::numeric_limits<double>::infinity();  // center-distance gate
    bool paperLiteralSign = false;  // use the alternate printed sign of the speed-difference term

    int kernelCount() const { return static_cast<int>(a21.size()); }

    void validate() const {
        if (kernelCount() < 1) throw ConfigError("CrfParams: need at least one weighting kernel");
        if (b21.size() != a21.size() || a22.size() != a21.size() || b22.size() != a21.size())
            throw ConfigError("CrfParams: kernel parameter lists have mismatched lengths");
        if (maxIterations < 1) throw ConfigError("CrfParams: max_iterations must be >= 1");
        if (!(convergenceTol > 0.0)) throw ConfigError("CrfParams: convergence_tol must be > 0");
        if (pairwiseMode == PairwiseMode::SymmetricGaussian) {
            if (symmetricBandwidth.size() < a21.size())
                throw ConfigError("CrfParams: symmetric mode needs one symmetric_bandwidth.k per kernel");
            for (double bw : symmetricBandwidth)
                if (!(bw > 0.0)) throw ConfigError("CrfParams: symmetric bandwidths must be > 0");
        }
        if (!(neighborhoodRadius > 0.0)) throw ConfigError("CrfParams: neighborhood_radius must be > 0");
    }

    static CrfParams fromConfig(const Config& cfg) {
        CrfParams p;
        p.a1 = cfg.getDouble("a1", p.a1);
        p.b1 = cfg.getDouble("b1", p.b1);
        // Kernel sets come in complete (a21,b21,a22,b22) groups, indexed from 1.
        // The kernel count is inferred from the keys present.
        int k = 0;
        while (cfg.has("a21." + std::to_string(k + 1)) || cfg.has("b21." + std::to_string(k + 1)) ||
               cfg.has("a22." + std::to_string(k + 1)) || cfg.has("b22." + std::to_string(k + 1))) {
            ++k;
            const std::string suffix = "." + std::to_string(k);
            for (const char* base : {"a21", "b21", "a22", "b22"})
                if (!cfg.has(base + suffix))
                    throw ConfigError("missing config key: " + std::string(base) + suffix);
        }
        if (k > 0) {
            p.a21.clear(); p.b21.clear(); p.a22.clear(); p.b22.clear();
            for (int i = 1; i <= k; ++i) {
                const std::string suffix = "." + std::to_string(i);
                p.a21.push_back(cfg.getDouble("a21" + suffix));
                p.b21.push_back(cfg.getDouble("b21" + suffix));
                p.a22.push_back(cfg.getDouble("a22" + suffix));
                p.b22.push_back(cfg.getDouble("b22" + suffix));
            }
        }
        int nBw = 0;
        while (cfg.has("symmetric_bandwidth." + std::to_string(nBw + 1))) ++nBw;
        if (nBw > 0) {
            p.symmetricBandwidth.clear();
            for (int i = 1; i <= nBw; ++i)
                p.symmetricBandwidth.push_back(cfg.getDouble("symmetric_bandwidth." + std::to_string(i)));
        }
        p.maxIterations = cfg.getInt("max_iterations", p.maxIterations);
        p.convergenceTol = cfg.getDouble("convergence_tol", p.convergenceTol);
        if (cfg.has("pairwise_mode")) p.pairwiseMode = pairwiseModeFromString(cfg.getString("pairwise_mode"));
        if (cfg.has("neighborhood_radius")) {
            const std::string raw = cfg.getString("neighborhood_radius");
            p.neighborhoodRadius = (raw == "unlimited")
                                       ? std::numeric_limits<double>::infinity()
                                       : cfg.getDouble("neighborhood_radius");
        }
        p.paperLiteralSign = cfg.getBool("paper_literal_sign", p.paperLiteralSign);
        p.validate();
        return p;
    }

    void toConfig(Config& cfg) const {
        auto num = [](double v) {
            std::ostringstream os;
            os.precision(17);
            os << v;
            return os.str();
        };
        cfg.set("a1", num(a1));
        cfg.set("b1", num(b1));
        for (int i = 0; i < kernelCount(); ++i) {
            const std::string suffix = "." + std::to_string(i + 1);
            cfg.set("a21" + suffix, num(a21[i]));
            cfg.set("b21" + suffix, num(b21[i]));
            cfg.set("a22" + suffix, num(a22[i]));
            cfg.set("b22" + suffix, num(b22[i]));
        }
        for (std::size_t i = 0; i < symmetricBandwidth.size(); ++i)
            cfg.set("symmetric_bandwidth." + std::to_string(i + 1), num(symmetricBandwidth[i]));
        cfg.set("max_iterations", std::to_string(maxIterations));
        cfg.set("convergence_tol", num(convergenceTol));
        cfg.set("pairwise_mode", toString(pairwiseMode));
        cfg.set("neighborhood_radius",
                std::isinf(neighborhoodRadius) ? std::string("unlimited") : num(neighborhoodRadius));
        cfg.set("paper_literal_sign", paperLiteralSign ? "true" : "false");
    }
};

/// Per-object inference node, built from time t-1 quantities.
struct CrfNode {
    int trackletId = 0;
    DisplacementEvidence evidence;  // f_d and max confidence
    double w1 = 0.5;                // unary confidence weight, strictly in (0,1)
    Displacement speed;             // committed displacement at t-1
    double area = 1.0;              // box area at t-1, > 0
    Point center;                   // box center at t-1, for gating / symmetric mode
};

struct InferenceResult {
    std::vector<Displacement> displacements;
    int iterations = 0;
    bool converged = true;
    double finalMaxDelta = 0.0;
};

/// Directional weight of the message from `sender` to `receiver` for kernel k:
/// a size-ratio sigmoid times a confidence-difference sigmoid. With a21 > 0
/// and a22 < 0 the weight grows when the sender is smaller and more confident
/// than the receiver, so accurate objects correct inaccurate ones and not the
/// other way around.
inline double pairwiseWeight(const CrfNode& receiver, const CrfNode& sender,
                             const CrfParams& params, int k) {
    const double sizeTerm = sigmoid(params.a21[k] * std::log(receiver.area / sender.area) + params.b21[k]);
    const double confTerm =
        sigmoid(params.a22[k] * (receiver.evidence.maxConfidence - sender.evidence.maxConfidence) + params.b22[k]);
    return sizeTerm * confTerm;
}

/// Distance-only Gaussian weight, the symmetric ablation of the directional
/// weighting. Plugs into the same update in place of the asymmetric weight.
inline double symmetricPairwiseWeight(const CrfNode& receiver, const CrfNode& sender,
                                      const CrfParams& params, int k) {
    const double dist = receiver.center.distanceTo(sender.center);
    const double bw = params.symmetricBandwidth[k];
    return std::exp(-(dist * dist) / (2.0 * bw * bw));
}

/// Kernel-summed directed weights for all ordered pairs, computed once per
/// frame (they depend only on t-1 quantities) and frozen during iteration.
/// Entry (i,j) weighs the message from j to i; gated pairs hold zero for both
/// directions.
class PairwiseWeightTable {
public:
    PairwiseWeightTable() = default;

    PairwiseWeightTable(const std::vector<CrfNode>& nodes, const CrfParams& params) {
        n_ = nodes.size();
        weights_.assign(n_ * n_, 0.0);
        rowSums_.assign(n_, 0.0);
        if (params.pairwiseMode == PairwiseMode::None) return;
        for (std::size_t i = 0; i < n_; ++i) {
            for (std::size_t j = 0; j < n_; ++j) {
                if (i == j) continue;
                if (nodes[i].center.distanceTo(nodes[j].center) > params.neighborhoodRadius)
                    continue;  // symmetric gate: distance test is direction-free
                double sum = 0.0;
                for (int k = 0; k < params.kernelCount(); ++k)
                    sum += params.pairwiseMode == PairwiseMode::Asymmetric
                               ? pairwiseWeight(nodes[i], nodes[j], params, k)
                               : symmetricPairwiseWeight(nodes[i], nodes[j], params, k);
                weights_[i * n_ + j] = sum;
                rowSums_[i] += sum;
            }
        }
    }

    std::size_t size() const { return n_; }
    double at(std::size_t receiver, std::size_t sender) const { return weights_[receiver * n_ + sender]; }
    double rowSum(std::size_t receiver) const { return rowSums_[receiver]; }

private:
    std::size_t n_ = 0;
    std::vector<double> weights_;
    std::vector<double> rowSums_;
};

/// Gibbs energy of a displacement assignment: quadratic unary deviations plus
/// receiver-weighted speed-difference deviations over all ordered pairs.
inline double energy(const std::vector<Displacement>& displacements,
                     const std::vector<CrfNode>& nodes, const CrfParams& params) {
    if (displacements.size() != nodes.size())
        throw InvariantError("energy: displacement count does not match node count");
    const PairwiseWeightTable table(nodes, params);
    double total = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const Displacement du = displacements[i] - nodes[i].evidence.meanDisplacement;
        total += nodes[i].w1 * (du.dx * du.dx + du.dy * du.dy);
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (i == j) continue;
            const Displacement dd = displacements[i] - displacements[j];
            const Displacement ds = nodes[i].speed - nodes[j].speed;
            const Displacement dev = dd - ds;
            total += (1.0 - nodes[i].w1) * table.at(i, j) * (dev.dx * dev.dx + dev.dy * dev.dy);
        }
    }
    return total;
}

/// One synchronous (Jacobi) update: every node reads all neighbours from the
/// `current` vector, so the result is independent of node order.
inline std::vector<Displacement> meanFieldStep(const std::vector<Displacement>& current,
                                               const std::vector<CrfNode>& nodes,
                                               const PairwiseWeightTable& table,
                                               const CrfParams& params) {
    const double speedSign = params.paperLiteralSign ? -1.0 : 1.0;
    std::vector<Displacement> next(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double w1 = nodes[i].w1;
        const Displacement& f = nodes[i].evidence.meanDisplacement;
        if (table.rowSum(i) == 0.0) {  // isolated node: the update reduces to f exactly
            next[i] = f;
            continue;
        }
        double numX = w1 * f.dx;
        double numY = w1 * f.dy;
        for (std::size_t j = 0; j < nodes.size(); ++j) {
            if (i == j) continue;
            const double w = table.at(i, j);
            if (w == 0.0) continue;
            const Displacement ds = nodes[i].speed - nodes[j].speed;
            numX += (1.0 - w1) * w * (current[j].dx + speedSign * ds.dx);
            numY += (1.0 - w1) * w * (current[j].dy + speedSign * ds.dy);
        }
        const double den = w1 + (1.0 - w1) * table.rowSum(i);
        next[i] = {numX / den, numY / den};
    }
    return next;
}

/// Mean-field inference: start from the evidence means, iterate Jacobi
/// updates until the largest componentwise change drops to `convergenceTol`
/// or the iteration budget runs out. Mode None bypasses iteration and
/// returns the evidence means unchanged.
inline InferenceResult infer(const std::vector<CrfNode>& nodes, const CrfParams& params) {
    if (nodes.empty()) throw InvariantError("infer: need at least one node");
    params.validate();
    InferenceResult result;
    result.displacements.reserve(nodes.size());
    for (const CrfNode& n : nodes) {
        if (!(n.w1 > 0.0 && n.w1 < 1.0))
            throw InvariantError("infer: node w1 must lie strictly in (0,1)");
        if (!(n.area > 0.0)) throw InvariantError("infer: node area must be positive");
        result.displacements.push_back(n.evidence.meanDisplacement);
    }
    if (params.pairwiseMode == PairwiseMode::None) return result;

    const PairwiseWeightTable table(nodes, params);
    for (int it = 1; it <= params.maxIterations; ++it) {
        std::vector<Displacement> next = meanFieldStep(result.displacements, nodes, table, params);
        double maxDelta = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i) {
            maxDelta = std::max(maxDelta, std::abs(next[i].dx - result.displacements[i].dx));
            maxDelta = std::max(maxDelta, std::abs(next[i].dy - result.displacements[i].dy));
        }
        result.displacements = std::move(next);
        result.iterations = it;
        result.finalMaxDelta = maxDelta;
        if (maxDelta <= params.convergenceTol) {
            result.converged = true;
            return result;
        }
    }
    result.converged = false;
    return result;
}

/// Exact simultaneous solution of the fixed-point equations, one tridiagonal-
/// free dense solve per dimension (x and y decouple). Gaussian elimination
/// with partial pivoting; the system is strictly diagonally dominant whenever
/// all w1 > 0, so the pivot guard is defensive only.
inline std::vector<Displacement> directFixedPointSolve(const std::vector<CrfNode>& nodes,
                                                       const PairwiseWeightTable& table,
                                                       const CrfParams& params) {
    const std::size_t n = nodes.size();
    if (n == 0) throw InvariantError("directFixedPointSolve: empty system");
    const double speedSign = params.paperLiteralSign ? -1.0 : 1.0;

    // A d = b with A_ii = w1_i + (1-w1_i) W_i and A_ij = -(1-w1_i) w_ij.
    auto solveDim = [&](auto rhsOf, auto fOf) {
        std::vector<double> a(n * n, 0.0);
        std::vector<double> b(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) {
            const double w1 = nodes[i].w1;
            a[i * n + i] = w1 + (1.0 - w1) * table.rowSum(i);
            b[i] = w1 * fOf(i);
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                const double w = table.at(i, j);
                a[i * n + j] = -(1.0 - w1) * w;
                b[i] += (1.0 - w1) * w * speedSign * rhsOf(i, j);
            }
        }
        // In-place elimination with partial pivoting.
        std::vector<std::size_t> perm(n);
        for (std::size_t i = 0; i < n; ++i) perm[i] = i;
        for (std::size_t col = 0; col < n; ++col) {
            std::size_t pivot = col;
            for (std::size_t r = col + 1; r < n; ++r)
                if (std::abs(a[perm[r] * n + col]) > std::abs(a[perm[pivot] * n + col])) pivot = r;
            std::swap(perm[col], perm[pivot]);
            const double pv = a[perm[col] * n + col];
            if (std::abs(pv) < 1e-12)
                throw InvariantError("directFixedPointSolve: singular system (pivot below 1e-12)");
            for (std::size_t r = col + 1; r < n; ++r) {
                const double factor = a[perm[r] * n + col] / pv;
                if (factor == 0.0) continue;
                for (std::size_t c = col; c < n; ++c) a[perm[r] * n + c] -= factor * a[perm[col] * n + c];
                b[perm[r]] -= factor * b[perm[col]];
            }
        }
        std::vector<double> x(n, 0.0);
        for (std::size_t ri = n; ri-- > 0;) {
            double acc = b[perm[ri]];
            for (std::size_t c = ri + 1; c < n; ++c) acc -= a[perm[ri] * n + c] * x[c];
            x[ri] = acc / a[perm[ri] * n + ri];
        }
        return x;
    };

    const std::vector<double> x = solveDim(
        [&](std::size_t i, std::size_t j) { return nodes[i].speed.dx - nodes[j].speed.dx; },
        [&](std::size_t i) { return nodes[i].evidence.meanDisplacement.dx; });
    const std::vector<double> y = solveDim(
        [&](std::size_t i, std::size_t j) { return nodes[i].speed.dy - nodes[j].speed.dy; },
        [&](std::size_t i) { return nodes[i].evidence.meanDisplacement.dy; });

    std::vector<Displacement> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = {x[i], y[i]};
    return out;
}

}  // namespace crftrack
