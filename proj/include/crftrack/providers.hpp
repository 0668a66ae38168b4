// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"
#include "crftrack/grid.hpp"
#include "crftrack/mot_io.hpp"
#include "crftrack/random.hpp"
#include "crftrack/tracklet.hpp"

namespace crftrack {

/// How a provider lays out its displacement grid.
struct GridSpec {
    int binsX = 20;
    int binsY = 20;
    // When fixedRange is set the grid spans +-fixedRangeX/Y pixels regardless
    // of object size; otherwise it spans half the context window per axis.
    bool fixedRange = false;
    double fixedRangeX = 40.0;
    double fixedRangeY = 40.0;

    DisplacementGrid makeGrid(const BoundingBox& context) const {
        DisplacementGrid g;
        g.binsX = binsX;
        g.binsY = binsY;
        g.rangeX = fixedRange ? fixedRangeX : context.w / 2.0;
        g.rangeY = fixedRange ? fixedRangeY : context.h / 2.0;
        g.confidences.assign(static_cast<std::size_t>(g.binCount()), 0.0);
        return g;
    }
};

/// Estimates where an object moved between the previous and the current
/// frame, as confidences over a displacement grid. Implementations must be
/// safe to call concurrently for different tracklets within one frame.
class DisplacementProvider {
public:
    virtual ~DisplacementProvider() = default;

    /// `context` is the enlarged window centered on the tracklet's last box.
    virtual DisplacementEvidence estimate(const Tracklet& tracklet, int frame,
                                          const BoundingBox& context) const = 0;
};

/// Same-frame appearance similarity of two boxes, in [0,1].
class SimilarityProvider {
public:
    virtual ~SimilarityProvider() = default;
    virtual double similarity(const BoundingBox& a, const BoundingBox& b, int frame) const = 0;
};

namespace detail {

/// Gaussian bump over the grid bins, normalized. A zero bandwidth collapses
/// to a point mass on the nearest bin.
inline DisplacementGrid gaussianBump(DisplacementGrid g, const Displacement& center, double bandwidthPx) {
    if (bandwidthPx <= 0.0) {
        g.confidences.assign(g.confidences.size(), 0.0);
        g.confidences[static_cast<std::size_t>(g.nearestBin(center))] = 1.0;
        return g;
    }
    const double inv = 1.0 / (2.0 * bandwidthPx * bandwidthPx);
    double sum = 0.0;
    for (int k = 0; k < g.binCount(); ++k) {
        const Displacement p = g.binDisplacement(k);
        const double d2 = (p.dx - center.dx) * (p.dx - center.dx) + (p.dy - center.dy) * (p.dy - center.dy);
        // Tiny floor keeps the grid normalizable when the center leaves the range.
        const double c = std::exp(-d2 * inv) + 1e-300;
        g.confidences[static_cast<std::size_t>(k)] = c;
        sum += c;
    }
    for (double& c : g.confidences) c /= sum;
    return g;
}

/// Caps the peak confidence by blending toward uniform. Leaves the grid
/// untouched when the peak is already at or below the cap.
inline void capPeakConfidence(DisplacementGrid& g, double peakCap) {
    const double m = static_cast<double>(g.binCount());
    const double peak = g.maxConfidence();
    if (peakCap >= peak || peakCap <= 1.0 / m) return;
    const double gamma = (peak - peakCap) / (peak - 1.0 / m);
    for (double& c : g.confidences) c = (1.0 - gamma) * c + gamma / m;
}

inline std::string boxKey(const BoundingBox& b) {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%.2f,%.2f", b.x, b.y, b.w, b.h);
    return buf;
}

}  // namespace detail

/// Reference displacement provider: a Gaussian bump centered at the
/// tracklet's current speed. Usable on real detection files without any
/// learned model (constant-velocity assumption).
class ConstantVelocityProvider : public DisplacementProvider {
public:
    struct Params {
        double bandwidthBins = 1.5;   // bump width in bins (0 = point mass)
        double peakConfidence = 1.0;  // cap on max(c), blended toward uniform
    };

    ConstantVelocityProvider() : ConstantVelocityProvider(GridSpec{}, Params{}) {}
    explicit ConstantVelocityProvider(GridSpec spec) : ConstantVelocityProvider(spec, Params{}) {}
    ConstantVelocityProvider(GridSpec spec, Params params) : spec_(spec), params_(params) {}

    DisplacementEvidence estimate(const Tracklet& tracklet, int /*frame*/,
                                  const BoundingBox& context) const override {
        DisplacementGrid g = spec_.makeGrid(context);
        const double bandwidthPx = params_.bandwidthBins * std::max(g.stepX(), g.stepY());
        g = detail::gaussianBump(std::move(g), tracklet.speed(), bandwidthPx);
        detail::capPeakConfidence(g, params_.peakConfidence);
        return DisplacementEvidence::fromGrid(std::move(g));
    }

private:
    GridSpec spec_;
    Params params_;
};

/// Geometry-proxy similarity: plain box overlap.
class IdentityOverlapProvider : public SimilarityProvider {
public:
    double similarity(const BoundingBox& a, const BoundingBox& b, int /*frame*/) const override {
        return iou(a, b);
    }
};

/// Test-only displacement oracle: a bump centered at the true ground-truth
/// displacement plus size-proportional noise, emulating the statistics of a
/// detector whose localization error grows with box size. Randomness is
/// derived per (frame, identity), never from call order.
class NoisyTruthProvider : public DisplacementProvider {
public:
    struct Params {
        double noiseAlpha = 0.0;     // center noise std = alpha * box diagonal
        double bumpFactor = 1.0;     // bump width = bumpFactor * noise std
        double degradeProb = 0.0;    // chance of a transient low-quality estimate
        double degradeFactor = 3.0;  // noise multiplier when degraded
        std::uint64_t seed = 0;
    };

    NoisyTruthProvider(const SequenceBundle& truth, GridSpec spec, Params params)
        : truth_(&truth), spec_(spec), params_(params) {}

    DisplacementEvidence estimate(const Tracklet& tracklet, int frame,
                                  const BoundingBox& context) const override {
        DisplacementGrid g = spec_.makeGrid(context);
        const BoundingBox& anchor = tracklet.lastBox();
        const int prevFrame = frame - 1;

        const LabeledBox* prev = bestOverlap(anchor, prevFrame);
        const LabeledBox* cur = prev ? findId(prev->id, frame) : nullptr;
        if (!prev || !cur) {
            // No usable truth (object left the scene or the track drifted off):
            // fall back to a low-confidence bump at the current speed.
            g = detail::gaussianBump(std::move(g), tracklet.speed(),
                                     2.0 * std::max(g.stepX(), g.stepY()));
            detail::capPeakConfidence(g, 0.1);
            return DisplacementEvidence::fromGrid(std::move(g));
        }

        const Displacement truthDisp{cur->box.x - prev->box.x, cur->box.y - prev->box.y};
        Rng rng(hashCombine(hashCombine(params_.seed, static_cast<std::uint64_t>(frame) * 2654435761ULL),
                            static_cast<std::uint64_t>(prev->id)));
        double noiseStd = params_.noiseAlpha * anchor.diagonal();
        if (params_.degradeProb > 0.0 && rng.bernoulli(params_.degradeProb))
            noiseStd *= params_.degradeFactor;
        const Displacement center{truthDisp.dx + rng.gaussian(0.0, noiseStd),
                                  truthDisp.dy + rng.gaussian(0.0, noiseStd)};
        g = detail::gaussianBump(std::move(g), center, params_.bumpFactor * noiseStd);
        return DisplacementEvidence::fromGrid(std::move(g));
    }

private:
    const LabeledBox* bestOverlap(const BoundingBox& box, int frame) const {
        const LabeledBox* best = nullptr;
        double bestIou = 0.0;
        for (const LabeledBox& lb : truth_->groundTruthAt(frame)) {
            const double v = iou(box, lb.box);
            if (v > bestIou) {
                bestIou = v;
                best = &lb;
            }
        }
        return best;
    }

    const LabeledBox* findId(int id, int frame) const {
        for (const LabeledBox& lb : truth_->groundTruthAt(frame))
            if (lb.id == id) return &lb;
        return nullptr;
    }

    const SequenceBundle* truth_;
    GridSpec spec_;
    Params params_;
};

/// Test-only similarity oracle: 1 when both boxes cover the same ground-truth
/// identity at >= 0.5 overlap, else 0.
class TruthSimilarityProvider : public SimilarityProvider {
public:
    explicit TruthSimilarityProvider(const SequenceBundle& truth) : truth_(&truth) {}

    double similarity(const BoundingBox& a, const BoundingBox& b, int frame) const override {
        const int ia = identityOf(a, frame);
        return ia != 0 && ia == identityOf(b, frame) ? 1.0 : 0.0;
    }

private:
    int identityOf(const BoundingBox& box, int frame) const {
        int best = 0;
        double bestIou = 0.5;  // must reach 0.5 to count as the same object
        for (const LabeledBox& lb : truth_->groundTruthAt(frame)) {
            const double v = iou(box, lb.box);
            if (v >= bestIou) {
                bestIou = v;
                best = lb.id;
            }
        }
        return best;
    }

    const SequenceBundle* truth_;
};

/// File-backed displacement provider. Grids are keyed by
/// (sequence, frame, anchor box rounded to 2 decimals); bins absent from the
/// file default to zero confidence before renormalization.
class FileOracleDisplacementProvider : public DisplacementProvider {
public:
    FileOracleDisplacementProvider(const std::string& path, std::string sequence, GridSpec spec)
        : sequence_(std::move(sequence)), spec_(spec) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open displacement oracle file: " + path);
        std::string line;
        int lineNo = 0;
        while (std::getline(in, line)) {
            ++lineNo;
            if (line.empty() || line == "\r") continue;
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string item;
            while (std::getline(ss, item, ',')) f.push_back(item);
            if (f.size() != 8)
                throw IoError(path + ":" + std::to_string(lineNo) +
                              ": expected `seq,frame,anchor_x,anchor_y,anchor_w,anchor_h,bin_index,confidence`");
            const int frame = static_cast<int>(detail::parseField(f[1], path, lineNo));
            const BoundingBox anchor{detail::parseField(f[2], path, lineNo), detail::parseField(f[3], path, lineNo),
                                     detail::parseField(f[4], path, lineNo), detail::parseField(f[5], path, lineNo)};
            const int bin = static_cast<int>(detail::parseField(f[6], path, lineNo));
            const double conf = detail::parseField(f[7], path, lineNo);
            if (bin < 0 || bin >= spec_.binsX * spec_.binsY)
                throw IoError(path + ":" + std::to_string(lineNo) + ": bin index out of range");
            auto& bins = grids_[key(f[0], frame, anchor)];
            if (bins.empty()) bins.assign(static_cast<std::size_t>(spec_.binsX * spec_.binsY), 0.0);
            bins[static_cast<std::size_t>(bin)] = conf;
        }
    }

    DisplacementEvidence estimate(const Tracklet& tracklet, int frame,
                                  const BoundingBox& context) const override {
        const auto it = grids_.find(key(sequence_, frame, tracklet.lastBox()));
        if (it == grids_.end())
            throw IoError("displacement oracle: no entry for sequence `" + sequence_ + "`, frame " +
                          std::to_string(frame) + ", anchor " + detail::boxKey(tracklet.lastBox()));
        DisplacementGrid g = spec_.makeGrid(context);
        g.confidences = it->second;
        double sum = g.confidenceSum();
        if (!(sum > 0.0))
            throw IoError("displacement oracle: grid for frame " + std::to_string(frame) + " has zero mass");
        for (double& c : g.confidences) c /= sum;
        return DisplacementEvidence::fromGrid(std::move(g));
    }

private:
    static std::string key(const std::string& seq, int frame, const BoundingBox& anchor) {
        return seq + "|" + std::to_string(frame) + "|" + detail::boxKey(anchor);
    }

    std::string sequence_;
    GridSpec spec_;
    std::map<std::string, std::vector<double>> grids_;
};

/// File-backed similarity provider, symmetric lookup on 2-decimal box keys.
class FileOracleSimilarityProvider : public SimilarityProvider {
public:
    FileOracleSimilarityProvider(const std::string& path, std::string sequence)
        : sequence_(std::move(sequence)) {
        std::ifstream in(path);
        if (!in) throw IoError("cannot open similarity oracle file: " + path);
        std::string line;
        int lineNo = 0;
        while (std::getline(in, line)) {
            ++lineNo;
            if (line.empty() || line == "\r") continue;
            std::vector<std::string> f;
            std::stringstream ss(line);
            std::string item;
            while (std::getline(ss, item, ',')) f.push_back(item);
            if (f.size() != 11)
                throw IoError(path + ":" + std::to_string(lineNo) +
                              ": expected `seq,frame,ax,ay,aw,ah,bx,by,bw,bh,score`");
            const int frame = static_cast<int>(detail::parseField(f[1], path, lineNo));
            const BoundingBox a{detail::parseField(f[2], path, lineNo), detail::parseField(f[3], path, lineNo),
                                detail::parseField(f[4], path, lineNo), detail::parseField(f[5], path, lineNo)};
            const BoundingBox b{detail::parseField(f[6], path, lineNo), detail::parseField(f[7], path, lineNo),
                                detail::parseField(f[8], path, lineNo), detail::parseField(f[9], path, lineNo)};
            scores_[key(f[0], frame, a, b)] = detail::parseField(f[10], path, lineNo);
        }
    }

    double similarity(const BoundingBox& a, const BoundingBox& b, int frame) const override {
        auto it = scores_.find(key(sequence_, frame, a, b));
        if (it == scores_.end()) it = scores_.find(key(sequence_, frame, b, a));
        if (it == scores_.end())
            throw IoError("similarity oracle: no entry for sequence `" + sequence_ + "`, frame " +
                          std::to_string(frame) + ", boxes " + detail::boxKey(a) + " / " + detail::boxKey(b));
        return it->second;
    }

private:
    static std::string key(const std::string& seq, int frame, const BoundingBox& a, const BoundingBox& b) {
        return seq + "|" + std::to_string(frame) + "|" + detail::boxKey(a) + "|" + detail::boxKey(b);
    }

    std::string sequence_;
    std::map<std::string, double> scores_;
};

}  // namespace crftrack
