// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <algorithm>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "crftrack/assignment.hpp"
#include "crftrack/config.hpp"
#include "crftrack/crf.hpp"
#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"
#include "crftrack/mot_io.hpp"
#include "crftrack/providers.hpp"
#include "crftrack/tracklet.hpp"

namespace crftrack {

struct TrackerParams {
    CrfParams crf;
    GridSpec grid;
    int kInit = 4;                 // candidate frames required before promotion
    int mTerm = 5;                 // allowed consecutive misses; terminate beyond
    double initIouGate = 0.3;      // candidate extension needs overlap above this
    double initVisualGate = 0.8;   // ... and visual similarity above this
    double lambda = 1.0;           // visual/spatial balance in the overall similarity
    double contextWidthFactor = 5.0;
    double contextHeightFactor = 2.0;
    bool emitVirtual = true;       // keep occlusion-coasted boxes in the output
    bool backfillCandidates = true;// emit a promoted candidate's past boxes retroactively

    static TrackerParams fromConfig(const Config& cfg) {
        TrackerParams p;
        p.crf = CrfParams::fromConfig(cfg);
        p.kInit = cfg.getInt("k_init", p.kInit);
        p.mTerm = cfg.getInt("m_term", p.mTerm);
        p.initIouGate = cfg.getDouble("init_iou_gate", p.initIouGate);
        p.initVisualGate = cfg.getDouble("init_visual_gate", p.initVisualGate);
        p.lambda = cfg.getDouble("lambda", p.lambda);
        p.contextWidthFactor = cfg.getDouble("context_width_factor", p.contextWidthFactor);
        p.contextHeightFactor = cfg.getDouble("context_height_factor", p.contextHeightFactor);
        p.emitVirtual = cfg.getBool("emit_virtual", p.emitVirtual);
        p.backfillCandidates = cfg.getBool("backfill_candidates", p.backfillCandidates);
        p.grid.binsX = cfg.getInt("grid.bins_x", p.grid.binsX);
        p.grid.binsY = cfg.getInt("grid.bins_y", p.grid.binsY);
        if (cfg.has("grid.range_x") || cfg.has("grid.range_y")) {
            p.grid.fixedRange = true;
            p.grid.fixedRangeX = cfg.getDouble("grid.range_x");
            p.grid.fixedRangeY = cfg.getDouble("grid.range_y", p.grid.fixedRangeX);
        }
        if (p.kInit < 1) throw ConfigError("k_init must be >= 1");
        if (p.mTerm < 0) throw ConfigError("m_term must be >= 0");
        return p;
    }
};

struct FrameStats {
    int frame = 0;
    int inferenceIterations = 0;
    int activeTracklets = 0;
    int candidates = 0;
};

struct RunSummary {
    int trackletsCreated = 0;
    int trackletsTerminated = 0;
    double meanInferenceIterations = 0.0;
    int frames = 0;
};

/// The per-sequence online driver: estimation, inference, association,
/// occlusion handling, candidate initialization, and termination, in that
/// order, one frame at a time. Owns all tracklets of one sequence.
class Tracker {
public:
    Tracker(TrackerParams params, const DisplacementProvider& displacement,
            const SimilarityProvider& similarity)
        : params_(std::move(params)), displacement_(&displacement), similarity_(&similarity) {
        params_.crf.validate();
    }

    int currentFrame() const { return frame_; }
    const std::vector<Tracklet>& tracklets() const { return tracklets_; }
    const std::vector<Tracklet>& candidates() const { return candidates_; }
    const std::vector<TrackRecord>& output() const { return output_; }
    const std::vector<FrameStats>& frameStats() const { return stats_; }

    RunSummary summary() const {
        RunSummary s;
        s.trackletsCreated = created_;
        s.trackletsTerminated = terminated_;
        s.frames = frame_;
        double iterSum = 0.0;
        int iterFrames = 0;
        for (const FrameStats& fs : stats_) {
            if (fs.activeTracklets > 0) {
                iterSum += fs.inferenceIterations;
                ++iterFrames;
            }
        }
        s.meanInferenceIterations = iterFrames > 0 ? iterSum / iterFrames : 0.0;
        return s;
    }

    /// Advances the tracker by one frame. `detections` must belong to frame
    /// currentFrame()+1.
    void stepFrame(int frame, const std::vector<Detection>& detections) {
        if (frame != frame_ + 1)
            throw InvariantError("stepFrame: expected frame " + std::to_string(frame_ + 1) + ", got " +
                                 std::to_string(frame));
        frame_ = frame;
        FrameStats stats;
        stats.frame = frame;

        // (1)-(2) displacement evidence and joint inference for live tracklets.
        std::vector<std::size_t> liveIdx;
        for (std::size_t i = 0; i < tracklets_.size(); ++i) {
            const TrackStatus st = tracklets_[i].status();
            if (st == TrackStatus::Active || st == TrackStatus::Occluded) liveIdx.push_back(i);
        }
        std::vector<Displacement> inferred(liveIdx.size());
        if (!liveIdx.empty()) {
            std::vector<CrfNode> nodes;
            nodes.reserve(liveIdx.size());
            for (std::size_t li : liveIdx) {
                Tracklet& t = tracklets_[li];
                const BoundingBox context =
                    enlargeBox(t.lastBox(), params_.contextWidthFactor, params_.contextHeightFactor);
                CrfNode node;
                node.trackletId = t.id();
                node.evidence = displacement_->estimate(t, frame, context);
                t.noteEvidenceMean(node.evidence.meanDisplacement);
                node.w1 = unaryConfidenceWeight(node.evidence.maxConfidence, params_.crf.a1, params_.crf.b1);
                node.speed = t.speed();
                node.area = t.lastBox().area();
                node.center = t.lastBox().center();
                nodes.push_back(std::move(node));
            }
            const InferenceResult result = infer(nodes, params_.crf);
            inferred = result.displacements;
            stats.inferenceIterations = result.iterations;
        }

        // (3) predicted locations.
        std::vector<TrackCandidatePair> predicted;
        std::map<int, BoundingBox> predictedById;
        for (std::size_t k = 0; k < liveIdx.size(); ++k) {
            const Tracklet& t = tracklets_[liveIdx[k]];
            const BoundingBox b = t.lastBox().translated(inferred[k]);
            predicted.push_back({t.id(), b});
            predictedById[t.id()] = b;
        }

        // (4) tracklet-detection association.
        std::vector<BoundingBox> detBoxes;
        detBoxes.reserve(detections.size());
        for (const Detection& d : detections) detBoxes.push_back(d.box);
        AssociationGates gates;
        gates.lambda = params_.lambda;
        const FrameAssociation assoc = associateFrame(
            predicted, detBoxes,
            [&](const BoundingBox& a, const BoundingBox& b) { return similarity_->similarity(a, b, frame); },
            gates);

        for (const Match& m : assoc.matches) {
            Tracklet& t = trackletById(m.trackletId);
            const BoundingBox& det = detBoxes[static_cast<std::size_t>(m.detectionIndex)];
            const BoundingBox committed = m.action == CommitAction::Detection
                                              ? det
                                              : averageBoxes(det, predictedById.at(m.trackletId));
            t.append(frame, committed, m.action == CommitAction::Detection ? Provenance::Detection
                                                                           : Provenance::Averaged);
            t.setStatus(TrackStatus::Active);
        }

        // (5) occlusion handling: unmatched live tracklets coast on their
        // inferred displacement as virtual tracklets.
        for (int id : assoc.unmatchedTracklets) handleOcclusion(trackletById(id), predictedById.at(id));

        // (6) candidate extension, seeding, and promotion.
        std::vector<int> freeDetections = assoc.unmatchedDetections;
        extendCandidates(frame, detections, freeDetections);

        // (7) termination of stale virtual tracklets.
        terminateStale();

        // (8) emit committed boxes of this frame.
        for (const Tracklet& t : tracklets_) {
            if (t.status() == TrackStatus::Terminated || t.lastFrame() != frame) continue;
            if (!params_.emitVirtual && t.last().provenance == Provenance::Virtual) continue;
            output_.push_back({frame, t.id(), t.lastBox()});
        }

        stats.activeTracklets = static_cast<int>(liveIdx.size());
        stats.candidates = static_cast<int>(candidates_.size());
        stats_.push_back(stats);
    }

    /// Runs a whole sequence and returns the accumulated output records.
    const std::vector<TrackRecord>& run(const SequenceBundle& bundle) {
        for (int f = 1; f <= bundle.frameCount; ++f) stepFrame(f, bundle.detectionsAt(f));
        return output_;
    }

    /// Appends the predicted box as a virtual entry and marks the tracklet
    /// occluded. Termination is handled separately so the final virtual box
    /// of an expiring tracklet is still recorded.
    void handleOcclusion(Tracklet& t, const BoundingBox& predictedBox) {
        t.append(frame_, predictedBox, Provenance::Virtual);
        t.setStatus(TrackStatus::Occluded);
    }

    /// Terminates tracklets missing for more than mTerm consecutive frames.
    void terminateStale() {
        for (Tracklet& t : tracklets_) {
            if (t.status() == TrackStatus::Occluded && t.missedCount() > params_.mTerm) {
                t.setStatus(TrackStatus::Terminated);
                ++terminated_;
            }
        }
    }

private:
    Tracklet& trackletById(int id) {
        for (Tracklet& t : tracklets_)
            if (t.id() == id) return t;
        throw InvariantError("unknown tracklet id " + std::to_string(id));
    }

    /// Candidate lifecycle: each candidate predicts its next box from its own
    /// evidence (unary only), gets matched against the leftover detections
    /// under the dual gate, extends or is dropped, and is promoted to a real
    /// tracklet with a fresh id once it spans kInit frames.
    void extendCandidates(int frame, const std::vector<Detection>& detections,
                          const std::vector<int>& freeDetections) {
        std::vector<char> detUsed(detections.size(), 0);
        for (std::size_t i = 0; i < detections.size(); ++i) detUsed[i] = 1;
        for (int idx : freeDetections) detUsed[static_cast<std::size_t>(idx)] = 0;

        std::vector<Tracklet> survivors;
        if (!candidates_.empty() && !freeDetections.empty()) {
            // Dual-gated similarity matrix over (candidate, free detection).
            ScoreMatrix scores(candidates_.size(), freeDetections.size());
            std::vector<BoundingBox> predictions(candidates_.size());
            for (std::size_t r = 0; r < candidates_.size(); ++r) {
                Tracklet& cand = candidates_[r];
                const BoundingBox context =
                    enlargeBox(cand.lastBox(), params_.contextWidthFactor, params_.contextHeightFactor);
                const DisplacementEvidence ev = displacement_->estimate(cand, frame, context);
                cand.noteEvidenceMean(ev.meanDisplacement);
                predictions[r] = cand.lastBox().translated(ev.meanDisplacement);
                for (std::size_t c = 0; c < freeDetections.size(); ++c) {
                    const BoundingBox& det = detections[static_cast<std::size_t>(freeDetections[c])].box;
                    const double overlap = iou(predictions[r], det);
                    const double visual = similarity_->similarity(predictions[r], det, frame);
                    const bool pass = overlap > params_.initIouGate && visual > params_.initVisualGate;
                    scores.set(r, c, overallSimilarity(visual, overlap, params_.lambda), pass);
                }
            }
            const AssignmentResult assigned = solveAssignment(scores);
            for (std::size_t r = 0; r < candidates_.size(); ++r) {
                const int c = assigned.rowToCol[r];
                if (c < 0) continue;  // gate failed or lost the assignment: candidate is dropped
                const int detIdx = freeDetections[static_cast<std::size_t>(c)];
                Tracklet cand = std::move(candidates_[r]);
                cand.append(frame, detections[static_cast<std::size_t>(detIdx)].box, Provenance::Detection);
                cand.bumpCandidateCount();
                detUsed[static_cast<std::size_t>(detIdx)] = 1;
                survivors.push_back(std::move(cand));
            }
        }

        // Leftover detections seed new length-1 candidates. Candidates draw
        // from the same id counter; promotion assigns another fresh id, so no
        // id is ever reused.
        for (int idx : freeDetections) {
            if (detUsed[static_cast<std::size_t>(idx)]) continue;
            survivors.emplace_back(nextId_++, frame,
                                   detections[static_cast<std::size_t>(idx)].box, TrackStatus::Candidate);
        }

        // Promotion: candidates spanning kInit frames become tracklets.
        candidates_.clear();
        for (Tracklet& cand : survivors) {
            if (cand.candidateCount() >= params_.kInit) {
                cand.assignId(nextId_++);
                cand.setStatus(TrackStatus::Active);
                ++created_;
                if (params_.backfillCandidates)
                    for (std::size_t e = 0; e + 1 < cand.history().size(); ++e)
                        output_.push_back({cand.history()[e].frame, cand.id(), cand.history()[e].box});
                tracklets_.push_back(std::move(cand));
            } else {
                candidates_.push_back(std::move(cand));
            }
        }
    }

    TrackerParams params_;
    const DisplacementProvider* displacement_;
    const SimilarityProvider* similarity_;
    std::vector<Tracklet> tracklets_;
    std::vector<Tracklet> candidates_;
    std::vector<TrackRecord> output_;
    std::vector<FrameStats> stats_;
    int frame_ = 0;
    int nextId_ = 1;
    int created_ = 0;
    int terminated_ = 0;
};

}  // namespace crftrack
