// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"

namespace crftrack {

enum class Provenance { Detection, Averaged, Virtual };

enum class TrackStatus { Candidate, Active, Occluded, Terminated };

struct TrackEntry {
    int frame = 0;
    BoundingBox box;
    Provenance provenance = Provenance::Detection;
};

/// A partial trajectory: identity plus per-frame boxes up to the current
/// time. History frames are contiguous (occlusion gaps carry virtual boxes),
/// `speed` is the last committed frame-to-frame displacement of the box
/// origin, and `missedCount` equals the number of trailing virtual entries.
class Tracklet {
public:
    Tracklet(int id, int frame, const BoundingBox& box, TrackStatus status)
        : id_(id), status_(status) {
        if (!box.valid()) throw InvariantError("Tracklet: invalid initial box");
        history_.push_back({frame, box, Provenance::Detection});
        if (status == TrackStatus::Candidate) candidateCount_ = 1;
    }

    int id() const { return id_; }
    void assignId(int id) { id_ = id; }

    TrackStatus status() const { return status_; }
    void setStatus(TrackStatus s) { status_ = s; }

    const std::vector<TrackEntry>& history() const { return history_; }
    const TrackEntry& last() const { return history_.back(); }
    const BoundingBox& lastBox() const { return history_.back().box; }
    int lastFrame() const { return history_.back().frame; }
    int length() const { return static_cast<int>(history_.size()); }

    int missedCount() const { return missedCount_; }
    int candidateCount() const { return candidateCount_; }
    void bumpCandidateCount() { ++candidateCount_; }

    /// Last committed displacement; for a length-1 tracklet falls back to the
    /// most recent evidence mean if one was computed, else zero.
    Displacement speed() const {
        if (length() == 1 && lastEvidenceMean_) return *lastEvidenceMean_;
        return speed_;
    }

    void noteEvidenceMean(const Displacement& mean) { lastEvidenceMean_ = mean; }

    /// Appends the committed box for the next frame. Virtual entries bump the
    /// missed counter, detections and averaged boxes reset it. Speed updates
    /// uniformly for all provenances so occluded objects keep coasting.
    void append(int frame, const BoundingBox& box, Provenance prov) {
        if (!box.valid()) throw InvariantError("Tracklet::append: invalid box");
        if (frame != lastFrame() + 1)
            throw InvariantError("Tracklet::append: frame " + std::to_string(frame) +
                                 " does not extend frame " + std::to_string(lastFrame()));
        speed_ = {box.x - lastBox().x, box.y - lastBox().y};
        if (prov == Provenance::Virtual) {
            ++missedCount_;
        } else {
            missedCount_ = 0;
        }
        history_.push_back({frame, box, prov});
    }

private:
    int id_;
    std::vector<TrackEntry> history_;
    Displacement speed_{0.0, 0.0};
    TrackStatus status_;
    int missedCount_ = 0;
    int candidateCount_ = 0;
    std::optional<Displacement> lastEvidenceMean_;
};

}  // namespace crftrack
