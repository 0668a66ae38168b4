// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"

namespace crftrack {

struct LabeledBox {
    int id = 0;
    BoundingBox box;
};

/// One sequence worth of input data: per-frame detections and, when
/// available, per-frame ground-truth boxes. Frames are 1-based and
/// contiguous; frames without entries hold empty lists.
struct SequenceBundle {
    std::string name = "seq";
    int frameCount = 0;
    double frameRate = 25.0;
    std::vector<std::vector<Detection>> detections;   // index 0 <-> frame 1
    std::vector<std::vector<LabeledBox>> groundTruth; // empty when absent

    bool hasGroundTruth() const { return !groundTruth.empty(); }

    const std::vector<Detection>& detectionsAt(int frame) const {
        static const std::vector<Detection> empty;
        if (frame < 1 || frame > static_cast<int>(detections.size())) return empty;
        return detections[static_cast<std::size_t>(frame - 1)];
    }

    const std::vector<LabeledBox>& groundTruthAt(int frame) const {
        static const std::vector<LabeledBox> empty;
        if (frame < 1 || frame > static_cast<int>(groundTruth.size())) return empty;
        return groundTruth[static_cast<std::size_t>(frame - 1)];
    }

    void ensureFrames(int frame) {
        if (frame > frameCount) frameCount = frame;
        if (static_cast<int>(detections.size()) < frameCount) detections.resize(static_cast<std::size_t>(frameCount));
    }
};

namespace detail {

struct CsvLine {
    int frame;
    int id;
    BoundingBox box;
    double conf;
};

inline double parseField(const std::string& field, const std::string& path, int lineNo) {
    try {
        std::size_t used = 0;
        const double v = std::stod(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        throw IoError(path + ":" + std::to_string(lineNo) + ": malformed numeric field `" + field + "`");
    }
}

/// Parses one `frame,id,x,y,w,h,conf,...` line; trailing fields tolerated.
inline CsvLine parseCsvLine(const std::string& line, const std::string& path, int lineNo) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) fields.push_back(item);
    if (fields.size() < 6)
        throw IoError(path + ":" + std::to_string(lineNo) + ": expected at least 6 comma-separated fields");
    CsvLine out;
    out.frame = static_cast<int>(parseField(fields[0], path, lineNo));
    out.id = static_cast<int>(parseField(fields[1], path, lineNo));
    out.box = {parseField(fields[2], path, lineNo), parseField(fields[3], path, lineNo),
               parseField(fields[4], path, lineNo), parseField(fields[5], path, lineNo)};
    out.conf = fields.size() >= 7 ? parseField(fields[6], path, lineNo) : 1.0;
    if (out.frame < 1)
        throw IoError(path + ":" + std::to_string(lineNo) + ": frame index must be >= 1");
    if (!(out.box.w > 0.0) || !(out.box.h > 0.0))
        throw IoError(path + ":" + std::to_string(lineNo) + ": box width/height must be positive");
    return out;
}

}  // namespace detail

/// Reads a MOT-style detection file (`frame,id,x,y,w,h,conf,x,y,z`, id = -1).
inline SequenceBundle readDetections(const std::string& path, const std::string& name = "seq") {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open detections file: " + path);
    SequenceBundle bundle;
    bundle.name = name;
    std::string line;
    int lineNo = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line == "\r") continue;
        const detail::CsvLine row = detail::parseCsvLine(line, path, lineNo);
        bundle.ensureFrames(row.frame);
        bundle.detections[static_cast<std::size_t>(row.frame - 1)].push_back({row.frame, row.box, row.conf});
    }
    return bundle;
}

/// Reads identity-labeled boxes in the same CSV schema (ground truth or a
/// finished tracker output). Entries with id < 1 are rejected.
inline std::vector<std::vector<LabeledBox>> readLabeledBoxes(const std::string& path, int* frameCount = nullptr) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open file: " + path);
    std::vector<std::vector<LabeledBox>> frames;
    std::string line;
    int lineNo = 0;
    int maxFrame = 0;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty() || line == "\r") continue;
        const detail::CsvLine row = detail::parseCsvLine(line, path, lineNo);
        if (row.id < 1)
            throw IoError(path + ":" + std::to_string(lineNo) + ": identity field must be >= 1");
        maxFrame = std::max(maxFrame, row.frame);
        if (static_cast<int>(frames.size()) < maxFrame) frames.resize(static_cast<std::size_t>(maxFrame));
        frames[static_cast<std::size_t>(row.frame - 1)].push_back({row.id, row.box});
    }
    if (frameCount) *frameCount = maxFrame;
    return frames;
}

/// Attaches a ground-truth file to an existing bundle.
inline void loadGroundTruth(SequenceBundle& bundle, const std::string& path) {
    int frames = 0;
    bundle.groundTruth = readLabeledBoxes(path, &frames);
    if (frames > bundle.frameCount) {
        bundle.frameCount = frames;
        bundle.detections.resize(static_cast<std::size_t>(frames));
    }
    bundle.groundTruth.resize(static_cast<std::size_t>(bundle.frameCount));
}

/// One output row: a committed box of a finished track.
struct TrackRecord {
    int frame = 1;
    int id = 1;
    BoundingBox box;
};

/// Writes tracker output in the same CSV schema: positive ids, conf = 1,
/// rows sorted by frame then id, coordinates rounded to 2 decimals.
inline void writeTracks(const std::vector<TrackRecord>& records, const std::string& path) {
    std::vector<TrackRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(), [](const TrackRecord& a, const TrackRecord& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
    });
    std::ofstream out(path);
    if (!out) throw IoError("cannot write tracks file: " + path);
    char buf[160];
    for (const TrackRecord& r : sorted) {
        std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,1,-1,-1,-1\n", r.frame, r.id,
                      r.box.x, r.box.y, r.box.w, r.box.h);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path);
}

/// Writes ground truth in the same schema (conf flag 1).
inline void writeGroundTruth(const std::vector<std::vector<LabeledBox>>& gt, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write ground-truth file: " + path);
    char buf[160];
    for (std::size_t f = 0; f < gt.size(); ++f) {
        for (const LabeledBox& lb : gt[f]) {
            std::snprintf(buf, sizeof(buf), "%zu,%d,%.2f,%.2f,%.2f,%.2f,1,-1,-1,-1\n", f + 1, lb.id,
                          lb.box.x, lb.box.y, lb.box.w, lb.box.h);
            out << buf;
        }
    }
}

/// Writes detections (id = -1) in the same schema.
inline void writeDetections(const SequenceBundle& bundle, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write detections file: " + path);
    char buf[160];
    for (int f = 1; f <= bundle.frameCount; ++f) {
        for (const Detection& d : bundle.detectionsAt(f)) {
            std::snprintf(buf, sizeof(buf), "%d,-1,%.2f,%.2f,%.2f,%.2f,%.6g,-1,-1,-1\n", f, d.box.x,
                          d.box.y, d.box.w, d.box.h, d.score);
            out << buf;
        }
    }
}

}  // namespace crftrack
