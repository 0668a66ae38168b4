// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "crftrack/assignment.hpp"
#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"
#include "crftrack/mot_io.hpp"

namespace crftrack {

struct FrameMatch {
    int frame = 0;
    int gtId = 0;
    int hypId = 0;
    double overlap = 0.0;
};

/// CLEAR-style evaluation result. MOTA and MOTP are percentages; MT/ML are
/// trajectory ratios; the audit trail lists every per-frame correspondence.
struct MetricsReport {
    double mota = 0.0;
    double motp = 0.0;
    double mt = 0.0;
    double ml = 0.0;
    long long fp = 0;
    long long fn = 0;
    long long idsw = 0;
    long long frag = 0;
    long long totalGt = 0;
    long long matches = 0;
    std::vector<FrameMatch> perFrameMatches;
};

/// Evaluates hypothesis tracks against ground truth.
///
/// Correspondences persist: a match from the previous frame is kept while
/// both boxes exist and still overlap at `matchIou`; only then are the
/// remaining pairs matched by maximum overlap. An identity switch is counted
/// whenever a ground-truth object's matched hypothesis id differs from the
/// most recent id it was ever matched to. A fragmentation is counted at each
/// tracked-to-untracked transition within a trajectory's lifespan. MOTP is
/// the mean overlap over all matches, as a percentage.
inline MetricsReport evaluate(const std::vector<std::vector<LabeledBox>>& gt,
                              const std::vector<std::vector<LabeledBox>>& hyp,
                              double matchIou = 0.5) {
    if (hyp.size() > gt.size())
        throw InvariantError("evaluate: hypothesis covers frames beyond the ground-truth range");
    MetricsReport report;

    std::map<int, int> activeCorr;           // gt id -> hyp id matched at the previous frame
    std::map<int, int> lastMatchedHyp;       // gt id -> most recent matched hyp id (across gaps)
    std::map<int, int> gtLifespan;           // gt id -> frames present
    std::map<int, int> gtCovered;            // gt id -> frames matched
    std::map<int, bool> gtTrackedPrev;       // tracked state at the previous frame of its lifespan
    double overlapSum = 0.0;

    for (std::size_t f = 0; f < gt.size(); ++f) {
        const int frame = static_cast<int>(f) + 1;
        const std::vector<LabeledBox>& gtBoxes = gt[f];
        static const std::vector<LabeledBox> none;
        const std::vector<LabeledBox>& hypBoxes = f < hyp.size() ? hyp[f] : none;

        std::map<int, const LabeledBox*> gtById, hypById;
        for (const LabeledBox& g : gtBoxes) gtById[g.id] = &g;
        for (const LabeledBox& h : hypBoxes) hypById[h.id] = &h;
        if (gtById.size() != gtBoxes.size())
            throw InvariantError("evaluate: duplicate ground-truth id in frame " + std::to_string(frame));
        if (hypById.size() != hypBoxes.size())
            throw InvariantError("evaluate: duplicate hypothesis id in frame " + std::to_string(frame));

        std::map<int, int> current;
        std::set<int> usedHyp;

        // Carry over still-valid correspondences first.
        for (const auto& [gid, hid] : activeCorr) {
            const auto g = gtById.find(gid);
            const auto h = hypById.find(hid);
            if (g == gtById.end() || h == hypById.end()) continue;
            const double v = iou(g->second->box, h->second->box);
            if (v >= matchIou) {
                current[gid] = hid;
                usedHyp.insert(hid);
                overlapSum += v;
                report.perFrameMatches.push_back({frame, gid, hid, v});
            }
        }

        // Maximum-overlap matching for the rest.
        std::vector<const LabeledBox*> freeGt, freeHyp;
        for (const LabeledBox& g : gtBoxes)
            if (!current.count(g.id)) freeGt.push_back(&g);
        for (const LabeledBox& h : hypBoxes)
            if (!usedHyp.count(h.id)) freeHyp.push_back(&h);
        if (!freeGt.empty() && !freeHyp.empty()) {
            ScoreMatrix scores(freeGt.size(), freeHyp.size());
            for (std::size_t r = 0; r < freeGt.size(); ++r)
                for (std::size_t c = 0; c < freeHyp.size(); ++c) {
                    const double v = iou(freeGt[r]->box, freeHyp[c]->box);
                    scores.set(r, c, v, v >= matchIou);
                }
            const AssignmentResult assigned = solveAssignment(scores);
            for (std::size_t r = 0; r < freeGt.size(); ++r) {
                const int c = assigned.rowToCol[r];
                if (c < 0) continue;
                const double v = iou(freeGt[r]->box, freeHyp[static_cast<std::size_t>(c)]->box);
                current[freeGt[r]->id] = freeHyp[static_cast<std::size_t>(c)]->id;
                usedHyp.insert(freeHyp[static_cast<std::size_t>(c)]->id);
                overlapSum += v;
                report.perFrameMatches.push_back({frame, freeGt[r]->id, freeHyp[static_cast<std::size_t>(c)]->id, v});
            }
        }

        // Tallies.
        report.totalGt += static_cast<long long>(gtBoxes.size());
        report.matches += static_cast<long long>(current.size());
        report.fp += static_cast<long long>(hypBoxes.size() - usedHyp.size());
        report.fn += static_cast<long long>(gtBoxes.size() - current.size());
        for (const auto& [gid, hid] : current) {
            const auto prev = lastMatchedHyp.find(gid);
            if (prev != lastMatchedHyp.end() && prev->second != hid) ++report.idsw;
            lastMatchedHyp[gid] = hid;
        }
        for (const LabeledBox& g : gtBoxes) {
            ++gtLifespan[g.id];
            const bool tracked = current.count(g.id) != 0;
            if (tracked) ++gtCovered[g.id];
            const auto prev = gtTrackedPrev.find(g.id);
            if (prev != gtTrackedPrev.end() && prev->second && !tracked) ++report.frag;
            gtTrackedPrev[g.id] = tracked;
        }
        activeCorr = std::move(current);
    }

    int mtCount = 0, mlCount = 0;
    for (const auto& [gid, span] : gtLifespan) {
        const double coverage = static_cast<double>(gtCovered[gid]) / span;
        if (coverage >= 0.8) ++mtCount;
        if (coverage <= 0.2) ++mlCount;
    }
    const double trajectories = static_cast<double>(gtLifespan.size());
    report.mt = trajectories > 0 ? mtCount / trajectories : 0.0;
    report.ml = trajectories > 0 ? mlCount / trajectories : 0.0;
    report.mota = report.totalGt > 0
                      ? 100.0 * (1.0 - static_cast<double>(report.fn + report.fp + report.idsw) /
                                           static_cast<double>(report.totalGt))
                      : 100.0;
    report.motp = report.matches > 0 ? 100.0 * overlapSum / static_cast<double>(report.matches) : 0.0;
    return report;
}

/// Mean L1 displacement error between aligned prediction/truth lists.
inline double displacementError(const std::vector<Displacement>& predicted,
                                const std::vector<Displacement>& truth) {
    if (predicted.size() != truth.size())
        throw InvariantError("displacementError: prediction and truth lists differ in length");
    if (predicted.empty()) return 0.0;
    double sum = 0.0;
    for (std::size_t i = 0; i < predicted.size(); ++i) sum += (predicted[i] - truth[i]).normL1();
    return sum / static_cast<double>(predicted.size());
}

struct SequenceMetricsRow {
    std::string name;
    MetricsReport report;
};

/// Aligned text table, one row per sequence plus an OVERALL row.
inline std::string formatMetricsTable(const std::vector<SequenceMetricsRow>& rows) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %8s %8s %6s %6s %8s %8s %6s %6s\n", "sequence", "MOTA",
                  "MOTP", "MT", "ML", "FP", "FN", "IDSW", "Frag");
    out << line;
    MetricsReport overall;
    double motpWeighted = 0.0;
    for (const SequenceMetricsRow& row : rows) {
        const MetricsReport& r = row.report;
        std::snprintf(line, sizeof(line), "%-20s %7.2f%% %7.2f%% %6.2f %6.2f %8lld %8lld %6lld %6lld\n",
                      row.name.c_str(), r.mota, r.motp, r.mt, r.ml, r.fp, r.fn, r.idsw, r.frag);
        out << line;
        overall.fp += r.fp;
        overall.fn += r.fn;
        overall.idsw += r.idsw;
        overall.frag += r.frag;
        overall.totalGt += r.totalGt;
        overall.matches += r.matches;
        motpWeighted += r.motp * static_cast<double>(r.matches);
    }
    if (rows.size() > 1) {
        overall.mota = overall.totalGt > 0
                           ? 100.0 * (1.0 - static_cast<double>(overall.fn + overall.fp + overall.idsw) /
                                                static_cast<double>(overall.totalGt))
                           : 100.0;
        overall.motp = overall.matches > 0 ? motpWeighted / static_cast<double>(overall.matches) : 0.0;
        std::snprintf(line, sizeof(line), "%-20s %7.2f%% %7.2f%% %6s %6s %8lld %8lld %6lld %6lld\n",
                      "OVERALL", overall.mota, overall.motp, "-", "-", overall.fp, overall.fn,
                      overall.idsw, overall.frag);
        out << line;
    }
    return out.str();
}

/// CSV flavour of the same table.
inline std::string formatMetricsCsv(const std::vector<SequenceMetricsRow>& rows) {
    std::ostringstream out;
    out << "sequence,MOTA,MOTP,MT,ML,FP,FN,IDSW,Frag\n";
    char line[256];
    for (const SequenceMetricsRow& row : rows) {
        const MetricsReport& r = row.report;
        std::snprintf(line, sizeof(line), "%s,%.4f,%.4f,%.4f,%.4f,%lld,%lld,%lld,%lld\n",
                      row.name.c_str(), r.mota, r.motp, r.mt, r.ml, r.fp, r.fn, r.idsw, r.frag);
        out << line;
    }
    return out.str();
}

}  // namespace crftrack
