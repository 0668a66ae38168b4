// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <string>
#include <vector>

#include "crftrack/metrics.hpp"
#include "crftrack/mot_io.hpp"
#include "crftrack/providers.hpp"
#include "crftrack/simulate.hpp"
#include "crftrack/tracker.hpp"

namespace crftrack {

/// Converts accumulated track records into per-frame labeled boxes for the
/// evaluator.
inline std::vector<std::vector<LabeledBox>> recordsToFrames(const std::vector<TrackRecord>& records,
                                                            int frameCount) {
    std::vector<std::vector<LabeledBox>> frames(static_cast<std::size_t>(frameCount));
    std::vector<TrackRecord> sorted = records;
    std::stable_sort(sorted.begin(), sorted.end(), [](const TrackRecord& a, const TrackRecord& b) {
        return a.frame != b.frame ? a.frame < b.frame : a.id < b.id;
    });
    for (const TrackRecord& r : sorted)
        if (r.frame >= 1 && r.frame <= frameCount)
            frames[static_cast<std::size_t>(r.frame - 1)].push_back({r.id, r.box});
    return frames;
}

struct AblationRun {
    PairwiseMode mode;
    std::uint64_t seed = 0;
    MetricsReport report;
    std::vector<TrackRecord> tracks;
};

struct AblationSummary {
    PairwiseMode mode;
    double meanMota = 0.0;
    double meanMotp = 0.0;
    double meanFp = 0.0;
    double meanFn = 0.0;
    double meanIdsw = 0.0;
    std::vector<AblationRun> runs;
};

struct AblationSettings {
    SyntheticScenario scenario;          // seed field is overridden per run
    TrackerParams tracker;               // pairwiseMode is overridden per mode
    NoisyTruthProvider::Params provider; // seed field is overridden per run
    std::vector<PairwiseMode> modes{PairwiseMode::Asymmetric, PairwiseMode::SymmetricGaussian,
                                    PairwiseMode::None};
    int numSeeds = 1;
    std::uint64_t baseSeed = 1;
};

/// Runs track+eval for every (mode, seed) pair on identically seeded data:
/// within one seed, every mode sees the same detections and the same provider
/// noise, so rows differ only by the pairwise term.
inline std::vector<AblationSummary> runAblation(const AblationSettings& settings) {
    std::vector<AblationSummary> summaries;
    for (PairwiseMode mode : settings.modes) {
        AblationSummary summary;
        summary.mode = mode;
        for (int s = 0; s < settings.numSeeds; ++s) {
            const std::uint64_t runSeed = settings.baseSeed + static_cast<std::uint64_t>(s);
            SyntheticScenario scenario = settings.scenario;
            scenario.seed = runSeed;
            const SequenceBundle bundle = generateScenario(scenario);

            TrackerParams params = settings.tracker;
            params.crf.pairwiseMode = mode;
            NoisyTruthProvider::Params provParams = settings.provider;
            provParams.seed = hashCombine(runSeed, 0x5EEDULL);
            const NoisyTruthProvider displacement(bundle, params.grid, provParams);
            const TruthSimilarityProvider similarity(bundle);

            Tracker tracker(params, displacement, similarity);
            AblationRun run;
            run.mode = mode;
            run.seed = runSeed;
            run.tracks = tracker.run(bundle);
            run.report = evaluate(bundle.groundTruth, recordsToFrames(run.tracks, bundle.frameCount));
            summary.runs.push_back(std::move(run));
        }
        const double n = static_cast<double>(summary.runs.size());
        for (const AblationRun& run : summary.runs) {
            summary.meanMota += run.report.mota / n;
            summary.meanMotp += run.report.motp / n;
            summary.meanFp += static_cast<double>(run.report.fp) / n;
            summary.meanFn += static_cast<double>(run.report.fn) / n;
            summary.meanIdsw += static_cast<double>(run.report.idsw) / n;
        }
        summaries.push_back(std::move(summary));
    }
    return summaries;
}

inline std::string formatAblationTable(const std::vector<AblationSummary>& summaries) {
    std::ostringstream out;
    char line[256];
    std::snprintf(line, sizeof(line), "%-20s %10s %10s %10s %10s %10s\n", "pairwise_mode",
                  "mean MOTA", "mean MOTP", "mean FP", "mean FN", "mean IDSW");
    out << line;
    for (const AblationSummary& s : summaries) {
        std::snprintf(line, sizeof(line), "%-20s %9.2f%% %9.2f%% %10.2f %10.2f %10.2f\n",
                      toString(s.mode).c_str(), s.meanMota, s.meanMotp, s.meanFp, s.meanFn, s.meanIdsw);
        out << line;
    }
    return out.str();
}

inline std::string formatAblationCsv(const std::vector<AblationSummary>& summaries) {
    std::ostringstream out;
    out << "pairwise_mode,seed,MOTA,MOTP,FP,FN,IDSW,Frag\n";
    char line[256];
    for (const AblationSummary& s : summaries) {
        for (const AblationRun& run : s.runs) {
            std::snprintf(line, sizeof(line), "%s,%llu,%.4f,%.4f,%lld,%lld,%lld,%lld\n",
                          toString(s.mode).c_str(), static_cast<unsigned long long>(run.seed),
                          run.report.mota, run.report.motp, run.report.fp, run.report.fn,
                          run.report.idsw, run.report.frag);
            out << line;
        }
    }
    return out.str();
}

}  // namespace crftrack
