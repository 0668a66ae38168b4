// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#include <CLI11.hpp>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "crftrack/crftrack.hpp"

namespace fs = std::filesystem;
using namespace crftrack;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitIo = 2;
constexpr int kExitConfig = 3;
constexpr int kExitInternal = 4;

struct ProviderChoice {
    std::string displacement = "constant";  // constant | truth | oracle-file
    std::string similarity = "iou";         // iou | truth | oracle-file
    std::string gridsPath;
    std::string simsPath;
};

NoisyTruthProvider::Params providerParamsFromConfig(const Config& cfg, std::uint64_t seed) {
    NoisyTruthProvider::Params p;
    p.noiseAlpha = cfg.getDouble("provider.noise_alpha", cfg.getDouble("noise.alpha", 0.0));
    p.bumpFactor = cfg.getDouble("provider.bump_factor", 1.0);
    p.degradeProb = cfg.getDouble("provider.degrade_prob", 0.0);
    p.degradeFactor = cfg.getDouble("provider.degrade_factor", 3.0);
    p.seed = seed;
    return p;
}

std::unique_ptr<DisplacementProvider> makeDisplacementProvider(const ProviderChoice& choice,
                                                               const SequenceBundle& bundle,
                                                               const TrackerParams& params,
                                                               const Config& cfg,
                                                               std::uint64_t seed) {
    if (choice.displacement == "constant")
        return std::make_unique<ConstantVelocityProvider>(
            params.grid, ConstantVelocityProvider::Params{cfg.getDouble("provider.bandwidth_bins", 1.5),
                                                          cfg.getDouble("provider.peak_confidence", 1.0)});
    if (choice.displacement == "truth") {
        if (!bundle.hasGroundTruth())
            throw ConfigError("displacement provider `truth` needs --gt");
        return std::make_unique<NoisyTruthProvider>(bundle, params.grid,
                                                    providerParamsFromConfig(cfg, hashCombine(seed, 0x5EEDULL)));
    }
    if (choice.displacement == "oracle-file") {
        if (choice.gridsPath.empty())
            throw ConfigError("displacement provider `oracle-file` needs --grids");
        return std::make_unique<FileOracleDisplacementProvider>(choice.gridsPath, bundle.name, params.grid);
    }
    throw ConfigError("unknown displacement provider `" + choice.displacement + "`");
}

std::unique_ptr<SimilarityProvider> makeSimilarityProvider(const ProviderChoice& choice,
                                                           const SequenceBundle& bundle) {
    if (choice.similarity == "iou") return std::make_unique<IdentityOverlapProvider>();
    if (choice.similarity == "truth") {
        if (!bundle.hasGroundTruth())
            throw ConfigError("similarity provider `truth` needs --gt");
        return std::make_unique<TruthSimilarityProvider>(bundle);
    }
    if (choice.similarity == "oracle-file") {
        if (choice.simsPath.empty())
            throw ConfigError("similarity provider `oracle-file` needs --sims");
        return std::make_unique<FileOracleSimilarityProvider>(choice.simsPath, bundle.name);
    }
    throw ConfigError("unknown similarity provider `" + choice.similarity + "`");
}

void dumpOverlays(const Tracker& tracker, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write overlay file: " + path);
    out << "frame,id,x,y,w,h,provenance\n";
    const auto provName = [](Provenance p) {
        switch (p) {
            case Provenance::Detection: return "detection";
            case Provenance::Averaged: return "averaged";
            case Provenance::Virtual: return "virtual";
        }
        return "?";
    };
    char buf[160];
    for (const Tracklet& t : tracker.tracklets()) {
        for (const TrackEntry& e : t.history()) {
            std::snprintf(buf, sizeof(buf), "%d,%d,%.2f,%.2f,%.2f,%.2f,%s\n", e.frame, t.id(), e.box.x,
                          e.box.y, e.box.w, e.box.h, provName(e.provenance));
            out << buf;
        }
    }
}

/// Runs the ablation grid, optionally fanning runs out over `jobs` threads.
/// Each run writes its own slot, so the result is order-independent.
std::vector<AblationSummary> runAblationParallel(const AblationSettings& settings, int jobs) {
    if (jobs <= 1) return runAblation(settings);

    struct RunSpec {
        std::size_t modeIdx;
        int seedIdx;
    };
    std::vector<RunSpec> specs;
    for (std::size_t m = 0; m < settings.modes.size(); ++m)
        for (int s = 0; s < settings.numSeeds; ++s) specs.push_back({m, s});
    std::vector<AblationRun> slots(specs.size());

    std::atomic<std::size_t> cursor{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t idx = cursor.fetch_add(1);
            if (idx >= specs.size()) return;
            AblationSettings one = settings;
            one.modes = {settings.modes[specs[idx].modeIdx]};
            one.numSeeds = 1;
            one.baseSeed = settings.baseSeed + static_cast<std::uint64_t>(specs[idx].seedIdx);
            slots[idx] = std::move(runAblation(one)[0].runs[0]);
        }
    };
    std::vector<std::thread> pool;
    for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();

    std::vector<AblationSummary> summaries(settings.modes.size());
    for (std::size_t m = 0; m < settings.modes.size(); ++m) summaries[m].mode = settings.modes[m];
    for (std::size_t idx = 0; idx < specs.size(); ++idx)
        summaries[specs[idx].modeIdx].runs.push_back(std::move(slots[idx]));
    for (AblationSummary& s : summaries) {
        const double n = static_cast<double>(s.runs.size());
        for (const AblationRun& run : s.runs) {
            s.meanMota += run.report.mota / n;
            s.meanMotp += run.report.motp / n;
            s.meanFp += static_cast<double>(run.report.fp) / n;
            s.meanFn += static_cast<double>(run.report.fn) / n;
            s.meanIdsw += static_cast<double>(run.report.idsw) / n;
        }
    }
    return summaries;
}

int commandTrack(const std::string& detectionsPath, const std::string& gtPath,
                 const std::string& configPath, const std::string& outPath,
                 const ProviderChoice& providers, const std::string& pairwiseMode, double lambda,
                 std::uint64_t seed, const std::string& overlaysPath, const std::string& seqName) {
    Config cfg;
    if (!configPath.empty()) cfg = Config::load(configPath);
    TrackerParams params = TrackerParams::fromConfig(cfg);
    if (!pairwiseMode.empty()) params.crf.pairwiseMode = pairwiseModeFromString(pairwiseMode);
    if (lambda >= 0.0) params.lambda = lambda;

    SequenceBundle bundle = readDetections(detectionsPath, seqName);
    if (!gtPath.empty()) loadGroundTruth(bundle, gtPath);

    const auto displacement = makeDisplacementProvider(providers, bundle, params, cfg, seed);
    const auto similarity = makeSimilarityProvider(providers, bundle);

    Tracker tracker(params, *displacement, *similarity);
    tracker.run(bundle);
    writeTracks(tracker.output(), outPath);
    if (!overlaysPath.empty()) dumpOverlays(tracker, overlaysPath);

    const RunSummary s = tracker.summary();
    std::cout << bundle.name << ": frames=" << s.frames << " tracklets_created=" << s.trackletsCreated
              << " tracklets_terminated=" << s.trackletsTerminated
              << " mean_inference_iterations=" << s.meanInferenceIterations << "\n";
    return kExitOk;
}

int commandEval(const std::string& gtPath, const std::string& tracksPath, double matchIou, bool csv,
                const std::string& seqName) {
    int gtFrames = 0;
    const auto gt = readLabeledBoxes(gtPath, &gtFrames);
    const auto hyp = readLabeledBoxes(tracksPath);
    const MetricsReport report = evaluate(gt, hyp, matchIou);
    std::vector<SequenceMetricsRow> rows{{seqName, report}};
    std::cout << (csv ? formatMetricsCsv(rows) : formatMetricsTable(rows));
    return kExitOk;
}

int commandSimulate(const std::string& configPath, const std::string& outDir) {
    const Config cfg = Config::load(configPath);
    const SyntheticScenario scenario = SyntheticScenario::fromConfig(cfg);
    const SequenceBundle bundle = generateScenario(scenario);
    fs::create_directories(outDir);
    writeDetections(bundle, (fs::path(outDir) / "det.txt").string());
    writeGroundTruth(bundle.groundTruth, (fs::path(outDir) / "gt.txt").string());
    Config echo;
    scenario.toConfig(echo);
    echo.save((fs::path(outDir) / "scenario.txt").string());
    std::cout << "wrote " << bundle.frameCount << " frames to " << outDir << "\n";
    return kExitOk;
}

int commandAblate(const std::string& configPath, const std::string& outDir,
                  const std::vector<std::string>& modeNames, int numSeeds, std::uint64_t baseSeed,
                  int jobs) {
    const Config cfg = Config::load(configPath);
    AblationSettings settings;
    settings.scenario = SyntheticScenario::fromConfig(cfg);
    settings.tracker = TrackerParams::fromConfig(cfg);
    settings.provider = providerParamsFromConfig(cfg, 0);
    settings.numSeeds = numSeeds;
    settings.baseSeed = baseSeed != 0 ? baseSeed : settings.scenario.seed;
    if (!modeNames.empty()) {
        settings.modes.clear();
        for (const std::string& name : modeNames) settings.modes.push_back(pairwiseModeFromString(name));
    }

    const auto summaries = runAblationParallel(settings, jobs);

    fs::create_directories(outDir);
    std::ofstream csv((fs::path(outDir) / "ablation.csv").string());
    if (!csv) throw IoError("cannot write ablation.csv under " + outDir);
    csv << formatAblationCsv(summaries);
    for (const AblationSummary& s : summaries)
        for (const AblationRun& run : s.runs)
            writeTracks(run.tracks, (fs::path(outDir) / (toString(s.mode) + "_seed" +
                                                         std::to_string(run.seed) + ".txt"))
                                        .string());
    std::cout << formatAblationTable(summaries);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"crftrack: online multi-object tracking with mean-field-coupled displacement estimation"};
    app.require_subcommand(1);

    std::string configPath, detectionsPath, gtPath, tracksPath, outPath, overlaysPath;
    std::string pairwiseMode;
    std::string seqName = "seq";
    double lambda = -1.0;
    double matchIou = 0.5;
    std::uint64_t seed = 1;
    int jobs = 1;
    int numSeeds = 1;
    bool evalCsv = false;
    ProviderChoice providers;
    std::vector<std::string> modeNames;

    CLI::App* track = app.add_subcommand("track", "run the tracker over a detection file");
    track->add_option("--detections", detectionsPath, "MOT-style detection CSV")->required();
    track->add_option("--out", outPath, "output tracks file")->required();
    track->add_option("--config", configPath, "key = value config file");
    track->add_option("--gt", gtPath, "ground-truth file (needed by truth providers)");
    track->add_option("--pairwise-mode", pairwiseMode, "asymmetric|symmetricGaussian|none");
    track->add_option("--lambda", lambda, "visual/spatial balance in the overall similarity");
    track->add_option("--seed", seed, "seed for stochastic providers");
    track->add_option("--seq", seqName, "sequence name (oracle-file key)");
    track->add_option("--displacement-provider", providers.displacement, "constant|truth|oracle-file");
    track->add_option("--similarity-provider", providers.similarity, "iou|truth|oracle-file");
    track->add_option("--grids", providers.gridsPath, "displacement-grid oracle CSV");
    track->add_option("--sims", providers.simsPath, "similarity oracle CSV");
    track->add_option("--dump-overlays", overlaysPath, "write per-frame box annotations to this CSV");

    CLI::App* evalCmd = app.add_subcommand("eval", "evaluate tracks against ground truth");
    evalCmd->add_option("--gt", gtPath, "ground-truth file")->required();
    evalCmd->add_option("--tracks", tracksPath, "tracker output file")->required();
    evalCmd->add_option("--match-iou", matchIou, "overlap threshold for a correspondence");
    evalCmd->add_option("--seq", seqName, "sequence name for the report row");
    evalCmd->add_flag("--csv", evalCsv, "emit CSV instead of the aligned table");

    CLI::App* simulate = app.add_subcommand("simulate", "generate a synthetic sequence");
    simulate->add_option("--config", configPath, "scenario config")->required();
    simulate->add_option("--out", outPath, "output directory")->required();

    CLI::App* ablate = app.add_subcommand("ablate", "compare pairwise modes on seeded synthetic data");
    ablate->add_option("--config", configPath, "scenario + tracker config")->required();
    ablate->add_option("--out", outPath, "output directory")->required();
    ablate->add_option("--modes", modeNames, "subset of asymmetric,symmetricGaussian,none")->delimiter(',');
    ablate->add_option("--seeds", numSeeds, "number of seeds to aggregate");
    ablate->add_option("--seed", seed, "base seed (default: scenario seed)");
    ablate->add_option("--jobs", jobs, "parallel runs");

    std::uint64_t ablateSeed = 0;
    ablate->callback([&]() { ablateSeed = ablate->count("--seed") ? seed : 0; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (track->parsed())
            return commandTrack(detectionsPath, gtPath, configPath, outPath, providers, pairwiseMode,
                                lambda, seed, overlaysPath, seqName);
        if (evalCmd->parsed()) return commandEval(gtPath, tracksPath, matchIou, evalCsv, seqName);
        if (simulate->parsed()) return commandSimulate(configPath, outPath);
        if (ablate->parsed())
            return commandAblate(configPath, outPath, modeNames, numSeeds, ablateSeed, jobs);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return kExitIo;
    } catch (const InvariantError& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
    return kExitUsage;
}
