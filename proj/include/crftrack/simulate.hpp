// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "crftrack/config.hpp"
#include "crftrack/errors.hpp"
#include "crftrack/geometry.hpp"
#include "crftrack/mot_io.hpp"
#include "crftrack/random.hpp"

namespace crftrack {

/// Velocity that takes effect at `fromFrame` (piecewise-linear center paths).
struct VelocitySegment {
    int fromFrame = 1;
    Displacement velocity;
};

struct ObjectSpec {
    Point startCenter;
    double w = 40.0;
    double h = 80.0;
    std::vector<VelocitySegment> segments{{1, {0.0, 0.0}}};
    int enterFrame = 1;
    int exitFrame = 1 << 30;
};

/// Parametric scene plus detector-imperfection model. Detections are the
/// ground-truth boxes perturbed with center noise proportional to box size,
/// dropped at `missRate`, and mixed with clutter whose sizes mimic the true
/// objects.
struct SyntheticScenario {
    std::string name = "synthetic";
    int frames = 100;
    double frameWidth = 1280.0;
    double frameHeight = 720.0;
    double frameRate = 25.0;
    double noiseAlpha = 0.0;       // center noise std = alpha * box diagonal
    double sizeSigma = 0.0;        // multiplicative log-normal size jitter
    double missRate = 0.0;
    double clutterRate = 0.0;      // expected clutter boxes per frame
    std::uint64_t seed = 1;
    std::vector<VelocitySegment> cameraPan{{1, {0.0, 0.0}}};
    std::vector<ObjectSpec> objects;

    static SyntheticScenario fromConfig(const Config& cfg);
    void toConfig(Config& cfg) const;
};

namespace detail {

inline Displacement velocityAt(const std::vector<VelocitySegment>& segments, int frame) {
    Displacement v;
    for (const VelocitySegment& s : segments)
        if (frame >= s.fromFrame) v = s.velocity;
    return v;
}

/// Cumulative translation from frame 1 up to `frame`.
inline Displacement integrate(const std::vector<VelocitySegment>& segments, int frame) {
    Displacement total;
    for (int f = 2; f <= frame; ++f) {
        const Displacement v = velocityAt(segments, f);
        total.dx += v.dx;
        total.dy += v.dy;
    }
    return total;
}

inline std::vector<VelocitySegment> parseSegments(const Config& cfg, const std::string& baseKey) {
    std::vector<VelocitySegment> segments;
    if (cfg.has(baseKey)) {
        const auto v = cfg.getDoubleList(baseKey);
        if (v.size() != 2) throw ConfigError("config key `" + baseKey + "`: expected `vx,vy`");
        segments.push_back({1, {v[0], v[1]}});
    }
    for (const std::string& key : cfg.keysWithPrefix(baseKey + "@")) {
        const int fromFrame = std::stoi(key.substr(baseKey.size() + 1));
        const auto v = cfg.getDoubleList(key);
        if (v.size() != 2) throw ConfigError("config key `" + key + "`: expected `vx,vy`");
        segments.push_back({fromFrame, {v[0], v[1]}});
    }
    std::sort(segments.begin(), segments.end(),
              [](const VelocitySegment& a, const VelocitySegment& b) { return a.fromFrame < b.fromFrame; });
    if (segments.empty()) segments.push_back({1, {0.0, 0.0}});
    return segments;
}

}  // namespace detail

inline SyntheticScenario SyntheticScenario::fromConfig(const Config& cfg) {
    SyntheticScenario s;
    s.frames = cfg.getInt("frames");  // required: a scenario without length is meaningless
    s.name = cfg.getString("name", s.name);
    s.frameWidth = cfg.getDouble("frame.width", s.frameWidth);
    s.frameHeight = cfg.getDouble("frame.height", s.frameHeight);
    s.frameRate = cfg.getDouble("fps", s.frameRate);
    s.noiseAlpha = cfg.getDouble("noise.alpha", 0.0);
    s.sizeSigma = cfg.getDouble("noise.size_sigma", 0.0);
    s.missRate = cfg.getDouble("miss_rate", 0.0);
    s.clutterRate = cfg.getDouble("clutter_rate", 0.0);
    s.seed = static_cast<std::uint64_t>(cfg.getDouble("seed", 1));
    s.cameraPan = detail::parseSegments(cfg, "camera.pan");
    for (int n = 1;; ++n) {
        const std::string base = "object." + std::to_string(n);
        if (!cfg.has(base + ".start")) break;
        const auto start = cfg.getDoubleList(base + ".start");
        if (start.size() != 4) throw ConfigError("config key `" + base + ".start`: expected `x,y,w,h`");
        ObjectSpec obj;
        obj.w = start[2];
        obj.h = start[3];
        if (!(obj.w > 0.0 && obj.h > 0.0))
            throw ConfigError("config key `" + base + ".start`: width/height must be positive");
        obj.startCenter = {start[0] + obj.w / 2.0, start[1] + obj.h / 2.0};
        obj.segments = detail::parseSegments(cfg, base + ".velocity");
        obj.enterFrame = cfg.getInt(base + ".enter", 1);
        obj.exitFrame = cfg.getInt(base + ".exit", s.frames);
        s.objects.push_back(obj);
    }
    if (s.objects.empty()) throw ConfigError("scenario config defines no objects (object.1.start missing)");
    return s;
}

inline void SyntheticScenario::toConfig(Config& cfg) const {
    auto pair = [](const Displacement& d) {
        std::ostringstream os;
        os << d.dx << "," << d.dy;
        return os.str();
    };
    cfg.set("name", name);
    cfg.set("frames", std::to_string(frames));
    cfg.set("frame.width", std::to_string(frameWidth));
    cfg.set("frame.height", std::to_string(frameHeight));
    cfg.set("fps", std::to_string(frameRate));
    cfg.set("noise.alpha", std::to_string(noiseAlpha));
    cfg.set("noise.size_sigma", std::to_string(sizeSigma));
    cfg.set("miss_rate", std::to_string(missRate));
    cfg.set("clutter_rate", std::to_string(clutterRate));
    cfg.set("seed", std::to_string(seed));
    for (const VelocitySegment& seg : cameraPan)
        cfg.set(seg.fromFrame == 1 ? "camera.pan" : "camera.pan@" + std::to_string(seg.fromFrame),
                pair(seg.velocity));
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const ObjectSpec& o = objects[i];
        const std::string base = "object." + std::to_string(i + 1);
        std::ostringstream start;
        start << o.startCenter.x - o.w / 2.0 << "," << o.startCenter.y - o.h / 2.0 << "," << o.w << "," << o.h;
        cfg.set(base + ".start", start.str());
        for (const VelocitySegment& seg : o.segments)
            cfg.set(seg.fromFrame == 1 ? base + ".velocity" : base + ".velocity@" + std::to_string(seg.fromFrame),
                    pair(seg.velocity));
        cfg.set(base + ".enter", std::to_string(o.enterFrame));
        cfg.set(base + ".exit", std::to_string(o.exitFrame));
    }
}

/// Deterministically expands a scenario into ground truth plus noisy
/// detections. A pure function of the spec: the same seed always yields the
/// same bundle.
inline SequenceBundle generateScenario(const SyntheticScenario& spec) {
    SequenceBundle bundle;
    bundle.name = spec.name;
    bundle.frameCount = spec.frames;
    bundle.frameRate = spec.frameRate;
    bundle.detections.assign(static_cast<std::size_t>(spec.frames), {});
    bundle.groundTruth.assign(static_cast<std::size_t>(spec.frames), {});

    for (int f = 1; f <= spec.frames; ++f) {
        const Displacement pan = detail::integrate(spec.cameraPan, f);
        auto& gtFrame = bundle.groundTruth[static_cast<std::size_t>(f - 1)];
        auto& detFrame = bundle.detections[static_cast<std::size_t>(f - 1)];
        for (std::size_t i = 0; i < spec.objects.size(); ++i) {
            const ObjectSpec& obj = spec.objects[i];
            if (f < obj.enterFrame || f > obj.exitFrame) continue;
            const Displacement own = detail::integrate(obj.segments, f);
            const Point c{obj.startCenter.x + own.dx + pan.dx, obj.startCenter.y + own.dy + pan.dy};
            const BoundingBox gtBox{c.x - obj.w / 2.0, c.y - obj.h / 2.0, obj.w, obj.h};
            gtFrame.push_back({static_cast<int>(i + 1), gtBox});

            Rng rng(hashCombine(hashCombine(spec.seed, static_cast<std::uint64_t>(f)),
                                static_cast<std::uint64_t>(i + 1)));
            if (spec.missRate > 0.0 && rng.bernoulli(spec.missRate)) continue;
            const double std = spec.noiseAlpha * gtBox.diagonal();
            const double nx = rng.gaussian(0.0, std);
            const double ny = rng.gaussian(0.0, std);
            const double sw = spec.sizeSigma > 0.0 ? std::exp(rng.gaussian(0.0, spec.sizeSigma)) : 1.0;
            const double sh = spec.sizeSigma > 0.0 ? std::exp(rng.gaussian(0.0, spec.sizeSigma)) : 1.0;
            const double w = gtBox.w * sw;
            const double h = gtBox.h * sh;
            detFrame.push_back({f, {c.x + nx - w / 2.0, c.y + ny - h / 2.0, w, h}, 1.0});
        }
        if (spec.clutterRate > 0.0) {
            Rng rng(hashCombine(hashCombine(spec.seed, static_cast<std::uint64_t>(f)), 0xC1077E2ULL));
            const int count = rng.poisson(spec.clutterRate);
            for (int k = 0; k < count; ++k) {
                // Clutter mimics the size of a real object so it is confusable.
                const ObjectSpec& donor = spec.objects[static_cast<std::size_t>(
                    rng.uniformInt(0, static_cast<int>(spec.objects.size()) - 1))];
                const double w = donor.w * std::exp(rng.gaussian(0.0, 0.1));
                const double h = donor.h * std::exp(rng.gaussian(0.0, 0.1));
                const double x = rng.uniform(0.0, std::max(1.0, spec.frameWidth - w));
                const double y = rng.uniform(0.0, std::max(1.0, spec.frameHeight - h));
                detFrame.push_back({f, {x, y, w, h}, 1.0});
            }
        }
    }
    return bundle;
}

}  // namespace crftrack
