// SPDX-License-Identifier: Apache-2.0
// Copyright (c) 2026 crftrack contributors

#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>

#include "crftrack/mot_io.hpp"

using namespace crftrack;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

namespace {

struct TempFile {
    std::filesystem::path path;
    explicit TempFile(const std::string& name, const std::string& contents = "") {
        path = std::filesystem::temp_directory_path() / name;
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::filesystem::remove(path); }
};

}  // namespace

TEST_CASE("detection lines map fields directly") {
    const TempFile file("crftrack_det1.txt", "1,-1,10.5,20,50,100,0.9,-1,-1,-1\n");
    const SequenceBundle bundle = readDetections(file.path.string());
    REQUIRE(bundle.frameCount == 1);
    REQUIRE(bundle.detectionsAt(1).size() == 1);
    const Detection& d = bundle.detectionsAt(1)[0];
    REQUIRE(d.box == BoundingBox{10.5, 20, 50, 100});
    REQUIRE_THAT(d.score, WithinAbs(0.9, 1e-12));
}

TEST_CASE("empty detection files give empty bundles") {
    const TempFile file("crftrack_det2.txt");
    const SequenceBundle bundle = readDetections(file.path.string());
    REQUIRE(bundle.frameCount == 0);
    REQUIRE(bundle.detections.empty());
}

TEST_CASE("nonpositive box sizes are rejected with the line number") {
    const TempFile file("crftrack_det3.txt", "1,-1,0,0,10,10,1\n2,-1,5,5,-3,10,1\n");
    REQUIRE_THROWS_WITH(readDetections(file.path.string()), ContainsSubstring(":2"));
}

TEST_CASE("malformed numerics are rejected with the line number") {
    const TempFile file("crftrack_det4.txt", "1,-1,ten,0,10,10,1\n");
    REQUIRE_THROWS_WITH(readDetections(file.path.string()), ContainsSubstring(":1"));
}

TEST_CASE("trailing fields and missing confidence are tolerated") {
    const TempFile file("crftrack_det5.txt", "3,-1,1,2,3,4\n7,-1,1,2,3,4,0.5,9,9,9,extra\n");
    const SequenceBundle bundle = readDetections(file.path.string());
    REQUIRE(bundle.frameCount == 7);
    REQUIRE(bundle.detectionsAt(3).size() == 1);
    REQUIRE(bundle.detectionsAt(3)[0].score == 1.0);
    REQUIRE(bundle.detectionsAt(5).empty());  // gap frames exist but are empty
    REQUIRE(bundle.detectionsAt(7).size() == 1);
}

TEST_CASE("missing files raise io errors") {
    REQUIRE_THROWS_AS(readDetections("/nonexistent/path/det.txt"), IoError);
}

TEST_CASE("track writing sorts by frame then id and rounds to 2 decimals") {
    const std::vector<TrackRecord> records{
        {2, 4, {1.005, 2, 3, 4}},
        {1, 9, {10.123, 20.987, 30, 40}},
        {1, 2, {5, 6, 7, 8}},
    };
    const TempFile file("crftrack_tracks1.txt");
    writeTracks(records, file.path.string());
    std::ifstream in(file.path);
    std::string l1, l2, l3;
    std::getline(in, l1);
    std::getline(in, l2);
    std::getline(in, l3);
    REQUIRE(l1 == "1,2,5.00,6.00,7.00,8.00,1,-1,-1,-1");
    REQUIRE(l2 == "1,9,10.12,20.99,30.00,40.00,1,-1,-1,-1");
    REQUIRE(l3 == "2,4,1.00,2.00,3.00,4.00,1,-1,-1,-1");
}

TEST_CASE("writer output round-trips through the reader at 2-decimal precision") {
    const std::vector<TrackRecord> records{{1, 1, {10.126, 20.994, 50.001, 100.0}},
                                           {2, 1, {11.0, 21.0, 50.0, 100.0}}};
    const TempFile file("crftrack_tracks2.txt");
    writeTracks(records, file.path.string());
    const auto frames = readLabeledBoxes(file.path.string());
    REQUIRE(frames.size() == 2);
    REQUIRE(frames[0].size() == 1);
    REQUIRE(frames[0][0].id == 1);
    REQUIRE_THAT(frames[0][0].box.x, WithinAbs(10.13, 1e-9));
    REQUIRE_THAT(frames[0][0].box.y, WithinAbs(20.99, 1e-9));
    REQUIRE_THAT(frames[0][0].box.w, WithinAbs(50.00, 1e-9));

    // writing the re-read records again reproduces the file byte for byte
    std::vector<TrackRecord> again;
    for (std::size_t f = 0; f < frames.size(); ++f)
        for (const LabeledBox& lb : frames[f]) again.push_back({static_cast<int>(f + 1), lb.id, lb.box});
    const TempFile file2("crftrack_tracks3.txt");
    writeTracks(again, file2.path.string());
    std::ifstream a(file.path), b(file2.path);
    const std::string sa((std::istreambuf_iterator<char>(a)), std::istreambuf_iterator<char>());
    const std::string sb((std::istreambuf_iterator<char>(b)), std::istreambuf_iterator<char>());
    REQUIRE(sa == sb);
}

TEST_CASE("labeled boxes require positive identities") {
    const TempFile file("crftrack_gt1.txt", "1,-1,0,0,10,10,1\n");
    REQUIRE_THROWS_AS(readLabeledBoxes(file.path.string()), IoError);
}

TEST_CASE("ground truth attaches to a bundle and extends the frame range") {
    const TempFile det("crftrack_det6.txt", "1,-1,0,0,10,10,1\n");
    const TempFile gt("crftrack_gt2.txt", "1,1,0,0,10,10,1\n3,1,4,0,10,10,1\n");
    SequenceBundle bundle = readDetections(det.path.string());
    loadGroundTruth(bundle, gt.path.string());
    REQUIRE(bundle.frameCount == 3);
    REQUIRE(bundle.hasGroundTruth());
    REQUIRE(bundle.groundTruthAt(3).size() == 1);
    REQUIRE(bundle.detectionsAt(3).empty());
}
