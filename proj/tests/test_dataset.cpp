#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "helpers.hpp"
#include "synthact/dataset.hpp"
#include "synthact/errors.hpp"
#include "synthact/toybench.hpp"

using namespace synthact;

namespace {

DatasetSpec abstract_spec(int n_t, int n_a, int pool, int g,
                          std::uint64_t seed) {
    DatasetSpec spec;
    for (int i = 0; i < n_t; ++i)
        spec.references.push_back({"ref" + std::to_string(i),
                                   "class" + std::to_string(i % 16),
                                   "ref" + std::to_string(i) + ".json"});
    for (int j = 0; j < n_a; ++j)
        spec.identities.push_back(
            {"id" + std::to_string(j), "id" + std::to_string(j) + ".json"});
    for (int b = 0; b < pool; ++b) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "bg%03d", b);
        spec.background_ids.push_back(buf);
    }
    spec.g = g;
    spec.seed = seed;
    spec.normalization = {2.0, 4.0};
    spec.camera = testutil::test_camera();
    spec.output_root = "unused";
    return spec;
}

std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

// Small but real generation setup built from the toy-benchmark pieces.
DatasetSpec real_spec(const std::filesystem::path& root, int n_t, int n_a,
                      int pool, int g, std::uint64_t seed) {
    std::filesystem::create_directories(root / "in");
    DatasetSpec spec;
    for (int i = 0; i < n_t; ++i) {
        const auto path =
            root / "in" / ("ref" + std::to_string(i) + ".json");
        save_pose_sequence(scripted_motion(i % kScriptedMotionCount, 60 + i,
                                           1.0, 6.0),
                           path);
        spec.references.push_back({"ref" + std::to_string(i),
                                   scripted_motion_name(i % 8), path});
    }
    for (int j = 0; j < n_a; ++j) {
        const auto path =
            root / "in" / ("id" + std::to_string(j) + ".json");
        save_avatar(make_humanoid_avatar("id" + std::to_string(j), 80 + j, 3),
                    path);
        spec.identities.push_back({"id" + std::to_string(j), path});
    }
    for (int b = 0; b < pool; ++b) {
        const std::string id = "bg" + std::to_string(b);
        write_png(root / "in" / (id + ".png"),
                  make_background(90 + b, 48, 48));
        spec.background_ids.push_back(id);
    }
    std::sort(spec.background_ids.begin(), spec.background_ids.end());
    spec.background_dir = root / "in";
    spec.g = g;
    spec.seed = seed;
    spec.normalization = {1.0, 4.0};
    spec.camera = default_camera(48, 48);
    spec.output_root = root / "out";
    return spec;
}

}  // namespace

TEST_CASE("full-scale plan has 1,200 white and 3,600 composited jobs") {
    const DatasetSpec spec = abstract_spec(80, 15, 20, 3, 7);
    const auto jobs = plan_jobs(spec);
    int white = 0, composited = 0;
    for (const Job& j : jobs)
        (j.kind == Job::Kind::White ? white : composited)++;
    CHECK(white == 1200);
    CHECK(composited == 3600);
}

TEST_CASE("empty reference set plans zero jobs") {
    CHECK(plan_jobs(abstract_spec(0, 15, 20, 3, 7)).empty());
}

TEST_CASE("plan is in lexicographic (i, j, k) order with unique ids") {
    const DatasetSpec spec = abstract_spec(3, 2, 5, 2, 1);
    const auto jobs = plan_jobs(spec);
    REQUIRE(jobs.size() == 3 * 2 * (1 + 2));
    std::set<std::string> ids;
    int last_i = -1, last_j = -1;
    for (const Job& j : jobs) {
        CHECK(ids.insert(j.video_id).second);
        CHECK(j.reference >= last_i);
        if (j.reference > last_i) last_j = -1;
        CHECK(j.identity >= last_j);
        last_i = j.reference;
        last_j = j.identity;
    }
}

TEST_CASE("g larger than the pool is rejected") {
    CHECK_THROWS_WITH_AS(plan_jobs(abstract_spec(1, 1, 2, 3, 0)),
                         doctest::Contains("pool"), ValidationError);
}

TEST_CASE("count law holds over random small specs") {
    std::mt19937 gen(21);
    for (int trial = 0; trial < 30; ++trial) {
        const int n_t = gen() % 5;
        const int n_a = gen() % 4;
        const int pool = 1 + gen() % 6;
        const int g = gen() % (pool + 1);
        const auto jobs = plan_jobs(abstract_spec(n_t, n_a, pool, g, trial));
        int white = 0, composited = 0;
        for (const Job& j : jobs)
            (j.kind == Job::Kind::White ? white : composited)++;
        CHECK(white == n_t * n_a);
        CHECK(composited == n_t * n_a * g);
    }
}

TEST_CASE("background sampling is deterministic and duplicate-free") {
    const DatasetSpec spec = abstract_spec(4, 4, 9, 4, 123);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            const auto a = sample_backgrounds(spec, i, j);
            const auto b = sample_backgrounds(spec, i, j);
            CHECK(a == b);
            CHECK(std::set<std::string>(a.begin(), a.end()).size() ==
                  a.size());
        }
}

TEST_CASE("g equal to the pool size draws the whole pool") {
    const DatasetSpec spec = abstract_spec(1, 1, 6, 6, 5);
    const auto picks = sample_backgrounds(spec, 0, 0);
    CHECK(std::set<std::string>(picks.begin(), picks.end()) ==
          std::set<std::string>(spec.background_ids.begin(),
                                spec.background_ids.end()));
}

TEST_CASE("sampling is independent of call order") {
    const DatasetSpec spec = abstract_spec(3, 3, 7, 2, 99);
    const auto forward = sample_backgrounds(spec, 2, 1);
    sample_backgrounds(spec, 0, 0);
    sample_backgrounds(spec, 1, 2);
    CHECK(sample_backgrounds(spec, 2, 1) == forward);
}

TEST_CASE("background frequencies are near-uniform over 10,000 pairs") {
    const DatasetSpec spec = abstract_spec(100, 100, 20, 3, 2026);
    std::map<std::string, int> counts;
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j)
            for (const std::string& id : sample_backgrounds(spec, i, j))
                counts[id]++;
    CHECK(counts.size() == 20);
    for (const auto& [id, n] : counts) {
        const double freq = n / 10000.0;
        CHECK(std::abs(freq - 0.15) <= 0.05);
    }
}

TEST_CASE("manifest write/read round trip preserves structure and order") {
    testutil::TempDir dir("manifest_rt");
    Manifest m;
    for (int i = 0; i < 40; ++i) {
        ManifestEntry e;
        char buf[32];
        std::snprintf(buf, sizeof buf, "%04d_0000_w", i);
        e.video_id = buf;
        e.kind = "white";
        e.class_label = "c" + std::to_string(i % 4);
        e.reference_id = "r" + std::to_string(i);
        e.identity_id = "a0";
        e.frames_dir = e.video_id;
        e.fps = 25.0;
        e.num_frames = 500;
        e.seed = 7;
        m.entries.push_back(e);
    }
    m.errors.push_back({"9999_0000_w", "boom"});
    write_manifest(m, dir.path() / "m.jsonl");
    const Manifest back = read_manifest(dir.path() / "m.jsonl");
    REQUIRE(back.entries.size() == 40);
    REQUIRE(back.errors.size() == 1);
    for (std::size_t i = 1; i < back.entries.size(); ++i)
        CHECK(back.entries[i - 1].video_id < back.entries[i].video_id);
    CHECK(back.entries[0].fps == doctest::Approx(25.0));
    CHECK(back.errors[0].message == "boom");
}

TEST_CASE("duplicate video ids are rejected on read with a line number") {
    testutil::TempDir dir("manifest_dup");
    const char* line =
        R"({"video_id":"v1","kind":"white","class_label":"c","reference_id":"r",)"
        R"("identity_id":"a","frames_dir":"v1","fps":25.0,"num_frames":2,"seed":1})";
    std::ofstream out(dir.path() / "m.jsonl");
    out << line << "\n" << line << "\n";
    out.close();
    CHECK_THROWS_WITH_AS(read_manifest(dir.path() / "m.jsonl"),
                         doctest::Contains(":2"), ValidationError);
}

TEST_CASE("composited entries must carry a background id and vice versa") {
    testutil::TempDir dir("manifest_kind");
    std::ofstream out(dir.path() / "m.jsonl");
    out << R"({"video_id":"v1","kind":"composited","class_label":"c",)"
        << R"("reference_id":"r","identity_id":"a","frames_dir":"v1",)"
        << R"("fps":25.0,"num_frames":2,"seed":1})" << "\n";
    out.close();
    CHECK_THROWS_AS(read_manifest(dir.path() / "m.jsonl"), ValidationError);
}

TEST_CASE("tiny end-to-end generation: 1 white + 1 composited entry") {
    testutil::TempDir dir("gen_tiny");
    const DatasetSpec spec = real_spec(dir.path(), 1, 1, 1, 1, 3);
    const Manifest m = generate(spec, 2);
    CHECK(m.errors.empty());
    REQUIRE(m.entries.size() == 2);
    CHECK(m.entries[0].kind == "composited");
    CHECK(m.entries[1].kind == "white");
    CHECK(m.entries[0].background_id.has_value());
    CHECK_FALSE(m.entries[1].background_id.has_value());
    CHECK(m.entries[0].class_label == m.entries[1].class_label);
    CHECK(m.entries[0].num_frames == 4);
    // Frames exist on disk with meta.
    const auto frames =
        read_video_frames(spec.output_root / m.entries[0].frames_dir);
    CHECK(frames.size() == 4);
}

TEST_CASE("re-running generation is byte-identical") {
    testutil::TempDir dir("gen_det");
    const DatasetSpec spec = real_spec(dir.path(), 2, 2, 3, 2, 11);
    generate(spec, 4);
    const std::string manifest1 =
        read_file(spec.output_root / "manifest.jsonl");
    const std::string frame1 = read_file(
        spec.output_root / "0001_0001_c001" / "frame_000002.png");
    REQUIRE_FALSE(manifest1.empty());
    REQUIRE_FALSE(frame1.empty());
    generate(spec, 1);
    CHECK(read_file(spec.output_root / "manifest.jsonl") == manifest1);
    CHECK(read_file(spec.output_root / "0001_0001_c001" /
                    "frame_000002.png") == frame1);
}

TEST_CASE("label integrity: every entry carries its reference's class") {
    testutil::TempDir dir("gen_label");
    const DatasetSpec spec = real_spec(dir.path(), 3, 1, 2, 1, 13);
    const Manifest m = generate(spec, 4);
    CHECK(m.errors.empty());
    std::map<std::string, std::string> expected;
    for (const ReferenceEntry& r : spec.references)
        expected[r.id] = r.class_label;
    for (const ManifestEntry& e : m.entries)
        CHECK(e.class_label == expected.at(e.reference_id));
}

TEST_CASE("a broken input is isolated to its own jobs") {
    testutil::TempDir dir("gen_err");
    DatasetSpec spec = real_spec(dir.path(), 2, 2, 2, 1, 17);
    // Corrupt one avatar file.
    std::ofstream(spec.identities[1].avatar_path) << "not json";
    const Manifest m = generate(spec, 2);
    // Identity 1's jobs fail (2 refs x (1 white + 1 composited)).
    CHECK(m.errors.size() == 4);
    CHECK(m.entries.size() == 4);
    for (const ManifestEntry& e : m.entries)
        CHECK(e.identity_id == "id0");
}
