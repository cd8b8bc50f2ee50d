#include "synthact/dataset.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "json_util.hpp"
#include "synthact/errors.hpp"
#include "synthact/parallel.hpp"
#include "synthact/rng.hpp"

namespace synthact {

using jsonutil::json;

namespace {

const Eigen::Vector3d kWhite(1.0, 1.0, 1.0);

std::string white_video_id(int i, int j) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%04d_%04d_w", i, j);
    return buf;
}

std::string composited_video_id(int i, int j, int k) {
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%04d_%04d_c%03d", i, j, k);
    return buf;
}

}  // namespace

void DatasetSpec::validate() const {
    std::set<std::string> ids;
    for (const ReferenceEntry& r : references)
        if (!ids.insert(r.id).second)
            throw ValidationError("references: duplicate id \"" + r.id + "\"");
    ids.clear();
    for (const IdentityEntry& e : identities)
        if (!ids.insert(e.id).second)
            throw ValidationError("identities: duplicate id \"" + e.id + "\"");
    ids.clear();
    for (const std::string& b : background_ids)
        if (!ids.insert(b).second)
            throw ValidationError("backgrounds: duplicate id \"" + b + "\"");
    if (g < 0)
        throw ValidationError("g: must be >= 0");
    if (g > static_cast<int>(background_ids.size()))
        throw ValidationError("g: exceeds background pool size");
    normalization.validate();
    camera.validate();
    placement.validate();
}

std::vector<Job> plan_jobs(const DatasetSpec& spec) {
    spec.validate();
    std::vector<Job> jobs;
    const int n_t = static_cast<int>(spec.references.size());
    const int n_a = static_cast<int>(spec.identities.size());
    jobs.reserve(static_cast<std::size_t>(n_t) * n_a * (1 + spec.g));
    for (int i = 0; i < n_t; ++i) {
        for (int j = 0; j < n_a; ++j) {
            jobs.push_back(
                {Job::Kind::White, i, j, -1, "", white_video_id(i, j)});
            const auto backgrounds = sample_backgrounds(spec, i, j);
            for (int k = 0; k < spec.g; ++k)
                jobs.push_back({Job::Kind::Composited, i, j, k, backgrounds[k],
                                composited_video_id(i, j, k)});
        }
    }
    return jobs;
}

std::vector<std::string> sample_backgrounds(const DatasetSpec& spec, int i,
                                            int j) {
    if (spec.g > static_cast<int>(spec.background_ids.size()))
        throw ValidationError("g: exceeds background pool size");

    // Partial Fisher-Yates over the sorted pool, one stream per (i, j).
    SplitMix64 rng(mix_seed(spec.seed, static_cast<std::uint64_t>(i),
                            static_cast<std::uint64_t>(j)));
    std::vector<std::string> pool = spec.background_ids;
    std::vector<std::string> out;
    out.reserve(spec.g);
    for (int k = 0; k < spec.g; ++k) {
        const std::size_t pick =
            k + rng.next_below(pool.size() - k);
        std::swap(pool[k], pool[pick]);
        out.push_back(pool[k]);
    }
    return out;
}

void write_video_frames(const std::filesystem::path& dir,
                        const std::vector<Image>& frames, double fps) {
    std::filesystem::create_directories(dir);
    for (std::size_t f = 0; f < frames.size(); ++f) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06zu.png", f);
        write_png(dir / name, frames[f]);
    }
    json meta;
    meta["fps"] = fps;
    meta["width"] = frames.empty() ? 0 : frames.front().width;
    meta["height"] = frames.empty() ? 0 : frames.front().height;
    meta["num_frames"] = frames.size();
    jsonutil::write_file(dir / "meta.json", meta);
}

std::vector<Image> read_video_frames(const std::filesystem::path& dir) {
    json meta = jsonutil::load_file(dir / "meta.json");
    jsonutil::expect_keys(meta, {"fps", "width", "height", "num_frames"},
                          "meta");
    const int n = meta.at("num_frames").get<int>();
    std::vector<Image> frames;
    frames.reserve(n);
    for (int f = 0; f < n; ++f) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.png", f);
        frames.push_back(read_png(dir / name));
    }
    return frames;
}

namespace {

json entry_to_json(const ManifestEntry& e) {
    json j;
    j["video_id"] = e.video_id;
    j["kind"] = e.kind;
    j["class_label"] = e.class_label;
    j["reference_id"] = e.reference_id;
    j["identity_id"] = e.identity_id;
    if (e.background_id) j["background_id"] = *e.background_id;
    j["frames_dir"] = e.frames_dir;
    j["fps"] = e.fps;
    j["num_frames"] = e.num_frames;
    j["seed"] = e.seed;
    return j;
}

ManifestEntry entry_from_json(const json& j, const std::string& where) {
    if (j.contains("background_id")) {
        jsonutil::expect_keys(j,
                              {"video_id", "kind", "class_label",
                               "reference_id", "identity_id", "background_id",
                               "frames_dir", "fps", "num_frames", "seed"},
                              where);
    } else {
        jsonutil::expect_keys(j,
                              {"video_id", "kind", "class_label",
                               "reference_id", "identity_id", "frames_dir",
                               "fps", "num_frames", "seed"},
                              where);
    }
    ManifestEntry e;
    e.video_id = jsonutil::get_string(j.at("video_id"), where + ".video_id");
    e.kind = jsonutil::get_string(j.at("kind"), where + ".kind");
    e.class_label =
        jsonutil::get_string(j.at("class_label"), where + ".class_label");
    e.reference_id =
        jsonutil::get_string(j.at("reference_id"), where + ".reference_id");
    e.identity_id =
        jsonutil::get_string(j.at("identity_id"), where + ".identity_id");
    if (j.contains("background_id"))
        e.background_id = jsonutil::get_string(j.at("background_id"),
                                               where + ".background_id");
    e.frames_dir =
        jsonutil::get_string(j.at("frames_dir"), where + ".frames_dir");
    e.fps = jsonutil::get_number(j.at("fps"), where + ".fps");
    e.num_frames = static_cast<int>(
        jsonutil::get_number(j.at("num_frames"), where + ".num_frames"));
    if (!j.at("seed").is_number_unsigned() && !j.at("seed").is_number_integer())
        throw ValidationError(where + ".seed: expected an integer");
    e.seed = j.at("seed").get<std::uint64_t>();

    if (e.kind != "white" && e.kind != "composited")
        throw ValidationError(where + ".kind: expected white or composited");
    if ((e.kind == "composited") != e.background_id.has_value())
        throw ValidationError(where +
                              ": background_id must be present exactly for "
                              "composited entries");
    return e;
}

}  // namespace

void write_manifest(const Manifest& manifest,
                    const std::filesystem::path& path) {
    Manifest sorted = manifest;
    std::sort(sorted.entries.begin(), sorted.entries.end(),
              [](const ManifestEntry& a, const ManifestEntry& b) {
                  return a.video_id < b.video_id;
              });
    std::sort(sorted.errors.begin(), sorted.errors.end(),
              [](const ManifestError& a, const ManifestError& b) {
                  return a.video_id < b.video_id;
              });

    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write manifest: " + path.string());
    for (const ManifestEntry& e : sorted.entries)
        out << entry_to_json(e).dump() << "\n";
    for (const ManifestError& e : sorted.errors) {
        json j;
        j["kind"] = "error";
        j["video_id"] = e.video_id;
        j["message"] = e.message;
        out << j.dump() << "\n";
    }
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ValidationError("cannot open manifest: " + path.string());

    Manifest manifest;
    std::set<std::string> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const std::string where =
            path.filename().string() + ":" + std::to_string(line_no);
        json j = jsonutil::parse(line, where);
        if (j.is_object() && j.value("kind", "") == "error") {
            jsonutil::expect_keys(j, {"kind", "video_id", "message"}, where);
            manifest.errors.push_back(
                {jsonutil::get_string(j.at("video_id"), where + ".video_id"),
                 jsonutil::get_string(j.at("message"), where + ".message")});
            continue;
        }
        ManifestEntry e = entry_from_json(j, where);
        if (!seen.insert(e.video_id).second)
            throw ValidationError(where + ": duplicate video_id \"" +
                                  e.video_id + "\"");
        manifest.entries.push_back(std::move(e));
    }
    return manifest;
}

Manifest generate(const DatasetSpec& spec, unsigned jobs) {
    const std::vector<Job> plan = plan_jobs(spec);
    std::filesystem::create_directories(spec.output_root);

    // Inputs load once; a failed load poisons the jobs that depend on it.
    std::vector<std::optional<PoseSequence>> sequences(spec.references.size());
    std::vector<std::string> sequence_errors(spec.references.size());
    for (std::size_t i = 0; i < spec.references.size(); ++i) {
        try {
            sequences[i] = resample(
                load_pose_sequence_file(spec.references[i].pose_path),
                spec.normalization);
        } catch (const std::exception& e) {
            sequence_errors[i] = e.what();
        }
    }
    std::vector<std::optional<Avatar>> avatars(spec.identities.size());
    std::vector<std::string> avatar_errors(spec.identities.size());
    for (std::size_t j = 0; j < spec.identities.size(); ++j) {
        try {
            avatars[j] = load_avatar(spec.identities[j].avatar_path);
        } catch (const std::exception& e) {
            avatar_errors[j] = e.what();
        }
    }
    std::map<std::string, Image> backgrounds;
    std::map<std::string, std::string> background_errors;
    for (const std::string& id : spec.background_ids) {
        try {
            backgrounds.emplace(id,
                                read_png(spec.background_dir / (id + ".png")));
        } catch (const std::exception& e) {
            background_errors[id] = e.what();
        }
    }

    Manifest manifest;
    std::mutex manifest_mutex;
    std::set<std::string> failed_white;

    auto record_entry = [&](const Job& job, int num_frames) {
        ManifestEntry e;
        e.video_id = job.video_id;
        e.kind = job.kind == Job::Kind::White ? "white" : "composited";
        e.class_label = spec.references[job.reference].class_label;
        e.reference_id = spec.references[job.reference].id;
        e.identity_id = spec.identities[job.identity].id;
        if (job.kind == Job::Kind::Composited)
            e.background_id = job.background_id;
        e.frames_dir = job.video_id;
        e.fps = spec.normalization.target_fps;
        e.num_frames = num_frames;
        e.seed = spec.seed;
        std::lock_guard<std::mutex> lock(manifest_mutex);
        manifest.entries.push_back(std::move(e));
    };
    auto record_error = [&](const Job& job, const std::string& message) {
        std::lock_guard<std::mutex> lock(manifest_mutex);
        manifest.errors.push_back({job.video_id, message});
        if (job.kind == Job::Kind::White)
            failed_white.insert(white_video_id(job.reference, job.identity));
    };

    std::vector<const Job*> white_jobs;
    std::vector<const Job*> composited_jobs;
    for (const Job& job : plan)
        (job.kind == Job::Kind::White ? white_jobs : composited_jobs)
            .push_back(&job);

    // White pass first; composited jobs read its frames back from disk so a
    // re-run composites exactly what is stored.
    parallel_for(white_jobs.size(), jobs, [&](std::size_t w) {
        const Job& job = *white_jobs[w];
        try {
            if (!sequences[job.reference])
                throw ValidationError(sequence_errors[job.reference]);
            if (!avatars[job.identity])
                throw ValidationError(avatar_errors[job.identity]);
            const auto frames = render_sequence(
                *avatars[job.identity], *sequences[job.reference],
                spec.camera, 1);
            write_video_frames(spec.output_root / job.video_id, frames,
                               spec.normalization.target_fps);
            record_entry(job, static_cast<int>(frames.size()));
        } catch (const std::exception& e) {
            record_error(job, e.what());
        }
    });

    parallel_for(composited_jobs.size(), jobs, [&](std::size_t c) {
        const Job& job = *composited_jobs[c];
        try {
            const std::string white_id =
                white_video_id(job.reference, job.identity);
            {
                std::lock_guard<std::mutex> lock(manifest_mutex);
                if (failed_white.count(white_id))
                    throw ValidationError("white video " + white_id +
                                          " failed");
            }
            auto it = backgrounds.find(job.background_id);
            if (it == backgrounds.end()) {
                const auto err = background_errors.find(job.background_id);
                throw ValidationError(
                    "background " + job.background_id + ": " +
                    (err == background_errors.end() ? "not in pool"
                                                    : err->second));
            }
            auto white = read_video_frames(spec.output_root / white_id);
            for (Image& frame : white) frame = strip_background(frame, kWhite);
            const auto composited =
                composite_sequence(white, it->second, spec.placement, 1);
            write_video_frames(spec.output_root / job.video_id, composited,
                               spec.normalization.target_fps);
            record_entry(job, static_cast<int>(composited.size()));
        } catch (const std::exception& e) {
            record_error(job, e.what());
        }
    });

    write_manifest(manifest, spec.output_root / "manifest.jsonl");
    return read_manifest(spec.output_root / "manifest.jsonl");
}

}  // namespace synthact
