#include "synthact/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "json_util.hpp"
#include "synthact/compositor.hpp"
#include "synthact/errors.hpp"
#include "synthact/fitting.hpp"
#include "synthact/image.hpp"

namespace synthact {

namespace {

namespace fs = std::filesystem;
using jsonutil::json;

void expect_keys_opt(const json& j,
                     std::initializer_list<const char*> required,
                     std::initializer_list<const char*> optional,
                     const std::string& path) {
    jsonutil::expect_object(j, path);
    for (const char* k : required)
        if (!j.contains(k))
            throw ValidationError(path + ": missing field \"" + k + "\"");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : required)
            if (it.key() == k) known = true;
        for (const char* k : optional)
            if (it.key() == k) known = true;
        if (!known)
            throw ValidationError(path + ": unknown field \"" + it.key() +
                                  "\"");
    }
}

std::uint64_t get_u64(const json& j, const std::string& path) {
    if (!j.is_number_unsigned() && !j.is_number_integer())
        throw ValidationError(path + ": expected a non-negative integer");
    if (j.is_number_integer() && j.get<std::int64_t>() < 0 &&
        !j.is_number_unsigned())
        throw ValidationError(path + ": expected a non-negative integer");
    return j.get<std::uint64_t>();
}

int get_int(const json& j, const std::string& path) {
    if (!j.is_number_integer())
        throw ValidationError(path + ": expected an integer");
    return j.get<int>();
}

NormalizationPolicy parse_policy(const json& j, const std::string& path) {
    jsonutil::expect_keys(j, {"target_seconds", "target_fps"}, path);
    NormalizationPolicy p{jsonutil::get_number(j["target_seconds"],
                                               path + ".target_seconds"),
                          jsonutil::get_number(j["target_fps"],
                                               path + ".target_fps")};
    p.validate();
    return p;
}

Camera parse_camera(const json& j, const std::string& path) {
    jsonutil::expect_keys(
        j, {"position", "orientation", "focal", "principal", "width", "height"},
        path);
    Camera cam;
    cam.position = jsonutil::get_vec3(j["position"], path + ".position");
    cam.orientation =
        jsonutil::get_unit_quat(j["orientation"], path + ".orientation");
    cam.focal = jsonutil::get_number(j["focal"], path + ".focal");
    cam.principal = jsonutil::get_vec2(j["principal"], path + ".principal");
    cam.width = get_int(j["width"], path + ".width");
    cam.height = get_int(j["height"], path + ".height");
    cam.validate();
    return cam;
}

PlacementPolicy parse_placement(const json& j, const std::string& path) {
    jsonutil::expect_keys(
        j, {"ground_line", "subject_height_frac", "horizontal_anchor"}, path);
    PlacementPolicy p;
    p.ground_line = jsonutil::get_number(j["ground_line"],
                                         path + ".ground_line");
    p.subject_height_frac = jsonutil::get_number(
        j["subject_height_frac"], path + ".subject_height_frac");
    p.horizontal_anchor = jsonutil::get_number(j["horizontal_anchor"],
                                               path + ".horizontal_anchor");
    p.validate();
    return p;
}

ExperimentConfig parse_experiment(const json& j, const std::string& path) {
    jsonutil::expect_keys(j,
                          {"n_real", "n_background", "n_test", "classes",
                           "seeds", "curve_steps", "test_identities"},
                          path);
    ExperimentConfig c;
    c.n_real = get_int(j["n_real"], path + ".n_real");
    c.n_background = get_int(j["n_background"], path + ".n_background");
    c.n_test = get_int(j["n_test"], path + ".n_test");
    for (std::size_t i = 0; i < j["classes"].size(); ++i)
        c.classes.push_back(jsonutil::get_string(
            j["classes"][i], path + ".classes[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < j["seeds"].size(); ++i)
        c.seeds.push_back(get_u64(j["seeds"][i],
                                  path + ".seeds[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < j["curve_steps"].size(); ++i)
        c.curve_steps.push_back(
            get_int(j["curve_steps"][i],
                    path + ".curve_steps[" + std::to_string(i) + "]"));
    for (std::size_t i = 0; i < j["test_identities"].size(); ++i)
        c.test_identities.push_back(jsonutil::get_string(
            j["test_identities"][i],
            path + ".test_identities[" + std::to_string(i) + "]"));
    c.validate();
    return c;
}

void require_dir(const fs::path& p, const std::string& what) {
    if (!fs::is_directory(p))
        throw ValidationError(what + ": directory does not exist: " +
                              p.string());
}

// Resolves a write target and refuses anything outside the output root.
fs::path confine(const fs::path& candidate, const fs::path& root) {
    const fs::path c = fs::weakly_canonical(fs::absolute(candidate));
    const fs::path r = fs::weakly_canonical(fs::absolute(root));
    auto cit = c.begin();
    for (auto rit = r.begin(); rit != r.end(); ++rit, ++cit)
        if (cit == c.end() || *cit != *rit)
            throw ValidationError("refusing to write outside the output root: " +
                                  candidate.string());
    return c;
}

std::vector<std::string> list_background_ids(const fs::path& dir) {
    std::vector<std::string> ids;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".png")
            ids.push_back(entry.path().stem().string());
    std::sort(ids.begin(), ids.end());
    return ids;
}

struct CommonArgs {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
    unsigned jobs = 0;
    std::string resolution;
};

RunConfig effective_config(const CommonArgs& args) {
    RunConfig cfg = load_run_config(args.config_path);
    if (args.seed) cfg.seed = *args.seed;
    if (!args.resolution.empty()) {
        int w = 0, h = 0;
        if (std::sscanf(args.resolution.c_str(), "%dx%d", &w, &h) != 2 ||
            w < 1 || h < 1)
            throw ValidationError("--resolution: expected WxH, got \"" +
                                  args.resolution + "\"");
        cfg.camera.principal.x() *= static_cast<double>(w) / cfg.camera.width;
        cfg.camera.principal.y() *= static_cast<double>(h) / cfg.camera.height;
        cfg.camera.focal *= static_cast<double>(h) / cfg.camera.height;
        cfg.camera.width = w;
        cfg.camera.height = h;
        cfg.camera.validate();
    }
    return cfg;
}

double read_fps(const fs::path& video_dir) {
    const json meta = jsonutil::load_file(video_dir / "meta.json");
    return jsonutil::get_number(meta.at("fps"),
                                (video_dir / "meta.json").string() + ".fps");
}

PoseSequence normalized(const PoseSequence& seq, const RunConfig& cfg,
                        const std::string& mode) {
    if (mode == "none") return seq;
    if (mode == "identity") return resample(seq, cfg.identity_normalization);
    if (mode == "reference") return resample(seq, cfg.reference_normalization);
    throw ValidationError("--normalize: expected none|identity|reference, got \"" +
                          mode + "\"");
}

DatasetSpec dataset_spec_from(const RunConfig& cfg, const fs::path& out) {
    DatasetSpec spec;
    spec.references = cfg.references;
    spec.identities = cfg.identities;
    require_dir(cfg.backgrounds_dir, "paths.backgrounds");
    spec.background_ids = list_background_ids(cfg.backgrounds_dir);
    spec.background_dir = cfg.backgrounds_dir;
    spec.g = cfg.g;
    spec.seed = cfg.seed;
    spec.normalization = cfg.reference_normalization;
    spec.camera = cfg.camera;
    spec.placement = cfg.placement;
    spec.output_root = out;
    spec.validate();
    return spec;
}

json experiment_to_json(const ExperimentConfig& c) {
    return json{{"n_real", c.n_real},
                {"n_background", c.n_background},
                {"n_test", c.n_test},
                {"classes", c.classes},
                {"seeds", c.seeds},
                {"curve_steps", c.curve_steps},
                {"test_identities", c.test_identities}};
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / v.size();
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / v.size());
}

// ---- subcommand bodies -------------------------------------------------

int cmd_validate(const CommonArgs& args) {
    const RunConfig cfg = effective_config(args);
    const std::size_t white = cfg.references.size() * cfg.identities.size();
    std::cerr << "config ok: " << cfg.references.size() << " references x "
              << cfg.identities.size() << " identities\n"
              << "  white videos:      " << white << "\n"
              << "  composited videos: " << white * cfg.g << "\n"
              << "  effective seed:    " << cfg.seed << "\n";
    return 0;
}

int cmd_make_avatar(const CommonArgs& args, const std::string& input) {
    const RunConfig cfg = effective_config(args);
    const Avatar avatar = load_avatar(input);
    fs::path out = args.out.empty()
                       ? cfg.output_root / "avatars" / (avatar.id + ".json")
                       : fs::path(args.out);
    out = confine(out, cfg.output_root);
    fs::create_directories(out.parent_path());
    save_avatar(avatar, out);
    std::cerr << "wrote " << out.string() << "\n";
    return 0;
}

int cmd_prepare_pose(const CommonArgs& args, const std::string& input,
                     const std::string& skeleton_path,
                     const std::string& mode) {
    const RunConfig cfg = effective_config(args);
    const Avatar skeleton_source = load_avatar(skeleton_path);
    const KeypointSequence kp = load_keypoint_sequence_file(input);
    PoseSequence seq = keypoints_to_pose(kp, skeleton_source.skeleton);
    seq = normalized(seq, cfg, mode);
    fs::path out = args.out.empty()
                       ? cfg.output_root / "poses" /
                             (fs::path(input).stem().string() + ".json")
                       : fs::path(args.out);
    out = confine(out, cfg.output_root);
    fs::create_directories(out.parent_path());
    save_pose_sequence(seq, out);
    std::cerr << "wrote " << out.string() << " (" << seq.frames.size()
              << " frames @ " << seq.fps << " fps)\n";
    return 0;
}

int cmd_animate(const CommonArgs& args, const std::string& avatar_path,
                const std::string& pose_path, const std::string& mode) {
    const RunConfig cfg = effective_config(args);
    const Avatar avatar = load_avatar(avatar_path);
    PoseSequence seq = load_pose_sequence_file(pose_path);
    seq = normalized(seq, cfg, mode);
    fs::path out = args.out.empty()
                       ? cfg.output_root / "videos" /
                             (avatar.id + "_" +
                              fs::path(pose_path).stem().string())
                       : fs::path(args.out);
    out = confine(out, cfg.output_root);
    const auto frames = render_sequence(avatar, seq, cfg.camera, args.jobs);
    write_video_frames(out, frames, seq.fps);
    std::cerr << "wrote " << frames.size() << " frames to " << out.string()
              << "\n";
    return 0;
}

int cmd_composite(const CommonArgs& args, const std::string& frames_dir,
                  const std::string& background_path) {
    const RunConfig cfg = effective_config(args);
    const double fps = read_fps(frames_dir);
    std::vector<Image> frames = read_video_frames(frames_dir);
    for (Image& f : frames)
        f = strip_background(f, Eigen::Vector3d::Ones());
    const Image bg = read_png(background_path);
    const auto composited =
        composite_sequence(frames, bg, cfg.placement, args.jobs);
    fs::path out = args.out.empty()
                       ? cfg.output_root / "composited" /
                             (fs::path(frames_dir).filename().string() + "_" +
                              fs::path(background_path).stem().string())
                       : fs::path(args.out);
    out = confine(out, cfg.output_root);
    write_video_frames(out, composited, fps);
    std::cerr << "wrote " << composited.size() << " frames to "
              << out.string() << "\n";
    return 0;
}

int cmd_gen_dataset(const CommonArgs& args) {
    const RunConfig cfg = effective_config(args);
    fs::path out = args.out.empty() ? cfg.output_root / "dataset"
                                    : fs::path(args.out);
    out = confine(out, cfg.output_root);
    const DatasetSpec spec = dataset_spec_from(cfg, out);
    const Manifest manifest = generate(spec, args.jobs);
    std::cerr << "generated " << manifest.entries.size() << " videos ("
              << manifest.errors.size() << " failures), manifest at "
              << (out / "manifest.jsonl").string() << "\n";
    for (const ManifestError& e : manifest.errors)
        std::cerr << "  failed " << e.video_id << ": " << e.message << "\n";
    return 0;
}

FitTarget load_fit_target(const fs::path& dir) {
    FitTarget target;
    target.camera =
        parse_camera(jsonutil::load_file(dir / "camera.json"),
                     (dir / "camera.json").string());
    const PoseSequence seq = load_pose_sequence_file(dir / "pose.json");
    for (std::size_t i = 0; i < seq.frames.size(); ++i) {
        char name[32];
        std::snprintf(name, sizeof name, "frame_%06zu.png", i);
        target.frames.emplace_back(seq.frames[i], read_png(dir / name));
    }
    target.validate();
    return target;
}

int cmd_fit(const CommonArgs& args, const std::string& avatar_path,
            const std::string& target_dir, int steps) {
    const RunConfig cfg = effective_config(args);
    const Avatar avatar = load_avatar(avatar_path);
    const FitTarget target = load_fit_target(target_dir);
    auto [color_fit, color_report] = fit_colors(avatar, target, args.jobs);
    auto [fitted, opacity_report] =
        fit_opacities(color_fit, target, steps, args.jobs);

    fs::path out = args.out.empty() ? cfg.output_root / "fit" / avatar.id
                                    : fs::path(args.out);
    out = confine(out, cfg.output_root);
    fs::create_directories(out);
    save_avatar(fitted, out / "avatar.json");
    auto stage = [](const FitReport& r) {
        return json{{"initial_loss", r.initial_loss},
                    {"final_loss", r.final_loss},
                    {"iterations", r.iterations},
                    {"converged", r.converged}};
    };
    jsonutil::write_file(out / "report.json",
                         json{{"seed", cfg.seed},
                              {"colors", stage(color_report)},
                              {"opacities", stage(opacity_report)}});
    std::cerr << "fit loss " << color_report.initial_loss << " -> "
              << opacity_report.final_loss << ", wrote "
              << out.string() << "\n";
    return 0;
}

struct EvalInputs {
    RunConfig cfg;
    ExperimentConfig experiment;
    std::vector<VideoSample> real_pool;
    std::vector<VideoSample> synth_pool;
    fs::path out;
};

EvalInputs load_eval_inputs(const CommonArgs& args, const std::string& real,
                            const std::string& synth,
                            const std::string& default_out) {
    EvalInputs in{effective_config(args), {}, {}, {}, {}};
    if (!in.cfg.experiment)
        throw ValidationError(
            "config: the \"experiment\" section is required for eval "
            "subcommands");
    in.experiment = *in.cfg.experiment;
    in.real_pool = load_samples(read_manifest(real),
                                fs::path(real).parent_path(), args.jobs);
    in.synth_pool = load_samples(read_manifest(synth),
                                 fs::path(synth).parent_path(), args.jobs);
    in.out = args.out.empty() ? in.cfg.output_root / default_out
                              : fs::path(args.out);
    in.out = confine(in.out, in.cfg.output_root);
    fs::create_directories(in.out);
    return in;
}

int cmd_eval_baseline(const CommonArgs& args, const std::string& real,
                      const std::string& synth) {
    EvalInputs in = load_eval_inputs(args, real, synth, "eval_baseline");
    const auto results =
        run_baseline(in.experiment, in.real_pool, in.synth_pool);

    std::vector<double> real_only, real_plus;
    json per_seed = json::array();
    for (const BaselineResult& r : results) {
        real_only.push_back(r.accuracy_real_only);
        real_plus.push_back(r.accuracy_real_plus_synth);
        per_seed.push_back({{"seed", r.seed},
                            {"real_only", r.accuracy_real_only},
                            {"real_plus_synth", r.accuracy_real_plus_synth}});
    }
    jsonutil::write_file(
        in.out / "results.json",
        json{{"experiment", "baseline"},
             {"config", experiment_to_json(in.experiment)},
             {"seed", in.cfg.seed},
             {"per_seed", per_seed},
             {"mean",
              {{"real_only", mean_of(real_only)},
               {"real_plus_synth", mean_of(real_plus)}}},
             {"std",
              {{"real_only", std_of(real_only)},
               {"real_plus_synth", std_of(real_plus)}}}});

    char table[256];
    std::snprintf(table, sizeof table,
                  "training data        accuracy (%%)\n"
                  "real only            %6.2f +- %.2f\n"
                  "real + synthetic     %6.2f +- %.2f\n",
                  100.0 * mean_of(real_only), 100.0 * std_of(real_only),
                  100.0 * mean_of(real_plus), 100.0 * std_of(real_plus));
    std::ofstream(in.out / "results.txt") << table;
    std::cerr << table << "wrote " << (in.out / "results.json").string()
              << "\n";
    return 0;
}

int cmd_eval_shots(const CommonArgs& args, const std::string& real,
                   const std::string& synth) {
    EvalInputs in = load_eval_inputs(args, real, synth, "eval_shots");
    const auto results =
        run_shot_curve(in.experiment, in.real_pool, in.synth_pool);

    const std::size_t steps = in.experiment.curve_steps.size();
    std::vector<std::vector<double>> by_step(steps);
    json per_seed = json::array();
    for (const ShotCurveResult& r : results) {
        for (std::size_t s = 0; s < steps; ++s)
            by_step[s].push_back(r.accuracies[s]);
        per_seed.push_back({{"seed", r.seed}, {"accuracies", r.accuracies}});
    }
    std::vector<double> means, stds;
    for (std::size_t s = 0; s < steps; ++s) {
        means.push_back(mean_of(by_step[s]));
        stds.push_back(std_of(by_step[s]));
    }
    jsonutil::write_file(in.out / "results.json",
                         json{{"experiment", "shots"},
                              {"config", experiment_to_json(in.experiment)},
                              {"seed", in.cfg.seed},
                              {"per_seed", per_seed},
                              {"mean", means},
                              {"std", stds}});

    std::ostringstream table;
    table << "n_background   accuracy (%)\n";
    for (std::size_t s = 0; s < steps; ++s) {
        char line[128];
        std::snprintf(line, sizeof line, "%-14d %6.2f +- %.2f\n",
                      in.experiment.curve_steps[s], 100.0 * means[s],
                      100.0 * stds[s]);
        table << line;
    }
    std::ofstream(in.out / "results.txt") << table.str();
    std::cerr << table.str() << "wrote "
              << (in.out / "results.json").string() << "\n";
    return 0;
}

}  // namespace

RunConfig load_run_config(const std::filesystem::path& path) {
    const json j = jsonutil::load_file(path);
    const std::string where = path.string();
    expect_keys_opt(j,
                    {"version", "seed", "paths", "identity_normalization",
                     "reference_normalization", "camera", "placement",
                     "dataset"},
                    {"experiment"}, where);
    jsonutil::expect_version(j, where);

    RunConfig cfg;
    cfg.seed = get_u64(j["seed"], where + ".seed");

    const json& paths = j["paths"];
    jsonutil::expect_keys(
        paths, {"avatars", "poses", "backgrounds", "output_root"},
        where + ".paths");
    const fs::path base = fs::absolute(path).parent_path();
    auto resolve = [&](const char* key) {
        const fs::path p =
            jsonutil::get_string(paths[key], where + ".paths." + key);
        return p.is_absolute() ? p : base / p;
    };
    cfg.avatars_dir = resolve("avatars");
    cfg.poses_dir = resolve("poses");
    cfg.backgrounds_dir = resolve("backgrounds");
    cfg.output_root = resolve("output_root");
    require_dir(cfg.avatars_dir, where + ".paths.avatars");
    require_dir(cfg.poses_dir, where + ".paths.poses");
    require_dir(cfg.backgrounds_dir, where + ".paths.backgrounds");

    cfg.identity_normalization = parse_policy(
        j["identity_normalization"], where + ".identity_normalization");
    cfg.reference_normalization = parse_policy(
        j["reference_normalization"], where + ".reference_normalization");
    cfg.camera = parse_camera(j["camera"], where + ".camera");
    cfg.placement = parse_placement(j["placement"], where + ".placement");

    const json& ds = j["dataset"];
    jsonutil::expect_keys(ds, {"g", "references", "identities"},
                          where + ".dataset");
    cfg.g = get_int(ds["g"], where + ".dataset.g");
    for (std::size_t i = 0; i < ds["references"].size(); ++i) {
        const std::string p =
            where + ".dataset.references[" + std::to_string(i) + "]";
        const json& r = ds["references"][i];
        jsonutil::expect_keys(r, {"id", "class", "pose"}, p);
        cfg.references.push_back(
            {jsonutil::get_string(r["id"], p + ".id"),
             jsonutil::get_string(r["class"], p + ".class"),
             cfg.poses_dir /
                 jsonutil::get_string(r["pose"], p + ".pose")});
    }
    for (std::size_t i = 0; i < ds["identities"].size(); ++i) {
        const std::string p =
            where + ".dataset.identities[" + std::to_string(i) + "]";
        const json& a = ds["identities"][i];
        jsonutil::expect_keys(a, {"id", "avatar"}, p);
        cfg.identities.push_back(
            {jsonutil::get_string(a["id"], p + ".id"),
             cfg.avatars_dir /
                 jsonutil::get_string(a["avatar"], p + ".avatar")});
    }
    if (j.contains("experiment"))
        cfg.experiment =
            parse_experiment(j["experiment"], where + ".experiment");
    return cfg;
}

int dispatch(int argc, const char* const* argv) {
    CLI::App app{"Pose-transfer synthetic human-action video pipeline"};
    app.require_subcommand(1);

    CommonArgs common;
    std::string input, skeleton, avatar, pose, frames, background, target;
    std::string real, synth, normalize = "none";
    int steps = 25;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "Run config JSON")
            ->required();
        sub->add_option("--seed", common.seed,
                        "Override the config seed for this invocation");
        sub->add_option("--out", common.out,
                        "Output path (inside the output root)");
        sub->add_option("--jobs", common.jobs, "Worker cap (0 = all cores)");
        sub->add_option("--resolution", common.resolution,
                        "Override render resolution, WxH");
        return sub;
    };

    auto* c_validate =
        add_common(app.add_subcommand("validate", "Check a config and "
                                                  "preview dataset counts"));
    auto* c_make = add_common(
        app.add_subcommand("make-avatar", "Validate and install an avatar"));
    c_make->add_option("--input", input, "Avatar JSON document")->required();
    auto* c_prep = add_common(app.add_subcommand(
        "prepare-pose", "Solve keypoints to joint rotations"));
    c_prep->add_option("--input", input, "Keypoint sequence JSON")->required();
    c_prep->add_option("--skeleton", skeleton,
                       "Avatar file providing the skeleton")
        ->required();
    c_prep->add_option("--normalize", normalize,
                       "none|identity|reference resampling");
    auto* c_anim = add_common(app.add_subcommand(
        "animate", "Render a white-background video"));
    c_anim->add_option("--avatar", avatar, "Avatar JSON file")->required();
    c_anim->add_option("--pose", pose, "Pose sequence JSON file")->required();
    c_anim->add_option("--normalize", normalize,
                       "none|identity|reference resampling");
    auto* c_comp = add_common(app.add_subcommand(
        "composite", "Composite a white-background video over a background"));
    c_comp->add_option("--frames", frames, "White-background video directory")
        ->required();
    c_comp->add_option("--background", background, "Background PNG")
        ->required();
    auto* c_gen = add_common(app.add_subcommand(
        "gen-dataset", "Generate the full reference x identity dataset"));
    auto* c_fit = add_common(app.add_subcommand(
        "fit", "Fit splat colors and opacities to target frames"));
    c_fit->add_option("--avatar", avatar, "Avatar JSON file")->required();
    c_fit->add_option("--target", target,
                      "Directory with pose.json, camera.json, frame_*.png")
        ->required();
    c_fit->add_option("--steps", steps, "Opacity descent steps");
    auto* c_base = add_common(app.add_subcommand(
        "eval-baseline", "Real vs real+synthetic accuracy"));
    c_base->add_option("--real", real, "Real-pool manifest")->required();
    c_base->add_option("--synth", synth, "Synthetic manifest")->required();
    auto* c_shots = add_common(app.add_subcommand(
        "eval-shots", "One-/few-shot accuracy curve"));
    c_shots->add_option("--real", real, "Real-pool manifest")->required();
    c_shots->add_option("--synth", synth, "Synthetic manifest")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cerr << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }

    try {
        if (c_validate->parsed()) return cmd_validate(common);
        if (c_make->parsed()) return cmd_make_avatar(common, input);
        if (c_prep->parsed())
            return cmd_prepare_pose(common, input, skeleton, normalize);
        if (c_anim->parsed())
            return cmd_animate(common, avatar, pose, normalize);
        if (c_comp->parsed()) return cmd_composite(common, frames, background);
        if (c_gen->parsed()) return cmd_gen_dataset(common);
        if (c_fit->parsed()) return cmd_fit(common, avatar, target, steps);
        if (c_base->parsed()) return cmd_eval_baseline(common, real, synth);
        if (c_shots->parsed()) return cmd_eval_shots(common, real, synth);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 2;
    }
}

}  // namespace synthact
