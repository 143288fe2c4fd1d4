// nerfocus command-line tool: scene synthesis, training, rendering with lens
// controls, evaluation, and the oracle verification suites.

#include <cstdio>
#include <exception>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "nerfocus/blur.hpp"
#include "nerfocus/field.hpp"
#include "nerfocus/image.hpp"
#include "nerfocus/render.hpp"
#include "nerfocus/scene.hpp"
#include "nerfocus/train.hpp"
#include "nerfocus/verify.hpp"

#ifdef _OPENMP
#include <omp.h>
#include <cstdlib>
#endif

namespace {

using namespace nerfocus;

void apply_thread_env() {
#ifdef _OPENMP
    if (const char* v = std::getenv("NERFOCUS_THREADS")) {
        int n = std::atoi(v);
        if (n > 0) omp_set_num_threads(n);
    }
#endif
}

int cmd_synth(const std::string& scene_name, int views, int size, uint64_t seed,
              const std::string& out) {
    Scene scene = make_scene_preset(scene_name);
    generate_dataset(scene, views, size, seed, out);
    std::printf("synth: wrote %d views of '%s' at %dx%d to %s\n", views,
                scene_name.c_str(), size, size, out.c_str());
    return 0;
}

TrainConfig preset_config(const std::string& scale) {
    if (scale == "desk") return TrainConfig::desk();
    if (scale == "paper") return TrainConfig::paper();
    throw CLI::ValidationError("--scale must be desk or paper");
}

int cmd_train(const std::string& dataset_dir, TrainConfig cfg,
              const std::string& out_checkpoint, const std::string& out_csv) {
    Dataset ds = load_dataset(dataset_dir);
    BlurBank bank = build_blur_bank(ds.images, cfg.kernel_sizes, cfg.kernel_probs);
    FieldParams params;
    init_params(params, cfg.arch, cfg.seed);
    if (cfg.checkpoint_path.empty()) cfg.checkpoint_path = out_checkpoint;
    TrainHistory history = train(params, bank, ds, cfg);
    save_checkpoint(out_checkpoint, params);
    if (!out_csv.empty()) write_history_csv(out_csv, history);
    write_train_manifest(out_checkpoint + ".manifest", cfg, dataset_dir);
    if (!history.psnr.empty()) {
        const PsnrRecord& last = history.psnr.back();
        std::printf("train: %lld steps done, final probe psnr %.2f dB (scale %d)\n",
                    static_cast<long long>(cfg.total_steps), last.psnr,
                    last.scale_index);
    } else {
        std::printf("train: %lld steps done\n",
                    static_cast<long long>(cfg.total_steps));
    }
    return 0;
}

int cmd_render(const std::string& checkpoint, const std::string& dataset_dir,
               int pose, double aperture, double focus, double scale,
               const std::string& out) {
    FieldParams params = load_checkpoint(checkpoint);
    Dataset ds = load_dataset(dataset_dir);
    if (pose < 0 || pose >= static_cast<int>(ds.cameras.size()))
        throw std::runtime_error("render: pose index out of range");
    LensOverrides ov;
    ov.aperture = aperture;
    ov.focus = focus;
    ov.scale = scale;
    Image img = render_image(ds.cameras[pose], params, ov);
    write_png(out, img);
    std::printf("render: pose %d A=%g l=%g k=%g -> %s\n", pose,
                aperture < 0 ? ds.cameras[pose].lens.aperture : aperture,
                focus < 0 ? ds.cameras[pose].lens.focus : focus, scale,
                out.c_str());
    return 0;
}

int cmd_eval(const std::string& image_a, const std::string& image_b) {
    auto load = [](const std::string& p) {
        if (p.size() > 4 && p.substr(p.size() - 4) == ".ppm") return read_ppm(p);
        return read_png(p);
    };
    Image a = load(image_a), b = load(image_b);
    std::printf("psnr %.4f\n", psnr(a, b));
    return 0;
}

int cmd_verify(const std::string& suite, double tol_scale) {
    std::vector<SuiteResult> results = run_verify(suite, tol_scale);
    bool all = true;
    for (const SuiteResult& r : results) {
        std::printf("%-10s %s  %s\n", r.name.c_str(), r.pass ? "PASS" : "FAIL",
                    r.detail.c_str());
        all = all && r.pass;
    }
    return all ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_env();
    CLI::App app{"nerfocus: thin-lens radiance field trainer and renderer"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
    std::string scene_name = "two-planes", out_dir;
    int views = 25, size = 64;
    uint64_t seed = 7;
    synth->add_option("--scene", scene_name, "Scene preset");
    synth->add_option("--views", views, "Number of views");
    synth->add_option("--size", size, "Image side length");
    synth->add_option("--seed", seed, "RNG seed");
    synth->add_option("--out", out_dir, "Output directory")->required();

    // train
    auto* train_cmd = app.add_subcommand("train", "Train a field on a dataset");
    std::string dataset_dir, checkpoint_out, csv_out, scale_preset = "desk";
    std::string kernel_probs_arg;
    int64_t steps_override = -1, psnr_interval = -1, ckpt_interval = -1;
    int batch_override = -1;
    uint64_t train_seed = 1;
    train_cmd->add_option("--dataset", dataset_dir, "Dataset directory")->required();
    train_cmd->add_option("--out", checkpoint_out, "Checkpoint path")->required();
    train_cmd->add_option("--csv", csv_out, "Training history CSV path");
    train_cmd->add_option("--scale", scale_preset, "Preset bundle: desk|paper");
    train_cmd->add_option("--steps", steps_override, "Override total steps");
    train_cmd->add_option("--batch", batch_override, "Override batch size");
    train_cmd->add_option("--seed", train_seed, "Training seed");
    train_cmd->add_option("--psnr-interval", psnr_interval,
                          "Steps between PSNR probes (0 disables)");
    train_cmd->add_option("--checkpoint-interval", ckpt_interval,
                          "Steps between checkpoint snapshots (0 disables)");
    train_cmd->add_option("--kernel-probs", kernel_probs_arg,
                          "Comma-separated kernel probabilities");

    // render
    auto* render_cmd = app.add_subcommand("render", "Render a checkpoint");
    std::string r_ckpt, r_dataset, r_out;
    int r_pose = 0;
    double r_aperture = -1, r_focus = -1, r_scale = 1;
    render_cmd->add_option("--checkpoint", r_ckpt, "Checkpoint path")->required();
    render_cmd->add_option("--dataset", r_dataset, "Dataset directory (poses)")
        ->required();
    render_cmd->add_option("--pose", r_pose, "View index for the camera pose");
    render_cmd->add_option("--aperture", r_aperture, "Aperture A (>= 0)");
    render_cmd->add_option("--focus", r_focus, "Focus distance l (> 0)");
    render_cmd->add_option("--cone-scale", r_scale, "Cone diameter multiplier k");
    render_cmd->add_option("--out", r_out, "Output PNG path")->required();

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "PSNR between two images");
    std::string e_a, e_b;
    eval_cmd->add_option("--render", e_a, "Rendered image")->required();
    eval_cmd->add_option("--reference", e_b, "Reference image")->required();

    // verify
    auto* verify_cmd = app.add_subcommand("verify", "Run the oracle suites");
    std::string v_suite;
    double v_tol_scale = 1.0;
    verify_cmd->add_option("--suite", v_suite,
                           "ipe|moments|lens|composite|grad|oracle (default all)");
    verify_cmd
        ->add_option("--tol-scale", v_tol_scale,
                     "Tolerance multiplier (failure-injection hook)")
        ->group("");  // hidden

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (*synth) return cmd_synth(scene_name, views, size, seed, out_dir);
        if (*train_cmd) {
            TrainConfig cfg = preset_config(scale_preset);
            if (steps_override >= 0) cfg.total_steps = steps_override;
            if (batch_override > 0) cfg.batch_size = batch_override;
            if (psnr_interval >= 0) cfg.psnr_interval = psnr_interval;
            if (ckpt_interval >= 0) {
                cfg.checkpoint_interval = ckpt_interval;
                cfg.checkpoint_path = checkpoint_out;
            }
            cfg.seed = train_seed;
            if (!kernel_probs_arg.empty()) {
                std::vector<double> probs;
                std::string token;
                for (char ch : kernel_probs_arg + ",") {
                    if (ch == ',') {
                        probs.push_back(std::stod(token));
                        token.clear();
                    } else {
                        token.push_back(ch);
                    }
                }
                if (probs.size() != cfg.kernel_sizes.size())
                    throw std::runtime_error("--kernel-probs: expected " +
                                             std::to_string(cfg.kernel_sizes.size()) +
                                             " comma-separated values");
                cfg.kernel_probs = probs;
            }
            return cmd_train(dataset_dir, cfg, checkpoint_out, csv_out);
        }
        if (*render_cmd)
            return cmd_render(r_ckpt, r_dataset, r_pose, r_aperture, r_focus,
                              r_scale, r_out);
        if (*eval_cmd) return cmd_eval(e_a, e_b);
        if (*verify_cmd) return cmd_verify(v_suite, v_tol_scale);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 2;
}
