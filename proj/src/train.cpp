#include "nerfocus/train.hpp"

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "nerfocus/pipeline.hpp"
#include "nerfocus/render.hpp"

namespace nerfocus {

StepStats train_step(FieldParams& params, AdamState& opt, const BlurBank& bank,
                     const Dataset& dataset, const TrainConfig& cfg, Rng& rng,
                     int64_t step_index) {
    if (dataset.images.empty())
        throw std::runtime_error("train_step: empty dataset");
    for (const Camera& cam : dataset.cameras)
        if (cam.lens.aperture != 0)
            throw std::logic_error("train_step: training requires aperture A = 0");

    const int j = sample_scale(rng, bank);
    const double k = bank.sizes[j];

    // Batch of (view, pixel) pairs, uniform with replacement.
    struct Pick { int view, px, py; };
    std::vector<Pick> picks(cfg.batch_size);
    for (auto& p : picks) {
        p.view = static_cast<int>(rng.below(dataset.images.size()));
        p.px = static_cast<int>(rng.below(dataset.manifest.width));
        p.py = static_cast<int>(rng.below(dataset.manifest.height));
    }

    FieldParams grads;
    grads.resize(params.arch);
    double coarse_loss = 0, fine_loss = 0;

    std::vector<CompositeCone> cones;
    std::vector<Vec3> targets;
    for (int start = 0; start < cfg.batch_size; start += cfg.chunk) {
        const int count = std::min(cfg.chunk, cfg.batch_size - start);
        cones.clear();
        targets.clear();
        for (int i = 0; i < count; ++i) {
            const Pick& p = picks[start + i];
            cones.push_back(pixel_cone(dataset.cameras[p.view], p.px, p.py, k));
            targets.push_back(bank.datasets[j][p.view].get(p.px, p.py));
        }
        const Camera& cam0 = dataset.cameras.front();
        std::vector<std::vector<double>> coarse_edges(count);
        for (int i = 0; i < count; ++i)
            coarse_edges[i] =
                stratified_depths(cam0.near, cam0.far, cfg.n_coarse + 1, &rng);

        ConePass<float> coarse;
        run_pass(params, cones, std::move(coarse_edges), coarse);
        auto fine_edges = fine_edges_from_pass(coarse, cfg.n_fine, &rng);
        ConePass<float> fine;
        run_pass(params, cones, std::move(fine_edges), fine);

        std::vector<std::array<float, 3>> adj_c, adj_f;
        coarse_loss += mse_and_adjoints(coarse, targets, cfg.lambda_coarse, adj_c,
                                        cfg.batch_size);
        fine_loss += mse_and_adjoints(fine, targets, 1.0, adj_f, cfg.batch_size);
        pass_backward(params, coarse, adj_c, grads);
        pass_backward(params, fine, adj_f, grads);
    }

    double lr = lr_at(step_index, cfg.total_steps, cfg.lr0, cfg.lr1);
    adam_step(params, grads, opt, lr);

    StepStats stats;
    stats.step = step_index;
    stats.scale_index = j;
    stats.coarse_loss = coarse_loss;
    stats.fine_loss = fine_loss;
    return stats;
}

namespace {

// Per-scale PSNR probe on the first training view, Fig.-8 style: the render
// at scale k_j is compared with the correspondingly blurred ground truth.
void probe_psnr(const FieldParams& params, const BlurBank& bank,
                const Dataset& dataset, const TrainConfig& cfg, int64_t step,
                TrainHistory& history) {
    const Camera& cam = dataset.cameras.front();
    RenderOptions opts;
    opts.n_coarse = cfg.n_coarse;
    opts.n_fine = cfg.n_fine;
    for (int j = 0; j < bank.count(); ++j) {
        LensOverrides ov;
        ov.scale = bank.sizes[j];
        Image render = render_image(cam, params, ov, opts);
        history.psnr.push_back({step, j, psnr(render, bank.datasets[j][0])});
    }
}

}  // namespace

TrainHistory train(FieldParams& params, const BlurBank& bank, const Dataset& dataset,
                   const TrainConfig& cfg) {
    TrainHistory history;
    AdamState opt;
    opt.match(params);
    Rng rng(cfg.seed);
    for (int64_t step = 0; step < cfg.total_steps; ++step) {
        history.steps.push_back(train_step(params, opt, bank, dataset, cfg, rng, step));
        bool last = step + 1 == cfg.total_steps;
        if (cfg.psnr_interval > 0 && ((step + 1) % cfg.psnr_interval == 0 || last))
            probe_psnr(params, bank, dataset, cfg, step + 1, history);
        if (cfg.checkpoint_interval > 0 && !cfg.checkpoint_path.empty() &&
            ((step + 1) % cfg.checkpoint_interval == 0 || last))
            save_checkpoint(cfg.checkpoint_path, params);
    }
    return history;
}

void write_history_csv(const std::string& path, const TrainHistory& history) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_history_csv: cannot open " + path);
    os << "step,scale_index,coarse_loss,fine_loss,psnr\n";
    size_t pi = 0;
    for (const StepStats& s : history.steps) {
        os << s.step << "," << s.scale_index << "," << s.coarse_loss << ","
           << s.fine_loss << ",\n";
        while (pi < history.psnr.size() && history.psnr[pi].step == s.step + 1) {
            const PsnrRecord& r = history.psnr[pi++];
            os << r.step << "," << r.scale_index << ",,," << r.psnr << "\n";
        }
    }
    if (!os) throw std::runtime_error("write_history_csv: write failed " + path);
}

void write_train_manifest(const std::string& path, const TrainConfig& cfg,
                          const std::string& dataset_path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_train_manifest: cannot open " + path);
    os << "nerfocus-train v1\n";
    os << "dataset " << dataset_path << "\n";
    os << "total_steps " << cfg.total_steps << "\n";
    os << "batch_size " << cfg.batch_size << "\n";
    os << "n_coarse " << cfg.n_coarse << "\nn_fine " << cfg.n_fine << "\n";
    os << "lambda_coarse " << cfg.lambda_coarse << "\n";
    os << "lr0 " << cfg.lr0 << "\nlr1 " << cfg.lr1 << "\n";
    os << "lr_schedule log-annealed\n";
    os << "seed " << cfg.seed << "\n";
    os << "kernel_sigma_rule size/4\n";
    os << "kernel_sizes";
    for (int s : cfg.kernel_sizes) os << " " << s;
    os << "\nkernel_probs";
    for (double p : cfg.kernel_probs) os << " " << p;
    os << "\narch " << cfg.arch.num_pos_freqs << " " << cfg.arch.num_dir_freqs << " "
       << cfg.arch.width << " " << cfg.arch.depth << " " << cfg.arch.skip << "\n";
}

}  // namespace nerfocus
