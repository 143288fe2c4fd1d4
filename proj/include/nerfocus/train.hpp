#pragma once

#include <string>
#include <vector>

#include "nerfocus/blur.hpp"
#include "nerfocus/field.hpp"
#include "nerfocus/scene.hpp"

namespace nerfocus {

struct TrainConfig {
    int64_t total_steps = 20000;
    int batch_size = 1024;  // composite cones per step
    int n_coarse = 64, n_fine = 64;
    double lambda_coarse = 0.1;
    double lr0 = 5e-4, lr1 = 5e-5;
    uint64_t seed = 1;
    std::vector<int> kernel_sizes = {1, 3, 7, 15, 31, 51};
    std::vector<double> kernel_probs = {0.3, 0.2, 0.2, 0.1, 0.1, 0.1};
    FieldArch arch = FieldArch::desk();
    int chunk = 256;          // cones per forward/backward chunk
    int64_t psnr_interval = 500;  // per-scale PSNR probes; 0 disables
    int64_t checkpoint_interval = 0;
    std::string checkpoint_path;  // required if checkpoint_interval > 0

    static TrainConfig desk() { return {}; }
    static TrainConfig paper() {
        TrainConfig c;
        c.total_steps = 600000;
        c.batch_size = 4096;
        c.n_coarse = 128;
        c.n_fine = 128;
        c.arch = FieldArch::paper();
        return c;
    }
};

struct StepStats {
    int64_t step = 0;
    int scale_index = 0;
    double coarse_loss = 0, fine_loss = 0;
};

struct PsnrRecord {
    int64_t step = 0;
    int scale_index = 0;
    double psnr = 0;
};

struct TrainHistory {
    std::vector<StepStats> steps;
    std::vector<PsnrRecord> psnr;
};

// One p-training step: sample a blur scale, render a batch of cones at that
// scale (aperture zero, asserted), and take one Adam step against the
// matching pre-blurred targets. Gradients accumulate chunk-by-chunk in a
// fixed order.
StepStats train_step(FieldParams& params, AdamState& opt, const BlurBank& bank,
                     const Dataset& dataset, const TrainConfig& cfg, Rng& rng,
                     int64_t step_index);

TrainHistory train(FieldParams& params, const BlurBank& bank, const Dataset& dataset,
                   const TrainConfig& cfg);

// CSV schema: step,scale_index,coarse_loss,fine_loss,psnr. Per-step rows
// leave psnr empty; periodic probe rows leave the losses empty.
void write_history_csv(const std::string& path, const TrainHistory& history);

// Human-readable key/value record of everything a run depended on.
void write_train_manifest(const std::string& path, const TrainConfig& cfg,
                          const std::string& dataset_path);

}  // namespace nerfocus
