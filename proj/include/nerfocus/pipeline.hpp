#pragma once

// Batched cone-rendering passes shared by the trainer (float) and by the
// double-precision finite-difference checks. One pass encodes every frustum
// of every cone into one feature matrix, runs the MLP once, and composites
// per cone.

#include <array>
#include <span>
#include <vector>

#include "nerfocus/encoding.hpp"
#include "nerfocus/field.hpp"
#include "nerfocus/render.hpp"

namespace nerfocus {

template <typename Scalar>
struct ConePass {
    FieldWorkspace<Scalar> ws;
    std::vector<std::vector<double>> edges;   // per-cone depth edges (n+1)
    std::vector<std::vector<double>> deltas;  // per-cone axial intervals (n)
    std::vector<std::vector<double>> zmids;
    std::vector<CompositeOut<Scalar>> comp;   // per-cone composite results
    int n_frustums = 0;
};

// Encodes + forwards + composites one pass over `cones` with the given
// per-cone depth edges.
template <typename Scalar>
void run_pass(const FieldParamsT<Scalar>& params, std::span<const CompositeCone> cones,
              std::vector<std::vector<double>> edges, ConePass<Scalar>& pass) {
    const FieldArch& arch = params.arch;
    const int B = static_cast<int>(cones.size());
    const int N = static_cast<int>(edges.at(0).size()) - 1;
    pass.n_frustums = N;
    pass.edges = std::move(edges);
    pass.deltas.assign(B, {});
    pass.zmids.assign(B, {});
    pass.ws.xpos.resize(Eigen::Index(B) * N, arch.pos_dim());
    pass.ws.xdir.resize(Eigen::Index(B) * N, arch.dir_dim());

#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) {
        const CompositeCone& cone = cones[b];
        auto frustums = partition_cone(cone, pass.edges[b]);
        auto& deltas = pass.deltas[b];
        auto& zmids = pass.zmids[b];
        deltas.resize(N);
        zmids.resize(N);
        std::vector<Scalar> dir_feat(static_cast<size_t>(arch.dir_dim()));
        pe_into(cone.axis, arch.num_dir_freqs, dir_feat.data());
        std::vector<Scalar> pos_feat(static_cast<size_t>(arch.pos_dim()));
        for (int i = 0; i < N; ++i) {
            FrustumGaussian g = frustum_moments(frustums[i]);
            ipe_into(g, arch.num_pos_freqs, pos_feat.data());
            Eigen::Index row = Eigen::Index(b) * N + i;
            for (int c = 0; c < arch.pos_dim(); ++c) pass.ws.xpos(row, c) = pos_feat[c];
            for (int c = 0; c < arch.dir_dim(); ++c) pass.ws.xdir(row, c) = dir_feat[c];
            deltas[i] = frustums[i].t_far - frustums[i].t_near;
            zmids[i] = 0.5 * (frustums[i].z_near + frustums[i].z_far);
        }
    }

    forward_batch(params, pass.ws);

    pass.comp.assign(B, {});
    const Scalar* sig = pass.ws.sigma.data();
    const Scalar* cr = pass.ws.rgb.col(0).data();
    const Scalar* cg = pass.ws.rgb.col(1).data();
    const Scalar* cb = pass.ws.rgb.col(2).data();
#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) {
        Eigen::Index r0 = Eigen::Index(b) * N;
        composite_n(N, sig + r0, cr + r0, cg + r0, cb + r0, pass.deltas[b].data(),
                    pass.zmids[b].data(), pass.comp[b]);
    }
}

// Backprop of per-cone color adjoints through compositing and the MLP,
// accumulating parameter gradients. Deterministic reduction: the per-sample
// adjoint buffers are disjoint per cone and the MLP backward is one batched
// pass.
template <typename Scalar>
void pass_backward(const FieldParamsT<Scalar>& params, const ConePass<Scalar>& pass,
                   const std::vector<std::array<Scalar, 3>>& color_adjoints,
                   FieldParamsT<Scalar>& grads) {
    const int B = static_cast<int>(pass.comp.size());
    const int N = pass.n_frustums;
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> dsigma =
        Eigen::Matrix<Scalar, Eigen::Dynamic, 1>::Zero(Eigen::Index(B) * N);
    typename FieldParamsT<Scalar>::Mat drgb =
        FieldParamsT<Scalar>::Mat::Zero(Eigen::Index(B) * N, 3);

    const Scalar* sig = pass.ws.sigma.data();
    const Scalar* cr = pass.ws.rgb.col(0).data();
    const Scalar* cg = pass.ws.rgb.col(1).data();
    const Scalar* cb = pass.ws.rgb.col(2).data();
#pragma omp parallel for schedule(static)
    for (int b = 0; b < B; ++b) {
        Eigen::Index r0 = Eigen::Index(b) * N;
        composite_backward_n(N, sig + r0, cr + r0, cg + r0, cb + r0,
                             pass.deltas[b].data(), color_adjoints[b].data(),
                             dsigma.data() + r0, drgb.col(0).data() + r0,
                             drgb.col(1).data() + r0, drgb.col(2).data() + r0);
    }
    backward_batch(params, pass.ws, dsigma, drgb, grads);
}

// Mean squared error over cones and channels plus its color adjoints
// (scaled by `weight`). Returns the unweighted MSE. `denom` lets a chunked
// caller normalize by the full batch size; <= 0 uses the pass size.
template <typename Scalar>
double mse_and_adjoints(const ConePass<Scalar>& pass, std::span<const Vec3> targets,
                        double weight,
                        std::vector<std::array<Scalar, 3>>& color_adjoints,
                        int denom = -1) {
    const int B = static_cast<int>(pass.comp.size());
    color_adjoints.assign(B, {});
    double mse = 0;
    double norm = 1.0 / (3.0 * (denom > 0 ? denom : B));
    for (int b = 0; b < B; ++b) {
        for (int c = 0; c < 3; ++c) {
            double diff = double(pass.comp[b].rgb[c]) - targets[b][c];
            mse += diff * diff * norm;
            color_adjoints[b][c] = Scalar(2.0 * weight * diff * norm);
        }
    }
    return mse;
}

// Coarse + fine loss of Eq.-13 form with both depth sets held fixed — the
// exact function whose parameter gradient the trainer computes (fine-pass
// resampling is stop-gradient). Fills `grads` when non-null.
template <typename Scalar>
double loss_fixed_depths(const FieldParamsT<Scalar>& params,
                         std::span<const CompositeCone> cones,
                         std::span<const Vec3> targets,
                         std::vector<std::vector<double>> coarse_edges,
                         std::vector<std::vector<double>> fine_edges, double lambda,
                         FieldParamsT<Scalar>* grads) {
    ConePass<Scalar> coarse, fine;
    run_pass(params, cones, std::move(coarse_edges), coarse);
    run_pass(params, cones, std::move(fine_edges), fine);
    std::vector<std::array<Scalar, 3>> adj_c, adj_f;
    double mse_c = mse_and_adjoints(coarse, targets, lambda, adj_c);
    double mse_f = mse_and_adjoints(fine, targets, 1.0, adj_f);
    if (grads) {
        pass_backward(params, coarse, adj_c, *grads);
        pass_backward(params, fine, adj_f, *grads);
    }
    return lambda * mse_c + mse_f;
}

// Fine-pass depth edges resampled from the coarse pass (stop-gradient).
template <typename Scalar>
std::vector<std::vector<double>> fine_edges_from_pass(const ConePass<Scalar>& pass,
                                                      int n_fine, Rng* rng) {
    const int B = static_cast<int>(pass.comp.size());
    std::vector<std::vector<double>> out(B);
    for (int b = 0; b < B; ++b) {
        std::vector<double> w(pass.comp[b].weights.begin(), pass.comp[b].weights.end());
        out[b] = importance_depths(w, pass.edges[b], n_fine + 1, rng);
    }
    return out;
}

}  // namespace nerfocus
