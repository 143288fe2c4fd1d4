#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "nerfocus/rng.hpp"
#include "nerfocus/vec.hpp"

namespace nerfocus {

// MLP layout: ReLU trunk with one optional skip concatenation of the position
// features, a linear density head (softplus) off the trunk, and a linear rgb
// head (logistic) fed with trunk output concatenated with direction features.
struct FieldArch {
    int num_pos_freqs = 16;  // L
    int num_dir_freqs = 4;   // M
    int width = 64;
    int depth = 4;
    int skip = 2;  // trunk layer whose input re-concatenates pos features; -1 = none

    int pos_dim() const { return 6 * num_pos_freqs; }
    int dir_dim() const { return 6 * num_dir_freqs; }

    int layer_in_dim(int i) const {
        if (i == 0) return pos_dim();
        return width + (i == skip ? pos_dim() : 0);
    }

    int64_t param_count() const {
        int64_t n = 0;
        for (int i = 0; i < depth; ++i) n += int64_t(layer_in_dim(i) + 1) * width;
        n += width + 1;                       // density head
        n += int64_t(width + dir_dim() + 1) * 3;  // rgb head
        return n;
    }

    static FieldArch desk() { return {}; }
    static FieldArch paper() { return {16, 4, 256, 8, 4}; }

    bool operator==(const FieldArch&) const = default;
};

template <typename Scalar>
struct FieldParamsT {
    using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

    FieldArch arch;
    std::vector<Mat> trunk_w;  // in_dim x width
    std::vector<Mat> trunk_b;  // 1 x width
    Mat density_w;             // width x 1
    Mat density_b;             // 1 x 1
    Mat rgb_w;                 // (width + dir_dim) x 3
    Mat rgb_b;                 // 1 x 3
    uint64_t seed = 0;
    uint64_t step = 0;

    void resize(const FieldArch& a) {
        arch = a;
        trunk_w.resize(a.depth);
        trunk_b.resize(a.depth);
        for (int i = 0; i < a.depth; ++i) {
            trunk_w[i].setZero(a.layer_in_dim(i), a.width);
            trunk_b[i].setZero(1, a.width);
        }
        density_w.setZero(a.width, 1);
        density_b.setZero(1, 1);
        rgb_w.setZero(a.width + a.dir_dim(), 3);
        rgb_b.setZero(1, 3);
    }

    std::vector<Mat*> blocks() {
        std::vector<Mat*> out;
        for (auto& w : trunk_w) out.push_back(&w);
        for (auto& b : trunk_b) out.push_back(&b);
        out.push_back(&density_w);
        out.push_back(&density_b);
        out.push_back(&rgb_w);
        out.push_back(&rgb_b);
        return out;
    }
    std::vector<const Mat*> blocks() const {
        auto mutable_blocks = const_cast<FieldParamsT*>(this)->blocks();
        return {mutable_blocks.begin(), mutable_blocks.end()};
    }

    template <typename Other>
    FieldParamsT<Other> cast() const {
        FieldParamsT<Other> out;
        out.resize(arch);
        out.seed = seed;
        out.step = step;
        auto src = blocks();
        auto dst = out.blocks();
        for (size_t i = 0; i < src.size(); ++i)
            *dst[i] = src[i]->template cast<Other>();
        return out;
    }
};

using FieldParams = FieldParamsT<float>;

// He-style fan-in uniform init, weights only.
template <typename Scalar>
void init_params(FieldParamsT<Scalar>& p, const FieldArch& arch, uint64_t seed) {
    p.resize(arch);
    p.seed = seed;
    p.step = 0;
    Rng rng(seed);
    auto fill = [&](typename FieldParamsT<Scalar>::Mat& w) {
        double bound = std::sqrt(6.0 / static_cast<double>(w.rows()));
        for (Eigen::Index c = 0; c < w.cols(); ++c)
            for (Eigen::Index r = 0; r < w.rows(); ++r)
                w(r, c) = static_cast<Scalar>(rng.uniform(-bound, bound));
    };
    for (auto& w : p.trunk_w) fill(w);
    fill(p.density_w);
    fill(p.rgb_w);
}

struct FieldOutput {
    double density = 0;
    Vec3 radiance;
};

// Activations saved by the batched forward pass for backprop.
template <typename Scalar>
struct FieldWorkspace {
    using Mat = typename FieldParamsT<Scalar>::Mat;
    Mat xpos;               // B x pos_dim
    Mat xdir;               // B x dir_dim
    std::vector<Mat> h;     // post-ReLU trunk activations, each B x width
    Mat sigma_pre;          // B x 1
    Mat rgb;                // B x 3, post-logistic
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> sigma;  // B, post-softplus
};

template <typename Scalar>
inline Scalar softplus(Scalar x) {
    return std::log1p(std::exp(-std::abs(x))) + std::max(x, Scalar(0));
}

template <typename Scalar>
inline Scalar logistic(Scalar x) {
    return Scalar(1) / (Scalar(1) + std::exp(-x));
}

// Batched forward. ws.xpos / ws.xdir must be filled (rows = batch).
template <typename Scalar>
void forward_batch(const FieldParamsT<Scalar>& p, FieldWorkspace<Scalar>& ws) {
    using Mat = typename FieldParamsT<Scalar>::Mat;
    const FieldArch& a = p.arch;
    const Eigen::Index B = ws.xpos.rows();
    if (ws.xpos.cols() != a.pos_dim() || ws.xdir.cols() != a.dir_dim() ||
        ws.xdir.rows() != B)
        throw std::invalid_argument("forward_batch: feature shape mismatch");

    ws.h.resize(a.depth);
    for (int i = 0; i < a.depth; ++i) {
        Mat z;
        if (i == 0) {
            z.noalias() = ws.xpos * p.trunk_w[i];
        } else if (i == a.skip) {
            const Mat& w = p.trunk_w[i];
            z.noalias() = ws.h[i - 1] * w.topRows(a.width);
            z.noalias() += ws.xpos * w.bottomRows(a.pos_dim());
        } else {
            z.noalias() = ws.h[i - 1] * p.trunk_w[i];
        }
        z.rowwise() += p.trunk_b[i].row(0);
        ws.h[i] = z.cwiseMax(Scalar(0));
    }

    const Mat& hl = ws.h[a.depth - 1];
    ws.sigma_pre.noalias() = hl * p.density_w;
    ws.sigma_pre.array() += p.density_b(0, 0);
    ws.sigma.resize(B);
    for (Eigen::Index i = 0; i < B; ++i) ws.sigma(i) = softplus(ws.sigma_pre(i, 0));

    Mat rgb_pre;
    rgb_pre.noalias() = hl * p.rgb_w.topRows(a.width);
    rgb_pre.noalias() += ws.xdir * p.rgb_w.bottomRows(a.dir_dim());
    rgb_pre.rowwise() += p.rgb_b.row(0);
    ws.rgb = rgb_pre.unaryExpr([](Scalar v) { return logistic(v); });
}

// Accumulates d(adjoint . output)/d(params) into grads given the saved
// activations of a matching forward call. Linear in the adjoints.
template <typename Scalar>
void backward_batch(const FieldParamsT<Scalar>& p, const FieldWorkspace<Scalar>& ws,
                    const Eigen::Matrix<Scalar, Eigen::Dynamic, 1>& dsigma,
                    const typename FieldParamsT<Scalar>::Mat& drgb,
                    FieldParamsT<Scalar>& grads) {
    using Mat = typename FieldParamsT<Scalar>::Mat;
    const FieldArch& a = p.arch;
    const Eigen::Index B = ws.xpos.rows();
    if (static_cast<int>(ws.h.size()) != a.depth || ws.h[0].rows() != B)
        throw std::logic_error("backward_batch: workspace does not match a forward call");
    if (dsigma.size() != B || drgb.rows() != B)
        throw std::invalid_argument("backward_batch: adjoint shape mismatch");

    // Heads.
    Mat d_rgbpre = drgb.cwiseProduct(
        ws.rgb.cwiseProduct((Scalar(1) - ws.rgb.array()).matrix()));
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> d_sigpre(B);
    for (Eigen::Index i = 0; i < B; ++i)
        d_sigpre(i) = dsigma(i) * logistic(ws.sigma_pre(i, 0));

    const Mat& hl = ws.h[a.depth - 1];
    grads.rgb_w.topRows(a.width).noalias() += hl.transpose() * d_rgbpre;
    grads.rgb_w.bottomRows(a.dir_dim()).noalias() += ws.xdir.transpose() * d_rgbpre;
    grads.rgb_b.row(0) += d_rgbpre.colwise().sum();
    grads.density_w.noalias() += hl.transpose() * d_sigpre;
    grads.density_b(0, 0) += d_sigpre.sum();

    Mat dh;
    dh.noalias() = d_rgbpre * p.rgb_w.topRows(a.width).transpose();
    dh.noalias() += d_sigpre * p.density_w.transpose();

    for (int i = a.depth - 1; i >= 0; --i) {
        // ReLU gate.
        Mat dz = dh.cwiseProduct(
            ws.h[i].unaryExpr([](Scalar v) { return v > 0 ? Scalar(1) : Scalar(0); }));
        grads.trunk_b[i].row(0) += dz.colwise().sum();
        if (i == 0) {
            grads.trunk_w[i].noalias() += ws.xpos.transpose() * dz;
        } else if (i == a.skip) {
            grads.trunk_w[i].topRows(a.width).noalias() += ws.h[i - 1].transpose() * dz;
            grads.trunk_w[i].bottomRows(a.pos_dim()).noalias() +=
                ws.xpos.transpose() * dz;
            dh.noalias() = dz * p.trunk_w[i].topRows(a.width).transpose();
        } else {
            grads.trunk_w[i].noalias() += ws.h[i - 1].transpose() * dz;
        }
        if (i > 0 && i != a.skip)
            dh.noalias() = dz * p.trunk_w[i].transpose();
    }
}

// Single-sample convenience wrapper.
template <typename Scalar>
FieldOutput forward_one(const FieldParamsT<Scalar>& p,
                        const std::vector<double>& pos_feat,
                        const std::vector<double>& dir_feat,
                        FieldWorkspace<Scalar>* save = nullptr) {
    FieldWorkspace<Scalar> local;
    FieldWorkspace<Scalar>& ws = save ? *save : local;
    ws.xpos.resize(1, static_cast<Eigen::Index>(pos_feat.size()));
    ws.xdir.resize(1, static_cast<Eigen::Index>(dir_feat.size()));
    for (size_t i = 0; i < pos_feat.size(); ++i)
        ws.xpos(0, static_cast<Eigen::Index>(i)) = static_cast<Scalar>(pos_feat[i]);
    for (size_t i = 0; i < dir_feat.size(); ++i)
        ws.xdir(0, static_cast<Eigen::Index>(i)) = static_cast<Scalar>(dir_feat[i]);
    forward_batch(p, ws);
    FieldOutput out;
    out.density = ws.sigma(0);
    out.radiance = {double(ws.rgb(0, 0)), double(ws.rgb(0, 1)), double(ws.rgb(0, 2))};
    return out;
}

// Adam with the log-annealed learning rate from the training schedule.
template <typename Scalar>
struct AdamStateT {
    using Mat = typename FieldParamsT<Scalar>::Mat;
    std::vector<Mat> m, v;
    int64_t t = 0;

    void match(const FieldParamsT<Scalar>& p) {
        auto bl = p.blocks();
        m.resize(bl.size());
        v.resize(bl.size());
        for (size_t i = 0; i < bl.size(); ++i) {
            m[i].setZero(bl[i]->rows(), bl[i]->cols());
            v[i].setZero(bl[i]->rows(), bl[i]->cols());
        }
        t = 0;
    }
};

using AdamState = AdamStateT<float>;

// lr(t) = lr0 * (lr1/lr0)^(t/T); for the paper schedule lr0=5e-4, lr1=5e-5.
inline double lr_at(int64_t step, int64_t total_steps, double lr0, double lr1) {
    if (total_steps <= 0) return lr0;
    double frac = static_cast<double>(step) / static_cast<double>(total_steps);
    return lr0 * std::pow(lr1 / lr0, frac);
}

template <typename Scalar>
void adam_step(FieldParamsT<Scalar>& p, const FieldParamsT<Scalar>& grads,
               AdamStateT<Scalar>& state, double lr, double beta1 = 0.9,
               double beta2 = 0.999, double eps = 1e-8) {
    auto pb = p.blocks();
    auto gb = grads.blocks();
    if (state.m.size() != pb.size()) throw std::invalid_argument("adam_step: state shape");
    state.t += 1;
    double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (size_t i = 0; i < pb.size(); ++i) {
        auto& m = state.m[i];
        auto& v = state.v[i];
        const auto& g = *gb[i];
        m = Scalar(beta1) * m + Scalar(1 - beta1) * g;
        v = Scalar(beta2) * v + Scalar(1 - beta2) * g.cwiseProduct(g);
        auto mhat = m.array() / Scalar(bc1);
        auto vhat = v.array() / Scalar(bc2);
        pb[i]->array() -= Scalar(lr) * mhat / (vhat.sqrt() + Scalar(eps));
    }
    p.step += 1;
}

// Checkpoint I/O (float32 little-endian payload, self-describing header).
void save_checkpoint(const std::string& path, const FieldParams& params);
FieldParams load_checkpoint(const std::string& path);

}  // namespace nerfocus
