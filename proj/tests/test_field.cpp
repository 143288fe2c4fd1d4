#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "nerfocus/field.hpp"

using namespace nerfocus;

namespace {

FieldArch tiny_arch() {
    FieldArch a;
    a.num_pos_freqs = 4;
    a.num_dir_freqs = 2;
    a.width = 8;
    a.depth = 3;
    a.skip = 1;
    return a;
}

}  // namespace

TEST_CASE("param_count matches the allocated blocks") {
    for (FieldArch arch : {FieldArch::desk(), FieldArch::paper(), tiny_arch()}) {
        FieldParams p;
        p.resize(arch);
        int64_t n = 0;
        for (const auto* b : std::as_const(p).blocks()) n += b->size();
        CHECK(n == arch.param_count());
    }
}

TEST_CASE("initialization is deterministic in the seed") {
    FieldParams a, b, c;
    init_params(a, FieldArch::desk(), 42);
    init_params(b, FieldArch::desk(), 42);
    init_params(c, FieldArch::desk(), 43);
    CHECK(a.trunk_w[0] == b.trunk_w[0]);
    CHECK(a.rgb_w == b.rgb_w);
    CHECK(a.trunk_w[0] != c.trunk_w[0]);
    // He-style bounds and all-zero biases.
    double bound = std::sqrt(6.0 / a.trunk_w[0].rows());
    CHECK(a.trunk_w[0].cwiseAbs().maxCoeff() <= bound);
    CHECK(a.trunk_b[0].cwiseAbs().maxCoeff() == 0.0f);
}

TEST_CASE("forward_batch agrees with per-sample forward_one") {
    FieldArch arch = tiny_arch();
    FieldParamsT<double> p;
    init_params(p, arch, 3);
    Rng rng(4);
    const int B = 5;
    FieldWorkspace<double> ws;
    ws.xpos.resize(B, arch.pos_dim());
    ws.xdir.resize(B, arch.dir_dim());
    for (Eigen::Index i = 0; i < ws.xpos.size(); ++i)
        ws.xpos.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < ws.xdir.size(); ++i)
        ws.xdir.data()[i] = rng.uniform(-1, 1);
    forward_batch(p, ws);
    for (int b = 0; b < B; ++b) {
        std::vector<double> pos(arch.pos_dim()), dir(arch.dir_dim());
        for (int i = 0; i < arch.pos_dim(); ++i) pos[i] = ws.xpos(b, i);
        for (int i = 0; i < arch.dir_dim(); ++i) dir[i] = ws.xdir(b, i);
        FieldOutput out = forward_one(p, pos, dir);
        CHECK(out.density == doctest::Approx(ws.sigma(b)).epsilon(1e-12));
        for (int c = 0; c < 3; ++c)
            CHECK(out.radiance[c] == doctest::Approx(ws.rgb(b, c)).epsilon(1e-12));
    }
}

TEST_CASE("outputs satisfy the head ranges") {
    FieldParamsT<double> p;
    init_params(p, tiny_arch(), 11);
    Rng rng(12);
    FieldWorkspace<double> ws;
    ws.xpos.resize(64, p.arch.pos_dim());
    ws.xdir.resize(64, p.arch.dir_dim());
    for (Eigen::Index i = 0; i < ws.xpos.size(); ++i)
        ws.xpos.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < ws.xdir.size(); ++i)
        ws.xdir.data()[i] = rng.uniform(-1, 1);
    forward_batch(p, ws);
    CHECK(ws.sigma.minCoeff() >= 0.0);
    CHECK(ws.rgb.minCoeff() > 0.0);
    CHECK(ws.rgb.maxCoeff() < 1.0);
}

TEST_CASE("backward_batch matches finite differences on the MLP alone") {
    FieldArch arch = tiny_arch();
    FieldParamsT<double> p;
    init_params(p, arch, 21);
    Rng rng(22);
    const int B = 3;
    FieldWorkspace<double> ws;
    ws.xpos.resize(B, arch.pos_dim());
    ws.xdir.resize(B, arch.dir_dim());
    for (Eigen::Index i = 0; i < ws.xpos.size(); ++i)
        ws.xpos.data()[i] = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < ws.xdir.size(); ++i)
        ws.xdir.data()[i] = rng.uniform(-1, 1);
    Eigen::VectorXd a_sig(B);
    Eigen::MatrixXd a_rgb(B, 3);
    for (int i = 0; i < B; ++i) a_sig(i) = rng.uniform(-1, 1);
    for (Eigen::Index i = 0; i < a_rgb.size(); ++i)
        a_rgb.data()[i] = rng.uniform(-1, 1);

    auto loss = [&](FieldParamsT<double>& q) {
        FieldWorkspace<double> w;
        w.xpos = ws.xpos;
        w.xdir = ws.xdir;
        forward_batch(q, w);
        return a_sig.dot(w.sigma) + (a_rgb.array() * w.rgb.array()).sum();
    };
    forward_batch(p, ws);
    FieldParamsT<double> grads;
    grads.resize(arch);
    backward_batch(p, ws, a_sig, a_rgb, grads);

    auto pb = p.blocks();
    auto gb = grads.blocks();
    double worst = 0;
    for (size_t bi = 0; bi < pb.size(); ++bi) {
        for (int s = 0; s < 5; ++s) {
            Eigen::Index r = Eigen::Index(rng.below(pb[bi]->rows()));
            Eigen::Index c = Eigen::Index(rng.below(pb[bi]->cols()));
            double saved = (*pb[bi])(r, c);
            double h = 1e-6;
            (*pb[bi])(r, c) = saved + h;
            double lp = loss(p);
            (*pb[bi])(r, c) = saved - h;
            double lm = loss(p);
            (*pb[bi])(r, c) = saved;
            double fd = (lp - lm) / (2 * h);
            double an = (*gb[bi])(r, c);
            worst = std::max(worst,
                             std::abs(an - fd) / std::max({std::abs(an), std::abs(fd), 1e-6}));
        }
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("lr schedule hits both endpoints") {
    CHECK(lr_at(0, 20000, 5e-4, 5e-5) == doctest::Approx(5e-4));
    CHECK(lr_at(20000, 20000, 5e-4, 5e-5) == doctest::Approx(5e-5));
    CHECK(lr_at(10000, 20000, 5e-4, 5e-5) ==
          doctest::Approx(std::sqrt(5e-4 * 5e-5)));
}

TEST_CASE("adam takes a bounded first step against the gradient sign") {
    FieldParams p;
    init_params(p, tiny_arch(), 31);
    FieldParams grads;
    grads.resize(p.arch);
    grads.density_b(0, 0) = 2.5f;
    AdamState state;
    state.match(p);
    float before = p.density_b(0, 0);
    adam_step(p, grads, state, 1e-2);
    // With bias correction the first update has magnitude ~ lr.
    CHECK(p.density_b(0, 0) < before);
    CHECK(std::abs(p.density_b(0, 0) - before) == doctest::Approx(1e-2).epsilon(1e-3));
    CHECK(p.step == 1);
}

TEST_CASE("checkpoint round-trips bit-exactly and rejects corruption") {
    namespace fs = std::filesystem;
    fs::path dir = fs::temp_directory_path() / "nerfocus_ckpt_test";
    fs::create_directories(dir);
    std::string path = (dir / "a.ckpt").string();

    FieldParams p;
    init_params(p, FieldArch::desk(), 99);
    p.step = 1234;
    save_checkpoint(path, p);
    FieldParams q = load_checkpoint(path);
    CHECK(q.arch == p.arch);
    CHECK(q.seed == p.seed);
    CHECK(q.step == 1234);
    auto pb = std::as_const(p).blocks();
    auto qb = std::as_const(q).blocks();
    for (size_t i = 0; i < pb.size(); ++i) CHECK(*pb[i] == *qb[i]);

    SUBCASE("bad magic") {
        std::string bad = (dir / "bad.ckpt").string();
        FILE* f = std::fopen(bad.c_str(), "wb");
        std::fwrite("NOTACKPT", 1, 8, f);
        std::fclose(f);
        CHECK_THROWS(load_checkpoint(bad));
    }
    SUBCASE("truncated payload") {
        std::string trunc = (dir / "trunc.ckpt").string();
        fs::copy_file(path, trunc, fs::copy_options::overwrite_existing);
        fs::resize_file(trunc, fs::file_size(trunc) / 2);
        CHECK_THROWS(load_checkpoint(trunc));
    }
}
