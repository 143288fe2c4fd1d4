// Python bindings for the main operations: lens math, encoding, scene
// synthesis, training, rendering, and the verification suites.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nerfocus/blur.hpp"
#include "nerfocus/encoding.hpp"
#include "nerfocus/field.hpp"
#include "nerfocus/image.hpp"
#include "nerfocus/render.hpp"
#include "nerfocus/scene.hpp"
#include "nerfocus/train.hpp"
#include "nerfocus/verify.hpp"

namespace py = pybind11;
using namespace nerfocus;

namespace {

py::array_t<float> image_to_array(const Image& img) {
    py::array_t<float> out({img.height, img.width, 3});
    std::copy(img.data.begin(), img.data.end(), out.mutable_data());
    return out;
}

Image array_to_image(py::array_t<float, py::array::c_style | py::array::forcecast> a) {
    if (a.ndim() != 3 || a.shape(2) != 3)
        throw std::invalid_argument("expected an (H, W, 3) float array");
    Image img(int(a.shape(1)), int(a.shape(0)));
    std::copy(a.data(), a.data() + a.size(), img.data.begin());
    return img;
}

}  // namespace

PYBIND11_MODULE(_nerfocus, m) {
    m.doc() = "Thin-lens radiance field: core operations";

    py::class_<LensConfig>(m, "LensConfig")
        .def_static("make", &LensConfig::make, py::arg("aperture"), py::arg("focal"),
                    py::arg("focus"), py::arg("pixel_diameter"))
        .def("with_focus", &LensConfig::with_focus)
        .def("with_aperture", &LensConfig::with_aperture)
        .def_readonly("aperture", &LensConfig::aperture)
        .def_readonly("focal", &LensConfig::focal)
        .def_readonly("focus", &LensConfig::focus)
        .def_readonly("image_dist", &LensConfig::image_dist)
        .def_readonly("pixel_diameter", &LensConfig::pixel_diameter);

    m.def("image_distance", &image_distance, py::arg("focal"), py::arg("focus"));
    m.def("coc_diameter_scene_point", &coc_diameter_scene_point);
    m.def("bicone_diameter", &bicone_diameter);
    m.def("axis_cone_diameter", &axis_cone_diameter);
    m.def("composite_diameter", &composite_diameter);

    m.def(
        "expected_component",
        [](double mu, double var, int k) { return expected_component(mu, var, k); },
        py::arg("mu"), py::arg("var"), py::arg("k"),
        "Expected (sin, cos) of 2^k v under v ~ N(mu, var)");
    m.def(
        "integrated_positional_encode",
        [](std::array<double, 3> mean, std::array<double, 3> var, int num_freqs) {
            FrustumGaussian g{{mean[0], mean[1], mean[2]}, {var[0], var[1], var[2]}};
            return integrated_positional_encode(g, num_freqs).values;
        },
        py::arg("mean"), py::arg("var"), py::arg("num_freqs"));

    m.def("gaussian_kernel", &gaussian_kernel, py::arg("size"));
    m.def(
        "gaussian_blur",
        [](py::array_t<float, py::array::c_style | py::array::forcecast> a, int size) {
            return image_to_array(gaussian_blur(array_to_image(a), size));
        },
        py::arg("image"), py::arg("size"));

    m.def(
        "psnr",
        [](py::array_t<float, py::array::c_style | py::array::forcecast> a,
           py::array_t<float, py::array::c_style | py::array::forcecast> b) {
            return psnr(array_to_image(a), array_to_image(b));
        },
        py::arg("a"), py::arg("b"));
    m.def("read_png", [](const std::string& p) { return image_to_array(read_png(p)); });
    m.def("write_png",
          [](const std::string& p,
             py::array_t<float, py::array::c_style | py::array::forcecast> a) {
              write_png(p, array_to_image(a));
          });

    m.def(
        "generate_dataset",
        [](const std::string& scene, int n_views, int size, uint64_t seed,
           const std::string& out_dir) {
            generate_dataset(make_scene_preset(scene), n_views, size, seed, out_dir);
        },
        py::arg("scene"), py::arg("n_views"), py::arg("size"), py::arg("seed"),
        py::arg("out_dir"));

    m.def(
        "train",
        [](const std::string& dataset_dir, const std::string& checkpoint_out,
           int64_t steps, int batch_size, uint64_t seed) {
            Dataset ds = load_dataset(dataset_dir);
            TrainConfig cfg = TrainConfig::desk();
            cfg.total_steps = steps;
            if (batch_size > 0) cfg.batch_size = batch_size;
            cfg.seed = seed;
            BlurBank bank =
                build_blur_bank(ds.images, cfg.kernel_sizes, cfg.kernel_probs);
            FieldParams params;
            init_params(params, cfg.arch, cfg.seed);
            TrainHistory h = train(params, bank, ds, cfg);
            save_checkpoint(checkpoint_out, params);
            std::vector<double> losses;
            for (const StepStats& s : h.steps) losses.push_back(s.fine_loss);
            return losses;
        },
        py::arg("dataset_dir"), py::arg("checkpoint_out"), py::arg("steps"),
        py::arg("batch_size") = -1, py::arg("seed") = 1);

    m.def(
        "render",
        [](const std::string& checkpoint, const std::string& dataset_dir, int pose,
           double aperture, double focus, double scale) {
            FieldParams params = load_checkpoint(checkpoint);
            Dataset ds = load_dataset(dataset_dir);
            if (pose < 0 || pose >= int(ds.cameras.size()))
                throw std::out_of_range("pose index out of range");
            LensOverrides ov;
            ov.aperture = aperture;
            ov.focus = focus;
            ov.scale = scale;
            return image_to_array(render_image(ds.cameras[pose], params, ov));
        },
        py::arg("checkpoint"), py::arg("dataset_dir"), py::arg("pose") = 0,
        py::arg("aperture") = -1.0, py::arg("focus") = -1.0, py::arg("scale") = 1.0);

    py::class_<SuiteResult>(m, "SuiteResult")
        .def_readonly("name", &SuiteResult::name)
        .def_readonly("passed", &SuiteResult::pass)
        .def_readonly("detail", &SuiteResult::detail);
    m.def("run_verify", &run_verify, py::arg("suite") = "",
          py::arg("tol_scale") = 1.0);
}
