#pragma once

#include <optional>
#include <string>
#include <vector>

#include "nerfocus/image.hpp"
#include "nerfocus/render.hpp"
#include "nerfocus/rng.hpp"
#include "nerfocus/vec.hpp"

namespace nerfocus {

// Emissive primitives; no lighting model, nearest hit wins, black background.
struct SpherePrim {
    Vec3 center;
    double radius = 1;
    Vec3 color;
    // View-dependent variant: color interpolates toward color2 with the angle
    // between the viewing ray and the world z axis.
    bool view_dependent = false;
    Vec3 color2;
};

struct PlanePrim {
    double z = 0;  // world z of the axis-aligned plane
    double checker_period = 0.5;
    Vec3 color_a, color_b;
    // Rectangular extent; defaults cover the whole plane.
    double x_min = -1e30, x_max = 1e30;
    double y_min = -1e30, y_max = 1e30;
};

struct Scene {
    std::string preset_name;  // recorded in manifests for regeneration
    std::vector<SpherePrim> spheres;
    std::vector<PlanePrim> planes;
};

// Built-in presets used by the CLI and the acceptance runs.
Scene make_scene_preset(const std::string& name);

Vec3 trace_ray(const Scene& scene, const Vec3& origin, const Vec3& dir);

// Pinhole reference color of one pixel: a single ray through the lens center.
Vec3 trace_pinhole(const Scene& scene, const Camera& cam, int px, int py);

// Monte-Carlo thin-lens reference: rays through uniformly sampled lens-disk
// points, all converging on the pixel's in-focus conjugate point at depth l.
// The defocus oracle the cone renderer is checked against. With A = 0 this is
// exactly trace_pinhole.
Vec3 trace_thinlens_reference(const Scene& scene, const Camera& cam, int px, int py,
                              int n_lens_samples, Rng& rng);

Image render_oracle_pinhole(const Scene& scene, const Camera& cam);
Image render_oracle_thinlens(const Scene& scene, const Camera& cam,
                             int n_lens_samples, uint64_t seed);

struct DatasetManifest {
    int width = 0, height = 0;
    double focal_px = 0;
    double near = 0, far = 0;
    double lens_focal = 0.1;   // f
    double lens_focus = 0;     // initial l (conjugate held fixed afterwards)
    uint64_t seed = 0;
    std::string scene_preset;
    std::vector<std::string> image_files;    // relative to the manifest dir
    std::vector<Mat3> rotations;             // camera-to-world
    std::vector<Vec3> translations;
};

struct Dataset {
    DatasetManifest manifest;
    std::vector<Camera> cameras;
    std::vector<Image> images;
};

// Cameras on a forward-facing spherical cap looking at the origin.
std::vector<Camera> make_view_arc(int n_views, int size, double focal_px,
                                  double distance, double near, double far,
                                  uint64_t seed, const LensConfig& lens);

// Renders n_views pinhole images of the scene and writes PNGs plus a
// versioned text manifest into out_dir.
DatasetManifest generate_dataset(const Scene& scene, int n_views, int size,
                                 uint64_t seed, const std::string& out_dir);

void write_manifest(const std::string& path, const DatasetManifest& m);
DatasetManifest read_manifest(const std::string& path);

// Loads manifest + images and reconstructs the cameras.
Dataset load_dataset(const std::string& dir);

// Camera construction shared by dataset generation and loading.
Camera camera_from_manifest(const DatasetManifest& m, int index);

}  // namespace nerfocus
