#include "nerfocus/scene.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace nerfocus {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct Hit {
    double t = kInf;
    Vec3 color;
};

void hit_sphere(const SpherePrim& s, const Vec3& o, const Vec3& d, Hit& best) {
    Vec3 oc = o - s.center;
    double b = oc.dot(d);
    double c = oc.dot(oc) - s.radius * s.radius;
    double disc = b * b - c;
    if (disc < 0) return;
    double sq = std::sqrt(disc);
    double t = -b - sq;
    if (t <= 1e-9) t = -b + sq;
    if (t <= 1e-9 || t >= best.t) return;
    best.t = t;
    if (s.view_dependent) {
        // Angle-based mix against the world z axis.
        double mix = 0.5 * (1.0 - d.z);
        best.color = lerp(s.color, s.color2, mix);
    } else {
        best.color = s.color;
    }
}

void hit_plane(const PlanePrim& p, const Vec3& o, const Vec3& d, Hit& best) {
    if (std::abs(d.z) < 1e-12) return;
    double t = (p.z - o.z) / d.z;
    if (t <= 1e-9 || t >= best.t) return;
    double x = o.x + t * d.x;
    double y = o.y + t * d.y;
    if (x < p.x_min || x > p.x_max || y < p.y_min || y > p.y_max) return;
    long ix = static_cast<long>(std::floor(x / p.checker_period));
    long iy = static_cast<long>(std::floor(y / p.checker_period));
    best.t = t;
    best.color = ((ix + iy) & 1) == 0 ? p.color_a : p.color_b;
}

}  // namespace

Scene make_scene_preset(const std::string& name) {
    Scene s;
    s.preset_name = name;
    if (name == "two-planes") {
        // Near plane covers the left half of the canonical view at depth ~2,
        // the unbounded far plane fills the rest at depth ~6.
        PlanePrim near_plane;
        near_plane.z = 2.0;
        near_plane.checker_period = 0.5;
        near_plane.color_a = {0.92, 0.25, 0.2};
        near_plane.color_b = {0.95, 0.85, 0.3};
        near_plane.x_min = -4.0;
        near_plane.x_max = 0.0;
        PlanePrim far_plane;
        far_plane.z = -2.0;
        far_plane.checker_period = 1.0;
        far_plane.color_a = {0.2, 0.35, 0.9};
        far_plane.color_b = {0.25, 0.85, 0.8};
        s.planes = {near_plane, far_plane};
    } else if (name == "spheres") {
        s.spheres.push_back({{0, 0, 0}, 1.0, {0.9, 0.2, 0.2}, false, {}});
        s.spheres.push_back({{1.2, 0.7, 1.0}, 0.45, {0.2, 0.8, 0.3}, false, {}});
        s.spheres.push_back({{-1.1, -0.5, 0.8}, 0.5, {0.95, 0.8, 0.25}, true,
                             {0.25, 0.3, 0.9}});
        PlanePrim back;
        back.z = -2.0;
        back.checker_period = 1.0;
        back.color_a = {0.25, 0.3, 0.6};
        back.color_b = {0.5, 0.5, 0.55};
        s.planes = {back};
    } else {
        throw std::invalid_argument("unknown scene preset: " + name);
    }
    return s;
}

Vec3 trace_ray(const Scene& scene, const Vec3& origin, const Vec3& dir) {
    Hit best;
    for (const auto& sp : scene.spheres) hit_sphere(sp, origin, dir, best);
    for (const auto& pl : scene.planes) hit_plane(pl, origin, dir, best);
    return best.t < kInf ? best.color : Vec3{0, 0, 0};
}

Vec3 trace_pinhole(const Scene& scene, const Camera& cam, int px, int py) {
    CompositeCone cone = pixel_cone(cam, px, py);
    return trace_ray(scene, cone.lens_center, cone.axis);
}

Vec3 trace_thinlens_reference(const Scene& scene, const Camera& cam, int px, int py,
                              int n_lens_samples, Rng& rng) {
    if (n_lens_samples < 1)
        throw std::invalid_argument("trace_thinlens_reference: need >= 1 samples");
    if (cam.lens.aperture == 0) return trace_pinhole(scene, cam, px, py);
    CompositeCone cone = pixel_cone(cam, px, py);
    // In-focus conjugate of the pixel, on the focal plane.
    Vec3 conjugate = cone.point_at_depth(cam.lens.focus);
    double lens_radius = 0.5 * cam.lens.aperture;
    Vec3 sum;
    for (int i = 0; i < n_lens_samples; ++i) {
        double dx, dy;
        rng.in_unit_disk(dx, dy);
        Vec3 offset = cam.c2w_rot * Vec3{dx * lens_radius, dy * lens_radius, 0.0};
        Vec3 origin = cone.lens_center + offset;
        Vec3 dir = (conjugate - origin).normalized();
        sum += trace_ray(scene, origin, dir);
    }
    return sum / double(n_lens_samples);
}

Image render_oracle_pinhole(const Scene& scene, const Camera& cam) {
    Image img(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x)
            img.set(x, y, trace_pinhole(scene, cam, x, y));
    return img;
}

Image render_oracle_thinlens(const Scene& scene, const Camera& cam,
                             int n_lens_samples, uint64_t seed) {
    Rng rng(seed);
    Image img(cam.width, cam.height);
    for (int y = 0; y < cam.height; ++y)
        for (int x = 0; x < cam.width; ++x)
            img.set(x, y, trace_thinlens_reference(scene, cam, x, y, n_lens_samples, rng));
    return img;
}

namespace {

Mat3 look_at_rotation(const Vec3& pos, const Vec3& target) {
    Vec3 back = (pos - target).normalized();  // camera +z
    Vec3 up_hint{0, 1, 0};
    Vec3 right = up_hint.cross(back).normalized();
    Vec3 up = back.cross(right);
    return Mat3::from_cols(right, up, back);
}

}  // namespace

std::vector<Camera> make_view_arc(int n_views, int size, double focal_px,
                                  double distance, double near, double far,
                                  uint64_t seed, const LensConfig& lens) {
    if (n_views < 1) throw std::invalid_argument("make_view_arc: n_views must be >= 1");
    Rng rng(seed);
    double phase = rng.uniform(0, 2 * M_PI);
    const double cap = 25.0 * M_PI / 180.0;  // max polar angle of the cap
    std::vector<Camera> cams;
    cams.reserve(n_views);
    for (int i = 0; i < n_views; ++i) {
        // Sunflower layout on the cap, rotated by a seed-dependent phase.
        double frac = n_views == 1 ? 0.0 : std::sqrt((i + 0.5) / n_views);
        double theta = cap * frac;
        double phi = phase + i * 2.399963229728653;  // golden angle
        Vec3 pos{distance * std::sin(theta) * std::cos(phi),
                 distance * std::sin(theta) * std::sin(phi),
                 distance * std::cos(theta)};
        Mat3 rot = look_at_rotation(pos, {0, 0, 0});
        cams.push_back(Camera::make(rot, pos, size, size, focal_px, near, far, lens));
    }
    return cams;
}

namespace {

void write_num(std::ostream& os, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    os << buf;
}

}  // namespace

void write_manifest(const std::string& path, const DatasetManifest& m) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_manifest: cannot open " + path);
    os << "nerfocus-dataset v1\n";
    os << "scene " << m.scene_preset << "\n";
    os << "width " << m.width << "\nheight " << m.height << "\n";
    os << "focal_px ";
    write_num(os, m.focal_px);
    os << "\nnear ";
    write_num(os, m.near);
    os << "\nfar ";
    write_num(os, m.far);
    os << "\nlens_focal ";
    write_num(os, m.lens_focal);
    os << "\nlens_focus ";
    write_num(os, m.lens_focus);
    os << "\nseed " << m.seed << "\n";
    os << "images " << m.image_files.size() << "\n";
    for (size_t i = 0; i < m.image_files.size(); ++i) {
        os << "image " << m.image_files[i];
        for (int k = 0; k < 9; ++k) {
            os << " ";
            write_num(os, m.rotations[i].m[k]);
        }
        for (int k = 0; k < 3; ++k) {
            os << " ";
            write_num(os, m.translations[i][k]);
        }
        os << "\n";
    }
    if (!os) throw std::runtime_error("write_manifest: write failed " + path);
}

DatasetManifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("read_manifest: cannot open " + path);
    std::string header;
    std::getline(is, header);
    if (header != "nerfocus-dataset v1")
        throw std::runtime_error("read_manifest: unsupported format in " + path);
    DatasetManifest m;
    std::string key;
    size_t n_images = 0;
    while (is >> key) {
        if (key == "scene") is >> m.scene_preset;
        else if (key == "width") is >> m.width;
        else if (key == "height") is >> m.height;
        else if (key == "focal_px") is >> m.focal_px;
        else if (key == "near") is >> m.near;
        else if (key == "far") is >> m.far;
        else if (key == "lens_focal") is >> m.lens_focal;
        else if (key == "lens_focus") is >> m.lens_focus;
        else if (key == "seed") is >> m.seed;
        else if (key == "images") is >> n_images;
        else if (key == "image") {
            std::string file;
            Mat3 rot;
            Vec3 t;
            is >> file;
            for (int k = 0; k < 9; ++k) is >> rot.m[k];
            for (int k = 0; k < 3; ++k) is >> t[k];
            m.image_files.push_back(file);
            m.rotations.push_back(rot);
            m.translations.push_back(t);
        } else {
            throw std::runtime_error("read_manifest: unknown key '" + key + "'");
        }
    }
    if (m.image_files.size() != n_images)
        throw std::runtime_error("read_manifest: image count mismatch in " + path);
    return m;
}

Camera camera_from_manifest(const DatasetManifest& m, int index) {
    double image_dist = image_distance(m.lens_focal, m.lens_focus);
    double pitch = image_dist / m.focal_px;
    LensConfig lens = LensConfig::make(0.0, m.lens_focal, m.lens_focus,
                                       pitch * 2.0 / std::sqrt(3.0));
    return Camera::make(m.rotations.at(index), m.translations.at(index), m.width,
                        m.height, m.focal_px, m.near, m.far, lens);
}

DatasetManifest generate_dataset(const Scene& scene, int n_views, int size,
                                 uint64_t seed, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("generate_dataset: cannot create " + out_dir);

    DatasetManifest m;
    m.width = size;
    m.height = size;
    m.focal_px = size;  // ~53 degree FOV
    m.near = 1.5;
    m.far = 7.5;
    m.lens_focal = 0.1;
    m.lens_focus = 4.0;  // camera arc distance; focus at the scene center
    m.seed = seed;
    m.scene_preset = scene.preset_name;

    double image_dist = image_distance(m.lens_focal, m.lens_focus);
    LensConfig lens = LensConfig::make(0.0, m.lens_focal, m.lens_focus,
                                       image_dist / m.focal_px * 2.0 / std::sqrt(3.0));
    auto cams = make_view_arc(n_views, size, m.focal_px, m.lens_focus, m.near, m.far,
                              seed, lens);
    for (int i = 0; i < n_views; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "view_%03d.png", i);
        Image img = render_oracle_pinhole(scene, cams[i]);
        write_png((fs::path(out_dir) / name).string(), img);
        m.image_files.push_back(name);
        m.rotations.push_back(cams[i].c2w_rot);
        m.translations.push_back(cams[i].c2w_trans);
    }
    write_manifest((fs::path(out_dir) / "manifest.txt").string(), m);
    return m;
}

Dataset load_dataset(const std::string& dir) {
    namespace fs = std::filesystem;
    Dataset ds;
    ds.manifest = read_manifest((fs::path(dir) / "manifest.txt").string());
    for (size_t i = 0; i < ds.manifest.image_files.size(); ++i) {
        Image img = read_png((fs::path(dir) / ds.manifest.image_files[i]).string());
        if (img.width != ds.manifest.width || img.height != ds.manifest.height)
            throw std::runtime_error("load_dataset: image size mismatch for " +
                                     ds.manifest.image_files[i]);
        ds.images.push_back(std::move(img));
        ds.cameras.push_back(camera_from_manifest(ds.manifest, static_cast<int>(i)));
    }
    return ds;
}

}  // namespace nerfocus
