#include "nerfocus/lens.hpp"

#include <cmath>
#include <stdexcept>

namespace nerfocus {

double image_distance(double focal, double focus) {
    if (focal <= 0 || focus <= 0)
        throw std::domain_error("image_distance: focal and focus must be > 0");
    return focal * focus / (focal + focus);
}

LensConfig LensConfig::make(double aperture, double focal, double focus,
                            double pixel_diameter) {
    if (aperture < 0) throw std::domain_error("LensConfig: aperture must be >= 0");
    if (pixel_diameter <= 0)
        throw std::domain_error("LensConfig: pixel_diameter must be > 0");
    LensConfig c;
    c.aperture = aperture;
    c.focal = focal;
    c.focus = focus;
    c.image_dist = image_distance(focal, focus);
    c.pixel_diameter = pixel_diameter;
    return c;
}

LensConfig LensConfig::with_focus(double new_focus) const {
    if (new_focus <= 0) throw std::domain_error("with_focus: focus must be > 0");
    LensConfig c = *this;
    c.focus = new_focus;  // image_dist deliberately kept
    return c;
}

LensConfig LensConfig::with_aperture(double new_aperture) const {
    if (new_aperture < 0)
        throw std::domain_error("with_aperture: aperture must be >= 0");
    LensConfig c = *this;
    c.aperture = new_aperture;
    return c;
}

double coc_diameter_scene_point(const LensConfig& lens, double z_e) {
    if (z_e <= 0) throw std::domain_error("coc_diameter_scene_point: z_e must be > 0");
    return std::abs(lens.aperture * lens.focal * (z_e - lens.focus) /
                    (z_e * (lens.focal + lens.focus)));
}

double bicone_diameter(const LensConfig& lens, double z_alpha) {
    if (z_alpha <= 0) throw std::domain_error("bicone_diameter: z_alpha must be > 0");
    return std::abs(lens.aperture * (lens.focus - z_alpha) / lens.focus);
}

double axis_cone_diameter(const LensConfig& lens, double z_alpha, double scale) {
    if (z_alpha <= 0)
        throw std::domain_error("axis_cone_diameter: z_alpha must be > 0");
    if (scale < 1) throw std::domain_error("axis_cone_diameter: scale must be >= 1");
    return scale * lens.pixel_diameter * z_alpha / lens.image_dist;
}

double composite_diameter(const LensConfig& lens, double z_alpha, double scale) {
    return axis_cone_diameter(lens, z_alpha, scale) + bicone_diameter(lens, z_alpha);
}

CompositeCone::CompositeCone(const Vec3& sensor_origin_, const Vec3& lens_center_,
                             const Vec3& axis_, double cos_axis_,
                             const LensConfig& lens_, double scale_)
    : sensor_origin(sensor_origin_),
      lens_center(lens_center_),
      axis(axis_),
      cos_axis(cos_axis_),
      lens(lens_),
      scale(scale_) {
    if (std::abs(axis.norm() - 1.0) > 1e-9)
        throw std::invalid_argument("CompositeCone: axis must be unit length");
    if (cos_axis <= 0)
        throw std::invalid_argument("CompositeCone: axis must point into the scene");
}

double CompositeCone::diameter_at(double z_alpha) const {
    double d = axis_cone_diameter(lens, z_alpha, scale);
    if (!defocus_disabled) d += bicone_diameter(lens, z_alpha);
    return d;
}

std::vector<ConicalFrustum> partition_cone(const CompositeCone& cone,
                                           std::span<const double> depths) {
    if (depths.size() < 2)
        throw std::invalid_argument("partition_cone: need at least 2 depths");
    for (size_t i = 0; i < depths.size(); ++i) {
        if (depths[i] <= 0)
            throw std::invalid_argument("partition_cone: depths must be > 0");
        if (i > 0 && depths[i] <= depths[i - 1])
            throw std::invalid_argument("partition_cone: depths must be strictly increasing");
    }
    std::vector<ConicalFrustum> out(depths.size() - 1);
    for (size_t i = 0; i + 1 < depths.size(); ++i) {
        ConicalFrustum& f = out[i];
        f.cone = &cone;
        f.z_near = depths[i];
        f.z_far = depths[i + 1];
        f.t_near = cone.t_of_depth(depths[i]);
        f.t_far = cone.t_of_depth(depths[i + 1]);
    }
    return out;
}

}  // namespace nerfocus
