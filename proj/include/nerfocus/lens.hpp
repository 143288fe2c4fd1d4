#pragma once

#include <span>
#include <vector>

#include "nerfocus/vec.hpp"

namespace nerfocus {

// Thin-lens parameter bundle. All quantities are in scene units; depths are
// measured positive along the optical axis from the lens plane, with the
// sensor on the opposite side.
struct LensConfig {
    double aperture = 0;       // A, diameter of the lens opening
    double focal = 0.1;        // f
    double focus = 1;          // l, depth of the focal plane
    double image_dist = 0;     // l', distance from lens to sensor plane
    double pixel_diameter = 0; // d0, receptive diameter of one pixel

    // Computes l' = f*l/(f+l) from the initial focus distance.
    static LensConfig make(double aperture, double focal, double focus,
                           double pixel_diameter);

    // Moves the focal plane while keeping the sensor (l') fixed, so cone
    // directions and the axis-cone term stay put and only defocus changes.
    LensConfig with_focus(double new_focus) const;
    LensConfig with_aperture(double new_aperture) const;
};

// l' = f*l/(f+l). Throws std::domain_error for non-positive inputs.
double image_distance(double focal, double focus);

// Circle-of-confusion diameter on the sensor for a scene point at depth z_e:
// |A*f*(z_e - l) / (z_e*(f + l))|.
double coc_diameter_scene_point(const LensConfig& lens, double z_e);

// Cross-section diameter of a sensor point's inverse-imaging bicone on the
// plane z = z_alpha: |A*(l - z_alpha)/l|.
double bicone_diameter(const LensConfig& lens, double z_alpha);

// Diameter of the cone of bicone axes: k*d0*z_alpha/l'. For a freshly
// constructed lens this equals k*d0*z_alpha*(f+l)/(f*l).
double axis_cone_diameter(const LensConfig& lens, double z_alpha, double scale);

// Composite-cone diameter d = d_c + d_e on the plane z = z_alpha.
double composite_diameter(const LensConfig& lens, double z_alpha, double scale);

// Per-pixel beam path in world space. The axis runs from the pixel center on
// the sensor plane through the lens center into the scene.
struct CompositeCone {
    Vec3 sensor_origin;  // pixel center on the sensor plane
    Vec3 lens_center;
    Vec3 axis;           // unit direction into the scene
    double cos_axis = 1; // z-component of the camera-space unit axis
    LensConfig lens;
    double scale = 1;    // k, p-training diameter multiplier
    bool defocus_disabled = false;  // test hook: drop the d_e term

    CompositeCone() = default;
    CompositeCone(const Vec3& sensor_origin, const Vec3& lens_center,
                  const Vec3& axis, double cos_axis, const LensConfig& lens,
                  double scale);

    double diameter_at(double z_alpha) const;
    double t_of_depth(double z_alpha) const { return z_alpha / cos_axis; }
    Vec3 point_at_depth(double z_alpha) const {
        return lens_center + axis * t_of_depth(z_alpha);
    }
};

// Depth slice of a composite cone. Holds a pointer to its cone; the cone must
// outlive the frustum.
struct ConicalFrustum {
    const CompositeCone* cone = nullptr;
    double z_near = 0, z_far = 0;  // depths along the optical axis
    double t_near = 0, t_far = 0;  // distances along the cone axis
};

// Tiles the cone between consecutive depths. Throws std::invalid_argument on
// fewer than two depths or non-increasing depths.
std::vector<ConicalFrustum> partition_cone(const CompositeCone& cone,
                                           std::span<const double> depths);

}  // namespace nerfocus
